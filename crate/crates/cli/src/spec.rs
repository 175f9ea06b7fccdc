//! Experiment specification: a declarative TOML file naming one chain
//! instance, the mixed norm, tolerances and a task list.
//!
//! Parsing is strict (`deny_unknown_fields` everywhere) so typos surface as
//! spec errors with positions rather than silently running defaults.

use serde::Deserialize;

use holosem::markov::{
    complete_graph_chain, cycle_chain, random_reversible_chain, two_point_chain,
};
use holosem::semigroup::DiffusionSemigroup;
use holosem::spaces::MixedNormConfig;

/// Top-level experiment file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// master seed for every randomized routine
    #[serde(default)]
    pub seed: u64,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub norms: NormsSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grids: GridSpec,
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub kind: ChainKind,
    #[serde(default)]
    pub n: Option<usize>,
    /// jump rate of the two-point chain
    #[serde(default)]
    pub rate: Option<f64>,
    /// seed of the random-reversible builder (independent of the master
    /// seed so the instance is pinned by the spec alone)
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    TwoPoint,
    Cycle,
    CompleteGraph,
    RandomReversible,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSpec {
    pub p: f64,
    pub q: f64,
    pub d: usize,
}

impl Default for NormsSpec {
    fn default() -> Self {
        Self { p: 2.0, q: 2.0, d: 1 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// quadrature target (subordination, fractional averages)
    pub quad: f64,
    /// contour-integral target
    pub contour: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quad: 1e-8, contour: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// points of the log-spaced time grid for the deficiency scans
    pub time_points: usize,
    /// ascent restarts used by norm estimation away from p = q = 2
    pub restarts: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { time_points: 400, restarts: 4 }
    }
}

/// One task; `kind` selects the experiment, the remaining keys are its
/// parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Markov invariants of the unit-time kernel.
    Validate {},
    /// `||R(lambda)^n|| (Re lambda)^n <= 1` over a half-plane grid.
    HilleYosida {
        #[serde(default = "default_re_grid")]
        re: Vec<f64>,
        #[serde(default = "default_im_max")]
        im_max: f64,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
    /// Empirical sector constant `sup |s| ||R(r+is)||`.
    SectorScan {},
    /// Contour exponential against the spectral semigroup at given points.
    ContourCheck {
        #[serde(default = "default_contour_points")]
        z: Vec<[f64; 2]>,
        #[serde(default = "default_sector_c")]
        c: f64,
    },
    /// Deficiency `eps`, derivative sup, and the closed-form comparisons.
    Kato {},
    /// Dilation factorization of the unit-time kernel squared.
    Rota {},
    /// Subordinated semigroup vs its spectral square root.
    Subordination {
        #[serde(default = "default_subordination_times")]
        t: Vec<f64>,
    },
    /// Pointwise g-function of a seeded random field.
    GFunction {
        #[serde(default = "default_order")]
        k: u32,
        #[serde(default)]
        q_time: Option<f64>,
    },
    /// Ascent lower bound for the g-function inequality constant.
    LpsRatio {
        #[serde(default = "default_order")]
        k: u32,
        #[serde(default)]
        q_time: Option<f64>,
    },
    /// Difference functional against its cotype reference value.
    HnDifference {
        #[serde(default = "default_alpha_ratio")]
        alpha: f64,
        #[serde(default = "default_cotype_m")]
        m: f64,
    },
    /// Fractional averages `M^0, M^1, M^{-1}` against their closed forms.
    Fractional {
        #[serde(default = "default_frac_time")]
        t: f64,
    },
    /// Empirical analyticity constant over a sector grid.
    Analyticity {
        #[serde(default = "default_beta0")]
        beta0: f64,
    },
    /// Closed-form constants over a `(q, m)` grid.
    BoundsTable {
        #[serde(default = "default_q_list")]
        q_list: Vec<f64>,
        #[serde(default = "default_m_list")]
        m_list: Vec<f64>,
    },
}

fn default_re_grid() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

fn default_im_max() -> f64 {
    10.0
}

fn default_n_max() -> usize {
    5
}

fn default_contour_points() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0], [2.0, 0.0], [1.0, 0.1]]
}

fn default_sector_c() -> f64 {
    1.0
}

fn default_subordination_times() -> Vec<f64> {
    vec![0.01, 1.0, 100.0]
}

fn default_order() -> u32 {
    1
}

fn default_alpha_ratio() -> f64 {
    3.0
}

fn default_cotype_m() -> f64 {
    1.0
}

fn default_frac_time() -> f64 {
    1.0
}

fn default_beta0() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn default_q_list() -> Vec<f64> {
    vec![2.0, 3.0]
}

fn default_m_list() -> Vec<f64> {
    vec![1.0, 2.0]
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Validate {} => "validate",
            TaskSpec::HilleYosida { .. } => "hille-yosida",
            TaskSpec::SectorScan {} => "sector-scan",
            TaskSpec::ContourCheck { .. } => "contour-check",
            TaskSpec::Kato {} => "kato",
            TaskSpec::Rota {} => "rota",
            TaskSpec::Subordination { .. } => "subordination",
            TaskSpec::GFunction { .. } => "g-function",
            TaskSpec::LpsRatio { .. } => "lps-ratio",
            TaskSpec::HnDifference { .. } => "hn-difference",
            TaskSpec::Fractional { .. } => "fractional",
            TaskSpec::Analyticity { .. } => "analyticity",
            TaskSpec::BoundsTable { .. } => "bounds-table",
        }
    }
}

/// Names of every task the runner knows, for `--list-tasks`.
pub const TASK_NAMES: [&str; 13] = [
    "validate",
    "hille-yosida",
    "sector-scan",
    "contour-check",
    "kato",
    "rota",
    "subordination",
    "g-function",
    "lps-ratio",
    "hn-difference",
    "fractional",
    "analyticity",
    "bounds-table",
];

impl ExperimentSpec {
    /// Parses and validates a spec from TOML text. Parse errors carry the
    /// offending line/column in their display form.
    pub fn parse(text: &str) -> Result<Self, String> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| e.to_string())?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), String> {
        MixedNormConfig::new(self.norms.p, self.norms.q, self.norms.d)
            .map_err(|e| format!("norms: {e}"))?;
        if self.tasks.is_empty() {
            return Err("task list is empty".into());
        }
        if !(self.tolerances.quad > 0.0 && self.tolerances.contour > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if self.grids.time_points < 2 || self.grids.restarts == 0 {
            return Err("grids need time_points >= 2 and restarts >= 1".into());
        }
        match self.instance.kind {
            ChainKind::TwoPoint => {
                if let Some(r) = self.instance.rate {
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(format!("two-point rate must be > 0, got {r}"));
                    }
                }
            }
            ChainKind::Cycle | ChainKind::CompleteGraph | ChainKind::RandomReversible => {
                let n = self.instance.n.ok_or("instance needs n")?;
                if !(2..=64).contains(&n) {
                    return Err(format!("instance size n must be in 2..=64, got {n}"));
                }
            }
        }
        for task in &self.tasks {
            self.validate_task(task)?;
        }
        Ok(())
    }

    fn validate_task(&self, task: &TaskSpec) -> Result<(), String> {
        match task {
            TaskSpec::HilleYosida { re, im_max, n_max } => {
                if re.is_empty() || re.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err("hille-yosida needs a nonempty grid of positive real parts".into());
                }
                if !im_max.is_finite() {
                    return Err("hille-yosida needs a finite im_max".into());
                }
                if *n_max == 0 || *n_max > 12 {
                    return Err("hille-yosida needs n_max in 1..=12".into());
                }
            }
            TaskSpec::ContourCheck { z, c } => {
                if !(c.is_finite() && *c >= 1.0) {
                    return Err("contour-check needs finite C >= 1".into());
                }
                for p in z {
                    let zc = num_complex::Complex64::new(p[0], p[1]);
                    if zc.norm() == 0.0 {
                        return Err("contour-check points must be nonzero".into());
                    }
                    holosem::holo::q_for_angle(*c, zc.arg().abs())
                        .map_err(|e| format!("contour-check point {p:?}: {e}"))?;
                }
            }
            TaskSpec::Subordination { t } => {
                if t.is_empty() || t.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                    return Err("subordination needs positive times".into());
                }
            }
            TaskSpec::GFunction { k, q_time } | TaskSpec::LpsRatio { k, q_time } => {
                if *k == 0 || *k > 40 {
                    return Err("derivative order k must be in 1..=40".into());
                }
                if let Some(q) = q_time {
                    if !(q.is_finite() && *q >= 2.0) {
                        return Err(format!("time exponent must be >= 2, got {q}"));
                    }
                }
            }
            TaskSpec::HnDifference { alpha, m } => {
                if !(alpha.is_finite() && *alpha > 1.0) {
                    return Err(format!("hn-difference needs alpha > 1, got {alpha}"));
                }
                if !(m.is_finite() && *m >= 1.0) {
                    return Err(format!("hn-difference needs m >= 1, got {m}"));
                }
            }
            TaskSpec::Fractional { t } => {
                if !(t.is_finite() && *t > 0.0) {
                    return Err(format!("fractional needs t > 0, got {t}"));
                }
            }
            TaskSpec::Analyticity { beta0 } => {
                if !(*beta0 > 0.0 && *beta0 < std::f64::consts::FRAC_PI_2) {
                    return Err(format!("analyticity needs beta0 in (0, pi/2), got {beta0}"));
                }
            }
            TaskSpec::BoundsTable { q_list, m_list } => {
                if q_list.iter().any(|q| !(q.is_finite() && *q >= 2.0))
                    || m_list.iter().any(|m| !(m.is_finite() && *m >= 1.0))
                {
                    return Err("bounds-table needs finite q >= 2 and m >= 1".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Builds the chain instance.
    pub fn build_instance(&self) -> Result<DiffusionSemigroup, String> {
        let build = || -> holosem::Result<DiffusionSemigroup> {
            match self.instance.kind {
                ChainKind::TwoPoint => two_point_chain(self.instance.rate.unwrap_or(1.0)),
                ChainKind::Cycle => cycle_chain(self.instance.n.unwrap_or(2)),
                ChainKind::CompleteGraph => complete_graph_chain(self.instance.n.unwrap_or(2)),
                ChainKind::RandomReversible => {
                    random_reversible_chain(self.instance.n.unwrap_or(2), self.instance.seed.unwrap_or(0))
                }
            }
        };
        build().map_err(|e| format!("instance: {e}"))
    }

    pub fn instance_label(&self) -> String {
        match self.instance.kind {
            ChainKind::TwoPoint => format!("two-point(rate={})", self.instance.rate.unwrap_or(1.0)),
            ChainKind::Cycle => format!("cycle(n={})", self.instance.n.unwrap_or(2)),
            ChainKind::CompleteGraph => format!("complete-graph(n={})", self.instance.n.unwrap_or(2)),
            ChainKind::RandomReversible => format!(
                "random-reversible(n={}, seed={})",
                self.instance.n.unwrap_or(2),
                self.instance.seed.unwrap_or(0)
            ),
        }
    }

    pub fn norm_config(&self) -> MixedNormConfig {
        MixedNormConfig::new(self.norms.p, self.norms.q, self.norms.d)
            .expect("validated at parse time")
    }
}
