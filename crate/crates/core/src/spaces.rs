//! Finite measure spaces and mixed-norm function spaces `L_p(Omega; l_q^d)`.
//!
//! Everything here is desk-scale: `Omega` is a finite set of weighted atoms,
//! a function is an `n x d` array (row `i` is the vector value at atom `i`),
//! and the mixed norm is
//!
//! ```text
//! ||f|| = ( sum_i mu_i ||f(omega_i)||_{l_q^d}^p )^{1/p}
//! ```
//!
//! with `p` the outer (measure-space) exponent and `q` the inner
//! (vector-space) exponent. Uniform convexity probes for `l_q^d` live here
//! as well; operator-norm estimation is in [`crate::opnorm`].

use nalgebra::{ComplexField, DMatrix};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A finite set of atoms with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasureSpace {
    weights: Vec<f64>,
}

impl FiniteMeasureSpace {
    /// Builds a space from raw weights. Every weight must be finite and
    /// strictly positive.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("measure space needs at least one atom".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::Domain(format!("weights must be finite and > 0, got {w}")));
        }
        Ok(Self { weights })
    }

    /// The uniform probability measure on `n >= 1` atoms.
    pub fn uniform(n: usize) -> Self {
        let n = n.max(1);
        Self { weights: vec![1.0 / n as f64; n] }
    }

    /// Normalizes raw weights to a probability measure.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        let space = Self::new(weights)?;
        let mass = space.total_mass();
        Self::new(space.weights.iter().map(|w| w / mass).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Exponents of the mixed-norm space `L_p(Omega; l_q^d)`.
///
/// `p` lies in (1, inf) and `q` in [2, inf); the endpoints are excluded by
/// design (the ascent optimizer needs smooth exponents, endpoint operator
/// norms have exact formulas in [`crate::opnorm`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedNormConfig {
    pub p: f64,
    pub q: f64,
    pub d: usize,
}

impl MixedNormConfig {
    pub fn new(p: f64, q: f64, d: usize) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Domain(format!("outer exponent p must be in (1, inf), got {p}")));
        }
        if !(q.is_finite() && q >= 2.0) {
            return Err(Error::Domain(format!("inner exponent q must be in [2, inf), got {q}")));
        }
        if d == 0 {
            return Err(Error::Domain("inner dimension d must be >= 1".into()));
        }
        Ok(Self { p, q, d })
    }

    /// The Hilbert-space configuration `L_2(Omega; l_2^d)`.
    pub fn l2(d: usize) -> Self {
        Self { p: 2.0, q: 2.0, d }
    }

    pub fn is_l2(&self) -> bool {
        self.p == 2.0 && self.q == 2.0
    }
}

/// A function `Omega -> R^d`, stored as an `n x d` array (row = atom).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionField {
    values: DMatrix<f64>,
}

impl FunctionField {
    pub fn new(values: DMatrix<f64>) -> Self {
        Self { values }
    }

    /// Builds a field from a flat, row-major list of `n * d` entries.
    pub fn from_rows(n: usize, d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * d {
            return Err(Error::Shape(format!(
                "expected {} entries for an {n} x {d} field, got {}",
                n * d,
                entries.len()
            )));
        }
        Ok(Self { values: DMatrix::from_row_slice(n, d, entries) })
    }

    /// A scalar (d = 1) field from per-atom values.
    pub fn scalar(values: &[f64]) -> Self {
        Self { values: DMatrix::from_column_slice(values.len(), 1, values) }
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self { values: DMatrix::zeros(n, d) }
    }

    /// Standard-normal entries, deterministic in the seed.
    pub fn random(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { values: DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal)) }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn check_shape(&self, space: &FiniteMeasureSpace, cfg: &MixedNormConfig) -> Result<()> {
        if self.n() != space.len() || self.d() != cfg.d {
            return Err(Error::Shape(format!(
                "field is {} x {}, space/config want {} x {}",
                self.n(),
                self.d(),
                space.len(),
                cfg.d
            )));
        }
        Ok(())
    }
}

/// `l_q` norm of one row of a matrix with real or complex entries.
fn row_inner_norm<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, i: usize, q: f64) -> f64 {
    let d = m.ncols();
    if q == 2.0 {
        let mut s = 0.0;
        for j in 0..d {
            s += m[(i, j)].clone().modulus_squared();
        }
        return s.sqrt();
    }
    // Scale by the largest modulus so the q-th powers stay in range.
    let mut max = 0.0f64;
    for j in 0..d {
        max = max.max(m[(i, j)].clone().modulus());
    }
    if max == 0.0 {
        return 0.0;
    }
    let mut s = 0.0;
    for j in 0..d {
        s += (m[(i, j)].clone().modulus() / max).powf(q);
    }
    max * s.powf(1.0 / q)
}

/// Mixed norm of an `n x d` matrix of real or complex values.
///
/// This is the workhorse shared by [`mixed_norm`] and the complex-valued
/// internals (resolvents, holomorphic extensions).
pub(crate) fn mixed_norm_matrix<T: ComplexField<RealField = f64>>(
    m: &DMatrix<T>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
) -> Result<f64> {
    if m.nrows() != space.len() || m.ncols() != cfg.d {
        return Err(Error::Shape(format!(
            "values are {} x {}, space/config want {} x {}",
            m.nrows(),
            m.ncols(),
            space.len(),
            cfg.d
        )));
    }
    let mut sum = 0.0;
    for (i, w) in space.weights().iter().enumerate() {
        let r = row_inner_norm(m, i, cfg.q);
        if !r.is_finite() {
            return Err(Error::Numeric(format!("non-finite entry in row {i}")));
        }
        sum += w * r.powf(cfg.p);
    }
    Ok(sum.powf(1.0 / cfg.p))
}

/// `( sum_i mu_i ||f(omega_i)||_{l_q^d}^p )^{1/p}`.
pub fn mixed_norm(f: &FunctionField, space: &FiniteMeasureSpace, cfg: &MixedNormConfig) -> Result<f64> {
    mixed_norm_matrix(f.values(), space, cfg)
}

/// Worst observed violation of the power-type-`q` convexity inequality
///
/// ```text
/// ||(x+y)/2||^q + delta ||(x-y)/2||^q <= (||x||^q + ||y||^q) / 2
/// ```
///
/// over sampled pairs. Nonpositive output means no violation was found.
#[derive(Debug, Clone, Copy)]
pub struct ConvexityDeficit {
    /// max over samples of lhs - rhs (violation if > 0)
    pub worst: f64,
    pub samples: usize,
}

fn pair_deficit(x: &DMatrix<f64>, y: &DMatrix<f64>, space: &FiniteMeasureSpace, cfg: &MixedNormConfig, delta: f64) -> f64 {
    let q = cfg.q;
    let mid = (x + y) * 0.5;
    let dif = (x - y) * 0.5;
    let nm = mixed_norm_matrix(&mid, space, cfg).unwrap_or(f64::NAN);
    let nd = mixed_norm_matrix(&dif, space, cfg).unwrap_or(f64::NAN);
    let nx = mixed_norm_matrix(x, space, cfg).unwrap_or(f64::NAN);
    let ny = mixed_norm_matrix(y, space, cfg).unwrap_or(f64::NAN);
    nm.powf(q) + delta * nd.powf(q) - 0.5 * (nx.powf(q) + ny.powf(q))
}

/// Samples pairs in `l_q^d` and in `L_q(Omega; l_q^d)` and reports the worst
/// convexity deficit. Half the samples are Gaussian pairs, half adversarial
/// near-degenerate pairs `(x, -x)` and `(x, (1+h) x)`; violations, if any,
/// show up near aligned configurations.
pub fn uniform_convexity_deficit(
    q: f64,
    delta: f64,
    d: usize,
    sample_count: usize,
    seed: u64,
) -> Result<ConvexityDeficit> {
    if q < 2.0 {
        return Err(Error::Domain(format!("convexity exponent q must be >= 2, got {q}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must be in (0, 1], got {delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut total = 0usize;

    // Pairs in plain l_q^d (a one-atom space) and in L_q over a small
    // random probability space; the latter checks that the inequality
    // survives integration.
    let point = FiniteMeasureSpace::uniform(1);
    let omega_n = 4;
    let mut w: Vec<f64> = (0..omega_n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let mass: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= mass);
    let omega = FiniteMeasureSpace::new(w)?;

    for (space, rows) in [(&point, 1usize), (&omega, omega_n)] {
        let cfg = MixedNormConfig { p: q, q, d };
        let half = sample_count / 2;
        for s in 0..sample_count {
            let x = DMatrix::from_fn(rows, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = if s < half {
                DMatrix::from_fn(rows, d, |_, _| rng.sample::<f64, _>(StandardNormal))
            } else if s % 2 == 0 {
                -x.clone()
            } else {
                let h = 10f64.powi(-((s % 7) as i32) - 1);
                x.clone() * (1.0 + h)
            };
            worst = worst.max(pair_deficit(&x, &y, space, &cfg, delta));
            total += 1;
        }
        // The diagonal pair contributes exactly zero; include it so the
        // reported max is never below the analytic worst case.
        let x = DMatrix::from_fn(rows, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        worst = worst.max(pair_deficit(&x, &x.clone(), space, &cfg, delta));
        total += 1;
    }

    Ok(ConvexityDeficit { worst, samples: total })
}
