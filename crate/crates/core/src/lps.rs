//! Littlewood-Paley-Stein functionals of a diffusion semigroup.
//!
//! The order-`k` g-function of `f` is
//!
//! ```text
//! G f(omega) = ( integral_0^inf || t^k d^k/dt^k T_t f(omega) ||_X^q dt/t )^{1/q}
//! ```
//!
//! computed branchwise: `t^k d^k T_t` acts by `(t lambda)^k e^{t lambda}`
//! on the eigenbasis, so each quadrature node costs one spectral apply.
//! The `dt/t` integral runs in `u = log t` over a truncated window with
//! analytic head/tail bounds entering the error budget (never the values).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::opnorm::{operator_norm_lower_c, AscentOptions};
use crate::quad::{refine_until, QuadRule};
use crate::semigroup::DiffusionSemigroup;
use crate::spaces::{mixed_norm, mixed_norm_matrix, FunctionField, MixedNormConfig};

/// Quadrature window for `integral_0^inf (.) dt/t`, discretized in
/// `u = log t` by composite Gauss-Legendre.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Default panel count of the stored discretization.
const BASE_PANELS: usize = 64;

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(Error::Domain(format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
        }
        let (nodes, weights) = Self::level(t_min, t_max, BASE_PANELS);
        Ok(Self { t_min, t_max, nodes, weights })
    }

    /// Window adapted to the spectrum: `t_min = 1e-6 / rate_max`,
    /// `t_max = 50 / rate_slow` (slowest positive decay; for a chain with
    /// several kernel directions the slowest positive rate still controls
    /// the tail of the nonconstant part).
    pub fn for_semigroup(g: &DiffusionSemigroup) -> Result<Self> {
        let rate_max = g.max_rate();
        let slow = g
            .spectral_gap()
            .or_else(|| g.eigenvalues().iter().map(|l| -l).filter(|r| *r > 1e-12).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r)))))
            .unwrap_or(1.0);
        if rate_max <= 0.0 {
            // zero generator: any window works, the integrand vanishes
            return Self::new(1e-6, 1.0);
        }
        Self::new(1e-6 / rate_max, 50.0 / slow)
    }

    fn level(t_min: f64, t_max: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let rule = QuadRule::legendre(16);
        let (a, b) = (t_min.ln(), t_max.ln());
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * rule.nodes.len());
        let mut weights = Vec::with_capacity(panels * rule.nodes.len());
        for k in 0..panels {
            let lo = a + k as f64 * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push((lo + 0.5 * h * (x + 1.0)).exp());
                weights.push(w * 0.5 * h);
            }
        }
        (nodes, weights)
    }

    /// Discretization refined to `panels` composite panels.
    pub fn level_nodes(&self, panels: usize) -> (Vec<f64>, Vec<f64>) {
        Self::level(self.t_min, self.t_max, panels)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Pointwise amplitude bound `max_i sum_k |v_k(i)| ||c_k||_q` used in the
/// analytic head/tail estimates.
fn spectral_amplitude(g: &DiffusionSemigroup, f: &FunctionField, q: f64, rate_weight: impl Fn(f64) -> f64) -> f64 {
    let coeffs = {
        // c = V^T D f
        let mut m = g.basis().transpose();
        for (j, w) in g.space().weights().iter().enumerate() {
            for k in 0..g.n() {
                m[(k, j)] *= w;
            }
        }
        m * f.values()
    };
    let n = g.n();
    let mut amp = 0.0f64;
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            let mut row_q = 0.0;
            for j in 0..f.d() {
                row_q += coeffs[(k, j)].abs().powf(q);
            }
            acc += g.basis()[(i, k)].abs() * row_q.powf(1.0 / q) * rate_weight(-g.eigenvalues()[k]);
        }
        amp = amp.max(acc);
    }
    amp
}

/// Pointwise g-function values with their `L_p(Omega)` norm and the
/// realized error budget.
#[derive(Debug, Clone)]
pub struct GFunctionResult {
    pub per_point: FunctionField,
    pub lp_norm: f64,
    pub quad_error: f64,
}

/// Order-`k` g-function with time exponent `q_time`, evaluated on the
/// window of `grid` with node doubling until the pointwise relative change
/// is below 1e-8.
pub fn g_function(
    g: &DiffusionSemigroup,
    f: &FunctionField,
    cfg: &MixedNormConfig,
    q_time: f64,
    k: u32,
    grid: &TimeGrid,
) -> Result<GFunctionResult> {
    if k == 0 || k > 40 {
        return Err(Error::Domain("derivative order k must be in 1..=40".into()));
    }
    if q_time < 2.0 {
        return Err(Error::Domain(format!("time exponent must be >= 2, got {q_time}")));
    }
    f.check_shape(g.space(), cfg)?;
    let n = g.n();
    let accumulate = |panels: usize| -> Vec<f64> {
        let (nodes, weights) = grid.level_nodes(panels);
        let mut acc = vec![0.0f64; n];
        for (t, w) in nodes.iter().zip(&weights) {
            let y = g.apply_spectral(f, |l| (t * l).powi(k as i32) * (t * l).exp());
            for i in 0..n {
                let mut row = 0.0;
                for j in 0..f.d() {
                    row += y.values()[(i, j)].abs().powf(cfg.q);
                }
                acc[i] += w * row.powf(q_time / cfg.q);
            }
        }
        acc
    };
    let (acc, delta) = refine_until(
        accumulate,
        |a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
                .fold(0.0, f64::max)
        },
        32,
        1e-8,
        2048,
    )?;

    // analytic window bounds: integrand <= (amp * (r t)^k e^{-r t})^{q_time}
    // with r the slowest rate beyond t_max and the fastest below t_min
    let amp = spectral_amplitude(g, f, cfg.q, |r| if r > 1e-12 { 1.0 } else { 0.0 });
    let slow = g
        .eigenvalues()
        .iter()
        .map(|l| -l)
        .filter(|r| *r > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let (head, tail) = if slow.is_finite() && amp > 0.0 {
        let x0 = q_time * slow * grid.t_max();
        let tail = amp.powf(q_time) * (slow * grid.t_max()).powf(k as f64 * q_time) * (-x0).exp() * 2.0
            / x0.max(1.0);
        let rate_max = g.max_rate();
        let head = amp.powf(q_time) * (rate_max * grid.t_min()).powf(k as f64 * q_time)
            / (k as f64 * q_time);
        (head, tail)
    } else {
        (0.0, 0.0)
    };

    let per_point: Vec<f64> = acc.iter().map(|a| a.powf(1.0 / q_time)).collect();
    let field = FunctionField::scalar(&per_point);
    let out_cfg = MixedNormConfig { p: cfg.p, q: 2.0, d: 1 };
    let lp_norm = mixed_norm(&field, g.space(), &out_cfg)?;
    Ok(GFunctionResult {
        per_point: field,
        lp_norm,
        quad_error: delta + head.powf(1.0 / q_time) + tail.powf(1.0 / q_time),
    })
}

/// Lower bound for the best constant in the g-function inequality:
/// ascent over fields of `||G f||_{L_p} / ||f||_{L_p(l_q^d)}`.
#[derive(Debug, Clone, Copy)]
pub struct LpsRatio {
    pub value: f64,
    pub converged: bool,
}

pub fn lps_ratio(
    g: &DiffusionSemigroup,
    cfg: &MixedNormConfig,
    q_time: f64,
    k: u32,
    restarts: usize,
    seed: u64,
    grid: &TimeGrid,
) -> Result<LpsRatio> {
    if k == 0 || k > 40 {
        return Err(Error::Domain("derivative order k must be in 1..=40".into()));
    }
    if q_time < 2.0 {
        return Err(Error::Domain(format!("time exponent must be >= 2, got {q_time}")));
    }
    let n = g.n();
    let d = cfg.d;
    let (nodes, weights) = grid.level_nodes(BASE_PANELS);
    let ops: Vec<DMatrix<f64>> = nodes
        .iter()
        .map(|t| g.spectral_fn(|l| (t * l).powi(k as i32) * (t * l).exp()))
        .collect();
    let projector = g.mean_projection();
    let ergodic = g.spectral_gap().is_some();

    let objective_and_gradient = |f: &DMatrix<f64>, want_grad: bool| -> (f64, DMatrix<f64>) {
        let mut acc = vec![0.0f64; n];
        let fields: Vec<DMatrix<f64>> = ops.iter().map(|b| b * f).collect();
        for (y, w) in fields.iter().zip(&weights) {
            for i in 0..n {
                let mut row = 0.0;
                for j in 0..d {
                    row += y[(i, j)].abs().powf(cfg.q);
                }
                acc[i] += w * row.powf(q_time / cfg.q);
            }
        }
        let s: Vec<f64> = acc.iter().map(|a| a.powf(1.0 / q_time)).collect();
        let total: f64 = s
            .iter()
            .zip(g.space().weights())
            .map(|(si, mu)| mu * si.powf(cfg.p))
            .sum();
        let value = total.powf(1.0 / cfg.p);
        let mut grad = DMatrix::zeros(n, d);
        if !want_grad || value <= 0.0 {
            return (value, grad);
        }
        let v_factor = total.powf(1.0 / cfg.p - 1.0);
        for ((y, w), b) in fields.iter().zip(&weights).zip(&ops) {
            let mut gy = DMatrix::zeros(n, d);
            let mut any = false;
            for i in 0..n {
                if s[i] <= 1e-300 {
                    continue;
                }
                let mut r = 0.0f64;
                for j in 0..d {
                    r += y[(i, j)].abs().powf(cfg.q);
                }
                let r = r.powf(1.0 / cfg.q);
                if r <= 1e-300 {
                    continue;
                }
                let coeff = v_factor
                    * g.space().weights()[i]
                    * s[i].powf(cfg.p - q_time)
                    * w
                    * r.powf(q_time - 2.0);
                for j in 0..d {
                    let yij = y[(i, j)];
                    if yij != 0.0 {
                        let shape = if cfg.q == 2.0 { 1.0 } else { (yij.abs() / r).powf(cfg.q - 2.0) };
                        gy[(i, j)] = coeff * shape * yij;
                        any = true;
                    }
                }
            }
            if any {
                grad += b.transpose() * gy;
            }
        }
        (value, grad)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<DMatrix<f64>> = Vec::new();
    // slowest nonconstant eigenvector is mean-zero and a natural extremal
    // candidate
    if n > 1 {
        let mut f = DMatrix::zeros(n, d);
        for i in 0..n {
            f[(i, 0)] = g.basis()[(i, 1)];
        }
        starts.push(f);
    }
    while starts.len() < restarts.max(1) {
        starts.push(DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng)));
    }

    let normalize = |f: &mut DMatrix<f64>| -> Result<bool> {
        if ergodic {
            let projected = &projector * f.clone();
            *f -= projected;
        }
        let norm = mixed_norm_matrix(f, g.space(), cfg)?;
        if norm <= 1e-300 {
            return Ok(false);
        }
        *f /= norm;
        Ok(true)
    };

    let mut best = 0.0f64;
    let mut converged = true;
    for mut f in starts {
        if !normalize(&mut f)? {
            continue;
        }
        let (mut value, _) = objective_and_gradient(&f, false);
        let mut eta = 0.25f64;
        let mut stall = 0usize;
        let mut finished = false;
        for _ in 0..300 {
            let (_, grad) = objective_and_gradient(&f, true);
            let mut improved = false;
            while eta > 1e-14 {
                let mut cand = &f + &grad * eta;
                if !normalize(&mut cand)? {
                    eta *= 0.5;
                    continue;
                }
                let (vc, _) = objective_and_gradient(&cand, false);
                if vc > value {
                    let gain = (vc - value) / value.max(1e-300);
                    f = cand;
                    value = vc;
                    eta *= 1.25;
                    improved = true;
                    if gain < 1e-10 {
                        stall += 1;
                    } else {
                        stall = 0;
                    }
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                stall += 1;
            }
            if stall >= 40 || eta <= 1e-14 {
                finished = true;
                break;
            }
        }
        converged &= finished;
        best = best.max(value);
    }
    Ok(LpsRatio { value: best, converged })
}

/// `( integral_0^inf ||(T_t - T_{alpha t}) f||^{q_time} dt/t )^{1/q_time}`
/// with the full mixed norm (outer exponent `q_time`, inner `l_q^d`)
/// inside.
#[derive(Debug, Clone, Copy)]
pub struct HnFunctional {
    pub value: f64,
    pub quad_error: f64,
}

pub fn semigroup_difference_functional(
    g: &DiffusionSemigroup,
    f: &FunctionField,
    cfg: &MixedNormConfig,
    alpha_ratio: f64,
    q_time: f64,
    grid: &TimeGrid,
) -> Result<HnFunctional> {
    if !(alpha_ratio > 1.0) {
        return Err(Error::Domain(format!("time ratio must be > 1, got {alpha_ratio}")));
    }
    if q_time < 1.0 {
        return Err(Error::Domain(format!("time exponent must be >= 1, got {q_time}")));
    }
    let inner_cfg = MixedNormConfig { p: q_time, q: cfg.q, d: cfg.d };
    f.check_shape(g.space(), cfg)?;
    let accumulate = |panels: usize| -> f64 {
        let (nodes, weights) = grid.level_nodes(panels);
        let mut acc = 0.0f64;
        for (t, w) in nodes.iter().zip(&weights) {
            let y = g.apply_spectral(f, |l| (t * l).exp() - (alpha_ratio * t * l).exp());
            let v = mixed_norm(&y, g.space(), &inner_cfg).unwrap_or(f64::NAN);
            acc += w * v.powf(q_time);
        }
        acc
    };
    let (acc, delta) = refine_until(
        accumulate,
        |a, b| (a - b).abs() / (1.0 + b.abs()),
        32,
        1e-9,
        2048,
    )?;
    // window bounds: the difference kills constants, decays like e^{-rt}
    // past t_max and grows linearly in t near 0
    let mass = g.space().total_mass().powf(1.0 / inner_cfg.p);
    let amp = spectral_amplitude(g, f, cfg.q, |r| if r > 1e-12 { 1.0 } else { 0.0 });
    let slow = g
        .eigenvalues()
        .iter()
        .map(|l| -l)
        .filter(|r| *r > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let (head, tail) = if slow.is_finite() && amp > 0.0 {
        let x0 = q_time * slow * grid.t_max();
        let tail = (2.0 * amp * mass).powf(q_time) * (-x0).exp() / x0.max(1.0);
        let amp_rate = spectral_amplitude(g, f, cfg.q, |r| r);
        let head = ((alpha_ratio - 1.0) * grid.t_min() * amp_rate * mass).powf(q_time) / q_time;
        (head, tail)
    } else {
        (0.0, 0.0)
    };
    Ok(HnFunctional {
        value: acc.powf(1.0 / q_time),
        quad_error: delta + head.powf(1.0 / q_time) + tail.powf(1.0 / q_time),
    })
}

/// Reference value `(log alpha)^{1/q} m ||f||` the difference functional
/// is compared against.
pub fn difference_functional_bound(alpha_ratio: f64, q_time: f64, m: f64, f_norm: f64) -> f64 {
    alpha_ratio.ln().powf(1.0 / q_time) * m * f_norm
}

/// Empirical lower bound for the sector analyticity constant
/// `sup { ||T_z|| : |arg z| < beta0 }` over a log-radius x angle grid.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticityScan {
    pub value: f64,
    pub argmax: Complex64,
}

pub fn analyticity_constant(
    g: &DiffusionSemigroup,
    cfg: &MixedNormConfig,
    beta0: f64,
    opts: &AscentOptions,
) -> Result<AnalyticityScan> {
    if !(beta0 > 0.0 && beta0 < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("beta0 must be in (0, pi/2), got {beta0}")));
    }
    let rate_max = g.max_rate().max(1e-3);
    let slow = g.spectral_gap().unwrap_or(rate_max);
    let radii = crate::holo::log_grid(1e-3 / rate_max, 50.0 / slow, 40);
    let mut angles = vec![0.0f64];
    for j in 1..=24 {
        let phi = beta0 * j as f64 / 24.0 * (1.0 - 1e-12);
        angles.push(phi);
        angles.push(-phi);
    }
    let mut best = AnalyticityScan { value: 0.0, argmax: Complex64::new(radii[0], 0.0) };
    for &r in &radii {
        for &phi in &angles {
            let z = Complex64::from_polar(r, phi);
            let v = if cfg.is_l2() {
                g.l2_norm_of_symbol(|l| (z * l).exp())
            } else {
                operator_norm_lower_c(&g.at(z), g.space(), cfg, opts)?.value
            };
            if v > best.value {
                best = AnalyticityScan { value: v, argmax: z };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{cycle_chain, random_reversible_chain, two_point_chain};
    use approx::assert_abs_diff_eq;

    fn l2() -> MixedNormConfig {
        MixedNormConfig::l2(1)
    }

    #[test]
    fn g_function_vanishes_on_constants() {
        let g = cycle_chain(5).unwrap();
        let f = FunctionField::scalar(&[3.0; 5]);
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let r = g_function(&g, &f, &l2(), 2.0, 1, &grid).unwrap();
        assert!(r.lp_norm <= 1e-12, "norm {}", r.lp_norm);
    }

    #[test]
    fn g_function_two_point_eigenvector() {
        // branch rate 2: G f(omega) = |f(omega)| (int (2t e^{-2t})^2 dt/t)^{1/2}
        // = |f(omega)| / 2
        let g = two_point_chain(1.0).unwrap();
        let f = FunctionField::scalar(&[1.0, -1.0]);
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let r = g_function(&g, &f, &l2(), 2.0, 1, &grid).unwrap();
        let tol = r.quad_error.max(1e-8);
        assert_abs_diff_eq!(r.per_point.values()[(0, 0)], 0.5, epsilon = tol);
        assert_abs_diff_eq!(r.per_point.values()[(1, 0)], 0.5, epsilon = tol);
        assert_abs_diff_eq!(r.lp_norm, 0.5, epsilon = tol);
    }

    /// Exact Hilbert-case oracle for the pointwise g-function: expanding in
    /// the eigenbasis, `G f(i)^2 = sum_{k,l} (c_k . c_l) v_k(i) v_l(i)
    /// r_k r_l / (r_k + r_l)^2` over nonconstant branches.
    fn hilbert_per_point_oracle(g: &DiffusionSemigroup, f: &FunctionField) -> Vec<f64> {
        let n = g.n();
        let mut coeffs = g.basis().clone().transpose();
        for (j, w) in g.space().weights().iter().enumerate() {
            for k in 0..n {
                coeffs[(k, j)] *= w;
            }
        }
        let c = coeffs * f.values();
        let rates: Vec<f64> = g.eigenvalues().iter().map(|l| -l).collect();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for k in 0..n {
                    if rates[k] <= 1e-12 {
                        continue;
                    }
                    for l in 0..n {
                        if rates[l] <= 1e-12 {
                            continue;
                        }
                        let dot: f64 = (0..f.d()).map(|j| c[(k, j)] * c[(l, j)]).sum();
                        acc += dot * g.basis()[(i, k)] * g.basis()[(i, l)] * rates[k] * rates[l]
                            / (rates[k] + rates[l]).powi(2);
                    }
                }
                acc.max(0.0).sqrt()
            })
            .collect()
    }

    #[test]
    fn g_function_matches_crossterm_oracle() {
        let g = random_reversible_chain(6, 9).unwrap();
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        for seed in 0..3 {
            let f = FunctionField::random(6, 2, seed);
            let cfg = MixedNormConfig::l2(2);
            let r = g_function(&g, &f, &cfg, 2.0, 1, &grid).unwrap();
            let oracle = hilbert_per_point_oracle(&g, &f);
            for i in 0..6 {
                assert_abs_diff_eq!(
                    r.per_point.values()[(i, 0)],
                    oracle[i],
                    epsilon = 1e-7 + r.quad_error
                );
            }
        }
    }

    #[test]
    fn g_function_is_homogeneous() {
        let g = cycle_chain(6).unwrap();
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let f = FunctionField::random(6, 1, 3);
        let scaled = FunctionField::new(f.values() * -2.5);
        let a = g_function(&g, &f, &l2(), 2.0, 1, &grid).unwrap();
        let b = g_function(&g, &scaled, &l2(), 2.0, 1, &grid).unwrap();
        assert_abs_diff_eq!(b.lp_norm, 2.5 * a.lp_norm, epsilon = 1e-9);
    }

    #[test]
    fn g_function_scaling_covariance() {
        // replacing A by cA leaves the dt/t integral invariant
        let g = cycle_chain(5).unwrap();
        let scaled = DiffusionSemigroup::from_generator(
            g.space().clone(),
            g.generator() * 3.0,
        )
        .unwrap();
        let f = FunctionField::random(5, 1, 4);
        let ga = g_function(&g, &f, &l2(), 2.0, 1, &TimeGrid::for_semigroup(&g).unwrap()).unwrap();
        let gb = g_function(&scaled, &f, &l2(), 2.0, 1, &TimeGrid::for_semigroup(&scaled).unwrap())
            .unwrap();
        let tol = (ga.quad_error + gb.quad_error).max(1e-8);
        assert_abs_diff_eq!(ga.lp_norm, gb.lp_norm, epsilon = tol);
    }

    #[test]
    fn hilbert_identity() {
        // || G_{2,1} f ||_{L_2} = (1/2) || f - mean f ||_{L_2}
        let g = random_reversible_chain(7, 5).unwrap();
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let proj = g.mean_projection();
        for seed in 0..4 {
            let f = FunctionField::random(7, 1, 100 + seed);
            let r = g_function(&g, &f, &l2(), 2.0, 1, &grid).unwrap();
            let centered = FunctionField::new(f.values() - &proj * f.values());
            let want = 0.5 * mixed_norm(&centered, g.space(), &l2()).unwrap();
            assert_abs_diff_eq!(r.lp_norm, want, epsilon = r.quad_error.max(1e-6));
        }
    }

    #[test]
    fn ratio_is_half_in_the_hilbert_case() {
        let g = two_point_chain(1.0).unwrap();
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let r = lps_ratio(&g, &l2(), 2.0, 1, 2, 0, &grid).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-4);

        let g8 = cycle_chain(8).unwrap();
        let grid8 = TimeGrid::for_semigroup(&g8).unwrap();
        let r8 = lps_ratio(&g8, &l2(), 2.0, 1, 2, 0, &grid8).unwrap();
        assert_abs_diff_eq!(r8.value, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn difference_functional_two_point_eigenvector() {
        // rate-2 branch with alpha = 3: the integral is log(16/12), so the
        // functional equals sqrt(log(4/3)) ~ 0.5363600905
        let g = two_point_chain(1.0).unwrap();
        let f = FunctionField::scalar(&[1.0, -1.0]);
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let r = semigroup_difference_functional(&g, &f, &l2(), 3.0, 2.0, &grid).unwrap();
        let want = (4.0f64 / 3.0).ln().sqrt();
        assert_abs_diff_eq!(r.value, want, epsilon = 1e-8 + r.quad_error);
        // and it sits below the cotype-1 reference value sqrt(log 3)
        assert!(r.value <= difference_functional_bound(3.0, 2.0, 1.0, 1.0) + 1e-8);
    }

    #[test]
    fn difference_functional_vanishes_on_constants() {
        let g = cycle_chain(4).unwrap();
        let f = FunctionField::scalar(&[2.0; 4]);
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let r = semigroup_difference_functional(&g, &f, &l2(), 2.0, 2.0, &grid).unwrap();
        assert!(r.value <= 1e-12);
    }

    #[test]
    fn analyticity_constant_is_one_on_l2() {
        // |e^{z lambda}| <= 1 on the right half-plane with equality on the
        // kernel branch
        let g = two_point_chain(1.0).unwrap();
        let scan =
            analyticity_constant(&g, &l2(), std::f64::consts::FRAC_PI_4, &AscentOptions::fast())
                .unwrap();
        assert_abs_diff_eq!(scan.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn disconnected_chain_uses_the_slowest_positive_rate() {
        // two disjoint two-point components: kernel dimension 2, no gap,
        // but the g-function is still finite and matches the oracle
        use crate::spaces::FiniteMeasureSpace;
        use nalgebra::DMatrix;
        let mut a = DMatrix::zeros(4, 4);
        for (i, j) in [(0usize, 1usize), (2, 3)] {
            a[(i, i)] = -1.0;
            a[(i, j)] = 1.0;
            a[(j, j)] = -1.0;
            a[(j, i)] = 1.0;
        }
        let g = DiffusionSemigroup::from_generator(FiniteMeasureSpace::uniform(4), a).unwrap();
        assert!(g.spectral_gap().is_none());
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let f = FunctionField::scalar(&[1.0, -1.0, 2.0, 0.0]);
        let r = g_function(&g, &f, &l2(), 2.0, 1, &grid).unwrap();
        let oracle = hilbert_per_point_oracle(&g, &f);
        for i in 0..4 {
            assert!(
                (r.per_point.values()[(i, 0)] - oracle[i]).abs() <= 1e-7 + r.quad_error,
                "atom {i}: {} vs oracle {}",
                r.per_point.values()[(i, 0)],
                oracle[i]
            );
        }
    }

    #[test]
    fn zero_generator_g_function_vanishes() {
        use crate::spaces::FiniteMeasureSpace;
        let g = DiffusionSemigroup::from_generator(
            FiniteMeasureSpace::uniform(3),
            nalgebra::DMatrix::zeros(3, 3),
        )
        .unwrap();
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        let f = FunctionField::random(3, 2, 0);
        let r = g_function(&g, &f, &MixedNormConfig::l2(2), 2.0, 1, &grid).unwrap();
        assert_eq!(r.lp_norm, 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = two_point_chain(1.0).unwrap();
        let f = FunctionField::scalar(&[1.0, -1.0]);
        let grid = TimeGrid::for_semigroup(&g).unwrap();
        assert!(g_function(&g, &f, &l2(), 1.5, 1, &grid).is_err());
        assert!(g_function(&g, &f, &l2(), 2.0, 0, &grid).is_err());
        assert!(semigroup_difference_functional(&g, &f, &l2(), 1.0, 2.0, &grid).is_err());
        assert!(analyticity_constant(&g, &l2(), 2.0, &AscentOptions::fast()).is_err());
        assert!(TimeGrid::new(0.0, 1.0).is_err());
    }
}
