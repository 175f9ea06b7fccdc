//! Operator-norm estimation on `L_p(Omega; l_q^d)`.
//!
//! Exact mixed-norm operator norms are intractable outside the endpoints,
//! so this module produces a certified sandwich:
//!
//! * a lower bound from a dual-map fixed-point ascent on the unit sphere
//!   (the nonlinear power method: alternate `f -> Tf`, take the dual
//!   element of the image norm, pull back through `T^H`, and jump to the
//!   exact maximizer of the resulting linear functional; each step is
//!   monotone). Every iterate is a concrete field, so the reported value
//!   is always attained and can only under-estimate;
//! * an upper bound from interpolation between the exact endpoint norms
//!   `||T||_{L_1(mu)}` and `||T||_{L_inf}`.
//!
//! For `p = q = 2` the norm is exact: it is the largest singular value of
//! the similarity `D^{1/2} T D^{-1/2}`, `D = diag(mu)`, for any inner
//! dimension `d`. That singular decomposition also seeds the ascent for the
//! other exponents, which makes restart 0 deterministic and usually very
//! close to optimal already.
//!
//! Operators act diagonally on the inner `l_q^d` components throughout
//! (`(Tf)(omega_i) = sum_j T_ij f(omega_j)` in `R^d` or `C^d`).

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spaces::{mixed_norm_matrix, FiniteMeasureSpace, MixedNormConfig};

/// Scalars the ascent engine runs over (real and complex fields).
pub trait AscentScalar: ComplexField<RealField = f64> + Copy {
    fn sample(rng: &mut ChaCha8Rng) -> Self;
    /// Singular values of `b` paired with right singular vectors.
    fn svd_pairs(b: &DMatrix<Self>) -> Vec<(f64, DVector<Self>)>;
}

impl AscentScalar for f64 {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        StandardNormal.sample(rng)
    }

    fn svd_pairs(b: &DMatrix<Self>) -> Vec<(f64, DVector<Self>)> {
        let svd = b.clone().svd(false, true);
        let vt = svd.v_t.expect("svd with v_t requested");
        (0..svd.singular_values.len())
            .map(|k| (svd.singular_values[k], vt.row(k).transpose()))
            .collect()
    }
}

impl AscentScalar for Complex64 {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    // The complex SVD goes through the real 2n x 2n embedding
    // [[Re, -Im], [Im, Re]], whose singular values are those of the complex
    // matrix (each doubled) and whose right singular vectors embed the
    // complex ones.
    fn svd_pairs(b: &DMatrix<Self>) -> Vec<(f64, DVector<Self>)> {
        let n = b.nrows();
        let emb = DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => b[(i, j)].re,
            (true, false) => -b[(i, j - n)].im,
            (false, true) => b[(i - n, j)].im,
            (false, false) => b[(i - n, j - n)].re,
        });
        let svd = emb.svd(false, true);
        let vt = svd.v_t.expect("svd with v_t requested");
        (0..svd.singular_values.len())
            .map(|k| {
                let row = vt.row(k);
                let v = DVector::from_fn(n, |j, _| Complex64::new(row[j], row[n + j]));
                (svd.singular_values[k], v)
            })
            .collect()
    }
}

/// Knobs of the sphere-ascent optimizer. All randomness comes from `seed`.
#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    /// independent starts; restart 0 is the deterministic spectral start
    pub restarts: usize,
    pub seed: u64,
    /// relative gain below which an iteration counts as stalled
    pub rel_tol: f64,
    /// consecutive stalled iterations before stopping
    pub stall_iters: usize,
    pub max_iters: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { restarts: 32, seed: 0, rel_tol: 1e-9, stall_iters: 50, max_iters: 4000 }
    }
}

impl AscentOptions {
    /// Cheaper settings for dense grid scans.
    pub fn fast() -> Self {
        Self { restarts: 4, max_iters: 1200, ..Self::default() }
    }
}

/// Outcome of a restart batch: the best certified value and whether every
/// restart terminated by stagnation rather than the iteration cap.
#[derive(Debug, Clone, Copy)]
pub struct NormLowerBound {
    pub value: f64,
    pub converged: bool,
}

fn check_operator<T: AscentScalar>(
    m: &DMatrix<T>,
    space: &FiniteMeasureSpace,
) -> Result<()> {
    if m.nrows() != space.len() || m.ncols() != space.len() {
        return Err(Error::Shape(format!(
            "operator is {} x {}, space has {} atoms",
            m.nrows(),
            m.ncols(),
            space.len()
        )));
    }
    if m.iter().any(|v| !v.clone().modulus().is_finite()) {
        return Err(Error::Numeric("operator has non-finite entries".into()));
    }
    Ok(())
}

/// `D^{1/2} M D^{-1/2}`.
fn symmetrized<T: AscentScalar>(m: &DMatrix<T>, space: &FiniteMeasureSpace) -> DMatrix<T> {
    let w = space.weights();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        m[(i, j)] * T::from_real((w[i] / w[j]).sqrt())
    })
}

/// Exact `L_2(mu)` operator norm (largest singular value of the
/// symmetrization); valid for every matrix and any inner dimension.
pub fn l2_operator_norm<T: AscentScalar>(m: &DMatrix<T>, space: &FiniteMeasureSpace) -> Result<f64> {
    check_operator(m, space)?;
    let pairs = T::svd_pairs(&symmetrized(m, space));
    Ok(pairs.iter().map(|p| p.0).fold(0.0, f64::max))
}

/// Exact `L_2(mu)` lower gain `min ||Mf|| / ||f||` (smallest singular value
/// of the symmetrization).
pub fn l2_min_gain<T: AscentScalar>(m: &DMatrix<T>, space: &FiniteMeasureSpace) -> Result<f64> {
    check_operator(m, space)?;
    let pairs = T::svd_pairs(&symmetrized(m, space));
    Ok(pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min))
}

/// Mixed norm together with its Euclidean-pairing gradient.
///
/// Writing `S = sum_i mu_i n_i^p` with `n_i` the row `l_q` norm, the
/// gradient entry is `mu_i S^{1/p-1} n_i^{p-2} (|y_ij|/n_i)^{q-2} y_ij`
/// (zero rows contribute zero; `p > 1` makes that the correct limit).
fn norm_and_gradient<T: AscentScalar>(
    y: &DMatrix<T>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
) -> (f64, DMatrix<T>) {
    let (n, d) = (y.nrows(), y.ncols());
    let mu = space.weights();
    let mut row_norms = vec![0.0f64; n];
    let mut s = 0.0f64;
    for i in 0..n {
        let mut acc = 0.0f64;
        if cfg.q == 2.0 {
            for j in 0..d {
                acc += y[(i, j)].modulus_squared();
            }
            row_norms[i] = acc.sqrt();
        } else {
            let mut max = 0.0f64;
            for j in 0..d {
                max = max.max(y[(i, j)].modulus());
            }
            if max > 0.0 {
                let mut t = 0.0;
                for j in 0..d {
                    t += (y[(i, j)].modulus() / max).powf(cfg.q);
                }
                row_norms[i] = max * t.powf(1.0 / cfg.q);
            }
        }
        s += mu[i] * row_norms[i].powf(cfg.p);
    }
    let value = s.powf(1.0 / cfg.p);
    let mut grad = DMatrix::from_element(n, d, T::from_real(0.0));
    if value == 0.0 {
        return (0.0, grad);
    }
    let s_factor = s.powf(1.0 / cfg.p - 1.0);
    for i in 0..n {
        let ni = row_norms[i];
        if ni <= 0.0 {
            continue;
        }
        let coeff = mu[i] * s_factor * ni.powf(cfg.p - 2.0);
        for j in 0..d {
            let m = y[(i, j)].modulus();
            if m == 0.0 {
                continue;
            }
            let shape = if cfg.q == 2.0 { 1.0 } else { (m / ni).powf(cfg.q - 2.0) };
            grad[(i, j)] = y[(i, j)] * T::from_real(coeff * shape);
        }
    }
    (value, grad)
}

#[derive(Clone, Copy, PartialEq)]
enum Goal {
    Maximize,
    Minimize,
}

/// Maximizer of `Re <f, H>` over the unit sphere of `L_p(mu; l_q^d)`
/// (double Hoelder equality case): within a row the entries align with
/// `|H_ij|^{q'-1} phase(H_ij)`, across rows the magnitudes follow
/// `(||H_i||_{q'} / mu_i)^{1/(p-1)}`.
fn dual_argmax<T: AscentScalar>(
    h: &DMatrix<T>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
) -> Option<DMatrix<T>> {
    let (n, d) = (h.nrows(), h.ncols());
    let mu = space.weights();
    let q_dual = cfg.q / (cfg.q - 1.0);
    let mut dual_norms = vec![0.0f64; n];
    for i in 0..n {
        let mut max = 0.0f64;
        for j in 0..d {
            max = max.max(h[(i, j)].modulus());
        }
        if max > 0.0 {
            let mut acc = 0.0;
            for j in 0..d {
                acc += (h[(i, j)].modulus() / max).powf(q_dual);
            }
            dual_norms[i] = max * acc.powf(1.0 / q_dual);
        }
    }
    let scale = dual_norms.iter().fold(0.0f64, |m, a| m.max(*a));
    if scale == 0.0 {
        return None;
    }
    let mut f = DMatrix::from_element(n, d, T::from_real(0.0));
    for i in 0..n {
        let a = dual_norms[i];
        if a == 0.0 {
            continue;
        }
        let r = (a / (scale * mu[i])).powf(1.0 / (cfg.p - 1.0));
        // unit l_q maximizer against row i: |H|^{q'-1} aligned, q-norm a^{q'/q}
        let row_scale = r / a.powf(q_dual / cfg.q);
        for j in 0..d {
            let m = h[(i, j)].modulus();
            if m > 0.0 {
                let magnitude = m.powf(q_dual - 1.0) * row_scale;
                f[(i, j)] = h[(i, j)] * T::from_real(magnitude / m);
            }
        }
    }
    let nf = mixed_norm_matrix(&f, space, cfg).ok()?;
    if nf == 0.0 || !nf.is_finite() {
        return None;
    }
    Some(f / T::from_real(nf))
}

/// One run from a given start; returns the best objective value reached
/// and whether it terminated by stagnation.
///
/// Maximization is the dual-map fixed-point iteration (monotone: the new
/// iterate maximizes the linearization, whose value at the old iterate is
/// the old objective). Minimization keeps projected gradient descent with
/// step halving.
fn run_from_start<T: AscentScalar>(
    m: &DMatrix<T>,
    adjoint: &DMatrix<T>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
    goal: Goal,
    mut f: DMatrix<T>,
) -> (f64, bool) {
    let norm_f = |x: &DMatrix<T>| mixed_norm_matrix(x, space, cfg).unwrap_or(0.0);
    let nf = norm_f(&f);
    if nf == 0.0 {
        return (if goal == Goal::Maximize { 0.0 } else { f64::INFINITY }, false);
    }
    f /= T::from_real(nf);
    let mut value = norm_f(&(m * &f));
    let mut stall = 0usize;

    if goal == Goal::Maximize {
        for _ in 0..opts.max_iters {
            let y = m * &f;
            let (_, g_dual) = norm_and_gradient(&y, space, cfg);
            let h = adjoint * g_dual;
            let Some(next) = dual_argmax(&h, space, cfg) else {
                return (value, true);
            };
            let v_next = norm_f(&(m * &next));
            if v_next > value {
                let gain = (v_next - value) / value.max(1e-300);
                f = next;
                value = v_next;
                if gain < opts.rel_tol {
                    stall += 1;
                } else {
                    stall = 0;
                }
            } else {
                stall += 1;
            }
            if stall >= opts.stall_iters {
                return (value, true);
            }
        }
        return (value, false);
    }

    let mut eta = 0.25f64;
    for _ in 0..opts.max_iters {
        if value <= 1e-14 {
            return (value, true); // pinned at (numerical) zero
        }
        let y = m * &f;
        let (_, gy) = norm_and_gradient(&y, space, cfg);
        let dir = -(adjoint * gy);
        let mut improved = false;
        while eta > 1e-16 {
            let mut cand = &f + &dir * T::from_real(eta);
            let nc = norm_f(&cand);
            if nc > 0.0 {
                cand /= T::from_real(nc);
                let vc = norm_f(&(m * &cand));
                if vc < value {
                    let gain = (value - vc) / value.abs().max(1e-300);
                    f = cand;
                    value = vc;
                    eta *= 1.25;
                    improved = true;
                    if gain < opts.rel_tol {
                        stall += 1;
                    } else {
                        stall = 0;
                    }
                    break;
                }
            }
            eta *= 0.5;
        }
        if !improved {
            stall += 1;
        }
        if stall >= opts.stall_iters || eta <= 1e-16 {
            return (value, true);
        }
    }
    (value, false)
}

fn starts<T: AscentScalar>(
    m: &DMatrix<T>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
    goal: Goal,
) -> Vec<DMatrix<T>> {
    let n = space.len();
    let restarts = opts.restarts.max(1);
    let mut out = Vec::with_capacity(restarts);
    // restart 0: extremal right singular vector of the symmetrization,
    // un-symmetrized and placed in the first component
    let pairs = T::svd_pairs(&symmetrized(m, space));
    let pick = match goal {
        Goal::Maximize => pairs
            .iter()
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap()),
        Goal::Minimize => pairs
            .iter()
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap()),
    };
    if let Some((_, v)) = pick {
        let mut f = DMatrix::from_element(n, cfg.d, T::from_real(0.0));
        for i in 0..n {
            f[(i, 0)] = v[i] * T::from_real(1.0 / space.weights()[i].sqrt());
        }
        out.push(f);
    }
    // remaining restarts: best of a cheap random probe pool, so the ascent
    // starts from several distinct basins instead of raw noise
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pool = 32 * restarts;
    let mut scored: Vec<(f64, DMatrix<T>)> = Vec::with_capacity(pool);
    for _ in 0..pool {
        let f = DMatrix::from_fn(n, cfg.d, |_, _| T::sample(&mut rng));
        let nf = mixed_norm_matrix(&f, space, cfg).unwrap_or(0.0);
        if nf == 0.0 {
            continue;
        }
        let value = mixed_norm_matrix(&(m * &f), space, cfg).unwrap_or(f64::NAN) / nf;
        if value.is_finite() {
            scored.push((value, f));
        }
    }
    match goal {
        Goal::Maximize => scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap()),
        Goal::Minimize => scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap()),
    }
    out.extend(scored.into_iter().take(restarts - out.len().min(restarts)).map(|s| s.1));
    out
}

fn run_batch<T: AscentScalar>(
    m: &DMatrix<T>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
    goal: Goal,
) -> Result<NormLowerBound> {
    check_operator(m, space)?;
    let adjoint = m.adjoint();
    let mut best = match goal {
        Goal::Maximize => 0.0f64,
        Goal::Minimize => f64::INFINITY,
    };
    let mut converged = true;
    for f0 in starts(m, space, cfg, opts, goal) {
        let (v, ok) = run_from_start(m, &adjoint, space, cfg, opts, goal, f0);
        converged &= ok;
        best = match goal {
            Goal::Maximize => best.max(v),
            Goal::Minimize => best.min(v),
        };
    }
    Ok(NormLowerBound { value: best, converged })
}

/// Certified lower bound on the `L_p(Omega; l_q^d)` operator norm: the best
/// Rayleigh-type quotient `||Tf|| / ||f||` found over ascent restarts.
/// Deterministic in `opts.seed`.
pub fn operator_norm_lower(
    m: &DMatrix<f64>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
) -> Result<NormLowerBound> {
    run_batch(m, space, cfg, opts, Goal::Maximize)
}

/// Complex-operator version of [`operator_norm_lower`] (complex fields).
pub fn operator_norm_lower_c(
    m: &DMatrix<Complex64>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
) -> Result<NormLowerBound> {
    run_batch(m, space, cfg, opts, Goal::Maximize)
}

/// Empirical `min ||Mf|| / ||f||` (descent with restarts); an upper bound
/// on the true minimum gain.
pub fn min_gain_c(
    m: &DMatrix<Complex64>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
) -> Result<NormLowerBound> {
    run_batch(m, space, cfg, opts, Goal::Minimize)
}

fn endpoint_norms<T: AscentScalar>(m: &DMatrix<T>, space: &FiniteMeasureSpace) -> (f64, f64) {
    let n = m.nrows();
    let mu = space.weights();
    let linf = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].modulus()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let l1 = (0..n)
        .map(|j| (0..n).map(|i| mu[i] * m[(i, j)].modulus()).sum::<f64>() / mu[j])
        .fold(0.0f64, f64::max);
    (l1, linf)
}

/// Upper bound `||T||_{L_1}^{1/p} ||T||_{L_inf}^{1-1/p}` from interpolation
/// between the exact endpoint norms; `p` may be `1` or `inf`.
pub fn operator_norm_upper<T: AscentScalar>(
    m: &DMatrix<T>,
    space: &FiniteMeasureSpace,
    p: f64,
) -> Result<f64> {
    check_operator(m, space)?;
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("interpolation exponent must be >= 1, got {p}")));
    }
    let (l1, linf) = endpoint_norms(m, space);
    if p == 1.0 {
        return Ok(l1);
    }
    if p.is_infinite() {
        return Ok(linf);
    }
    Ok(l1.powf(1.0 / p) * linf.powf(1.0 - 1.0 / p))
}

/// Lower/upper sandwich with the exact fast path at `p = q = 2`.
#[derive(Debug, Clone, Copy)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    /// both bounds coincide (spectral `L_2` norm)
    pub exact: bool,
    pub converged: bool,
}

impl NormEstimate {
    pub fn best(&self) -> f64 {
        self.lower
    }
}

/// Sandwich estimate of the `L_p(Omega; l_q^d)` norm of a real operator.
pub fn operator_norm_estimate(
    m: &DMatrix<f64>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
) -> Result<NormEstimate> {
    if cfg.is_l2() {
        let v = l2_operator_norm(m, space)?;
        return Ok(NormEstimate { lower: v, upper: v, exact: true, converged: true });
    }
    let lower = operator_norm_lower(m, space, cfg, opts)?;
    let upper = operator_norm_upper(m, space, cfg.p)?;
    Ok(NormEstimate { lower: lower.value, upper, exact: false, converged: lower.converged })
}

/// Complex version of [`operator_norm_estimate`].
pub fn operator_norm_estimate_c(
    m: &DMatrix<Complex64>,
    space: &FiniteMeasureSpace,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
) -> Result<NormEstimate> {
    if cfg.is_l2() {
        let v = l2_operator_norm(m, space)?;
        return Ok(NormEstimate { lower: v, upper: v, exact: true, converged: true });
    }
    let lower = operator_norm_lower_c(m, space, cfg, opts)?;
    let upper = operator_norm_upper(m, space, cfg.p)?;
    Ok(NormEstimate { lower: lower.value, upper, exact: false, converged: lower.converged })
}
