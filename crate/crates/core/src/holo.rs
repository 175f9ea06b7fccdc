//! Resolvents and quantitative holomorphy: sector constants, the
//! contour-integral holomorphic extension, and the deficiency quantities
//! `eps = 2 - sup_t ||I - T_t||` and `sup_t ||t T'(t)||`.
//!
//! Norms are taken in a caller-selected `L_p(Omega; l_q^d)`. At
//! `p = q = 2` all operators in sight are normal in the symmetrized basis,
//! so norms are exact spectral maxima; anything else goes through the
//! ascent estimator of [`crate::opnorm`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::opnorm::{
    l2_min_gain, min_gain_c, operator_norm_lower, operator_norm_lower_c, AscentOptions,
};
use crate::quad::{refine_until, QuadRule};
use crate::semigroup::DiffusionSemigroup;
use crate::spaces::MixedNormConfig;

/// Points closer than this to an eigenvalue count as "on the spectrum".
const SPECTRUM_TOL: f64 = 1e-12;

fn distance_to_spectrum(g: &DiffusionSemigroup, lambda: Complex64) -> f64 {
    g.eigenvalues()
        .iter()
        .map(|l| (lambda - Complex64::new(*l, 0.0)).norm())
        .fold(f64::INFINITY, f64::min)
}

/// `R(lambda, A) = (lambda - A)^{-1}` by LU solve, with a residual check.
pub fn resolvent(g: &DiffusionSemigroup, lambda: Complex64) -> Result<DMatrix<Complex64>> {
    if distance_to_spectrum(g, lambda) <= SPECTRUM_TOL {
        return Err(Error::Singular(format!("lambda = {lambda} sits on the spectrum")));
    }
    let n = g.n();
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let a = Complex64::new(-g.generator()[(i, j)], 0.0);
        if i == j {
            lambda + a
        } else {
            a
        }
    });
    let lu = shifted.clone().lu();
    let inv = lu
        .solve(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Singular(format!("lambda - A not invertible at {lambda}")))?;
    let residual = (&shifted * &inv - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .fold(0.0f64, |m, v| m.max(v.norm()));
    let scale = 1.0 + inv.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if residual > 1e-10 * scale {
        return Err(Error::Numeric(format!(
            "resolvent residual {residual:.3e} too large at lambda = {lambda}"
        )));
    }
    Ok(inv)
}

/// Norm of the resolvent at one point, with the exact `L_2` value when it
/// applies (valid for `p = q = 2`, any inner dimension).
#[derive(Debug, Clone, Copy)]
pub struct ResolventSample {
    pub lambda: Complex64,
    /// norm in the selected mixed norm (exact at `p = q = 2`, otherwise the
    /// ascent lower estimate)
    pub norm_bound: f64,
    pub exact_l2: Option<f64>,
}

pub fn resolvent_sample(
    g: &DiffusionSemigroup,
    cfg: &MixedNormConfig,
    lambda: Complex64,
    opts: &AscentOptions,
) -> Result<ResolventSample> {
    let dist = distance_to_spectrum(g, lambda);
    if dist <= SPECTRUM_TOL {
        return Err(Error::Singular(format!("lambda = {lambda} sits on the spectrum")));
    }
    let exact = 1.0 / dist;
    if cfg.is_l2() {
        return Ok(ResolventSample { lambda, norm_bound: exact, exact_l2: Some(exact) });
    }
    let r = resolvent(g, lambda)?;
    let lower = operator_norm_lower_c(&r, g.space(), cfg, opts)?;
    Ok(ResolventSample { lambda, norm_bound: lower.value, exact_l2: None })
}

/// Norm estimate of a real spectral symbol `f(A)` in the selected mixed
/// norm (exact spectral maximum at `p = q = 2`).
fn symbol_norm(
    g: &DiffusionSemigroup,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
    symbol: impl Fn(f64) -> f64,
) -> Result<f64> {
    if cfg.is_l2() {
        return Ok(g.eigenvalues().iter().map(|l| symbol(*l).abs()).fold(0.0, f64::max));
    }
    let m = g.spectral_fn(&symbol);
    Ok(operator_norm_lower(&m, g.space(), cfg, opts)?.value)
}

/// Worst value of `||R(lambda)^n|| (Re lambda)^n` over a grid and all
/// powers `n <= n_max`; for a Markov contraction (M = 1, omega = 0) the
/// generation bound says this never exceeds 1.
#[derive(Debug, Clone, Copy)]
pub struct HilleYosidaReport {
    pub max_value: f64,
    pub worst_lambda: Complex64,
    pub worst_power: usize,
}

pub fn hille_yosida_check(
    g: &DiffusionSemigroup,
    cfg: &MixedNormConfig,
    lambda_grid: &[Complex64],
    n_max: usize,
    opts: &AscentOptions,
) -> Result<HilleYosidaReport> {
    if n_max == 0 {
        return Err(Error::Domain("need n_max >= 1".into()));
    }
    if lambda_grid.is_empty() {
        return Err(Error::Domain("empty lambda grid".into()));
    }
    let mut report = HilleYosidaReport {
        max_value: 0.0,
        worst_lambda: lambda_grid[0],
        worst_power: 1,
    };
    for &lambda in lambda_grid {
        if lambda.re <= 0.0 {
            return Err(Error::Domain(format!("grid point {lambda} not in the right half-plane")));
        }
        if cfg.is_l2() {
            let base = lambda.re / distance_to_spectrum(g, lambda);
            for n in 1..=n_max {
                let v = base.powi(n as i32);
                if v > report.max_value {
                    report = HilleYosidaReport { max_value: v, worst_lambda: lambda, worst_power: n };
                }
            }
        } else {
            let r = resolvent(g, lambda)?;
            let mut power = r.clone();
            for n in 1..=n_max {
                let est = operator_norm_lower_c(&power, g.space(), cfg, opts)?.value;
                let v = est * lambda.re.powi(n as i32);
                if v > report.max_value {
                    report = HilleYosidaReport { max_value: v, worst_lambda: lambda, worst_power: n };
                }
                if n < n_max {
                    power = &power * &r;
                }
            }
        }
    }
    Ok(report)
}

/// Empirical sector constant: `sup |s| ||R(r + is)||` over the grid. A
/// finite grid certifies only a lower bound for the true constant, hence
/// the name.
#[derive(Debug, Clone, Copy)]
pub struct SectorScan {
    pub c_empirical: f64,
    pub argmax: Complex64,
}

pub fn sector_constant(
    g: &DiffusionSemigroup,
    cfg: &MixedNormConfig,
    r_grid: &[f64],
    s_grid: &[f64],
    opts: &AscentOptions,
) -> Result<SectorScan> {
    if r_grid.is_empty() || s_grid.is_empty() {
        return Err(Error::Domain("empty sector grid".into()));
    }
    let mut best = SectorScan { c_empirical: 0.0, argmax: Complex64::new(0.0, 0.0) };
    for &r in r_grid {
        if r <= 0.0 {
            return Err(Error::Domain(format!("sector grid needs r > 0, got {r}")));
        }
        for &s in s_grid {
            if s == 0.0 {
                return Err(Error::Domain("sector grid needs s != 0".into()));
            }
            let lambda = Complex64::new(r, s);
            let sample = resolvent_sample(g, cfg, lambda, opts)?;
            let v = s.abs() * sample.norm_bound;
            if v > best.c_empirical {
                best = SectorScan { c_empirical: v, argmax: lambda };
            }
        }
    }
    Ok(best)
}

/// Quadrature discretization of the integration path: an arc of radius
/// `1/|z|` around the origin joined to two rays at angles
/// `+/-(pi/2 + arctan(q/C))`, truncated at `r_max`.
#[derive(Debug, Clone)]
pub struct Contour {
    pub z: Complex64,
    pub c: f64,
    pub q_param: f64,
    pub r_max: f64,
    /// (node, effective complex weight) pairs; the path integral of `h` is
    /// `sum w h(mu)`
    pub nodes: Vec<(Complex64, Complex64)>,
}

impl Contour {
    /// Builds the discretized path with `panels` composite Gauss-Legendre
    /// panels per segment.
    pub fn build(z: Complex64, c: f64, q_param: f64, r_max: f64, panels: usize) -> Result<Self> {
        if z.norm() == 0.0 {
            return Err(Error::Domain("contour needs z != 0".into()));
        }
        if c < 1.0 || !(q_param > 0.0 && q_param < 1.0) {
            return Err(Error::Domain("need C >= 1 and q in (0, 1)".into()));
        }
        let rho = 1.0 / z.norm();
        if r_max < rho {
            return Err(Error::Domain("ray truncation must reach past the arc".into()));
        }
        let theta = std::f64::consts::FRAC_PI_2 + (q_param / c).atan();
        let rule = QuadRule::legendre(16);
        let mut nodes = Vec::new();

        // arc through the positive real axis, counterclockwise
        let h = 2.0 * theta / panels as f64;
        for k in 0..panels {
            let lo = -theta + k as f64 * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let phi = lo + 0.5 * h * (x + 1.0);
                let mu = Complex64::from_polar(rho, phi);
                let dmu = Complex64::new(0.0, 1.0) * mu;
                nodes.push((mu, dmu * (w * 0.5 * h)));
            }
        }
        // rays in the log radius u = log(r |z|), outgoing at +theta with
        // positive orientation, incoming at -theta with negative
        let u_max = (r_max * z.norm()).ln();
        let hu = u_max / panels as f64;
        for k in 0..panels {
            let lo = k as f64 * hu;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let u = lo + 0.5 * hu * (x + 1.0);
                let r = rho * u.exp();
                let common = w * 0.5 * hu * r;
                let up = Complex64::from_polar(1.0, theta);
                let dn = Complex64::from_polar(1.0, -theta);
                nodes.push((up * r, up * common));
                nodes.push((dn * r, -dn * common));
            }
        }
        Ok(Self { z, c, q_param, r_max, nodes })
    }

    /// Applies the discretized Cauchy integral to the resolvent of `g`.
    fn integrate(&self, g: &DiffusionSemigroup) -> Result<DMatrix<Complex64>> {
        let n = g.n();
        let mut acc = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (mu, w) in &self.nodes {
            let r = resolvent(g, *mu)?;
            let factor = (mu * self.z).exp() * w;
            acc += r * factor;
        }
        Ok(acc / Complex64::new(0.0, 2.0 * std::f64::consts::PI))
    }
}

/// The admissible-sector margin `eps' = sin(arctan(q/C) - |arg z|)`; the
/// ray integrand decays like `e^{-eps' r |z|}`.
fn sector_margin(z: Complex64, c: f64, q_param: f64) -> f64 {
    ((q_param / c).atan() - z.arg().abs()).sin()
}

/// The `q` selected for a target argument: `q = (1 + C u)/(1 + C)` with
/// `u = C tan|arg z|`, which keeps `arctan(q/C)` strictly above `|arg z|`.
pub fn q_for_angle(c: f64, arg_abs: f64) -> Result<f64> {
    let u = c * arg_abs.tan();
    if !(u >= 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "argument {arg_abs:.4} outside the admissible sector for C = {c}"
        )));
    }
    Ok((1.0 + c * u) / (1.0 + c))
}

/// Result of the contour evaluation of `e^{zA}`.
#[derive(Debug, Clone)]
pub struct ContourResult {
    pub matrix: DMatrix<Complex64>,
    /// node-doubling delta plus the analytic truncation bound
    pub achieved: f64,
    pub r_max: f64,
}

/// Evaluates `T(z) = (1/2 pi i) \oint e^{mu z} R(mu, A) dmu` over the
/// arc-plus-rays path, doubling nodes until the change is below `tol/2`.
/// Requires `|arg z| < arctan(q_param / C)` strictly so the ray integrand
/// decays.
pub fn contour_exp(
    g: &DiffusionSemigroup,
    z: Complex64,
    c: f64,
    q_param: f64,
    tol: f64,
) -> Result<ContourResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain("contour needs finite z != 0 (T(0) is the identity)".into()));
    }
    if c < 1.0 || !(q_param > 0.0 && q_param < 1.0) {
        return Err(Error::Domain("need C >= 1 and q in (0, 1)".into()));
    }
    let margin = sector_margin(z, c, q_param);
    if margin <= 0.0 {
        return Err(Error::Domain(format!(
            "arg z = {:.4} outside the open sector arctan(q/C) = {:.4}",
            z.arg(),
            (q_param / c).atan()
        )));
    }
    // truncation mirrors the ray tail estimate: the integrand is bounded by
    // (C~ / r) e^{-eps' r |z|} with C~ the sector resolvent bound
    let c_tilde = (c * c + 1.0).sqrt() / (1.0 - q_param);
    let r_max = (2.0 / z.norm()).max((10.0 * c_tilde / tol).ln() / (margin * z.norm()));
    let truncation = c_tilde / std::f64::consts::PI * (-margin * r_max * z.norm()).exp()
        / (margin * r_max * z.norm());

    let eval = |panels: usize| -> Result<DMatrix<Complex64>> {
        Contour::build(z, c, q_param, r_max, panels)?.integrate(g)
    };
    let mut cached_err: Option<Error> = None;
    let refined = refine_until(
        |panels| match eval(panels) {
            Ok(m) => m,
            Err(e) => {
                cached_err = Some(e);
                DMatrix::from_element(g.n(), g.n(), Complex64::new(f64::NAN, 0.0))
            }
        },
        |a, b| {
            let d = (a - b).norm();
            let scale = b.norm().max(1e-300);
            d / scale
        },
        4,
        tol / 2.0,
        256,
    );
    if let Some(e) = cached_err {
        return Err(e);
    }
    let (matrix, delta) = refined?;
    Ok(ContourResult { matrix, achieved: delta + truncation, r_max })
}

/// Deficiency data: `eps = 2 - sup_t ||I - T_t||` with the maximizing time
/// (`infinity` when the `t -> inf` limit `||I - Pi||` attains the sup).
#[derive(Debug, Clone, Copy)]
pub struct KatoEpsilon {
    pub eps: f64,
    pub argmax_t: f64,
    pub sup_value: f64,
    /// `||I - Pi||` when the chain has a spectral gap
    pub limit_value: Option<f64>,
    /// no spectral gap; the sup used the grid only
    pub disconnected: bool,
}

pub fn kato_epsilon(
    g: &DiffusionSemigroup,
    cfg: &MixedNormConfig,
    t_grid: &[f64],
    opts: &AscentOptions,
) -> Result<KatoEpsilon> {
    if t_grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    let mut sup = 0.0f64;
    let mut argmax_t = t_grid[0];
    for &t in t_grid {
        if t <= 0.0 {
            return Err(Error::Domain(format!("time grid needs t > 0, got {t}")));
        }
        let v = symbol_norm(g, cfg, opts, |l| 1.0 - (t * l).exp())?;
        if v > sup {
            sup = v;
            argmax_t = t;
        }
    }
    let disconnected = g.spectral_gap().is_none();
    let mut limit_value = None;
    if !disconnected {
        let v = symbol_norm(g, cfg, opts, |l| if l.abs() <= 1e-12 { 0.0 } else { 1.0 })?;
        limit_value = Some(v);
        if v >= sup {
            sup = v;
            argmax_t = f64::INFINITY;
        }
    }
    Ok(KatoEpsilon {
        eps: (2.0 - sup).clamp(0.0, 2.0),
        argmax_t,
        sup_value: sup,
        limit_value,
        disconnected,
    })
}

/// Lower-bound criterion `||(zeta I - T) x|| >= ||x|| / K`: returns the
/// empirical smallest admissible `K`, or `None` when the minimum gain is
/// numerically zero (`zeta` in the spectrum; the criterion fails).
#[derive(Debug, Clone, Copy)]
pub struct KatoCriterion {
    pub k: Option<f64>,
    pub min_gain: f64,
}

pub fn kato_criterion_check(
    t_op: &DMatrix<f64>,
    space: &crate::spaces::FiniteMeasureSpace,
    zeta: Complex64,
    cfg: &MixedNormConfig,
    opts: &AscentOptions,
) -> Result<KatoCriterion> {
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("zeta must be unimodular, got |zeta| = {}", zeta.norm())));
    }
    let n = t_op.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let base = Complex64::new(-t_op[(i, j)], 0.0);
        if i == j {
            zeta + base
        } else {
            base
        }
    });
    let gain = if cfg.is_l2() {
        l2_min_gain(&m, space)?
    } else {
        min_gain_c(&m, space, cfg, opts)?.value
    };
    let k = if gain <= 1e-13 { None } else { Some(1.0 / gain) };
    Ok(KatoCriterion { k, min_gain: gain })
}

/// `sup_t ||t T'(t)||` over the grid, then sharpened by a golden-section
/// pass around the best grid point (the log-spaced grid alone is too
/// coarse to pin the peak to 1e-6).
#[derive(Debug, Clone, Copy)]
pub struct SupScan {
    pub value: f64,
    pub argmax_t: f64,
}

pub fn max_t_derivative(
    g: &DiffusionSemigroup,
    cfg: &MixedNormConfig,
    t_grid: &[f64],
    opts: &AscentOptions,
) -> Result<SupScan> {
    if t_grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    let norm_at = |t: f64| symbol_norm(g, cfg, opts, |l| t * l * (t * l).exp());
    let mut best = SupScan { value: 0.0, argmax_t: t_grid[0] };
    let mut best_idx = 0usize;
    for (i, &t) in t_grid.iter().enumerate() {
        if t <= 0.0 {
            return Err(Error::Domain(format!("time grid needs t > 0, got {t}")));
        }
        let v = norm_at(t)?;
        if v > best.value {
            best = SupScan { value: v, argmax_t: t };
            best_idx = i;
        }
    }
    if best.value == 0.0 {
        return Ok(best); // zero generator
    }
    // golden-section refinement in log t on the bracketing interval
    let lo = if best_idx > 0 { t_grid[best_idx - 1] } else { best.argmax_t * 0.5 };
    let hi = if best_idx + 1 < t_grid.len() { t_grid[best_idx + 1] } else { best.argmax_t * 2.0 };
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = norm_at(x1.exp())?;
    let mut f2 = norm_at(x2.exp())?;
    for _ in 0..120 {
        if (b - a).abs() <= 1e-12 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = norm_at(x2.exp())?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = norm_at(x1.exp())?;
        }
    }
    let (vr, tr) = if f1 > f2 { (f1, x1.exp()) } else { (f2, x2.exp()) };
    if vr > best.value {
        best = SupScan { value: vr, argmax_t: tr };
    }
    Ok(best)
}

/// Partial sums of the resolvent expansion
/// `R(lambda) = sum_n (mu - lambda)^n R(mu)^{n+1}`; converges geometrically
/// while `|mu - lambda| ||R(mu)|| < 1`.
pub fn neumann_partial_sums(
    g: &DiffusionSemigroup,
    mu: Complex64,
    lambda: Complex64,
    terms: usize,
) -> Result<Vec<DMatrix<Complex64>>> {
    let r_mu = resolvent(g, mu)?;
    let mut sums = Vec::with_capacity(terms);
    let mut term = r_mu.clone();
    let mut acc = term.clone();
    sums.push(acc.clone());
    for _ in 1..terms {
        term = &term * &r_mu * (mu - lambda);
        acc += &term;
        sums.push(acc.clone());
    }
    Ok(sums)
}

/// Default time grid: 400 log-spaced points on
/// `[1e-4 / lambda_1, 1e2 / lambda_1]` with `lambda_1` the spectral gap
/// (falling back to the largest rate when the chain is disconnected).
pub fn default_t_grid(g: &DiffusionSemigroup) -> Vec<f64> {
    let rate = g.spectral_gap().unwrap_or_else(|| g.max_rate().max(1.0));
    log_grid(1e-4 / rate, 1e2 / rate, 400)
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
