//! Fractional integrals `I^alpha` and fractional averages `M^alpha_t` of a
//! diffusion semigroup, with analytic continuation to `Re alpha <= 0`.
//!
//! With `phi(s) = T_s f` the average is `M^alpha_t f = t^{-alpha} I^alpha
//! phi(t)`. On an eigenvalue branch with decay rate `r` everything reduces
//! to a scalar shape function of `x = r t`:
//!
//! ```text
//! E_alpha(x) = (1/Gamma(alpha)) integral_0^1 (1-s)^{alpha-1} e^{-x s} ds
//! ```
//!
//! so `M^alpha_t` acts branchwise by `E_alpha(r t)`. `Re alpha > 0` is
//! evaluated by quadrature with the endpoint singularity absorbed into a
//! Gauss-Jacobi weight (real `alpha`) or the substitution `s = 1 - w^2`
//! (complex `alpha`). For `Re alpha <= 0` the order is raised to
//! `alpha_0 = alpha + ceil(-Re alpha) + 1`, whose real part lies in [1, 2),
//! and lowered back one unit at a time with the derivative recursion
//!
//! ```text
//! t^k d^k M^{alpha-1} = (k + alpha) t^k d^k M^alpha + t^{k+1} d^{k+1} M^alpha,
//! ```
//!
//! whose inputs `t^k d^k M^{alpha_0}` are computed spectrally (an extra
//! `(-s)^k` under the integral sign), never by finite differences. The
//! chosen `alpha_0` keeps `Gamma` away from its poles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{refine_until, QuadRule};
use crate::semigroup::{DiffusionSemigroup, QuadSpec};
use crate::spaces::FunctionField;
use crate::special::gamma;

/// `integral_0^1 (1-s)^{alpha-1} h(s) ds` for `Re alpha > 0`, with the
/// achieved refinement error.
fn weighted_unit_integral(
    alpha: Complex64,
    h: impl Fn(f64) -> Complex64,
    quad: &QuadSpec,
) -> Result<(Complex64, f64)> {
    if alpha.re <= 0.0 {
        return Err(Error::Domain(format!(
            "fractional integral needs Re alpha > 0, got {}",
            alpha.re
        )));
    }
    if alpha.im == 0.0 {
        // endpoint weight (1-s)^{alpha-1} handled by Gauss-Jacobi on [-1,1]
        let scale = 2f64.powf(-alpha.re);
        return refine_until(
            |n| {
                let rule = QuadRule::jacobi(n, alpha.re - 1.0, 0.0).expect("alpha > 0");
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    acc += h((x + 1.0) / 2.0) * *w;
                }
                acc * scale
            },
            |a, b| (a - b).norm(),
            16,
            quad.tol / 2.0,
            512,
        );
    }
    // 1 - s = e^{-v} turns the endpoint factor into the smooth exponential
    // e^{-alpha v} (fixed oscillation frequency Im alpha); truncate where
    // e^{-Re(alpha) v} is negligible
    let rule = QuadRule::legendre(16);
    let v_max = 30f64.max((10.0 / (quad.tol * alpha.re)).ln() / alpha.re);
    refine_until(
        |panels| {
            let h_panel = v_max / panels as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..panels {
                let lo = k as f64 * h_panel;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let v = lo + 0.5 * h_panel * (x + 1.0);
                    let weight = (-alpha * v).exp() * (w * 0.5 * h_panel);
                    acc += weight * h(1.0 - (-v).exp());
                }
            }
            acc
        },
        |a, b| (a - b).norm(),
        8,
        quad.tol / 2.0,
        quad.max_panels,
    )
}

/// Riemann-Liouville integral `I^alpha phi(t)` for `Re alpha > 0`:
/// `t^alpha / Gamma(alpha) * integral_0^1 (1-s)^{alpha-1} phi(t s) ds`.
pub fn fractional_integral(
    alpha: Complex64,
    phi: impl Fn(f64) -> Complex64,
    t: f64,
    quad: &QuadSpec,
) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Domain("fractional integral needs t > 0".into()));
    }
    let (raw, _) = weighted_unit_integral(alpha, |s| phi(t * s), quad)?;
    Ok(Complex64::from(t).powc(alpha) / gamma(alpha) * raw)
}

/// Branch shape values `x^k E^{(k)}_alpha(x)` for `k = 0..=orders`
/// (`Re alpha > 0`); these are the scalars `t^k d_t^k M^alpha_t` on a
/// branch with `x = rate * t`.
fn branch_derivative_stack(
    alpha: Complex64,
    x: f64,
    orders: usize,
    quad: &QuadSpec,
) -> Result<(Vec<Complex64>, f64)> {
    let g = gamma(alpha);
    let mut out = Vec::with_capacity(orders + 1);
    let mut worst = 0.0f64;
    for k in 0..=orders {
        let (raw, err) = weighted_unit_integral(
            alpha,
            |s| Complex64::new((-s).powi(k as i32) * (-x * s).exp(), 0.0),
            quad,
        )?;
        out.push(raw / g * x.powi(k as i32));
        worst = worst.max(err);
    }
    Ok((out, worst))
}

/// `E_alpha(x)` for any complex `alpha` (continuation below `Re alpha <= 0`
/// by the unit-step recursion).
pub fn branch_factor(alpha: Complex64, x: f64, quad: &QuadSpec) -> Result<Complex64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("branch factor needs x >= 0, got {x}")));
    }
    if alpha.re > 0.0 {
        let (stack, _) = branch_derivative_stack(alpha, x, 0, quad)?;
        return Ok(stack[0]);
    }
    let steps = (-alpha.re).ceil() as usize + 1;
    let alpha0 = alpha + steps as f64;
    let (mut stack, _) = branch_derivative_stack(alpha0, x, steps, quad)?;
    // lower the order one unit per pass: w_k(a-1) = (k + a) w_k(a) + w_{k+1}(a)
    for j in 0..steps {
        let level = alpha0 - j as f64;
        for k in 0..(steps - j) {
            stack[k] = (level + k as f64) * stack[k] + stack[k + 1];
        }
        stack.truncate(steps - j);
    }
    Ok(stack[0])
}

/// Fractional average `M^alpha_t f` as a complex field, evaluated
/// branchwise.
#[derive(Debug, Clone)]
pub struct FractionalAverage {
    pub values: DMatrix<Complex64>,
    pub quad_error: f64,
}

impl FractionalAverage {
    /// Extracts the real part, checking the imaginary part is noise.
    pub fn into_real(self, tol: f64) -> Result<FunctionField> {
        let worst_im = self.values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        if worst_im > tol {
            return Err(Error::Numeric(format!(
                "imaginary part {worst_im:.3e} above {tol:.3e}"
            )));
        }
        Ok(FunctionField::new(self.values.map(|v| v.re)))
    }
}

pub fn fractional_average(
    g: &DiffusionSemigroup,
    f: &FunctionField,
    alpha: Complex64,
    t: f64,
    quad: &QuadSpec,
) -> Result<FractionalAverage> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("fractional average needs t > 0, got {t}")));
    }
    let mut factors = Vec::with_capacity(g.n());
    for lambda in g.eigenvalues() {
        factors.push(branch_factor(alpha, (-lambda).max(0.0) * t, quad)?);
    }
    let values = g.apply_factors_to_field_c(f, &factors)?;
    Ok(FractionalAverage { values, quad_error: quad.tol })
}
