//! Gauss quadrature rules (Golub-Welsch) and adaptive refinement drivers.
//!
//! Legendre rules carry the smooth integrands (contours, log-time grids);
//! Jacobi rules absorb the `(1-x)^alpha` endpoint singularity of fractional
//! integrals into the weight. Nodes and weights come from the symmetric
//! eigenvalue problem for the three-term recurrence (Golub-Welsch); at the
//! orders used here (<= a few hundred nodes) this is plenty accurate.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::gamma_real;

/// Nodes and weights of a quadrature rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// Gauss-Legendre rule with `n >= 1` nodes.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut jac = DMatrix::zeros(n, n);
        for k in 1..n {
            let b = k as f64 / ((4.0 * (k as f64).powi(2) - 1.0).sqrt());
            jac[(k - 1, k)] = b;
            jac[(k, k - 1)] = b;
        }
        Self::from_jacobi_matrix(jac, 2.0)
    }

    /// Gauss-Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` with
    /// `alpha, beta > -1`.
    pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(Error::Domain(format!("jacobi exponents must be > -1, got ({alpha}, {beta})")));
        }
        assert!(n >= 1);
        let mut jac = DMatrix::zeros(n, n);
        let mut diag = (beta - alpha) / (2.0 + alpha + beta);
        for idx in 0..n - 1 {
            let k = idx as f64 + 1.0;
            let denom = 2.0 * k + alpha + beta;
            let off = 2.0 / denom
                * (k * (k + alpha) * (k + beta) * (k + alpha + beta) / ((denom + 1.0) * (denom - 1.0)))
                    .sqrt();
            jac[(idx, idx)] = diag;
            jac[(idx, idx + 1)] = off;
            jac[(idx + 1, idx)] = off;
            diag = (beta * beta - alpha * alpha) / (denom * (denom + 2.0));
        }
        jac[(n - 1, n - 1)] = diag;
        let mu0 = 2f64.powf(alpha + beta + 1.0) * gamma_real(alpha + 1.0) * gamma_real(beta + 1.0)
            / gamma_real(alpha + beta + 2.0);
        Ok(Self::from_jacobi_matrix(jac, mu0))
    }

    fn from_jacobi_matrix(jac: DMatrix<f64>, mu0: f64) -> Self {
        let n = jac.nrows();
        if n == 1 {
            return Self { nodes: vec![jac[(0, 0)]], weights: vec![mu0] };
        }
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|j| (eig.eigenvalues[j], mu0 * eig.eigenvectors[(0, j)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Integrates `f` over `[a, b]` (affine map of the reference rule; only
    /// meaningful for the Legendre rule).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(m + c * x))
            .sum::<f64>()
            * c
    }
}

/// Composite Gauss-Legendre on `[a, b]` split into `panels` equal pieces.
pub fn composite_legendre<F: FnMut(f64) -> f64>(
    rule: &QuadRule,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        total += rule.integrate(lo, lo + h, &mut f);
    }
    total
}

/// Complex-valued composite Gauss-Legendre.
pub fn composite_legendre_c<F: FnMut(f64) -> Complex64>(
    rule: &QuadRule,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> Complex64 {
    let h = (b - a) / panels as f64;
    let c = 0.5 * h;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let m = a + (k as f64 + 0.5) * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            total += f(m + c * x) * *w;
        }
    }
    total * c
}

/// Doubles the refinement level until two successive evaluations differ by
/// less than `tol` (in the caller-supplied metric), starting at `level0`
/// panels. Returns the finer value and the achieved difference.
pub fn refine_until<T, E, D>(mut eval: E, dist: D, level0: usize, tol: f64, max_level: usize) -> Result<(T, f64)>
where
    E: FnMut(usize) -> T,
    D: Fn(&T, &T) -> f64,
{
    let mut level = level0.max(1);
    let mut prev = eval(level);
    loop {
        let next_level = level * 2;
        let next = eval(next_level);
        let d = dist(&prev, &next);
        if d <= tol {
            return Ok((next, d));
        }
        if next_level >= max_level {
            return Err(Error::QuadratureNoConvergence { achieved: d, requested: tol });
        }
        prev = next;
        level = next_level;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn legendre_is_exact_on_polynomials() {
        // n-node Gauss-Legendre integrates degree 2n-1 exactly.
        let rule = QuadRule::legendre(5);
        let exact = |k: u32| if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
        for k in 0..10u32 {
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32));
            assert_relative_eq!(got, exact(k), epsilon = 1e-14, max_relative = 1e-13);
        }
    }

    #[test]
    fn legendre_exponential() {
        let rule = QuadRule::legendre(20);
        let got = rule.integrate(0.0, 1.0, f64::exp);
        assert_relative_eq!(got, std::f64::consts::E - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_inverse_square_root_weight() {
        // integral over [-1,1] of (1-x)^{-1/2} dx = 2 sqrt(2)
        let rule = QuadRule::jacobi(8, -0.5, 0.0).unwrap();
        let got: f64 = rule.weights.iter().sum();
        assert_relative_eq!(got, 2.0 * 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn jacobi_beta_integral() {
        // integral over [0,1] of (1-s)^{-1/2} s ds = B(2, 1/2) = 4/3,
        // mapped to [-1,1] via s = (x+1)/2.
        let rule = QuadRule::jacobi(8, -0.5, 0.0).unwrap();
        let got: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * ((x + 1.0) / 2.0))
            .sum::<f64>()
            / 2f64.powf(0.5);
        assert_relative_eq!(got, 4.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn composite_matches_single_panel_on_smooth_integrand() {
        let rule = QuadRule::legendre(16);
        let a = composite_legendre(&rule, 0.0, PI, 1, f64::sin);
        let b = composite_legendre(&rule, 0.0, PI, 8, f64::sin);
        assert_relative_eq!(a, 2.0, max_relative = 1e-12);
        assert_relative_eq!(b, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn refine_until_reports_achieved_error() {
        let rule = QuadRule::legendre(4);
        let (val, err) = refine_until(
            |panels| composite_legendre(&rule, 0.0, 1.0, panels, |x| (10.0 * x).cos()),
            |a, b| (a - b).abs(),
            1,
            1e-12,
            1 << 12,
        )
        .unwrap();
        assert_relative_eq!(val, 10f64.sin() / 10.0, max_relative = 1e-12);
        assert!(err <= 1e-12);
    }

    #[test]
    fn refine_until_fails_on_hopeless_tolerance() {
        // A rule too weak to ever reach 1e-30 must surface the achieved error.
        let rule = QuadRule::legendre(1);
        let r = refine_until(
            |panels| composite_legendre(&rule, 0.0, 1.0, panels, |x| (50.0 * x).cos()),
            |a, b| (a - b).abs() + 1e-20,
            1,
            1e-30,
            8,
        );
        assert!(matches!(r, Err(Error::QuadratureNoConvergence { .. })));
    }
}
