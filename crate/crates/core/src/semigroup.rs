//! Diffusion semigroups `T_t = e^{tA}` from reversible generators.
//!
//! The generator convention is the signed one: the stored matrix `A` has
//! `A 1 = 0`, is self-adjoint on `L_2(mu)` and has spectrum in `(-inf, 0]`,
//! and the semigroup is `T_t = e^{tA}` (so `-A` is the positive operator of
//! the classical convention; reports state which sign a symbol uses).
//!
//! The spectral decomposition is computed once at construction through the
//! similarity `B = D^{1/2} A D^{-1/2}` (`D = diag(mu)`), which is genuinely
//! symmetric for reversible chains and hence has a real orthogonal
//! eigenbasis. Everything downstream (semigroup values, resolvents,
//! g-functions, subordination) is a function of this cached data.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::markov::MarkovOperator;
use crate::quad::{composite_legendre, refine_until, QuadRule};
use crate::spaces::{FiniteMeasureSpace, FunctionField};

/// Construction tolerance for the generator invariants (row sums,
/// reversibility, spectrum sign).
const GENERATOR_TOL: f64 = 1e-9;

/// Eigenvalues below this magnitude count as the kernel (constants) when
/// deciding ergodicity and spectral gaps.
const KERNEL_TOL: f64 = 1e-12;

/// A reversible generator with its cached spectral decomposition.
///
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone)]
pub struct DiffusionSemigroup {
    space: FiniteMeasureSpace,
    generator: DMatrix<f64>,
    /// eigenvalues of the generator, sorted descending, `lambda_0 ~ 0`
    eigenvalues: Vec<f64>,
    /// mu-orthonormal eigenbasis, one eigenvector per column
    basis: DMatrix<f64>,
    /// `D * basis`; coefficients of `f` are `dual^T f`
    dual: DMatrix<f64>,
}

impl DiffusionSemigroup {
    /// Validates and decomposes a generator: `A 1 = 0`, `mu_i A_ij = mu_j
    /// A_ji`, spectrum nonpositive.
    pub fn from_generator(space: FiniteMeasureSpace, generator: DMatrix<f64>) -> Result<Self> {
        let n = space.len();
        if generator.nrows() != n || generator.ncols() != n {
            return Err(Error::Shape(format!(
                "generator is {} x {}, space has {n} atoms",
                generator.nrows(),
                generator.ncols()
            )));
        }
        let scale = generator.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mu = space.weights();
        for i in 0..n {
            let rs: f64 = generator.row(i).sum();
            if rs.abs() > GENERATOR_TOL * scale {
                return Err(Error::Domain(format!("generator row {i} sums to {rs:.3e}, want 0")));
            }
            for j in 0..n {
                let dev = (mu[i] * generator[(i, j)] - mu[j] * generator[(j, i)]).abs();
                if dev > GENERATOR_TOL * scale {
                    return Err(Error::Domain(format!(
                        "generator not reversible: |mu_i A_ij - mu_j A_ji| = {dev:.3e} at ({i}, {j})"
                    )));
                }
            }
        }

        let d_sqrt: Vec<f64> = mu.iter().map(|w| w.sqrt()).collect();
        let mut sym = DMatrix::from_fn(n, n, |i, j| d_sqrt[i] * generator[(i, j)] / d_sqrt[j]);
        // enforce exact symmetry before the eigensolve
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
                sym[(i, j)] = avg;
                sym[(j, i)] = avg;
            }
        }
        let eig = nalgebra::SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        if eigenvalues[0] > GENERATOR_TOL * scale {
            return Err(Error::Domain(format!(
                "generator has positive spectrum: lambda_max = {:.3e}",
                eigenvalues[0]
            )));
        }
        let basis = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])] / d_sqrt[i]);
        let dual = DMatrix::from_fn(n, n, |i, j| mu[i] * basis[(i, j)]);
        Ok(Self { space, generator, eigenvalues, basis, dual })
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    /// Generator eigenvalues, descending (`lambda_0 ~ 0` for a conservative
    /// chain).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// mu-orthonormal eigenvectors, one per column, same order as
    /// [`Self::eigenvalues`].
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Smallest positive decay rate (`lambda_1` of the chain), `None` when
    /// the chain is disconnected (multiple kernel directions).
    pub fn spectral_gap(&self) -> Option<f64> {
        let kernel_dim = self.eigenvalues.iter().filter(|l| l.abs() <= KERNEL_TOL).count();
        if kernel_dim > 1 {
            return None;
        }
        self.eigenvalues.iter().map(|l| -l).find(|r| *r > KERNEL_TOL)
    }

    /// Largest decay rate `|lambda_{n-1}|`.
    pub fn max_rate(&self) -> f64 {
        -self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Assembles `sum_k g(lambda_k) v_k (D v_k)^T` for a real scalar symbol.
    pub fn spectral_fn(&self, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.n();
        let mut scaled = self.basis.clone();
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            let gv = g(*lambda);
            for i in 0..n {
                scaled[(i, k)] *= gv;
            }
        }
        scaled * self.dual.transpose()
    }

    /// Assembles `sum_k c_k v_k (D v_k)^T` from one factor per eigenvalue
    /// branch (same order as [`Self::eigenvalues`]).
    pub fn spectral_from_factors(&self, factors: &[f64]) -> Result<DMatrix<f64>> {
        if factors.len() != self.n() {
            return Err(Error::Shape("one factor per eigenvalue branch required".into()));
        }
        let n = self.n();
        let mut scaled = self.basis.clone();
        for (k, c) in factors.iter().enumerate() {
            for i in 0..n {
                scaled[(i, k)] *= c;
            }
        }
        Ok(scaled * self.dual.transpose())
    }

    /// Complex version of [`Self::spectral_from_factors`].
    pub fn spectral_from_factors_c(&self, factors: &[Complex64]) -> Result<DMatrix<Complex64>> {
        if factors.len() != self.n() {
            return Err(Error::Shape("one factor per eigenvalue branch required".into()));
        }
        let n = self.n();
        let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (k, c) in factors.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += c * self.basis[(i, k)] * self.dual[(j, k)];
                }
            }
        }
        Ok(out)
    }

    /// Complex-symbol version of [`Self::spectral_fn`].
    pub fn spectral_fn_c(&self, g: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
        let n = self.n();
        let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            let gv = g(*lambda);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += gv * self.basis[(i, k)] * self.dual[(j, k)];
                }
            }
        }
        out
    }

    /// Exact `L_2(mu)` operator norm of `g(A)` (the decomposition is
    /// orthogonal after symmetrization, so the norm is the largest symbol
    /// modulus). Valid for `p = q = 2` and any inner dimension.
    pub fn l2_norm_of_symbol(&self, g: impl Fn(f64) -> Complex64) -> f64 {
        self.eigenvalues.iter().map(|l| g(*l).norm()).fold(0.0, f64::max)
    }

    /// Applies `g(A)` to each component of a field through the cached
    /// decomposition.
    pub fn apply_spectral(&self, f: &FunctionField, g: impl Fn(f64) -> f64) -> FunctionField {
        let coeffs = self.dual.transpose() * f.values();
        let mut scaled = coeffs;
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            let gv = g(*lambda);
            for j in 0..scaled.ncols() {
                scaled[(k, j)] *= gv;
            }
        }
        FunctionField::new(&self.basis * scaled)
    }

    /// Applies `sum_k c_k v_k (D v_k)^T` to a real field, one complex
    /// factor per branch.
    pub fn apply_factors_to_field_c(
        &self,
        f: &FunctionField,
        factors: &[Complex64],
    ) -> Result<DMatrix<Complex64>> {
        if factors.len() != self.n() {
            return Err(Error::Shape("one factor per eigenvalue branch required".into()));
        }
        if f.n() != self.n() {
            return Err(Error::Shape("field and semigroup sizes differ".into()));
        }
        let coeffs = self.dual.transpose() * f.values();
        let (n, d) = (self.n(), f.d());
        let mut out = DMatrix::from_element(n, d, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += factors[k] * self.basis[(i, k)] * coeffs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    /// `T_t` for real `t >= 0`.
    pub fn at_real(&self, t: f64) -> DMatrix<f64> {
        self.spectral_fn(|l| (t * l).exp())
    }

    /// Holomorphic extension `T(z) = e^{zA}` through the spectral
    /// exponential.
    pub fn at(&self, z: Complex64) -> DMatrix<Complex64> {
        self.spectral_fn_c(|l| (z * l).exp())
    }

    /// `T_t` wrapped as a Markov operator (for validation and dilation).
    pub fn markov_step(&self, t: f64) -> Result<MarkovOperator> {
        MarkovOperator::new(self.space.clone(), self.at_real(t))
    }

    /// Projection onto the kernel of the generator (constants, for an
    /// ergodic chain).
    pub fn mean_projection(&self) -> DMatrix<f64> {
        self.spectral_fn(|l| if l.abs() <= KERNEL_TOL { 1.0 } else { 0.0 })
    }
}

/// Quadrature request: target tolerance and a refinement cap.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    pub tol: f64,
    /// panel-doubling cap (max composite panels)
    pub max_panels: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { tol: 1e-8, max_panels: 1 << 10 }
    }
}

/// Result of the subordination quadrature.
#[derive(Debug, Clone)]
pub struct PoissonResult {
    pub matrix: DMatrix<f64>,
    /// node-doubling error of the quadrature
    pub quad_error: f64,
    /// relative Frobenius deviation from the spectral `e^{-t sqrt(-A)}`
    pub spectral_rel_error: f64,
}

/// Subordinated Poisson semigroup
///
/// ```text
/// P_t f = (1/sqrt(pi)) * integral_0^inf e^{-s}/sqrt(s) T_{t^2/4s} f ds
/// ```
///
/// evaluated per eigenvalue branch after the substitution `s = e^u`, which
/// removes the endpoint singularity and makes both tails exponential. The
/// spectral identity `P_t = e^{-t sqrt(-A)}` is evaluated alongside and the
/// relative deviation reported.
pub fn subordinated_poisson(g: &DiffusionSemigroup, t: f64, quad: &QuadSpec) -> Result<PoissonResult> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("subordination needs t > 0, got {t}")));
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    // Domain of u = log s: the left tail contributes ~ 2 e^{-L/2}/sqrt(pi),
    // the right tail dies like e^{-e^L}. Choose L so both sit below tol/10.
    let l_left = 2.0 * (20.0 / (sqrt_pi * quad.tol)).ln();
    let l_right = ((20.0 / quad.tol).ln()).ln() + 3.0;
    let rule = QuadRule::legendre(16);

    let branch = |rate: f64| -> Result<(f64, f64)> {
        let integrand = |u: f64| {
            let s = u.exp();
            (-s).exp() * (0.5 * u).exp() * (-rate * t * t / (4.0 * s)).exp() / sqrt_pi
        };
        let panels0 = ((l_left + l_right) / 2.0).ceil() as usize;
        refine_until(
            |panels| composite_legendre(&rule, -l_left, l_right, panels, integrand),
            |a, b| (a - b).abs(),
            panels0,
            quad.tol / 2.0,
            quad.max_panels,
        )
    };

    let mut factors = Vec::with_capacity(g.n());
    let mut quad_error = 0.0f64;
    for lambda in g.eigenvalues() {
        // clamp eigensolver noise: a tiny negative rate would blow up in
        // the s -> 0 tail of the integrand
        let (value, err) = branch((-lambda).max(0.0))?;
        factors.push(value);
        quad_error = quad_error.max(err);
    }
    let matrix = g.spectral_from_factors(&factors)?;
    let spectral = g.spectral_fn(|l| (-t * (-l).max(0.0).sqrt()).exp());
    let diff = (&matrix - &spectral).norm();
    let denom = spectral.norm().max(f64::MIN_POSITIVE);
    Ok(PoissonResult { matrix, quad_error, spectral_rel_error: diff / denom })
}
