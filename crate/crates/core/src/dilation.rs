//! Rota dilation of `T = S^2` through two conditional expectations.
//!
//! For a symmetric Markovian `S` on `(Omega, mu)`, the product space
//! `Omega x Omega` with weights `mu~_{ij} = mu_i S_ij` carries two
//! sigma-algebras: the first coordinate (atoms `{i} x Omega`) and the
//! second (atoms `Omega x {j}`). Conditioning on them in turn reproduces
//! the square of the kernel on embedded functions:
//!
//! ```text
//! E_first E_second (f o pi_1) = (S^2 f) o pi_1
//! ```
//!
//! Zero-weight product atoms are dropped so that the conditional
//! expectations (which divide by fiber masses) stay well defined.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::markov::MarkovOperator;
use crate::spaces::FiniteMeasureSpace;

/// Validation tolerance applied to `S` before building the dilation.
const DILATION_INPUT_TOL: f64 = 1e-8;

/// The product-space dilation data for one kernel `S`.
#[derive(Debug, Clone)]
pub struct DilationBundle {
    /// product atoms (i, j) with positive weight, row order of all matrices
    atoms: Vec<(usize, usize)>,
    big_space: FiniteMeasureSpace,
    /// `N x n` embedding by the first coordinate
    embed: DMatrix<f64>,
    /// conditional expectation onto the first coordinate
    e_first: DMatrix<f64>,
    /// conditional expectation onto the second coordinate
    e_second: DMatrix<f64>,
    /// `S^2`, the operator the dilation factorizes
    squared: DMatrix<f64>,
}

impl DilationBundle {
    pub fn atoms(&self) -> &[(usize, usize)] {
        &self.atoms
    }

    pub fn big_space(&self) -> &FiniteMeasureSpace {
        &self.big_space
    }

    pub fn embed(&self) -> &DMatrix<f64> {
        &self.embed
    }

    pub fn e_first(&self) -> &DMatrix<f64> {
        &self.e_first
    }

    pub fn e_second(&self) -> &DMatrix<f64> {
        &self.e_second
    }

    pub fn squared(&self) -> &DMatrix<f64> {
        &self.squared
    }

    /// Worst entry of `E_first E_second embed - embed S^2` over the full
    /// coordinate basis; the factorization identity says this is zero.
    pub fn factorization_deviation(&self) -> f64 {
        let lhs = &self.e_first * &self.e_second * &self.embed;
        let rhs = &self.embed * &self.squared;
        (lhs - rhs).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Worst deviation of either conditional expectation from being an
    /// idempotent, mu~-self-adjoint, unital, positive contraction.
    pub fn conditional_expectation_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        let w = self.big_space.weights();
        let n = self.atoms.len();
        for e in [&self.e_first, &self.e_second] {
            worst = worst.max((e * e - e).iter().fold(0.0f64, |m, v| m.max(v.abs())));
            for i in 0..n {
                let mut row = 0.0;
                for j in 0..n {
                    worst = worst.max(-e[(i, j)]); // positivity
                    worst = worst.max((w[i] * e[(i, j)] - w[j] * e[(j, i)]).abs());
                    row += e[(i, j)];
                }
                worst = worst.max((row - 1.0).abs()); // fixes constants
            }
        }
        worst
    }
}

/// Builds the two-coordinate dilation of `T = S^2`.
pub fn build_rota_dilation(s: &MarkovOperator) -> Result<DilationBundle> {
    let diag = s.validate();
    if !diag.is_valid(DILATION_INPUT_TOL) {
        return Err(Error::Domain(format!(
            "kernel is not symmetric Markovian: {}",
            diag.violations(DILATION_INPUT_TOL).join("; ")
        )));
    }
    let n = s.n();
    let mu = s.space().weights();
    let kernel = s.matrix();

    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let w = mu[i] * kernel[(i, j)];
            if w > 0.0 {
                atoms.push((i, j));
                weights.push(w);
            }
        }
    }
    let big_space = FiniteMeasureSpace::new(weights.clone())?;
    let big_n = atoms.len();

    let mut embed = DMatrix::zeros(big_n, n);
    for (a, (i, _)) in atoms.iter().enumerate() {
        embed[(a, *i)] = 1.0;
    }

    // fiber masses: sum_j mu~_{ij} = mu_i, sum_i mu~_{ij} = mu_j (detailed
    // balance), but compute them from the actual weights
    let mut first_mass = vec![0.0f64; n];
    let mut second_mass = vec![0.0f64; n];
    for (a, (i, j)) in atoms.iter().enumerate() {
        first_mass[*i] += weights[a];
        second_mass[*j] += weights[a];
    }

    let mut e_first = DMatrix::zeros(big_n, big_n);
    let mut e_second = DMatrix::zeros(big_n, big_n);
    for (a, (i, j)) in atoms.iter().enumerate() {
        for (b, (k, l)) in atoms.iter().enumerate() {
            if i == k {
                e_first[(a, b)] = weights[b] / first_mass[*i];
            }
            if j == l {
                e_second[(a, b)] = weights[b] / second_mass[*j];
            }
        }
    }

    Ok(DilationBundle {
        atoms,
        big_space,
        embed,
        e_first,
        e_second,
        squared: s.squared(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{random_reversible_operator, MarkovOperator};
    use crate::spaces::FiniteMeasureSpace;

    #[test]
    fn identity_kernel_dilates_to_identity() {
        let s = MarkovOperator::new(FiniteMeasureSpace::uniform(3), DMatrix::identity(3, 3)).unwrap();
        let b = build_rota_dilation(&s).unwrap();
        // only the diagonal atoms survive
        assert_eq!(b.atoms().len(), 3);
        assert!(b.factorization_deviation() <= 1e-15);
    }

    #[test]
    fn involution_kernel_squares_to_identity() {
        let s = MarkovOperator::new(
            FiniteMeasureSpace::uniform(2),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        )
        .unwrap();
        let b = build_rota_dilation(&s).unwrap();
        let sq = b.squared();
        assert!((sq - DMatrix::<f64>::identity(2, 2)).norm() <= 1e-15);
        assert!(b.factorization_deviation() <= 1e-15);
    }

    #[test]
    fn random_reversible_kernel_factorizes_exactly() {
        let s = random_reversible_operator(5, 0).unwrap();
        let b = build_rota_dilation(&s).unwrap();
        assert!(b.factorization_deviation() <= 1e-12, "deviation {}", b.factorization_deviation());
        assert!(
            b.conditional_expectation_deviation() <= 1e-12,
            "projections deviate by {}",
            b.conditional_expectation_deviation()
        );
    }

    #[test]
    fn conditional_expectations_are_lp_contractions() {
        // endpoint norms of a positive unital mu-self-adjoint projection are
        // exactly 1; check the same formulas validate() uses
        let s = random_reversible_operator(4, 7).unwrap();
        let b = build_rota_dilation(&s).unwrap();
        let w = b.big_space().weights();
        for e in [b.e_first(), b.e_second()] {
            let linf = (0..w.len())
                .map(|i| (0..w.len()).map(|j| e[(i, j)].abs()).sum::<f64>())
                .fold(0.0f64, f64::max);
            let l1 = (0..w.len())
                .map(|j| (0..w.len()).map(|i| w[i] * e[(i, j)].abs()).sum::<f64>() / w[j])
                .fold(0.0f64, f64::max);
            assert!((linf - 1.0).abs() <= 1e-12);
            assert!((l1 - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn invalid_kernel_is_rejected() {
        let s = MarkovOperator::new(
            FiniteMeasureSpace::uniform(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]),
        )
        .unwrap();
        assert!(build_rota_dilation(&s).is_err());
    }
}
