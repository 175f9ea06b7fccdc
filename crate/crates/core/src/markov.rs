//! Symmetric Markovian operators and example chain builders.
//!
//! A symmetric Markovian operator here is a row-stochastic kernel `S` in
//! detailed balance with the atom weights: `mu_i S_ij = mu_j S_ji`. That
//! makes `S` a self-adjoint contraction on `L_2(mu)` and, together with
//! positivity and `S 1 = 1`, a contraction on every `L_p`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use crate::error::{Error, Result};
use crate::semigroup::DiffusionSemigroup;
use crate::spaces::{FiniteMeasureSpace, FunctionField};

/// A row-stochastic kernel tied to a measure space.
#[derive(Debug, Clone)]
pub struct MarkovOperator {
    space: FiniteMeasureSpace,
    matrix: DMatrix<f64>,
}

/// Magnitudes of the invariant violations of a candidate kernel.
///
/// Each field is the worst deviation found; `0` means the invariant holds
/// exactly. No exception is raised for small violations, callers compare
/// against their own tolerance.
#[derive(Debug, Clone, Copy)]
pub struct MarkovDiagnostics {
    /// most negative entry, as a magnitude (positivity)
    pub negativity: f64,
    /// max_i |sum_j S_ij - 1| (S 1 = 1)
    pub row_sum: f64,
    /// max_ij |mu_i S_ij - mu_j S_ji| (self-adjointness on L_2(mu))
    pub detailed_balance: f64,
    /// |  ||S||_{L_1(mu)} - 1 |, endpoint norm via the exact column formula
    pub l1_deviation: f64,
    /// |  ||S||_{L_inf} - 1 |, endpoint norm via the exact row formula
    pub linf_deviation: f64,
}

impl MarkovDiagnostics {
    pub fn is_valid(&self, tol: f64) -> bool {
        self.worst() <= tol
    }

    pub fn worst(&self) -> f64 {
        self.negativity
            .max(self.row_sum)
            .max(self.detailed_balance)
            .max(self.l1_deviation)
            .max(self.linf_deviation)
    }

    /// Human-readable list of the invariants violated at tolerance `tol`.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.negativity > tol {
            out.push(format!("positivity violated by {:.3e}", self.negativity));
        }
        if self.row_sum > tol {
            out.push(format!("row sums deviate from 1 by {:.3e}", self.row_sum));
        }
        if self.detailed_balance > tol {
            out.push(format!("detailed balance violated by {:.3e}", self.detailed_balance));
        }
        if self.l1_deviation > tol {
            out.push(format!("L_1 endpoint norm deviates from 1 by {:.3e}", self.l1_deviation));
        }
        if self.linf_deviation > tol {
            out.push(format!("L_inf endpoint norm deviates from 1 by {:.3e}", self.linf_deviation));
        }
        out
    }
}

impl MarkovOperator {
    /// Wraps a kernel; only shapes are checked here, `validate` reports on
    /// the Markov invariants.
    pub fn new(space: FiniteMeasureSpace, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != space.len() || matrix.ncols() != space.len() {
            return Err(Error::Shape(format!(
                "kernel is {} x {}, space has {} atoms",
                matrix.nrows(),
                matrix.ncols(),
                space.len()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    /// Measures all invariants. `tol` only affects which entries count as
    /// violations in `violations`; the returned magnitudes are raw.
    pub fn validate(&self) -> MarkovDiagnostics {
        let n = self.n();
        let mu = self.space.weights();
        let s = &self.matrix;
        let mut negativity = 0.0f64;
        let mut row_sum = 0.0f64;
        let mut detailed_balance = 0.0f64;
        for i in 0..n {
            let mut rs = 0.0;
            for j in 0..n {
                negativity = negativity.max(-s[(i, j)]);
                rs += s[(i, j)];
                detailed_balance = detailed_balance.max((mu[i] * s[(i, j)] - mu[j] * s[(j, i)]).abs());
            }
            row_sum = row_sum.max((rs - 1.0).abs());
        }
        let linf = (0..n)
            .map(|i| (0..n).map(|j| s[(i, j)].abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let l1 = (0..n)
            .map(|j| (0..n).map(|i| mu[i] * s[(i, j)].abs()).sum::<f64>() / mu[j])
            .fold(0.0f64, f64::max);
        MarkovDiagnostics {
            negativity,
            row_sum,
            detailed_balance,
            l1_deviation: (l1 - 1.0).abs(),
            linf_deviation: (linf - 1.0).abs(),
        }
    }

    /// Applies the kernel to each component of a field.
    pub fn apply(&self, f: &FunctionField) -> Result<FunctionField> {
        if f.n() != self.n() {
            return Err(Error::Shape("field and kernel sizes differ".into()));
        }
        Ok(FunctionField::new(&self.matrix * f.values()))
    }

    /// `S^2`, the square the Rota dilation factorizes.
    pub fn squared(&self) -> DMatrix<f64> {
        &self.matrix * &self.matrix
    }
}

/// Two-state chain jumping at the given rate; generator
/// `[[-a, a], [a, -a]]` with uniform weights, spectrum `{0, -2a}`.
pub fn two_point_chain(rate: f64) -> Result<DiffusionSemigroup> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Domain(format!("rate must be > 0, got {rate}")));
    }
    let a = DMatrix::from_row_slice(2, 2, &[-rate, rate, rate, -rate]);
    DiffusionSemigroup::from_generator(FiniteMeasureSpace::uniform(2), a)
}

/// Nearest-neighbour walk on the n-cycle, generator `S - I` for the
/// normalized adjacency kernel. Eigenvalues `cos(2 pi k / n) - 1`.
pub fn cycle_chain(n: usize) -> Result<DiffusionSemigroup> {
    if n < 2 {
        return Err(Error::Domain(format!("cycle needs n >= 2, got {n}")));
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = -1.0;
        a[(i, (i + 1) % n)] += 0.5;
        a[(i, (i + n - 1) % n)] += 0.5;
    }
    DiffusionSemigroup::from_generator(FiniteMeasureSpace::uniform(n), a)
}

/// Walk that jumps to a uniform vertex of the complete graph (self loops
/// allowed); generator `J/n - I` with spectrum `{0, -1}`.
pub fn complete_graph_chain(n: usize) -> Result<DiffusionSemigroup> {
    if n < 2 {
        return Err(Error::Domain(format!("complete graph needs n >= 2, got {n}")));
    }
    let a = DMatrix::from_fn(n, n, |i, j| 1.0 / n as f64 - if i == j { 1.0 } else { 0.0 });
    DiffusionSemigroup::from_generator(FiniteMeasureSpace::uniform(n), a)
}

/// Random reversible kernel: a symmetric conductance matrix with entries in
/// (0.1, 1) is row-normalized and the stationary weights are the normalized
/// row sums, so detailed balance holds by construction.
pub fn random_reversible_operator(n: usize, seed: u64) -> Result<MarkovOperator> {
    if n < 2 {
        return Err(Error::Domain(format!("random chain needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let c = rng.gen_range(0.1..1.0);
            w[(i, j)] = c;
            w[(j, i)] = c;
        }
    }
    let row_sums: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let total: f64 = row_sums.iter().sum();
    let s = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / row_sums[i]);
    let mu: Vec<f64> = row_sums.iter().map(|r| r / total).collect();
    MarkovOperator::new(FiniteMeasureSpace::new(mu)?, s)
}

/// Continuous-time version of [`random_reversible_operator`], generator
/// `S - I`.
pub fn random_reversible_chain(n: usize, seed: u64) -> Result<DiffusionSemigroup> {
    let op = random_reversible_operator(n, seed)?;
    let n = op.n();
    let a = op.matrix() - DMatrix::<f64>::identity(n, n);
    DiffusionSemigroup::from_generator(op.space().clone(), a)
}
