//! Numerical laboratory for quantitative estimates on holomorphic
//! semigroups over finite reversible Markov chains.
//!
//! The library instantiates, at desk scale, the quantities showing up in
//! quantitative bounded-holomorphic-semigroup theory and vector-valued
//! Littlewood-Paley-Stein theory:
//!
//! * mixed-norm spaces `L_p(Omega; l_q^d)` over finite measure spaces and
//!   certified lower/upper operator-norm estimation ([`spaces`], [`opnorm`]);
//! * symmetric Markovian operators, diffusion semigroups `T_t = e^{tA}`
//!   with cached spectral data, Rota dilations and the subordinated Poisson
//!   semigroup ([`markov`], [`semigroup`], [`dilation`]);
//! * resolvents, sector constants, contour-integral holomorphic extensions
//!   and the Kato-style quantities `eps = 2 - sup_t ||I - T_t||`,
//!   `sup_t ||t T'(t)||` ([`holo`]);
//! * closed-form evaluation of every explicit constant formula plus a
//!   brute-force check of the elementary inequality behind the contraction
//!   deficit ([`bounds`]);
//! * Littlewood-Paley-Stein g-functions, semigroup-difference functionals,
//!   fractional averages `M^alpha_t` with analytic continuation, and the
//!   sector analyticity constant ([`lps`], [`frac`]).
//!
//! All randomized routines take explicit seeds and every type is immutable
//! after construction, so results are reproducible and safe to share across
//! threads.

pub mod bounds;
pub mod dilation;
pub mod error;
pub mod frac;
pub mod holo;
pub mod lps;
pub mod markov;
pub mod martingale;
pub mod opnorm;
pub mod quad;
pub mod semigroup;
pub mod spaces;
pub mod special;

pub use error::{Error, Result};
pub use spaces::{FiniteMeasureSpace, FunctionField, MixedNormConfig};
