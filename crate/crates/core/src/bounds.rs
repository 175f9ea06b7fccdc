//! Closed-form evaluation of the explicit constants of the quantitative
//! theory, plus a brute-force check of the elementary scalar inequality
//! behind the contraction deficit.
//!
//! Conventions: every bound that is only stated up to an absolute constant
//! is evaluated with constant 1 and reported as "up to absolute constant";
//! logarithms are natural. Evaluators are total on their stated domains and
//! reject anything else.

use crate::error::{Error, Result};

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg.into()))
    }
}

/// `sqrt(C^2 + M^2) / (1 - q)`: the sector resolvent bound on
/// `|arg(lambda)| <= pi/2 + arctan(q/C)` given `||R(r+is)|| <= C/|s|`.
pub fn resolvent_sector_bound(c: f64, m: f64, q_conv: f64) -> Result<f64> {
    require(c >= 1.0, "sector constant C must be >= 1")?;
    require(m >= 1.0, "semigroup bound M must be >= 1")?;
    require(q_conv > 0.0 && q_conv < 1.0, "q must be in (0, 1)")?;
    Ok((c * c + m * m).sqrt() / (1.0 - q_conv))
}

/// `sqrt(C^2 + M^2) / (1 - u) * (1 + log(C / (1 - u)))`: the holomorphic
/// extension bound on `|arg(z)| <= arctan(u/C)`, up to absolute constant.
pub fn holo_semigroup_bound(c: f64, m: f64, u: f64) -> Result<f64> {
    require(c >= 1.0, "sector constant C must be >= 1")?;
    require(m >= 1.0, "semigroup bound M must be >= 1")?;
    require(u > 0.0 && u < 1.0, "u must be in (0, 1)")?;
    Ok((c * c + m * m).sqrt() / (1.0 - u) * (1.0 + (c / (1.0 - u)).ln()))
}

/// The three quantities produced by the deficiency route: sector half-angle
/// `eps/M^2`, the `||T(z)||` bound and the `sup_t ||t T'(t)||` bound (both
/// up to absolute constants).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatoBounds {
    pub angle: f64,
    pub semigroup_bound: f64,
    pub derivative_bound: f64,
}

/// Bounds obtained from `||T_t - I|| <= 2 - eps`:
/// `theta = eps/M^2`, `||T(z)|| <~ (M^2/eps)(1 + log(M/eps))` and
/// `sup_t ||t T'(t)|| <~ (M^4/eps^2)(1 + log(M/eps))`.
pub fn kato_bounds(m: f64, eps: f64) -> Result<KatoBounds> {
    require(m >= 1.0, "semigroup bound M must be >= 1")?;
    require(eps > 0.0 && eps <= 2.0, "deficiency eps must be in (0, 2]")?;
    let log_term = 1.0 + (m / eps).ln();
    Ok(KatoBounds {
        angle: eps / (m * m),
        semigroup_bound: m * m / eps * log_term,
        derivative_bound: m.powi(4) / (eps * eps) * log_term,
    })
}

/// `eps = 2 delta / ((1 + 2 delta) q)`, the contraction deficit produced by
/// uniform convexity of power type `q` with modulus `delta`; always in
/// (0, 1).
pub fn epsilon_from_delta(delta: f64, q_exp: f64) -> Result<f64> {
    require(delta > 0.0 && delta <= 1.0, "delta must be in (0, 1]")?;
    require(q_exp > 1.0, "exponent q must be > 1")?;
    Ok(2.0 * delta / ((1.0 + 2.0 * delta) * q_exp))
}

/// Brute-force check of the scalar inequality: every `x` in a uniform grid
/// on [0, 2] with `x^q + delta 2^q (x-1)_+^q <= 2^q` must satisfy
/// `x <= 2 - eps`. Returns the minimum margin `2 - eps - x` over admissible
/// grid points; nonnegative means verified.
pub fn elem_ineq_bruteforce(q_exp: f64, delta: f64, grid_size: usize) -> Result<f64> {
    require(q_exp > 1.0, "exponent q must be > 1")?;
    require(delta > 0.0 && delta <= 1.0, "delta must be in (0, 1]")?;
    require(grid_size >= 1000, "grid must have at least 1000 points")?;
    let eps = epsilon_from_delta(delta, q_exp)?;
    let two_q = 2f64.powf(q_exp);
    let mut margin = f64::INFINITY;
    for i in 0..grid_size {
        let x = 2.0 * i as f64 / (grid_size - 1) as f64;
        let lhs = x.powf(q_exp) + delta * two_q * (x - 1.0).max(0.0).powf(q_exp);
        if lhs <= two_q {
            margin = margin.min(2.0 - eps - x);
        }
    }
    Ok(margin)
}

/// `B = q^2 m^{2q+1} (1 + log q + q log m)`: the martingale-cotype bound on
/// `sup_t ||t dT_t/dt||` over `L_q(Omega; X)`, up to absolute constant.
/// Written `B` in all reports.
pub fn b_constant(q_exp: f64, m: f64) -> Result<f64> {
    require(q_exp >= 2.0, "cotype exponent q must be >= 2")?;
    require(m >= 1.0, "cotype constant must be >= 1")?;
    Ok(q_exp * q_exp * m.powf(2.0 * q_exp + 1.0) * (1.0 + q_exp.ln() + q_exp * m.ln()))
}

/// Analyticity sector and `||T(z)||` bound in terms of the cotype data:
/// half-angle `1/(q m^q)` and bound `q m^{q+1} (1 + log q + q log m)`,
/// up to absolute constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorBoundCotype {
    pub angle: f64,
    pub semigroup_bound: f64,
}

pub fn analytic_sector_bound_cotype(q_exp: f64, m: f64) -> Result<SectorBoundCotype> {
    require(q_exp >= 2.0, "cotype exponent q must be >= 2")?;
    require(m >= 1.0, "cotype constant must be >= 1")?;
    Ok(SectorBoundCotype {
        angle: 1.0 / (q_exp * m.powf(q_exp)),
        semigroup_bound: q_exp * m.powf(q_exp + 1.0) * (1.0 + q_exp.ln() + q_exp * m.ln()),
    })
}

/// Explicit factor of the order-`k` g-function inequality:
/// `k^{k-1} B^2 m` in general, and the sharper `B m` when `p = q` and
/// `k = 1` (`sharp_case`). The `p`-dependence hidden in the unquantified
/// part is not evaluated.
pub fn g_function_constant(k: u32, p: f64, q_exp: f64, m: f64, sharp_case: bool) -> Result<f64> {
    require(k >= 1, "derivative order k must be >= 1")?;
    require(p > 1.0 && p.is_finite(), "outer exponent p must be in (1, inf)")?;
    let b = b_constant(q_exp, m)?;
    if sharp_case {
        require(k == 1, "the sharper bound requires k = 1")?;
        return Ok(b * m);
    }
    Ok((k as f64).powi(k as i32 - 1) * b * b * m)
}

/// Constant of the g-function inequality for a regular semigroup with
/// analyticity data `(beta0, T_beta0)`:
/// `beta_q^{-3} T_{beta0}^{min(p/q, p'/q')} max(p^{2/q}, p'^{1 + 1/q'}) m`
/// with `beta_q = beta0 min(p/q, p'/q')`.
pub fn regular_lps_constant(p: f64, q_exp: f64, beta0: f64, t_beta0: f64, m: f64) -> Result<f64> {
    require(p > 1.0 && p.is_finite(), "outer exponent p must be in (1, inf)")?;
    require(q_exp >= 2.0, "cotype exponent q must be >= 2")?;
    require(beta0 > 0.0 && beta0 <= std::f64::consts::FRAC_PI_2, "beta0 must be in (0, pi/2]")?;
    require(t_beta0 >= 1.0, "analyticity constant must be >= 1")?;
    require(m >= 1.0, "cotype constant must be >= 1")?;
    let p_dual = p / (p - 1.0);
    let q_dual = q_exp / (q_exp - 1.0);
    let exponent = (p / q_exp).min(p_dual / q_dual);
    let beta_q = beta0 * exponent;
    Ok(beta_q.powi(-3)
        * t_beta0.powf(exponent)
        * p.powf(2.0 / q_exp).max(p_dual.powf(1.0 + 1.0 / q_dual))
        * m)
}

/// Specialization of [`regular_lps_constant`] at `p = q`,
/// `beta0 = 1/(q m^q)`, `T_beta0 = beta0 B`, with the bounded
/// `max(...)` factor absorbed into the absolute constant:
/// `(q m^q)^2 B m`.
pub fn regular_lps_constant_specialized(q_exp: f64, m: f64) -> Result<f64> {
    let b = b_constant(q_exp, m)?;
    let beta0_inv = q_exp * m.powf(q_exp);
    Ok(beta0_inv * beta0_inv * b * m)
}

/// Number of unit continuation steps needed at real part `re_alpha`:
/// 0 for `re_alpha > 0`, otherwise the smallest `n >= 0` with
/// `n > -re_alpha`.
pub fn continuation_order(re_alpha: f64) -> u32 {
    if re_alpha > 0.0 {
        return 0;
    }
    let mut n = (-re_alpha).floor() as u32;
    while !(n as f64 > -re_alpha) {
        n += 1;
    }
    n
}

/// One row of the constants table: everything the theory pins down for a
/// given `(q, m)` pair.
#[derive(Debug, Clone, Copy)]
pub struct BoundsTableRow {
    pub q: f64,
    pub m: f64,
    /// contraction deficit at delta = 1
    pub eps: f64,
    pub b: f64,
    pub angle: f64,
    pub semigroup_bound: f64,
    /// g-function constant, general k = 1 case
    pub g_constant: f64,
    /// g-function constant, sharp p = q case
    pub g_constant_sharp: f64,
    /// specialized regular-semigroup constant
    pub regular_constant: f64,
    /// ratio of the two approaches; equals (q m^q)^2 identically
    pub approach_ratio: f64,
}

/// Tabulates the explicit constants over a `(q, m)` grid. The ratio column
/// is computed directly from its closed form `(q m^q)^2`, which is the
/// algebraic quotient of the two g-function constants.
pub fn bounds_table(q_list: &[f64], m_list: &[f64]) -> Result<Vec<BoundsTableRow>> {
    let mut rows = Vec::with_capacity(q_list.len() * m_list.len());
    for &q in q_list {
        for &m in m_list {
            let sector = analytic_sector_bound_cotype(q, m)?;
            rows.push(BoundsTableRow {
                q,
                m,
                eps: epsilon_from_delta(1.0, q)?,
                b: b_constant(q, m)?,
                angle: sector.angle,
                semigroup_bound: sector.semigroup_bound,
                g_constant: g_function_constant(1, q, q, m, false)?,
                g_constant_sharp: g_function_constant(1, q, q, m, true)?,
                regular_constant: regular_lps_constant_specialized(q, m)?,
                approach_ratio: (q * m.powf(q)).powi(2),
            });
        }
    }
    Ok(rows)
}
