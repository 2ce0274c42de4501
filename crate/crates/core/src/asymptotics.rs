//! Closed-form estimates of `|L_r(n⃗, m)|` in log space.
//!
//! All three variants share the shape `ln(σ^m / m!) + correction`, where the
//! correction is an exact rational evaluated once and converted to `f64`.
//! The `O(·)` remainders have no computable constant; each result carries the
//! bracketed magnitude as `error_budget` instead.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::partitions::{log_sigma, sigmas, PartitionVector};
use crate::util::{falling_factorial_big, falling_factorial_u64, ln_factorial, ratio, to_f64};

/// `[x]_t = x (x−1) ⋯ (x−t+1)`; negative `t` is rejected.
pub fn falling_factorial(x: i64, t: i64) -> Result<BigInt> {
    if t < 0 {
        return domain(format!("falling factorial length t = {t} is negative"));
    }
    Ok(falling_factorial_big(&BigInt::from(x), t as u64))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    /// Natural log of the estimate.
    pub log_value: f64,
    /// `m ln σ − ln m!`.
    pub leading_log: f64,
    pub correction: f64,
    /// Magnitude of the unknown remainder, without its constant.
    pub error_budget: f64,
    /// The correction as an exact rational, `p/q`.
    pub correction_exact: String,
}

impl EstimateResult {
    fn new(leading_log: f64, correction: &BigRational, error_budget: f64) -> Self {
        debug_assert!(!correction.is_positive());
        let c = to_f64(correction);
        EstimateResult {
            log_value: leading_log + c,
            leading_log,
            correction: c,
            error_budget,
            correction_exact: correction.to_string(),
        }
    }

    /// `true` if the correction is exactly zero.
    pub fn correction_is_zero(&self) -> bool {
        self.correction_exact == "0"
    }
}

fn budget(n: u64, m: u64, with_cubic: bool) -> f64 {
    let (n, m) = (n as f64, m as f64);
    let quad = m * m / (n * n * n);
    if with_cubic {
        quad + m * m * m / (n * n * n * n)
    } else {
        quad
    }
}

/// The exponent `−σ_2 σ_{r−2}² [m]_2 / (2 σ_r²)`.
pub fn general_correction(pv: &PartitionVector, r: usize, m: u64) -> Result<BigRational> {
    pv.check_uniformity(r)?;
    if r < 2 {
        return domain("the correction needs r >= 2");
    }
    let s = sigmas(pv, r);
    let num = BigInt::from(&s[2] * &s[r - 2] * &s[r - 2] * falling_factorial_u64(m, 2));
    let den = BigInt::from(&s[r] * &s[r]) * 2;
    Ok(-BigRational::new(num, den))
}

/// Estimate for general part sizes.
pub fn estimate_theorem(pv: &PartitionVector, r: usize, m: u64) -> Result<EstimateResult> {
    let correction = general_correction(pv, r, m)?;
    let leading = if m == 0 { 0.0 } else { m as f64 * log_sigma(pv, r)? - ln_factorial(m) };
    Ok(EstimateResult::new(leading, &correction, budget(pv.n(), m, true)))
}

/// `σ_r^m / m!` as an exact rational; the estimate's value when the correction vanishes.
pub fn leading_term_exact(pv: &PartitionVector, r: usize, m: u64) -> Result<BigRational> {
    pv.check_uniformity(r)?;
    let s = sigmas(pv, r).swap_remove(r);
    let fact: BigUint = (1..=m).map(BigUint::from).product();
    Ok(BigRational::new(BigInt::from(s.pow(m as u32)), BigInt::from(fact)))
}

fn ln_binomial(n: u64, r: u64) -> f64 {
    (0..r).map(|i| ((n - i) as f64).ln()).sum::<f64>() - ln_factorial(r)
}

fn uniform_correction(n: u64, r: u64, m: u64) -> BigRational {
    let r2 = BigInt::from(falling_factorial_u64(r, 2));
    let num = &r2 * &r2 * BigInt::from(falling_factorial_u64(m, 2));
    -ratio(num, BigInt::from(4u32) * n * n)
}

fn check_uniform_args(n: u64, r: u64) -> Result<()> {
    if r < 2 || r > n {
        return domain(format!("need 2 <= r <= n, got r = {r}, n = {n}"));
    }
    Ok(())
}

/// Estimate for ordinary `r`-graphs on `[n]`, correction `−[r]_2² [m]_2 / (4n²)`.
pub fn estimate_uniform(n: u64, r: u64, m: u64) -> Result<EstimateResult> {
    check_uniform_args(n, r)?;
    let leading = if m == 0 { 0.0 } else { m as f64 * ln_binomial(n, r) - ln_factorial(m) };
    Ok(EstimateResult::new(leading, &uniform_correction(n, r, m), budget(n, m, true)))
}

/// The cubic term `[r]_2³ (3r² − 15r + 20) m³ / (24 n⁴)` of the refined uniform formula.
pub fn refined_cubic_term(n: u64, r: u64, m: u64) -> BigRational {
    let r2 = BigInt::from(falling_factorial_u64(r, 2));
    let poly = BigInt::from(3 * r * r + 20) - BigInt::from(15 * r);
    let n4 = BigInt::from(n).pow(4);
    ratio(&r2 * &r2 * &r2 * poly * BigInt::from(m).pow(3), BigInt::from(24u32) * n4)
}

/// Uniform estimate with the additional cubic term; remainder `O(m²/n³)`.
pub fn estimate_refined_uniform(n: u64, r: u64, m: u64) -> Result<EstimateResult> {
    check_uniform_args(n, r)?;
    let leading = if m == 0 { 0.0 } else { m as f64 * ln_binomial(n, r) - ln_factorial(m) };
    let correction = uniform_correction(n, r, m) - refined_cubic_term(n, r, m);
    Ok(EstimateResult::new(leading, &correction, budget(n, m, false)))
}

/// True when `m ≥ n^{4/3} / 2`, past which the estimates are not expected to hold.
pub fn outside_validity(n: u64, m: u64) -> bool {
    m as f64 >= (n as f64).powf(4.0 / 3.0) / 2.0
}
