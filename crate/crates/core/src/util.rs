//! Small exact-arithmetic helpers shared across modules.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` for big `n`.
pub fn binomial(n: &BigUint, k: u64) -> BigUint {
    if BigUint::from(k) > *n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - BigUint::from(i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// `[x]_t = x (x-1) ⋯ (x-t+1)` for nonnegative `x`; zero once a factor vanishes.
pub fn falling_factorial_u64(x: u64, t: u64) -> BigUint {
    if t > x {
        return BigUint::zero();
    }
    (0..t).fold(BigUint::one(), |acc, i| acc * (x - i))
}

/// `[x]_t` for any integer `x`.
pub fn falling_factorial_big(x: &BigInt, t: u64) -> BigInt {
    (0..t).fold(BigInt::one(), |acc, i| acc * (x - BigInt::from(i)))
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn uint_ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

const LN_FACTORIAL_SUM_LIMIT: u64 = 1_000_000;

/// `ln m!`: direct summation up to a million, Stirling's series with the
/// Robbins midpoint `1/(12m + 1/2)` beyond.
pub fn ln_factorial(m: u64) -> f64 {
    if m <= LN_FACTORIAL_SUM_LIMIT {
        (2..=m).map(|i| (i as f64).ln()).sum()
    } else {
        let x = m as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x + 0.5)
    }
}

/// Advance `idx` (strictly increasing, entries `< n`) to the next combination
/// in lexicographic order; returns `false` after the last one.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
