//! Part-size vectors and their elementary symmetric functions.
//!
//! A [`PartitionVector`] fixes a partition of the vertex set `1..=n` into `k`
//! consecutive blocks. The elementary symmetric function `σ_s` of the block
//! sizes counts the `s`-sets that meet `s` distinct blocks in one vertex
//! each, so almost every count in this crate is built out of it.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::util::{binomial, falling_factorial_u64};

/// Sizes `(n_1, …, n_k)` of a `k`-partition of the vertex set `1..=n`.
///
/// Part `i` (zero based) owns the vertices `offset(i) + 1 ..= offset(i) + n_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct PartitionVector {
    sizes: Vec<u64>,
    offsets: Vec<u64>,
}

impl PartitionVector {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return domain("a partition needs at least one part");
        }
        if sizes.contains(&0) {
            return domain("every part must have at least one vertex");
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0u64;
        offsets.push(0);
        for &s in &sizes {
            acc = match acc.checked_add(s) {
                Some(a) => a,
                None => return domain("total vertex count overflows"),
            };
            offsets.push(acc);
        }
        if acc > u64::from(u32::MAX) {
            return domain("vertex ids must fit in 32 bits");
        }
        Ok(PartitionVector { sizes, offsets })
    }

    /// The all-singleton partition of `[n]`, for which `k`-partite hypergraphs
    /// are ordinary `r`-uniform hypergraphs.
    pub fn uniform(n: u64) -> Result<Self> {
        Self::new(vec![1; n as usize])
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> u64 {
        *self.offsets.last().unwrap()
    }

    /// True when every part is a singleton.
    pub fn is_uniform(&self) -> bool {
        self.sizes.iter().all(|&s| s == 1)
    }

    /// First vertex id of part `i`.
    pub fn first_vertex(&self, part: usize) -> u32 {
        self.offsets[part] as u32 + 1
    }

    /// Part index of vertex `v` (1-based vertex ids).
    pub fn part_of(&self, v: u32) -> Option<usize> {
        let v = u64::from(v);
        if v == 0 || v > self.n() {
            return None;
        }
        // offsets[i] < v <= offsets[i+1]
        Some(self.offsets.partition_point(|&o| o < v) - 1)
    }

    pub(crate) fn check_uniformity(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.k() {
            return domain(format!("uniformity r = {r} must satisfy 1 <= r <= k = {}", self.k()));
        }
        Ok(())
    }
}

impl TryFrom<Vec<u64>> for PartitionVector {
    type Error = crate::Error;

    fn try_from(sizes: Vec<u64>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<PartitionVector> for Vec<u64> {
    fn from(pv: PartitionVector) -> Self {
        pv.sizes
    }
}

impl fmt::Display for PartitionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(u64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// All of `σ_0, …, σ_max` in one pass of the truncated product
/// `Π (1 + n_i x) mod x^{max+1}`.
pub fn sigmas(pv: &PartitionVector, max: usize) -> Vec<BigUint> {
    let max = max.min(pv.k());
    let mut e = vec![BigUint::zero(); max + 1];
    e[0] = BigUint::one();
    for (i, &size) in pv.sizes().iter().enumerate() {
        for j in (1..=max.min(i + 1)).rev() {
            let add = &e[j - 1] * size;
            e[j] += add;
        }
    }
    e
}

/// `σ_s(n⃗)`, exactly.
pub fn sigma(pv: &PartitionVector, s: usize) -> Result<BigUint> {
    if s > pv.k() {
        return domain(format!("sigma index s = {s} exceeds k = {}", pv.k()));
    }
    Ok(sigmas(pv, s).swap_remove(s))
}

/// `σ_s` with the convention `σ_s = 0` for negative `s`; used where the
/// counting arguments mention `σ_{r-3}` or `σ_{r-4}` for small `r`.
pub(crate) fn sigma_signed(pv: &PartitionVector, s: i64) -> BigUint {
    if s < 0 || s as usize > pv.k() {
        BigUint::zero()
    } else {
        sigma(pv, s as usize).expect("index checked")
    }
}

/// A positive float with a separate binary exponent, so the dynamic program
/// never leaves floating range.
#[derive(Clone, Copy, Debug)]
struct Scaled {
    mant: f64,
    exp2: i64,
}

impl Scaled {
    const ZERO: Scaled = Scaled { mant: 0.0, exp2: 0 };
    const ONE: Scaled = Scaled { mant: 1.0, exp2: 0 };

    fn normalize(mut self) -> Self {
        if self.mant == 0.0 {
            return Self::ZERO;
        }
        let bits = self.mant.to_bits();
        let raw = ((bits >> 52) & 0x7ff) as i64;
        // mant is a normal positive double here
        let shift = raw - 1023;
        self.mant = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
        self.exp2 += shift;
        self
    }

    fn mul_u64(self, x: u64) -> Self {
        Scaled { mant: self.mant * x as f64, exp2: self.exp2 }.normalize()
    }

    fn add(self, other: Self) -> Self {
        if self.mant == 0.0 {
            return other;
        }
        if other.mant == 0.0 {
            return self;
        }
        let (hi, lo) = if self.exp2 >= other.exp2 { (self, other) } else { (other, self) };
        let gap = hi.exp2 - lo.exp2;
        if gap > 1100 {
            return hi;
        }
        Scaled { mant: hi.mant + lo.mant * (2f64).powi(-(gap as i32)), exp2: hi.exp2 }.normalize()
    }

    fn ln(self) -> f64 {
        self.mant.ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }
}

/// Natural logarithm of `σ_s(n⃗)`; `-inf` never occurs since every part is nonempty.
pub fn log_sigma(pv: &PartitionVector, s: usize) -> Result<f64> {
    if s > pv.k() {
        return domain(format!("sigma index s = {s} exceeds k = {}", pv.k()));
    }
    let mut e = vec![Scaled::ZERO; s + 1];
    e[0] = Scaled::ONE;
    for (i, &size) in pv.sizes().iter().enumerate() {
        for j in (1..=s.min(i + 1)).rev() {
            e[j] = e[j].add(e[j - 1].mul_u64(size));
        }
    }
    Ok(e[s].ln())
}

/// `S_j = σ_j / C(k, j)`, the `j`-th elementary symmetric mean.
pub fn normalized_symmetric(pv: &PartitionVector, j: usize) -> Result<BigRational> {
    let s = sigma(pv, j)?;
    let c = binomial(&BigUint::from(pv.k()), j as u64);
    Ok(BigRational::new(BigInt::from(s), BigInt::from(c)))
}

/// `S_j² − S_{j−1} S_{j+1}`, which Newton's inequality makes nonnegative.
pub fn newton_gap(pv: &PartitionVector, j: usize) -> Result<BigRational> {
    if j == 0 || j + 1 > pv.k() {
        return domain(format!("newton_gap needs 1 <= j <= k - 1, got j = {j}, k = {}", pv.k()));
    }
    let k = pv.k() as u64;
    let sig = sigmas(pv, j + 1);
    let mean = |i: usize| {
        BigRational::new(BigInt::from(sig[i].clone()), BigInt::from(binomial(&BigUint::from(k), i as u64)))
    };
    let sj = mean(j);
    let gap = &sj * &sj - mean(j - 1) * mean(j + 1);
    assert!(gap >= BigRational::zero(), "Newton's inequality violated for {pv} at j = {j}");
    Ok(gap)
}

/// The least `C` with `Σ 1/n_i ≤ C k² / n`.
pub fn balance_constant(pv: &PartitionVector) -> BigRational {
    let inv_sum = pv
        .sizes()
        .iter()
        .fold(BigRational::zero(), |acc, &s| acc + BigRational::new(BigInt::one(), BigInt::from(s)));
    let k = BigInt::from(pv.k());
    inv_sum * BigRational::new(BigInt::from(pv.n()), &k * &k)
}

/// Outcome of comparing `σ_s/σ_r` with its explicit upper bound
/// `([r]_{r−s} / [k−s]_{r−s}) · (C k / n)^{r−s}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub ratio: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn lemma23_bound_check(pv: &PartitionVector, s: usize, r: usize) -> Result<BoundCheck> {
    if s == 0 || s > r || r > pv.k() {
        return domain(format!("need 1 <= s <= r <= k, got s = {s}, r = {r}, k = {}", pv.k()));
    }
    let sig = sigmas(pv, r);
    let ratio = BigRational::new(BigInt::from(sig[s].clone()), BigInt::from(sig[r].clone()));
    let d = (r - s) as u64;
    let k = pv.k() as u64;
    let prefactor = BigRational::new(
        BigInt::from(falling_factorial_u64(r as u64, d)),
        BigInt::from(falling_factorial_u64(k - s as u64, d)),
    );
    let base = balance_constant(pv) * BigRational::new(BigInt::from(k), BigInt::from(pv.n()));
    let bound = prefactor * num_traits::pow(base, d as usize);
    Ok(BoundCheck {
        ratio: ratio.to_f64().unwrap_or(f64::INFINITY),
        bound: bound.to_f64().unwrap_or(f64::INFINITY),
        holds: ratio <= bound,
    })
}
