//! Uniform sampling from `H_r(n⃗, m)` and seeded Monte Carlo estimates.
//!
//! Trials are cut into fixed chunks of [`CHUNK`]; chunk `c` draws from
//! `ChaCha8Rng` seeded with the user seed on stream `c`. Results therefore
//! depend only on the seed and trial count, never on the number of workers.

use std::collections::{BTreeMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Pow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::census::{guard, MAX_TABLE_EDGES};
use crate::error::{domain, Result};
use crate::hypergraphs::{classify_by_overlap, threshold_m, Edge, EdgeRanker, Hypergraph, Stratum, Violation};
use crate::partitions::{sigma, PartitionVector};
use crate::util::{falling_factorial_u64, uint_ratio};

/// Trials per RNG stream.
pub const CHUNK: u64 = 4096;

/// The generator for chunk `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One uniform edge of `E_r(n⃗)`.
///
/// A uniform rank walked down the ranker's suffix table picks each set of
/// parts with probability proportional to the product of their sizes and then
/// one vertex uniformly inside each chosen part.
pub fn draw_edge<R: Rng + ?Sized>(ranker: &EdgeRanker, rng: &mut R) -> Edge {
    ranker.unrank(rng.gen_range(0..ranker.len()))
}

/// Sorted distinct ranks forming a uniform `m`-subset of `0..len`.
fn sample_ranks<R: Rng + ?Sized>(len: u128, m: u64, rng: &mut R) -> Vec<u128> {
    let m = m as u128;
    let mut out: Vec<u128> = if 2 * m <= len {
        let mut seen = HashSet::with_capacity(m as usize);
        while (seen.len() as u128) < m {
            seen.insert(rng.gen_range(0..len));
        }
        seen.into_iter().collect()
    } else {
        // here len < 2m, so walking the whole range is cheap
        let mut skip = HashSet::new();
        while (skip.len() as u128) < len - m {
            skip.insert(rng.gen_range(0..len));
        }
        (0..len).filter(|x| !skip.contains(x)).collect()
    };
    out.sort_unstable();
    out
}

fn sample_with<R: Rng + ?Sized>(ranker: &EdgeRanker, pv: &PartitionVector, r: usize, m: u64, rng: &mut R) -> Hypergraph {
    let edges = sample_ranks(ranker.len(), m, rng).into_iter().map(|x| ranker.unrank(x)).collect();
    // ranks and edges share one order, so the list is already sorted and distinct
    Hypergraph::from_sorted_unchecked(pv.clone(), r, edges)
}

fn ranker_for(pv: &PartitionVector, r: usize, m: u64) -> Result<EdgeRanker> {
    let ranker = EdgeRanker::new(pv, r)?;
    if m as u128 > ranker.len() {
        return domain(format!("m = {m} exceeds the {} available edges", ranker.len()));
    }
    Ok(ranker)
}

/// A uniformly random element of `H_r(n⃗, m)`.
pub fn sample_hypergraph<R: Rng + ?Sized>(pv: &PartitionVector, r: usize, m: u64, rng: &mut R) -> Result<Hypergraph> {
    let ranker = ranker_for(pv, r, m)?;
    Ok(sample_with(&ranker, pv, r, m, rng))
}

/// Folds `trials` uniform samples chunk by chunk; one accumulator per chunk,
/// in chunk order.
pub fn par_samples<T, G, F>(
    pv: &PartitionVector,
    r: usize,
    m: u64,
    trials: u64,
    seed: u64,
    init: G,
    fold: F,
) -> Result<Vec<T>>
where
    T: Send,
    G: Fn() -> T + Sync,
    F: Fn(&mut T, &Hypergraph) + Sync,
{
    let ranker = ranker_for(pv, r, m)?;
    let chunks = trials.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c);
            let mut acc = init();
            let n = CHUNK.min(trials - c * CHUNK);
            for _ in 0..n {
                let h = sample_with(&ranker, pv, r, m, &mut rng);
                fold(&mut acc, &h);
            }
            acc
        })
        .collect())
}

/// `P(T ⊆ H) = [m]_t / [σ_r]_t` for a fixed set `T` of `t` distinct edges.
pub fn edge_subset_probability(pv: &PartitionVector, r: usize, m: u64, t: u64) -> Result<BigRational> {
    let s = sigma(pv, r)?;
    if t > m {
        return domain(format!("t = {t} exceeds m = {m}"));
    }
    if BigUint::from(m) > s {
        return domain(format!("m = {m} exceeds sigma_r = {s}"));
    }
    let p = uint_ratio(&falling_factorial_u64(m, t), &falling_factorial_big_u(&s, t));
    assert!(p <= subset_probability_bound(&s, m, t), "[m]_t/[sigma]_t above (m/sigma)^t");
    Ok(p)
}

/// `(m/σ_r)^t`.
pub fn subset_probability_bound(sigma_r: &BigUint, m: u64, t: u64) -> BigRational {
    let base = uint_ratio(&BigUint::from(m), sigma_r);
    Pow::pow(base, t as u32)
}

fn falling_factorial_big_u(x: &BigUint, t: u64) -> BigUint {
    (0..t).fold(BigUint::from(1u32), |acc, i| acc * (x - BigUint::from(i)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapPairs {
    /// Expected number of linked pairs in a uniform `H`.
    pub exact: String,
    pub linked_pair_count: String,
}

/// Unordered pairs `{e, f} ⊂ E_r` with `|e ∩ f| ≥ 2`, and the expected number
/// of them inside a uniform `H ∈ H_r(n⃗, m)`.
pub fn expected_overlap_pairs(pv: &PartitionVector, r: usize, m: u64, max_edges: u64) -> Result<(BigUint, BigRational)> {
    let s = sigma(pv, r)?;
    guard("expected_overlap_pairs", &s, max_edges.min(MAX_TABLE_EDGES as u64))?;
    let edges: Vec<Edge> = crate::hypergraphs::edge_space(pv, r)?.collect();
    let mut count = 0u64;
    for (i, e) in edges.iter().enumerate() {
        count += edges[i + 1..].iter().filter(|f| e.overlap(f) >= 2).count() as u64;
    }
    let count = BigUint::from(count);
    let exact = if BigUint::from(m) > s || s < BigUint::from(2u32) {
        BigRational::from(BigInt::from(0))
    } else {
        uint_ratio(&(&count * falling_factorial_u64(m, 2)), &falling_factorial_big_u(&s, 2))
    };
    Ok((count, exact))
}

/// Same as [`expected_overlap_pairs`], in the serialisable form.
pub fn overlap_pairs_record(pv: &PartitionVector, r: usize, m: u64, max_edges: u64) -> Result<OverlapPairs> {
    let (count, exact) = expected_overlap_pairs(pv, r, m, max_edges)?;
    Ok(OverlapPairs { exact: exact.to_string(), linked_pair_count: count.to_string() })
}

/// Linked pairs inside one hypergraph.
pub fn linked_pairs(h: &Hypergraph) -> u64 {
    let e = h.edges();
    let mut n = 0;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            if e[i].overlap(&e[j]) >= 2 {
                n += 1;
            }
        }
    }
    n
}

fn stratum_and_links(h: &Hypergraph, threshold: u64) -> (Stratum, u64) {
    let e = h.edges();
    let m = e.len();
    let mut ov = vec![0u8; m * m];
    let mut links = 0;
    for i in 0..m {
        for j in i + 1..m {
            let o = e[i].overlap(&e[j]);
            ov[i * m + j] = o as u8;
            ov[j * m + i] = o as u8;
            if o >= 2 {
                links += 1;
            }
        }
    }
    (classify_by_overlap(m, |i, j| ov[i * m + j] as usize, threshold), links)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub parts: Vec<u64>,
    pub r: usize,
    pub m: u64,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub seed: u64,
    /// Samples in each `C_t⁺`.
    pub cluster_histogram: BTreeMap<u64, u64>,
    /// Samples outside `H_r⁺`, by the first failed property.
    pub violation_counts: BTreeMap<String, u64>,
    /// Mean number of linked pairs per sample.
    pub linked_pairs_mean: f64,
    pub linked_pairs_stderr: f64,
}

#[derive(Default)]
struct Tally {
    hist: BTreeMap<u64, u64>,
    bad: BTreeMap<Violation, u64>,
    links: f64,
    links_sq: f64,
}

/// Seeded estimate of the probability that a uniform `H` is linear.
pub fn estimate_linear_probability(pv: &PartitionVector, r: usize, m: u64, trials: u64, seed: u64) -> Result<SampleReport> {
    if trials == 0 {
        return domain("trials must be at least 1");
    }
    let threshold = if r >= 2 { threshold_m(pv, r, m)? } else { u64::MAX };
    let parts = par_samples(pv, r, m, trials, seed, Tally::default, |acc, h| {
        let (stratum, links) = stratum_and_links(h, threshold);
        match stratum {
            Stratum::InPlus(t) => *acc.hist.entry(t).or_default() += 1,
            Stratum::NotPlus(v) => *acc.bad.entry(v).or_default() += 1,
        }
        acc.links += links as f64;
        acc.links_sq += (links * links) as f64;
    })?;
    let mut total = Tally::default();
    for p in parts {
        for (t, c) in p.hist {
            *total.hist.entry(t).or_default() += c;
        }
        for (v, c) in p.bad {
            *total.bad.entry(v).or_default() += c;
        }
        total.links += p.links;
        total.links_sq += p.links_sq;
    }
    let hits = total.hist.get(&0).copied().unwrap_or(0);
    let n = trials as f64;
    let p_hat = hits as f64 / n;
    let mean = total.links / n;
    let var = if trials > 1 { (total.links_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    Ok(SampleReport {
        parts: pv.sizes().to_vec(),
        r,
        m,
        trials,
        hits,
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / n).sqrt(),
        seed,
        cluster_histogram: total.hist,
        violation_counts: total.bad.into_iter().map(|(v, c)| (v.to_string(), c)).collect(),
        linked_pairs_mean: mean,
        linked_pairs_stderr: (var / n).sqrt(),
    })
}

/// Sampled fractions of `H_r⁺` and of each way of falling outside it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterStats {
    pub plus_fraction: f64,
    pub overlap_ge3_fraction: f64,
    pub cluster_gt2_fraction: f64,
    pub too_many_clusters_fraction: f64,
}

pub fn cluster_stats(report: &SampleReport) -> ClusterStats {
    let n = report.trials as f64;
    let frac = |v: Violation| report.violation_counts.get(&v.to_string()).copied().unwrap_or(0) as f64 / n;
    ClusterStats {
        plus_fraction: report.cluster_histogram.values().sum::<u64>() as f64 / n,
        overlap_ge3_fraction: frac(Violation::OverlapGe3),
        cluster_gt2_fraction: frac(Violation::ClusterGt2Edges),
        too_many_clusters_fraction: frac(Violation::TooManyClusters),
    }
}
