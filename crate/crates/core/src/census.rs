//! Exact counts at desk scale.
//!
//! [`count_linear`] walks a depth-first search over edges in canonical order,
//! only extending by later edges whose vertex pairs are all still free.
//! [`census_by_cluster`] instead visits every `m`-subset of `E_r(n⃗)` and
//! classifies it, which gives the full stratification `|C_t⁺|`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::{Serialize, SerializeMap, SerializeStruct, Serializer};

use crate::error::{domain, Error, Result};
use crate::hypergraphs::{classify_by_overlap, edge_space, threshold_m, Edge, Stratum, Violation};
use crate::partitions::{sigma, PartitionVector};
use crate::util::{binomial, uint_ratio};

/// Default cap on elementary pair checks for exhaustive work.
pub const DEFAULT_WORK_CEILING: u64 = 100_000_000;

/// Largest edge space for which the full overlap matrix is materialized.
pub const MAX_TABLE_EDGES: usize = 8192;

/// Estimated pair checks for visiting every `m`-subset: `C(σ_r, m) · max(1, C(m, 2))`.
pub fn work_estimate(sigma_r: &BigUint, m: u64) -> BigUint {
    let pairs = (m * m.saturating_sub(1) / 2).max(1);
    binomial(sigma_r, m) * pairs
}

pub(crate) fn guard(what: &'static str, needed: &BigUint, ceiling: u64) -> Result<()> {
    if *needed > BigUint::from(ceiling) {
        return Err(Error::Resource { what, needed: needed.to_string(), ceiling });
    }
    Ok(())
}

/// `E_r(n⃗)` in canonical order with precomputed vertex-pair ids and,
/// optionally, the full overlap matrix and linked-neighbour lists.
#[derive(Clone, Debug)]
pub struct EdgeTable {
    pv: PartitionVector,
    r: usize,
    edges: Vec<Edge>,
    pair_ids: Vec<Vec<u32>>,
    num_pairs: usize,
    overlap: Vec<u8>,
    linked: Vec<Vec<u32>>,
}

impl EdgeTable {
    /// Edges and pair ids only.
    pub fn new(pv: &PartitionVector, r: usize) -> Result<Self> {
        let edges: Vec<Edge> = edge_space(pv, r)?.collect();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pair_ids = Vec::with_capacity(edges.len());
        for e in &edges {
            let v = e.vertices();
            let mut own = Vec::with_capacity(r * (r - 1) / 2);
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    let next = ids.len() as u32;
                    own.push(*ids.entry((v[i], v[j])).or_insert(next));
                }
            }
            pair_ids.push(own);
        }
        Ok(EdgeTable {
            pv: pv.clone(),
            r,
            edges,
            pair_ids,
            num_pairs: ids.len(),
            overlap: Vec::new(),
            linked: Vec::new(),
        })
    }

    /// Edges plus the `σ_r × σ_r` overlap matrix.
    pub fn with_overlaps(pv: &PartitionVector, r: usize) -> Result<Self> {
        let mut t = Self::new(pv, r)?;
        let e = t.edges.len();
        if e > MAX_TABLE_EDGES {
            return Err(Error::Resource {
                what: "overlap table",
                needed: (e * e).to_string(),
                ceiling: (MAX_TABLE_EDGES * MAX_TABLE_EDGES) as u64,
            });
        }
        t.overlap = vec![0; e * e];
        t.linked = vec![Vec::new(); e];
        for i in 0..e {
            t.overlap[i * e + i] = r as u8;
            for j in i + 1..e {
                let o = t.edges[i].overlap(&t.edges[j]) as u8;
                t.overlap[i * e + j] = o;
                t.overlap[j * e + i] = o;
                if o >= 2 {
                    t.linked[i].push(j as u32);
                    t.linked[j].push(i as u32);
                }
            }
        }
        Ok(t)
    }

    pub fn pv(&self) -> &PartitionVector {
        &self.pv
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `|e_i ∩ e_j|`; requires [`EdgeTable::with_overlaps`].
    #[inline]
    pub fn overlap(&self, i: usize, j: usize) -> usize {
        self.overlap[i * self.edges.len() + j] as usize
    }

    /// Indices `j ≠ i` with `|e_i ∩ e_j| ≥ 2`; requires [`EdgeTable::with_overlaps`].
    pub fn linked(&self, i: usize) -> &[u32] {
        &self.linked[i]
    }

    pub fn index_of(&self, e: &Edge) -> Option<usize> {
        self.edges.binary_search(e).ok()
    }

    /// Stratum of the subset given by sorted edge indices.
    pub fn classify(&self, idx: &[usize], max_clusters: u64) -> Stratum {
        classify_by_overlap(idx.len(), |a, b| self.overlap(idx[a], idx[b]), max_clusters)
    }
}

/// `|H_r(n⃗, m)| = C(σ_r, m)`.
pub fn count_all(pv: &PartitionVector, r: usize, m: u64) -> Result<BigUint> {
    let s = sigma(pv, r)?;
    if BigUint::from(m) > s {
        return domain(format!("m = {m} exceeds sigma_r = {s}"));
    }
    Ok(binomial(&s, m))
}

fn dfs_count(table: &EdgeTable, used: &mut [bool], start: usize, left: usize) -> u64 {
    if left == 0 {
        return 1;
    }
    let e = table.edges.len();
    let mut total = 0;
    // at least `left` edges must remain after `i`
    for i in start..=e.saturating_sub(left) {
        let pairs = &table.pair_ids[i];
        if pairs.iter().any(|&p| used[p as usize]) {
            continue;
        }
        for &p in pairs {
            used[p as usize] = true;
        }
        total += dfs_count(table, used, i + 1, left - 1);
        for &p in pairs {
            used[p as usize] = false;
        }
    }
    total
}

/// `|L_r(n⃗, m)|` by pruned depth-first search.
pub fn count_linear(pv: &PartitionVector, r: usize, m: u64, ceiling: u64) -> Result<BigUint> {
    let s = sigma(pv, r)?;
    guard("count_linear", &work_estimate(&s, m), ceiling)?;
    if m == 0 {
        return Ok(BigUint::one());
    }
    if BigUint::from(m) > s {
        return Ok(BigUint::zero());
    }
    let table = EdgeTable::new(pv, r)?;
    let m = m as usize;
    let e = table.len();
    let total: u64 = (0..=e - m)
        .into_par_iter()
        .map(|first| {
            let mut used = vec![false; table.num_pairs];
            for &p in &table.pair_ids[first] {
                used[p as usize] = true;
            }
            dfs_count(&table, &mut used, first + 1, m - 1)
        })
        .sum();
    Ok(BigUint::from(total))
}

/// Exact counts stratified by cluster number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusResult {
    pub total: BigUint,
    pub linear: BigUint,
    /// `t ↦ |C_t⁺|` for every `t ≤ min(M, ⌊m/2⌋)`; larger strata are empty.
    pub by_cluster: BTreeMap<u64, BigUint>,
    pub not_plus: BigUint,
    /// Breakdown of `not_plus` by the first property that fails.
    pub violations: BTreeMap<Violation, BigUint>,
    /// The threshold `M` used for property (b).
    pub threshold: u64,
}

impl CensusResult {
    /// `|C_t⁺|`, zero for strata not listed.
    pub fn stratum(&self, t: u64) -> BigUint {
        self.by_cluster.get(&t).cloned().unwrap_or_default()
    }

    pub fn plus_total(&self) -> BigUint {
        self.by_cluster.values().sum()
    }

    /// `Σ_t |C_t⁺| / |C_0⁺|`, when the linear class is nonempty.
    pub fn stratum_ratio_sum(&self) -> Option<BigRational> {
        if self.linear.is_zero() {
            return None;
        }
        Some(uint_ratio(&self.plus_total(), &self.linear))
    }

    /// Checks the three bookkeeping identities.
    pub fn check_invariants(&self, pv: &PartitionVector, r: usize, m: u64) -> Result<()> {
        if self.total != count_all(pv, r, m)? {
            return domain("total != C(sigma_r, m)");
        }
        if self.linear != self.stratum(0) {
            return domain("linear != by_cluster[0]");
        }
        if self.plus_total() + &self.not_plus != self.total {
            return domain("strata do not sum to total");
        }
        if self.violations.values().sum::<BigUint>() != self.not_plus {
            return domain("violation breakdown does not sum to not_plus");
        }
        Ok(())
    }
}

/// JSON with decimal-string integers: `total`, `linear`, `by_cluster`, `not_plus`, `M`.
impl Serialize for CensusResult {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        struct Strata<'a>(&'a BTreeMap<u64, BigUint>);
        impl Serialize for Strata<'_> {
            fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = ser.serialize_map(Some(self.0.len()))?;
                for (t, c) in self.0 {
                    map.serialize_entry(&t.to_string(), &c.to_string())?;
                }
                map.end()
            }
        }
        let mut st = ser.serialize_struct("CensusResult", 5)?;
        st.serialize_field("total", &self.total.to_string())?;
        st.serialize_field("linear", &self.linear.to_string())?;
        st.serialize_field("by_cluster", &Strata(&self.by_cluster))?;
        st.serialize_field("not_plus", &self.not_plus.to_string())?;
        st.serialize_field("M", &self.threshold.to_string())?;
        st.end()
    }
}

#[derive(Default)]
struct Tally {
    plus: BTreeMap<u64, u64>,
    bad: BTreeMap<Violation, u64>,
}

impl Tally {
    fn add(&mut self, s: Stratum) {
        match s {
            Stratum::InPlus(t) => *self.plus.entry(t).or_default() += 1,
            Stratum::NotPlus(v) => *self.bad.entry(v).or_default() += 1,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (t, c) in other.plus {
            *self.plus.entry(t).or_default() += c;
        }
        for (v, c) in other.bad {
            *self.bad.entry(v).or_default() += c;
        }
        self
    }
}

/// Every `m`-subset of `0..e`, grouped by first index and visited in parallel.
pub(crate) fn par_subsets<T, F, G>(e: usize, m: usize, init: G, fold: F) -> Vec<T>
where
    T: Send,
    G: Fn() -> T + Sync,
    F: Fn(&mut T, &[usize]) + Sync,
{
    if m == 0 {
        let mut acc = init();
        fold(&mut acc, &[]);
        return vec![acc];
    }
    if m > e {
        return vec![];
    }
    (0..=e - m)
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            let mut tail: Vec<usize> = (first + 1..first + m).collect();
            let mut idx = vec![0usize; m];
            idx[0] = first;
            loop {
                idx[1..].copy_from_slice(&tail);
                fold(&mut acc, &idx);
                if !advance_tail(&mut tail, e) {
                    break;
                }
            }
            acc
        })
        .collect()
}

/// Next combination of `tail` among values `< e`, keeping its lower bound fixed.
fn advance_tail(tail: &mut [usize], e: usize) -> bool {
    let k = tail.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if tail[i] < e - k + i {
            tail[i] += 1;
            for j in i + 1..k {
                tail[j] = tail[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive census: classify every `m`-subset of `E_r(n⃗)`.
pub fn census_by_cluster(pv: &PartitionVector, r: usize, m: u64, ceiling: u64) -> Result<CensusResult> {
    let s = sigma(pv, r)?;
    guard("census_by_cluster", &work_estimate(&s, m), ceiling)?;
    let threshold = threshold_m(pv, r, m)?;
    let total = binomial(&s, m);
    let tally = if BigUint::from(m) > s {
        Tally::default()
    } else {
        let table = EdgeTable::with_overlaps(pv, r)?;
        par_subsets(table.len(), m as usize, Tally::default, |acc, idx| acc.add(table.classify(idx, threshold)))
            .into_iter()
            .fold(Tally::default(), Tally::merge)
    };
    let top = threshold.min(m / 2);
    let by_cluster: BTreeMap<u64, BigUint> =
        (0..=top).map(|t| (t, BigUint::from(tally.plus.get(&t).copied().unwrap_or(0)))).collect();
    let violations: BTreeMap<Violation, BigUint> =
        tally.bad.iter().map(|(&v, &c)| (v, BigUint::from(c))).collect();
    Ok(CensusResult {
        linear: by_cluster[&0].clone(),
        not_plus: violations.values().sum(),
        total,
        by_cluster,
        violations,
        threshold,
    })
}

/// `P_r(n⃗, m) = |L_r| / |H_r|`.
pub fn exact_linear_probability(pv: &PartitionVector, r: usize, m: u64, ceiling: u64) -> Result<BigRational> {
    let all = count_all(pv, r, m)?;
    let lin = count_linear(pv, r, m, ceiling)?;
    Ok(uint_ratio(&lin, &all))
}
