//! Partite edges, hypergraphs, links and clusters.
//!
//! Two edges are *linked* when they share at least two vertices; a *link* is a
//! vertex pair lying in two distinct edges. The linked-edges graph has one node
//! per edge, and its components with two or more edges are the *clusters*.
//! [`classify`] sorts a hypergraph into the strata `C_t⁺` (every cluster is a
//! pair of edges meeting in exactly two vertices, and there are `t ≤ M` of
//! them) or reports why it falls outside.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::partitions::{sigmas, PartitionVector};

/// A sorted `r`-set of vertices meeting each part at most once.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Edge(Vec<u32>);

impl Edge {
    /// Validates the vertex set against `pv`; the input need not be sorted.
    pub fn new(pv: &PartitionVector, mut vertices: Vec<u32>) -> Result<Self> {
        vertices.sort_unstable();
        let mut last_part = None;
        for w in vertices.windows(2) {
            if w[0] == w[1] {
                return domain(format!("vertex {} repeated in edge", w[0]));
            }
        }
        for &v in &vertices {
            let part = match pv.part_of(v) {
                Some(p) => p,
                None => return domain(format!("vertex {v} outside 1..={}", pv.n())),
            };
            if last_part == Some(part) {
                return domain(format!("edge {vertices:?} meets part {part} twice"));
            }
            last_part = Some(part);
        }
        Ok(Edge(vertices))
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Part indices touched by the edge, in increasing order.
    pub fn parts(&self, pv: &PartitionVector) -> Vec<usize> {
        self.0.iter().map(|&v| pv.part_of(v).expect("validated edge")).collect()
    }

    /// `|self ∩ other|`.
    pub fn overlap(&self, other: &Edge) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let v = &self.0;
        (0..v.len()).flat_map(move |i| (i + 1..v.len()).map(move |j| (v[i], v[j])))
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lexicographic stream over `E_r(n⃗)`.
pub struct EdgeSpace<'a> {
    pv: &'a PartitionVector,
    r: usize,
    current: Option<Vec<u32>>,
    started: bool,
}

/// Every edge of `E_r(n⃗)` once, in lexicographic order of vertex sequences.
pub fn edge_space(pv: &PartitionVector, r: usize) -> Result<EdgeSpace<'_>> {
    pv.check_uniformity(r)?;
    let first: Vec<u32> = (0..r).map(|i| pv.first_vertex(i)).collect();
    Ok(EdgeSpace { pv, r, current: Some(first), started: false })
}

impl EdgeSpace<'_> {
    fn advance(&mut self) {
        let pv = self.pv;
        let (k, r, n) = (pv.k(), self.r, pv.n() as u32);
        let cur = match self.current.as_mut() {
            Some(c) => c,
            None => return,
        };
        for i in (0..r).rev() {
            let v = cur[i] + 1;
            if v > n {
                continue;
            }
            let part = pv.part_of(v).unwrap();
            // r - 1 - i more vertices must fit in the parts after `part`
            if k - 1 - part < r - 1 - i {
                continue;
            }
            cur[i] = v;
            for j in i + 1..r {
                let next_part = pv.part_of(cur[j - 1]).unwrap() + 1;
                cur[j] = pv.first_vertex(next_part);
            }
            return;
        }
        self.current = None;
    }
}

impl Iterator for EdgeSpace<'_> {
    type Item = Edge;

    fn next(&mut self) -> Option<Edge> {
        if self.started {
            self.advance();
        }
        self.started = true;
        self.current.as_ref().map(|c| Edge(c.clone()))
    }
}

/// Bijection between `E_r(n⃗)` and `0..σ_r` that agrees with the order of
/// [`edge_space`].
///
/// Built on the suffix table `T[i][j] = σ_j(n_i, …, n_k)`: at part `i` with `j`
/// vertices still to place, the block of edges using part `i` has
/// `n_i · T[i+1][j-1]` members and precedes every edge that skips it.
#[derive(Clone, Debug)]
pub struct EdgeRanker {
    pv: PartitionVector,
    r: usize,
    suffix: Vec<Vec<u128>>,
}

impl EdgeRanker {
    pub fn new(pv: &PartitionVector, r: usize) -> Result<Self> {
        pv.check_uniformity(r)?;
        let k = pv.k();
        let mut suffix = vec![vec![0u128; r + 1]; k + 1];
        suffix[k][0] = 1;
        for i in (0..k).rev() {
            suffix[i][0] = 1;
            for j in 1..=r {
                let take = (pv.sizes()[i] as u128).checked_mul(suffix[i + 1][j - 1]);
                let total = take.and_then(|t| t.checked_add(suffix[i + 1][j]));
                suffix[i][j] = match total {
                    Some(t) => t,
                    None => return domain("sigma_r does not fit in 128 bits"),
                };
            }
        }
        Ok(EdgeRanker { pv: pv.clone(), r, suffix })
    }

    /// `σ_r(n⃗)`.
    pub fn len(&self) -> u128 {
        self.suffix[0][self.r]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unrank(&self, mut rank: u128) -> Edge {
        assert!(rank < self.len(), "rank out of range");
        let mut out = Vec::with_capacity(self.r);
        let mut need = self.r;
        for (i, &size) in self.pv.sizes().iter().enumerate() {
            if need == 0 {
                break;
            }
            let width = self.suffix[i + 1][need - 1];
            let block = size as u128 * width;
            if rank < block {
                out.push(self.pv.first_vertex(i) + (rank / width) as u32);
                rank %= width;
                need -= 1;
            } else {
                rank -= block;
            }
        }
        Edge(out)
    }

    pub fn rank(&self, edge: &Edge) -> u128 {
        let mut rank = 0u128;
        let mut need = self.r;
        let mut vs = edge.vertices().iter().peekable();
        for (i, &size) in self.pv.sizes().iter().enumerate() {
            let Some(&&v) = vs.peek() else { break };
            let width = self.suffix[i + 1][need - 1];
            if self.pv.part_of(v) == Some(i) {
                rank += u128::from(v - self.pv.first_vertex(i)) * width;
                need -= 1;
                vs.next();
            } else {
                rank += size as u128 * width;
            }
        }
        rank
    }
}

/// A `k`-partite `r`-uniform hypergraph with a fixed vertex partition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    pv: PartitionVector,
    r: usize,
    edges: Vec<Edge>,
}

impl Hypergraph {
    /// Validates every edge and rejects duplicates; edges are stored sorted.
    pub fn new(pv: PartitionVector, r: usize, edges: Vec<Edge>) -> Result<Self> {
        pv.check_uniformity(r)?;
        let mut checked = Vec::with_capacity(edges.len());
        for e in edges {
            if e.len() != r {
                return domain(format!("edge {e} has {} vertices, expected {r}", e.len()));
            }
            checked.push(Edge::new(&pv, e.0)?);
        }
        checked.sort();
        if let Some(w) = checked.windows(2).find(|w| w[0] == w[1]) {
            return domain(format!("duplicate edge {}", w[0]));
        }
        Ok(Hypergraph { pv, r, edges: checked })
    }

    /// From vertex lists, for tests and fixtures.
    pub fn from_vertex_lists(pv: PartitionVector, r: usize, lists: &[&[u32]]) -> Result<Self> {
        let edges = lists
            .iter()
            .map(|l| Edge::new(&pv, l.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pv, r, edges)
    }

    pub(crate) fn from_sorted_unchecked(pv: PartitionVector, r: usize, edges: Vec<Edge>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        Hypergraph { pv, r, edges }
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

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    /// Parses the text form with an explicit uniformity, needed when there are no edges.
    pub fn parse(text: &str, r: Option<usize>) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let sizes = header
            .strip_prefix("parts:")
            .ok_or_else(|| Error::Parse(format!("expected `parts:` header, got `{header}`")))?;
        let sizes = parse_list::<u64>(sizes)?;
        let pv = PartitionVector::new(sizes)?;
        let lists = lines.map(parse_list::<u32>).collect::<Result<Vec<_>>>()?;
        let r = match (r, lists.first()) {
            (Some(r), _) => r,
            (None, Some(first)) => first.len(),
            (None, None) => return Err(Error::Parse("cannot infer r from a hypergraph with no edges".into())),
        };
        let edges = lists.into_iter().map(|l| Edge::new(&pv, l)).collect::<Result<Vec<_>>>()?;
        Self::new(pv, r, edges)
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad number `{}`", x.trim()))))
        .collect()
}

/// Canonical text form: `parts: n_1,…,n_k` then one sorted edge per line.
impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "parts: {}", self.pv)?;
        for e in &self.edges {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for Hypergraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, None)
    }
}

/// Links, the linked-edges graph and its non-trivial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterDecomposition {
    pub links: BTreeSet<(u32, u32)>,
    /// Adjacency lists over edge indices of the hypergraph.
    pub adjacency: Vec<Vec<usize>>,
    /// Components with at least two edges, each sorted, ordered by smallest index.
    pub clusters: Vec<Vec<usize>>,
}

pub fn decompose(h: &Hypergraph) -> ClusterDecomposition {
    let m = h.m();
    let mut pair_count: HashMap<(u32, u32), usize> = HashMap::new();
    for e in h.edges() {
        for p in e.pairs() {
            *pair_count.entry(p).or_default() += 1;
        }
    }
    let links = pair_count.into_iter().filter(|&(_, c)| c >= 2).map(|(p, _)| p).collect();

    let mut adjacency = vec![Vec::new(); m];
    for i in 0..m {
        for j in i + 1..m {
            if h.edges[i].overlap(&h.edges[j]) >= 2 {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }

    let mut seen = vec![false; m];
    let mut clusters = Vec::new();
    for start in 0..m {
        if seen[start] || adjacency[start].is_empty() {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &w in &adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        clusters.push(comp);
    }
    ClusterDecomposition { links, adjacency, clusters }
}

/// True iff no two edges share two or more vertices.
pub fn is_linear(h: &Hypergraph) -> bool {
    let e = h.edges();
    (0..e.len()).all(|i| (i + 1..e.len()).all(|j| e[i].overlap(&e[j]) <= 1))
}

/// `M = ⌈ln n + 56 σ_{r−2}² σ_2 m² / σ_r²⌉`, saturating at `u64::MAX`.
pub fn threshold_m(pv: &PartitionVector, r: usize, m: u64) -> Result<u64> {
    pv.check_uniformity(r)?;
    if r < 2 {
        return domain("threshold M needs r >= 2");
    }
    let sig = sigmas(pv, r);
    let num = BigInt::from(56u32) * BigInt::from(&sig[r - 2] * &sig[r - 2] * &sig[2]) * BigInt::from(m) * m;
    let den = BigInt::from(&sig[r] * &sig[r]);
    let (whole, rem) = num.div_rem(&den);
    let frac = BigRational::new(rem, den).to_f64().unwrap_or(0.0);
    let n = pv.n();
    let tail = if n == 1 {
        // ln 1 = 0, so the ceiling is exact on the rational part alone
        if frac == 0.0 { 0 } else { 1 }
    } else {
        ((n as f64).ln() + frac).ceil() as u64
    };
    Ok((whole + BigInt::from(tail)).to_u64().unwrap_or(u64::MAX))
}

/// Why a hypergraph is outside `H_r⁺`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Violation {
    /// Two edges share three or more vertices.
    #[serde(rename = "OverlapGE3")]
    OverlapGe3,
    /// Some cluster has more than two edges.
    #[serde(rename = "ClusterGT2Edges")]
    ClusterGt2Edges,
    /// More than `M` clusters.
    TooManyClusters,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::OverlapGe3 => "OverlapGE3",
            Violation::ClusterGt2Edges => "ClusterGT2Edges",
            Violation::TooManyClusters => "TooManyClusters",
        })
    }
}

/// Stratum label produced by [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stratum {
    /// In `C_t⁺`; `InPlus(0)` is exactly the linear class.
    InPlus(u64),
    NotPlus(Violation),
}

/// Classification from an overlap oracle on edge indices `0..m`.
///
/// Overlaps of three or more are reported first, then oversized clusters,
/// then the cluster-count cap.
pub fn classify_by_overlap(m: usize, overlap: impl Fn(usize, usize) -> usize, max_clusters: u64) -> Stratum {
    // union-find over the linked-edges graph
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut wide = false;
    for i in 0..m {
        for j in i + 1..m {
            let o = overlap(i, j);
            if o >= 2 {
                if o >= 3 {
                    wide = true;
                }
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    if wide {
        return Stratum::NotPlus(Violation::OverlapGe3);
    }
    let mut size = vec![0usize; m];
    for i in 0..m {
        let root = find(&mut parent, i);
        size[root] += 1;
    }
    if size.iter().any(|&s| s > 2) {
        return Stratum::NotPlus(Violation::ClusterGt2Edges);
    }
    let t = size.iter().filter(|&&s| s == 2).count() as u64;
    if t > max_clusters {
        Stratum::NotPlus(Violation::TooManyClusters)
    } else {
        Stratum::InPlus(t)
    }
}

pub fn classify(h: &Hypergraph, max_clusters: u64) -> Stratum {
    let e = h.edges();
    classify_by_overlap(e.len(), |i, j| e[i].overlap(&e[j]), max_clusters)
}
