//! Forward and reverse switchings between neighbouring strata.
//!
//! A forward switching takes `H ∈ C_t⁺`, deletes one of its `t` two-edge
//! clusters `{e, f}` and adds an edge `e₁` overlapping every remaining edge in
//! at most one vertex, then an edge `e₂` with the same property relative to
//! the remaining edges and `e₁`. The result lies in `C_{t−1}⁺`. A reverse
//! switching deletes an ordered pair of link-free edges and inserts a pair
//! `{e, f}` meeting in exactly two vertices, neither of which is linked to
//! anything left behind.
//!
//! Pairing a forward move `({e,f}, (e₁,e₂))` with the reverse move
//! `((e₁,e₂), {e,f})` is a bijection between all forward moves out of `C_t⁺`
//! and all reverse moves out of `C_{t−1}⁺`, which [`bijection_audit`] checks
//! by exhaustive enumeration.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::census::{guard, par_subsets, work_estimate, EdgeTable};
use crate::error::{domain, Result};
use crate::hypergraphs::{classify, decompose, edge_space, threshold_m, Edge, Hypergraph, Stratum};
use crate::partitions::{sigma, sigma_signed, sigmas, PartitionVector};
use crate::util::{binomial, falling_factorial_u64, to_f64, uint_ratio};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ForwardMove {
    /// The two edges of the deleted cluster, sorted.
    pub cluster: [Edge; 2],
    /// `(e₁, e₂)` in insertion order.
    pub replacement: (Edge, Edge),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ReverseMove {
    /// `(e₁, e₂)` in deletion order.
    pub removed: (Edge, Edge),
    /// The inserted pair, sorted.
    pub inserted: [Edge; 2],
}

impl ForwardMove {
    pub fn paired(&self) -> ReverseMove {
        ReverseMove { removed: self.replacement.clone(), inserted: self.cluster.clone() }
    }
}

impl ReverseMove {
    pub fn paired(&self) -> ForwardMove {
        ForwardMove { cluster: self.inserted.clone(), replacement: self.removed.clone() }
    }
}

fn sorted_pair(a: Edge, b: Edge) -> [Edge; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

fn link_free_against(x: &Edge, others: &[&Edge]) -> bool {
    others.iter().all(|g| x.overlap(g) <= 1)
}

fn stratum_of(h: &Hypergraph) -> Result<(u64, u64)> {
    let threshold = threshold_m(h.pv(), h.r(), h.m() as u64)?;
    match classify(h, threshold) {
        Stratum::InPlus(t) => Ok((t, threshold)),
        Stratum::NotPlus(v) => domain(format!("hypergraph is outside every stratum ({v})")),
    }
}

fn check_r(h: &Hypergraph) -> Result<()> {
    if h.r() < 3 {
        return domain("switchings need r >= 3");
    }
    Ok(())
}

/// Every forward switching applicable to `h ∈ C_t⁺`, `t ≥ 1`.
pub fn enumerate_forward(h: &Hypergraph) -> Result<Vec<ForwardMove>> {
    check_r(h)?;
    let (t, _) = stratum_of(h)?;
    if t == 0 {
        return domain("forward switchings need at least one cluster");
    }
    let space: Vec<Edge> = edge_space(h.pv(), h.r())?.collect();
    let mut moves = Vec::new();
    for cluster in decompose(h).clusters {
        let (a, b) = (cluster[0], cluster[1]);
        let rest: Vec<&Edge> =
            h.edges().iter().enumerate().filter(|&(i, _)| i != a && i != b).map(|(_, e)| e).collect();
        let allowed: Vec<&Edge> = space.iter().filter(|x| link_free_against(x, &rest)).collect();
        for &e1 in &allowed {
            for &e2 in &allowed {
                if e2.overlap(e1) <= 1 {
                    moves.push(ForwardMove {
                        cluster: sorted_pair(h.edges()[a].clone(), h.edges()[b].clone()),
                        replacement: (e1.clone(), e2.clone()),
                    });
                }
            }
        }
    }
    Ok(moves)
}

fn rebuild(h: &Hypergraph, drop: &[&Edge], add: &[&Edge]) -> Result<Hypergraph> {
    let mut edges: Vec<Edge> = h.edges().iter().filter(|e| !drop.contains(e)).cloned().collect();
    edges.extend(add.iter().map(|&e| e.clone()));
    Hypergraph::new(h.pv().clone(), h.r(), edges)
}

/// Applies a forward switching after checking that it is valid for `h`.
pub fn apply_forward(h: &Hypergraph, mv: &ForwardMove) -> Result<Hypergraph> {
    check_r(h)?;
    let (t, _) = stratum_of(h)?;
    let [e, f] = &mv.cluster;
    let (e1, e2) = (&mv.replacement.0, &mv.replacement.1);
    if t == 0 || !h.contains(e) || !h.contains(f) || e == f || e.overlap(f) != 2 {
        return domain("forward move does not name a two-edge cluster of the hypergraph");
    }
    let rest: Vec<&Edge> = h.edges().iter().filter(|g| *g != e && *g != f).collect();
    if !link_free_against(e, &rest) || !link_free_against(f, &rest) {
        return domain("forward move names edges that are not an isolated cluster");
    }
    if !link_free_against(e1, &rest) {
        return domain("e1 shares a link with the remaining edges");
    }
    if !link_free_against(e2, &rest) || e2.overlap(e1) > 1 {
        return domain("e2 shares a link with the remaining edges or e1");
    }
    for x in [e1, e2] {
        Edge::new(h.pv(), x.vertices().to_vec())?;
        if x.len() != h.r() {
            return domain("replacement edge has the wrong size");
        }
    }
    rebuild(h, &[e, f], &[e1, e2])
}

/// Every reverse switching applicable to `h ∈ C_{t−1}⁺`. Moves that would
/// leave `H_r⁺` (more than `M` clusters) are not switchings, so the list is
/// empty once `t − 1 = M`.
pub fn enumerate_reverse(h: &Hypergraph) -> Result<Vec<ReverseMove>> {
    check_r(h)?;
    let (s, threshold) = stratum_of(h)?;
    if s + 1 > threshold {
        return Ok(Vec::new());
    }
    let d = decompose(h);
    let mut in_cluster = vec![false; h.m()];
    for c in &d.clusters {
        for &i in c {
            in_cluster[i] = true;
        }
    }
    let free: Vec<usize> = (0..h.m()).filter(|&i| !in_cluster[i]).collect();
    let space: Vec<Edge> = edge_space(h.pv(), h.r())?.collect();
    let mut moves = Vec::new();
    for &i in &free {
        for &j in &free {
            if i == j {
                continue;
            }
            let rest: Vec<&Edge> =
                h.edges().iter().enumerate().filter(|&(x, _)| x != i && x != j).map(|(_, e)| e).collect();
            let allowed: Vec<&Edge> = space.iter().filter(|x| link_free_against(x, &rest)).collect();
            for (p, &e) in allowed.iter().enumerate() {
                for &f in &allowed[p + 1..] {
                    if e.overlap(f) == 2 {
                        moves.push(ReverseMove {
                            removed: (h.edges()[i].clone(), h.edges()[j].clone()),
                            inserted: [e.clone(), f.clone()],
                        });
                    }
                }
            }
        }
    }
    Ok(moves)
}

/// Applies a reverse switching after checking that it is valid for `h`.
pub fn apply_reverse(h: &Hypergraph, mv: &ReverseMove) -> Result<Hypergraph> {
    check_r(h)?;
    let (s, threshold) = stratum_of(h)?;
    if s + 1 > threshold {
        return domain("reverse switching would exceed the cluster threshold");
    }
    let (e1, e2) = (&mv.removed.0, &mv.removed.1);
    let [e, f] = &mv.inserted;
    if e1 == e2 || !h.contains(e1) || !h.contains(e2) {
        return domain("reverse move must remove two distinct edges of the hypergraph");
    }
    let others = |x: &Edge| -> Vec<&Edge> { h.edges().iter().filter(|g| *g != x).collect() };
    if !link_free_against(e1, &others(e1)) || !link_free_against(e2, &others(e2)) {
        return domain("removed edges must not contain a link");
    }
    let rest: Vec<&Edge> = h.edges().iter().filter(|g| *g != e1 && *g != e2).collect();
    if e.overlap(f) != 2 || !link_free_against(e, &rest) || !link_free_against(f, &rest) {
        return domain("inserted pair must meet in two vertices and avoid links with the rest");
    }
    for x in [e, f] {
        Edge::new(h.pv(), x.vertices().to_vec())?;
        if x.len() != h.r() {
            return domain("inserted edge has the wrong size");
        }
    }
    rebuild(h, &[e1, e2], &[e, f])
}

/// `allowed[x]` iff edge `x` overlaps every listed edge in at most one vertex.
fn allowed_mask(table: &EdgeTable, rest: impl Iterator<Item = usize>) -> Vec<bool> {
    let mut allowed = vec![true; table.len()];
    for g in rest {
        allowed[g] = false;
        for &y in table.linked(g) {
            allowed[y as usize] = false;
        }
    }
    allowed
}

/// Linked pairs inside a subset, as positions into `idx`.
fn linked_pairs(table: &EdgeTable, idx: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if table.overlap(idx[a], idx[b]) >= 2 {
                out.push((a, b));
            }
        }
    }
    out
}

/// `|R(H)|` for `H ∈ C_t⁺` given as sorted table indices.
pub fn count_forward_indexed(table: &EdgeTable, idx: &[usize]) -> u128 {
    let mut total = 0u128;
    for (a, b) in linked_pairs(table, idx) {
        let allowed = allowed_mask(table, (0..idx.len()).filter(|&p| p != a && p != b).map(|p| idx[p]));
        let size = allowed.iter().filter(|&&x| x).count() as u128;
        for x in (0..table.len()).filter(|&x| allowed[x]) {
            let blocked = table.linked(x).iter().filter(|&&y| allowed[y as usize]).count() as u128;
            // e2 ranges over allowed edges other than e1 and its linked neighbours
            total += size - 1 - blocked;
        }
    }
    total
}

/// `|R′(H″)|` for `H″ ∈ C_s⁺` given as sorted table indices; zero when `s ≥ M`.
pub fn count_reverse_indexed(table: &EdgeTable, idx: &[usize], s: u64, threshold: u64) -> u128 {
    if s + 1 > threshold {
        return 0;
    }
    let mut in_cluster = vec![false; idx.len()];
    for (a, b) in linked_pairs(table, idx) {
        in_cluster[a] = true;
        in_cluster[b] = true;
    }
    let free: Vec<usize> = (0..idx.len()).filter(|&p| !in_cluster[p]).collect();
    let mut total = 0u128;
    for (u, &a) in free.iter().enumerate() {
        for &b in &free[u + 1..] {
            let allowed = allowed_mask(table, (0..idx.len()).filter(|&p| p != a && p != b).map(|p| idx[p]));
            let mut pairs = 0u128;
            for x in (0..table.len()).filter(|&x| allowed[x]) {
                for &y in table.linked(x) {
                    let y = y as usize;
                    if y > x && allowed[y] && table.overlap(x, y) == 2 {
                        pairs += 1;
                    }
                }
            }
            // both deletion orders
            total += 2 * pairs;
        }
    }
    total
}

/// Bounds on `|R(H)|` and `|R′(H″)|` from the switching-count argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountBrackets {
    pub fwd_lo: BigRational,
    pub fwd_hi: BigRational,
    pub rev_lo: BigRational,
    pub rev_hi: BigRational,
}

impl CountBrackets {
    pub fn fwd_contains(&self, x: u128) -> bool {
        let x = BigRational::from(BigInt::from(x));
        self.fwd_lo <= x && x <= self.fwd_hi
    }

    pub fn rev_contains(&self, x: u128) -> bool {
        let x = BigRational::from(BigInt::from(x));
        self.rev_lo <= x && x <= self.rev_hi
    }
}

fn big(x: BigUint) -> BigInt {
    BigInt::from(x)
}

fn clip(x: BigInt) -> BigRational {
    BigRational::from(if x < BigInt::zero() { BigInt::zero() } else { x })
}

/// Forward: `t·σ_r²` above; below, `t` times the choices left for `e₁` and `e₂`
/// after discarding every `r`-set through a vertex pair of an existing edge.
/// Reverse: `C(L,2)·σ_2·σ_{r−2}²` above, with `L = m − 2(t−1)` link-free edges;
/// below, the same with the overlap-three and shared-link terms subtracted.
pub fn count_brackets(pv: &PartitionVector, r: usize, m: u64, t: u64) -> Result<CountBrackets> {
    pv.check_uniformity(r)?;
    if r < 3 {
        return domain("switchings need r >= 3");
    }
    if t == 0 || m < 2 * t {
        return domain(format!("count brackets need t >= 1 and m >= 2t, got t = {t}, m = {m}"));
    }
    let s = sigmas(pv, r);
    let sr = big(s[r].clone());
    let s1 = big(s[1].clone());
    let s2 = big(s[2].clone());
    let sr2 = big(s[r - 2].clone());
    let sr3 = big(sigma_signed(pv, r as i64 - 3));
    let sr4 = big(sigma_signed(pv, r as i64 - 4));
    let pairs_r = BigInt::from(r * (r - 1) / 2);
    let (mb, tb) = (BigInt::from(m), BigInt::from(t));

    let fwd_hi = &tb * &sr * &sr;
    let first: BigInt = &sr - &pairs_r * (&mb - 2) * &sr2;
    let second: BigInt = &sr - 1 - &pairs_r * (&mb - 1) * &sr2;
    let zero = BigInt::zero();
    let fwd_lo = &tb * first.max(zero.clone()) * second.max(zero);

    let link_free = m - 2 * (t - 1);
    let orders = BigInt::from(binomial(&BigUint::from(link_free), 2)) * 2;
    let rev_hi = &orders * &s2 * &sr2 * &sr2 / 2;
    // pair-level quantities, doubled so that halves stay integral
    let r_sq = BigInt::from(r * r);
    let twice_pairs = &s2 * &sr2 * &sr2
        - BigInt::from(r) * &s2 * &sr2 * &sr3
        - BigInt::from(2u32) * &mb * &r_sq * (&sr2 * &sr2 + &s1 * &sr3 * &sr2 + &s2 * &sr4 * &sr2);
    let rev_lo = clip(&orders * twice_pairs) / BigRational::from(BigInt::from(2));

    Ok(CountBrackets {
        fwd_lo: BigRational::from(fwd_lo),
        fwd_hi: BigRational::from(fwd_hi),
        rev_lo,
        rev_hi: BigRational::from(rev_hi),
    })
}

/// `C(m−2(t−1), 2) σ_2 σ_{r−2}² / (t σ_r²)`, the predicted `|C_t⁺| / |C_{t−1}⁺|`.
pub fn ratio_formula(pv: &PartitionVector, r: usize, m: u64, t: u64) -> Result<BigRational> {
    pv.check_uniformity(r)?;
    if t == 0 || r < 2 {
        return domain("ratio formula needs t >= 1 and r >= 2");
    }
    let s = sigmas(pv, r);
    let link_free = BigUint::from(m.saturating_sub(2 * (t - 1)));
    let num = binomial(&link_free, 2) * &s[2] * &s[r - 2] * &s[r - 2];
    let den = BigUint::from(t) * &s[r] * &s[r];
    Ok(uint_ratio(&num, &den))
}

fn ratio_json(q: &Option<BigRational>) -> Option<String> {
    q.as_ref().map(|q| q.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRecord {
    pub t: u64,
    #[serde(rename = "count_Ct")]
    pub count_ct: String,
    #[serde(rename = "count_Ct_minus_1")]
    pub count_prev: String,
    pub sum_fwd: String,
    pub sum_rev: String,
    /// `|C_t⁺| / |C_{t−1}⁺|` from the census.
    pub ratio_exact: Option<String>,
    /// `(Σ|R′| / |C_{t−1}⁺|) / (Σ|R| / |C_t⁺|)`.
    pub ratio_switching: Option<String>,
    pub ratio_formula: String,
    pub fwd_bracket: [String; 2],
    pub rev_bracket: [String; 2],
    /// Smallest and largest `|R(H)|` seen over `C_t⁺`.
    pub fwd_measured: Option<[String; 2]>,
    /// Smallest and largest `|R′(H″)|` seen over `C_{t−1}⁺`.
    pub rev_measured: Option<[String; 2]>,
    pub sums_equal: bool,
    pub brackets_contain: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub parts: Vec<u64>,
    pub r: usize,
    pub m: u64,
    #[serde(rename = "M")]
    pub threshold: u64,
    pub records: Vec<AuditRecord>,
}

impl AuditReport {
    pub fn all_equal(&self) -> bool {
        self.records.iter().all(|r| r.sums_equal)
    }

    pub fn all_contained(&self) -> bool {
        self.records.iter().all(|r| r.brackets_contain)
    }
}

#[derive(Clone, Default)]
struct StratumStats {
    count: u128,
    sum_fwd: u128,
    fwd_range: Option<(u128, u128)>,
    /// reverse moves out of this stratum, into the next one
    sum_rev_out: u128,
    rev_range: Option<(u128, u128)>,
}

fn widen(range: &mut Option<(u128, u128)>, x: u128) {
    *range = Some(match *range {
        None => (x, x),
        Some((lo, hi)) => (lo.min(x), hi.max(x)),
    });
}

fn merge_range(a: Option<(u128, u128)>, b: Option<(u128, u128)>) -> Option<(u128, u128)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
    }
}

/// Exhaustive check of `Σ_{C_t⁺}|R| = Σ_{C_{t−1}⁺}|R′|` for every `t ≥ 1`.
pub fn bijection_audit(pv: &PartitionVector, r: usize, m: u64, ceiling: u64) -> Result<AuditReport> {
    pv.check_uniformity(r)?;
    if r < 3 {
        return domain("switchings need r >= 3");
    }
    let s = sigma(pv, r)?;
    guard("bijection_audit", &work_estimate(&s, m), ceiling)?;
    let threshold = threshold_m(pv, r, m)?;
    let mut report = AuditReport { parts: pv.sizes().to_vec(), r, m, threshold, records: Vec::new() };
    if BigUint::from(m) > s || m < 2 {
        return Ok(report);
    }
    let table = EdgeTable::with_overlaps(pv, r)?;
    let top = (m / 2).min(threshold) as usize;
    let partials = par_subsets(
        table.len(),
        m as usize,
        || vec![StratumStats::default(); top + 1],
        |acc, idx| {
            if let Stratum::InPlus(t) = table.classify(idx, threshold) {
                let st = &mut acc[t as usize];
                st.count += 1;
                if t >= 1 {
                    let f = count_forward_indexed(&table, idx);
                    st.sum_fwd += f;
                    widen(&mut st.fwd_range, f);
                }
                if (t as usize) < top {
                    let b = count_reverse_indexed(&table, idx, t, threshold);
                    st.sum_rev_out += b;
                    widen(&mut st.rev_range, b);
                }
            }
        },
    );
    let mut stats = vec![StratumStats::default(); top + 1];
    for part in partials {
        for (acc, p) in stats.iter_mut().zip(part) {
            acc.count += p.count;
            acc.sum_fwd += p.sum_fwd;
            acc.sum_rev_out += p.sum_rev_out;
            acc.fwd_range = merge_range(acc.fwd_range, p.fwd_range);
            acc.rev_range = merge_range(acc.rev_range, p.rev_range);
        }
    }

    for t in 1..=top {
        let (cur, prev) = (&stats[t], &stats[t - 1]);
        if cur.count == 0 && prev.sum_rev_out == 0 {
            continue;
        }
        let to_q = |x: u128| BigRational::from(BigInt::from(x));
        let ratio_exact = (prev.count > 0).then(|| to_q(cur.count) / to_q(prev.count));
        let ratio_switching = (prev.count > 0 && cur.sum_fwd > 0)
            .then(|| (to_q(prev.sum_rev_out) / to_q(prev.count)) / (to_q(cur.sum_fwd) / to_q(cur.count)));
        let brackets = count_brackets(pv, r, m, t as u64)?;
        let fwd_ok = cur.fwd_range.is_none_or(|(lo, hi)| brackets.fwd_contains(lo) && brackets.fwd_contains(hi));
        let rev_ok = prev.rev_range.is_none_or(|(lo, hi)| brackets.rev_contains(lo) && brackets.rev_contains(hi));
        let pair = |x: Option<(u128, u128)>| x.map(|(a, b)| [a.to_string(), b.to_string()]);
        report.records.push(AuditRecord {
            t: t as u64,
            count_ct: cur.count.to_string(),
            count_prev: prev.count.to_string(),
            sum_fwd: cur.sum_fwd.to_string(),
            sum_rev: prev.sum_rev_out.to_string(),
            ratio_exact: ratio_json(&ratio_exact),
            ratio_switching: ratio_json(&ratio_switching),
            ratio_formula: ratio_formula(pv, r, m, t as u64)?.to_string(),
            fwd_bracket: [brackets.fwd_lo.to_string(), brackets.fwd_hi.to_string()],
            rev_bracket: [brackets.rev_lo.to_string(), brackets.rev_hi.to_string()],
            fwd_measured: pair(cur.fwd_range),
            rev_measured: pair(prev.rev_range),
            sums_equal: cur.sum_fwd == prev.sum_rev_out,
            brackets_contain: fwd_ok && rev_ok,
        });
    }
    Ok(report)
}

/// Input of the series bound: `h_0 = 1`, `h_i / h_{i−1} = (A(i)/i)(1 − (i−1)B(i))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesSpec {
    /// `A(1..=N)`.
    pub a: Vec<f64>,
    /// `B(1..=N)`.
    pub b: Vec<f64>,
    pub c_hat: f64,
}

/// `1 − (i−1)B(i)`, snapped to zero when it vanishes up to rounding.
fn damping(i: usize, b: f64) -> f64 {
    let prod = (i - 1) as f64 * b;
    let d = 1.0 - prod;
    if d.abs() <= 4.0 * f64::EPSILON * prod.abs().max(1.0) {
        0.0
    } else {
        d
    }
}

impl SeriesSpec {
    pub fn n_terms(&self) -> usize {
        self.a.len()
    }

    /// `(A_1, A_2, C_1, C_2)`: extremes of `A(i)` and `A(i)B(i)`.
    pub fn extremes(&self) -> (f64, f64, f64, f64) {
        let fold = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
        };
        let (a1, a2) = fold(&mut self.a.iter().copied());
        let (c1, c2) = fold(&mut self.a.iter().zip(&self.b).map(|(a, b)| a * b));
        (a1, a2, c1, c2)
    }

    /// Every precondition of the bound that fails, in words.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.n_terms();
        if self.b.len() != n {
            out.push(format!("A has {} terms but B has {}", n, self.b.len()));
            return out;
        }
        if n < 2 {
            out.push("N must be at least 2".into());
            return out;
        }
        if !(self.c_hat > 0.0 && self.c_hat < 1.0 / 3.0) {
            out.push(format!("c_hat = {} is outside (0, 1/3)", self.c_hat));
        }
        for i in 1..=n {
            let (a, b) = (self.a[i - 1], self.b[i - 1]);
            if a.is_nan() || a < 0.0 {
                out.push(format!("A({i}) = {a} is negative"));
            }
            if b.is_nan() || damping(i, b) < 0.0 {
                out.push(format!("1 - ({})B({i}) = {} is negative", i - 1, 1.0 - (i - 1) as f64 * b));
            }
        }
        let (_, a2, c1, c2) = self.extremes();
        if a2 / n as f64 > self.c_hat {
            out.push(format!("A_2/N = {} exceeds c_hat = {}", a2 / n as f64, self.c_hat));
        }
        let c = c1.abs().max(c2.abs());
        if c > self.c_hat {
            out.push(format!("max |C| = {c} exceeds c_hat = {}", self.c_hat));
        }
        out
    }

    /// `h_0, …, h_N`, with every term from the first vanishing ratio onward set to zero.
    pub fn terms(&self) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.n_terms() + 1);
        h.push(1.0);
        let mut dead = false;
        for i in 1..=self.n_terms() {
            let (a, d) = (self.a[i - 1], damping(i, self.b[i - 1]));
            if dead || a == 0.0 || d == 0.0 {
                dead = true;
                h.push(0.0);
            } else {
                let prev = h[i - 1];
                h.push(prev * a / i as f64 * d);
            }
        }
        h
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesBounds {
    pub h: Vec<f64>,
    pub sum: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub holds: bool,
}

/// `Σ_1 = exp(A_1 − A_1C_2/2) − (2eĉ)^N` and
/// `Σ_2 = exp(A_2 − A_2C_1/2 + A_2C_1²/2) + (2eĉ)^N`.
pub fn series_bounds(a1: f64, a2: f64, c1: f64, c2: f64, n_terms: usize, c_hat: f64) -> (f64, f64) {
    let tail = (2.0 * std::f64::consts::E * c_hat).powi(n_terms as i32);
    let sigma1 = (a1 - 0.5 * a1 * c2).exp() - tail;
    let sigma2 = (a2 - 0.5 * a2 * c1 + 0.5 * a2 * c1 * c1).exp() + tail;
    (sigma1, sigma2)
}

/// Sum of the series together with its two-sided bound.
pub fn greenhill_sum_bounds(spec: &SeriesSpec) -> Result<SeriesBounds> {
    let bad = spec.violations();
    if !bad.is_empty() {
        return domain(bad.join("; "));
    }
    let h = spec.terms();
    let sum: f64 = h.iter().sum();
    let (a1, a2, c1, c2) = spec.extremes();
    let (sigma1, sigma2) = series_bounds(a1, a2, c1, c2, spec.n_terms(), spec.c_hat);
    let holds = sigma1 <= sum && sum <= sigma2;
    debug_assert!(holds, "series bound failed: {sigma1} <= {sum} <= {sigma2}");
    Ok(SeriesBounds { h, sum, sigma1, sigma2, holds })
}

/// The stratum-ratio series for `(n⃗, r, m)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSeries {
    /// `σ_2 σ_{r−2}² [m]_2 / (2 σ_r²)`.
    pub a_main: f64,
    pub a_exact: String,
    /// Half-width carried for the unknown `O(m²/n³ + m³/n⁴)` shift of `A`.
    pub a_halfwidth: f64,
    /// `B(1..=N)`.
    pub b: Vec<f64>,
    pub n_terms: u64,
    /// First empty stratum, capped at `M + 1`.
    pub t_prime: u64,
    /// `"census"` or `"criterion"`.
    pub t_prime_source: &'static str,
    pub c_hat: f64,
    /// Sum of `h_0..h_N` built from `A = a_main`.
    pub series_sum: f64,
    pub exp_a: f64,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    /// True when every precondition of the bound holds.
    pub applicable: bool,
    pub violations: Vec<String>,
    /// `Σ_t |C_t⁺| / |C_0⁺|` from an exact census, when one was run.
    pub exact_sum: Option<f64>,
    pub exact_sum_rational: Option<String>,
}

/// Longest series [`ratio_series`] will build.
pub const MAX_SERIES_TERMS: u64 = 10_000_000;

pub const C_HAT: f64 = 1.0 / 110.0;

/// Builds `A(t)` and `B(t)` and brackets `Σ_t |C_t⁺|/|C_0⁺|`.
///
/// `shift` scales the half-width `m²/n³ + m³/n⁴` placed around `A`.
/// `census_ceiling`, when given, lets an exact census supply `t′` and the exact sum.
pub fn ratio_series(
    pv: &PartitionVector,
    r: usize,
    m: u64,
    shift: f64,
    census_ceiling: Option<u64>,
) -> Result<RatioSeries> {
    pv.check_uniformity(r)?;
    if r < 2 {
        return domain("ratio series needs r >= 2");
    }
    let census = match census_ceiling {
        Some(c) => crate::census::census_by_cluster(pv, r, m, c).ok(),
        None => None,
    };
    let exact = census.as_ref().and_then(|c| c.stratum_ratio_sum());
    let exact_sum = exact.as_ref().map(to_f64);
    let exact_sum_rational = exact.as_ref().map(|q| q.to_string());

    if m < 2 {
        return Ok(RatioSeries {
            a_main: 0.0,
            a_exact: "0".into(),
            a_halfwidth: 0.0,
            b: Vec::new(),
            n_terms: 0,
            t_prime: 1,
            t_prime_source: "criterion",
            c_hat: C_HAT,
            series_sum: 1.0,
            exp_a: 1.0,
            sigma1: None,
            sigma2: None,
            applicable: true,
            violations: Vec::new(),
            exact_sum: exact_sum.or(Some(1.0)),
            exact_sum_rational: exact_sum_rational.or(Some("1".into())),
        });
    }

    let s = sigmas(pv, r);
    let a_q = uint_ratio(
        &(&s[2] * &s[r - 2] * &s[r - 2] * falling_factorial_u64(m, 2)),
        &(BigUint::from(2u32) * &s[r] * &s[r]),
    );
    let a_main = to_f64(&a_q);
    let threshold = threshold_m(pv, r, m)?;
    if threshold > MAX_SERIES_TERMS {
        return Err(crate::Error::Resource {
            what: "ratio_series",
            needed: threshold.to_string(),
            ceiling: MAX_SERIES_TERMS,
        });
    }
    let n_terms = threshold as usize;

    let (t_prime, t_prime_source) = match &census {
        Some(c) => {
            let first_empty = (1..=threshold).find(|&t| c.stratum(t).is_zero()).unwrap_or(threshold + 1);
            (first_empty, "census")
        }
        None => ((m / 2 + 1).min(threshold + 1), "criterion"),
    };
    let mf = m as f64;
    let b: Vec<f64> = (1..=threshold)
        .map(|t| {
            if t < t_prime {
                2.0 * (2.0 * mf - 2.0 * t as f64 + 1.0) / (mf * (mf - 1.0))
            } else {
                1.0 / (t - 1) as f64
            }
        })
        .collect();
    let spec = SeriesSpec { a: vec![a_main; n_terms], b: b.clone(), c_hat: C_HAT };
    let series_sum: f64 = spec.terms().iter().sum();

    let n = pv.n() as f64;
    let a_halfwidth = shift * (mf * mf / (n * n * n) + mf * mf * mf / (n * n * n * n));
    let a1 = (a_main - a_halfwidth).max(0.0);
    let a2 = a_main + a_halfwidth;
    let (mut c1, mut c2) = (f64::INFINITY, f64::NEG_INFINITY);
    for &bt in &b {
        for a in [a1, a2] {
            c1 = c1.min(a * bt);
            c2 = c2.max(a * bt);
        }
    }
    let mut violations = spec.violations();
    if a2 / n_terms as f64 > C_HAT {
        violations.push(format!("widened A_2/N = {} exceeds c_hat", a2 / n_terms as f64));
    }
    if c1.abs().max(c2.abs()) > C_HAT {
        violations.push(format!("widened max |C| = {} exceeds c_hat", c1.abs().max(c2.abs())));
    }
    violations.dedup();
    let (sigma1, sigma2) = series_bounds(a1, a2, c1, c2, n_terms, C_HAT);

    Ok(RatioSeries {
        a_main,
        a_exact: a_q.to_string(),
        a_halfwidth,
        b,
        n_terms: threshold,
        t_prime,
        t_prime_source,
        c_hat: C_HAT,
        series_sum,
        exp_a: a_main.exp(),
        sigma1: Some(sigma1),
        sigma2: Some(sigma2),
        applicable: violations.is_empty(),
        violations,
        exact_sum,
        exact_sum_rational,
    })
}

/// Count brackets as floats, for reports.
pub fn bracket_f64(b: &CountBrackets) -> [f64; 4] {
    [&b.fwd_lo, &b.fwd_hi, &b.rev_lo, &b.rev_hi].map(|q| q.to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::DEFAULT_WORK_CEILING;
    use crate::hypergraphs::is_linear;

    fn p222() -> PartitionVector {
        PartitionVector::new(vec![2, 2, 2]).unwrap()
    }

    fn h222(lists: &[&[u32]]) -> Hypergraph {
        Hypergraph::from_vertex_lists(p222(), 3, lists).unwrap()
    }

    fn q(x: i64) -> BigRational {
        BigRational::from(BigInt::from(x))
    }

    #[test]
    fn forward_count_on_small_cluster() {
        let h = h222(&[&[1, 3, 5], &[1, 3, 6]]);
        let moves = enumerate_forward(&h).unwrap();
        assert_eq!(moves.len(), 32);
        for mv in &moves {
            let out = apply_forward(&h, mv).unwrap();
            assert_eq!(out.m(), 2);
            assert!(is_linear(&out));
            let back = apply_reverse(&out, &mv.paired()).unwrap();
            assert_eq!(back, h);
        }
        let table = EdgeTable::with_overlaps(&p222(), 3).unwrap();
        let idx: Vec<usize> = h.edges().iter().map(|e| table.index_of(e).unwrap()).collect();
        assert_eq!(count_forward_indexed(&table, &idx), 32);
    }

    #[test]
    fn forward_needs_a_cluster() {
        assert!(enumerate_forward(&h222(&[&[1, 3, 5], &[2, 4, 6]])).is_err());
        assert!(enumerate_forward(&h222(&[&[1, 3, 5], &[1, 3, 6], &[1, 4, 5]])).is_err());
    }

    #[test]
    fn reverse_count_on_disjoint_pair() {
        let h = h222(&[&[1, 3, 5], &[2, 4, 6]]);
        let moves = enumerate_reverse(&h).unwrap();
        assert_eq!(moves.len(), 24);
        for mv in &moves {
            let out = apply_reverse(&h, mv).unwrap();
            assert_eq!(classify(&out, 10), Stratum::InPlus(1));
            assert_eq!(apply_forward(&out, &mv.paired()).unwrap(), h);
        }
        assert!(enumerate_reverse(&h222(&[])).unwrap().is_empty());
        let table = EdgeTable::with_overlaps(&p222(), 3).unwrap();
        let idx: Vec<usize> = h.edges().iter().map(|e| table.index_of(e).unwrap()).collect();
        assert_eq!(count_reverse_indexed(&table, &idx, 0, 1514), 24);
        assert_eq!(count_reverse_indexed(&table, &idx, 0, 0), 0);
    }

    #[test]
    fn invalid_moves_are_rejected() {
        let h = h222(&[&[1, 3, 5], &[1, 3, 6]]);
        let mut mv = enumerate_forward(&h).unwrap().remove(0);
        mv.replacement.1 = mv.replacement.0.clone();
        assert!(apply_forward(&h, &mv).is_err());
        let lin = h222(&[&[1, 3, 5], &[2, 4, 6]]);
        let mut rv = enumerate_reverse(&lin).unwrap().remove(0);
        rv.removed.1 = rv.removed.0.clone();
        assert!(apply_reverse(&lin, &rv).is_err());
    }

    #[test]
    fn bracket_examples() {
        let b = count_brackets(&p222(), 3, 2, 1).unwrap();
        assert_eq!(b.fwd_hi, q(64));
        assert_eq!(b.rev_hi, q(432));
        assert!(b.fwd_contains(32));
        assert!(b.rev_contains(24));
        assert!(count_brackets(&p222(), 3, 3, 2).is_err());
        assert!(count_brackets(&p222(), 3, 2, 0).is_err());
    }

    #[test]
    fn audit_on_small_instance() {
        let rep = bijection_audit(&p222(), 3, 2, DEFAULT_WORK_CEILING).unwrap();
        assert_eq!(rep.records.len(), 1);
        let rec = &rep.records[0];
        assert_eq!((rec.sum_fwd.as_str(), rec.sum_rev.as_str()), ("384", "384"));
        assert_eq!(rec.ratio_exact.as_deref(), Some("3/4"));
        assert_eq!(rec.ratio_switching.as_deref(), Some("3/4"));
        assert_eq!(rec.ratio_formula, "27/4");
        assert!(rec.sums_equal && rec.brackets_contain);
        assert!(bijection_audit(&p222(), 3, 1, DEFAULT_WORK_CEILING).unwrap().records.is_empty());
    }

    #[test]
    fn series_examples() {
        let spec = SeriesSpec { a: vec![1.0; 10], b: vec![0.0; 10], c_hat: 0.1 };
        let out = greenhill_sum_bounds(&spec).unwrap();
        let e = std::f64::consts::E;
        assert!((out.sum - e).abs() < 1e-6);
        let tail = (2.0 * e * 0.1f64).powi(10);
        assert!((out.sigma1 - (e - tail)).abs() < 1e-12 && (out.sigma2 - (e + tail)).abs() < 1e-12);
        assert!((tail - 0.00226).abs() < 1e-5);
        assert!(out.holds);

        let mut a = vec![0.2; 10];
        a[0] = 0.0;
        let out = greenhill_sum_bounds(&SeriesSpec { a, b: vec![0.0; 10], c_hat: 0.1 }).unwrap();
        assert_eq!(out.sum, 1.0);
        assert!(out.h[1..].iter().all(|&x| x == 0.0));

        let mut b = vec![0.0; 10];
        b[3] = 1.0 / 3.0;
        let out = greenhill_sum_bounds(&SeriesSpec { a: vec![0.5; 10], b, c_hat: 0.2 }).unwrap();
        assert!(out.h[4..].iter().all(|&x| x == 0.0));
        assert!(out.h[3] > 0.0);

        assert!(greenhill_sum_bounds(&SeriesSpec { a: vec![5.0; 10], b: vec![0.0; 10], c_hat: 0.1 }).is_err());
        assert!(greenhill_sum_bounds(&SeriesSpec { a: vec![0.1; 10], b: vec![0.0; 10], c_hat: 0.5 }).is_err());
    }

    #[test]
    fn ratio_series_examples() {
        let rs = ratio_series(&p222(), 3, 2, 1.0, Some(DEFAULT_WORK_CEILING)).unwrap();
        assert_eq!(rs.a_exact, "27/4");
        assert_eq!(rs.a_main, 6.75);
        assert_eq!(rs.exact_sum_rational.as_deref(), Some("7/4"));
        assert_eq!(rs.t_prime, 2);
        assert_eq!(rs.t_prime_source, "census");
        assert_eq!(rs.n_terms, 1514);
        assert!(!rs.applicable);
        for m in [0, 1] {
            let rs = ratio_series(&p222(), 3, m, 1.0, Some(DEFAULT_WORK_CEILING)).unwrap();
            assert_eq!(rs.a_main, 0.0);
            assert_eq!(rs.exact_sum, Some(1.0));
            assert_eq!(rs.series_sum, 1.0);
        }
        let by_rule = ratio_series(&p222(), 3, 2, 1.0, None).unwrap();
        assert_eq!((by_rule.t_prime, by_rule.t_prime_source), (2, "criterion"));
    }
}
