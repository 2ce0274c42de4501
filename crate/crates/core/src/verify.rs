//! A fixed grid of small instances and the invariant checks run over it.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::asymptotics::{estimate_theorem, leading_term_exact};
use crate::census::{census_by_cluster, count_linear, work_estimate};
use crate::error::Result;
use crate::partitions::{lemma23_bound_check, newton_gap, sigma, PartitionVector};
use crate::switching::{bijection_audit, greenhill_sum_bounds, SeriesSpec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub parts: PartitionVector,
    pub r: usize,
    pub m: u64,
}

impl std::fmt::Display for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "parts={} r={} m={}", self.parts, self.r, self.m)
    }
}

/// Largest `C(σ_r, m)` admitted to [`standard_grid`].
pub const GRID_SUBSET_LIMIT: u64 = 100_000;

/// `r ∈ {3, 4}`; uniform `n ≤ 10` and parts `(2,2,2)`, `(3,1,2)`, `(2,2,2,2)`, `(3,3,3)`;
/// `m ≤ min(4, σ_r)`; only instances with at most [`GRID_SUBSET_LIMIT`] edge subsets.
pub fn standard_grid() -> Vec<Instance> {
    let mut shapes: Vec<PartitionVector> = (3..=10).map(|n| PartitionVector::uniform(n).unwrap()).collect();
    for p in [vec![2, 2, 2], vec![3, 1, 2], vec![2, 2, 2, 2], vec![3, 3, 3]] {
        shapes.push(PartitionVector::new(p).unwrap());
    }
    let mut out = Vec::new();
    for r in [3usize, 4] {
        for pv in &shapes {
            if pv.k() < r {
                continue;
            }
            let s = sigma(pv, r).unwrap();
            for m in 0..=4u64 {
                if BigUint::from(m) > s {
                    continue;
                }
                let subsets = crate::util::binomial(&s, m);
                if subsets <= BigUint::from(GRID_SUBSET_LIMIT) {
                    out.push(Instance { parts: pv.clone(), r, m });
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, failures: Vec<String>, checked: usize) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checked} cases")
        } else {
            format!("{} of {checked} failed: {}", failures.len(), failures.join("; "))
        },
    }
}

/// Part-size vectors with `k` parts of sizes `1..=max`, one per multiset.
pub fn sorted_part_vectors(k: usize, max: u64) -> Vec<Vec<u64>> {
    fn go(k: usize, lo: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in lo..=max {
            cur.push(x);
            go(k, x, max, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, 1, max, &mut Vec::new(), &mut out);
    out
}

/// Values of `t ≤ ⌊m/2⌋ + 1` (capped at `M`) where `by_cluster[t] > 0` and
/// `m ≥ 2t` disagree, split into `(nonempty with m < 2t, empty with m ≥ 2t)`.
///
/// The first list is always empty. The second can be nonempty on small
/// instances: nonemptiness for every `t ≤ m/2` only holds for large `n`.
pub fn nonemptiness_failures(inst: &Instance, ceiling: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    let c = census_by_cluster(&inst.parts, inst.r, inst.m, ceiling)?;
    let top = (inst.m / 2 + 1).min(c.threshold);
    let (mut above, mut below) = (Vec::new(), Vec::new());
    for t in 0..=top {
        let filled = !c.stratum(t).is_zero();
        if filled && inst.m < 2 * t {
            above.push(t);
        } else if !filled && inst.m >= 2 * t {
            below.push(t);
        }
    }
    Ok((above, below))
}

/// Runs every check on the grid; `ceiling` bounds each census.
pub fn run_suite(ceiling: u64) -> Vec<CheckOutcome> {
    let grid = standard_grid();
    let mut out = Vec::new();

    let mut bad = Vec::new();
    for inst in &grid {
        let res = census_by_cluster(&inst.parts, inst.r, inst.m, ceiling)
            .and_then(|c| {
                c.check_invariants(&inst.parts, inst.r, inst.m)?;
                Ok(c)
            })
            .and_then(|c| Ok((c.linear.clone(), count_linear(&inst.parts, inst.r, inst.m, ceiling)?)));
        match res {
            Ok((a, b)) if a == b => {}
            Ok((a, b)) => bad.push(format!("{inst}: census {a} vs search {b}")),
            Err(e) => bad.push(format!("{inst}: {e}")),
        }
    }
    out.push(outcome("census agrees with pruned search", bad, grid.len()));

    let mut bad = Vec::new();
    let mut checked = 0;
    for inst in grid.iter().filter(|i| i.r >= 3 && i.m >= 2) {
        checked += 1;
        match bijection_audit(&inst.parts, inst.r, inst.m, ceiling) {
            Ok(rep) if rep.all_equal() && rep.all_contained() => {}
            Ok(rep) => {
                for rec in rep.records.iter().filter(|r| !r.sums_equal || !r.brackets_contain) {
                    bad.push(format!("{inst} t={}: {} vs {}", rec.t, rec.sum_fwd, rec.sum_rev));
                }
            }
            Err(e) => bad.push(format!("{inst}: {e}")),
        }
    }
    out.push(outcome("switching sums agree and fit their brackets", bad, checked));

    let mut bad = Vec::new();
    let mut checked = 0;
    for inst in grid.iter().filter(|i| i.m <= 1) {
        checked += 1;
        let exact = count_linear(&inst.parts, inst.r, inst.m, ceiling);
        let est = estimate_theorem(&inst.parts, inst.r, inst.m);
        let lead = leading_term_exact(&inst.parts, inst.r, inst.m);
        match (exact, est, lead) {
            (Ok(x), Ok(e), Ok(l)) if e.correction_is_zero() && l == BigRational::from(BigInt::from(x.clone())) => {}
            _ => bad.push(inst.to_string()),
        }
    }
    out.push(outcome("estimate is exact for m <= 1", bad, checked));

    let mut bad = Vec::new();
    let mut sparse = 0;
    for inst in &grid {
        match nonemptiness_failures(inst, ceiling) {
            Ok((above, below)) => {
                if !above.is_empty() {
                    bad.push(format!("{inst}: t in {above:?}"));
                }
                sparse += usize::from(!below.is_empty());
            }
            Err(e) => bad.push(format!("{inst}: {e}")),
        }
    }
    let mut o = outcome("stratum t is empty when m < 2t", bad, grid.len());
    o.detail += &format!(" ({sparse} small instances also have an empty stratum with m >= 2t)");
    out.push(o);

    let mut bad = Vec::new();
    let mut checked = 0;
    for k in 1..=6 {
        for sizes in sorted_part_vectors(k, 4) {
            let pv = PartitionVector::new(sizes).unwrap();
            for j in 1..k {
                checked += 1;
                if newton_gap(&pv, j).map_or(true, |g| g < BigRational::zero()) {
                    bad.push(format!("newton {pv} j={j}"));
                }
            }
            for r in 1..=k {
                for s in 1..=r {
                    checked += 1;
                    if !lemma23_bound_check(&pv, s, r).is_ok_and(|b| b.holds) {
                        bad.push(format!("ratio bound {pv} s={s} r={r}"));
                    }
                }
            }
        }
    }
    out.push(outcome("symmetric-function inequalities", bad, checked));

    let spec = SeriesSpec { a: vec![1.0; 10], b: vec![0.0; 10], c_hat: 0.1 };
    let bad = match greenhill_sum_bounds(&spec) {
        Ok(b) if b.holds && (b.sum - std::f64::consts::E).abs() < 1e-6 => vec![],
        Ok(b) => vec![format!("sum {} bounds [{}, {}]", b.sum, b.sigma1, b.sigma2)],
        Err(e) => vec![e.to_string()],
    };
    out.push(outcome("series bound on the exponential series", bad, 1));

    out
}

/// Work needed by the largest census in [`standard_grid`].
pub fn grid_work() -> BigUint {
    standard_grid()
        .iter()
        .map(|i| work_estimate(&sigma(&i.parts, i.r).unwrap(), i.m))
        .max()
        .unwrap_or_default()
}
