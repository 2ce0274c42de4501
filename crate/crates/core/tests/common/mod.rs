//! Brute-force reference implementations used to check the library.
#![allow(dead_code)]

use std::collections::BTreeMap;

/// All `r`-sets of vertices `1..=n` that meet each part at most once, in
/// lexicographic order. Parts are consecutive blocks of the given sizes.
pub fn naive_edges(sizes: &[u64], r: usize) -> Vec<Vec<u32>> {
    let mut part_of = Vec::new();
    for (i, &s) in sizes.iter().enumerate() {
        part_of.extend(std::iter::repeat_n(i, s as usize));
    }
    let n = part_of.len();
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn go(start: usize, n: usize, r: usize, part_of: &[usize], pick: &mut Vec<usize>, out: &mut Vec<Vec<u32>>) {
        if pick.len() == r {
            let mut parts: Vec<usize> = pick.iter().map(|&v| part_of[v]).collect();
            parts.dedup();
            if parts.len() == r {
                out.push(pick.iter().map(|&v| v as u32 + 1).collect());
            }
            return;
        }
        for v in start..n {
            pick.push(v);
            go(v + 1, n, r, part_of, pick, out);
            pick.pop();
        }
    }
    go(0, n, r, &part_of, &mut pick, &mut out);
    out
}

pub fn overlap(a: &[u32], b: &[u32]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

/// Stratum of an edge set: `Ok(t)` inside `H_r⁺`, `Err(reason)` outside.
pub fn naive_stratum(edges: &[&Vec<u32>], max_clusters: u64) -> Result<u64, &'static str> {
    let m = edges.len();
    let mut worst = 0;
    for i in 0..m {
        for j in i + 1..m {
            worst = worst.max(overlap(edges[i], edges[j]));
        }
    }
    if worst >= 3 {
        return Err("OverlapGE3");
    }
    // components of the linked-edges graph by repeated relabelling
    let mut label: Vec<usize> = (0..m).collect();
    loop {
        let mut changed = false;
        for i in 0..m {
            for j in 0..m {
                if i != j && overlap(edges[i], edges[j]) >= 2 && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in &label {
        *sizes.entry(l).or_default() += 1;
    }
    if sizes.values().any(|&s| s > 2) {
        return Err("ClusterGT2Edges");
    }
    let t = sizes.values().filter(|&&s| s == 2).count() as u64;
    if t > max_clusters {
        return Err("TooManyClusters");
    }
    Ok(t)
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct NaiveCensus {
    pub total: u64,
    pub linear: u64,
    pub by_cluster: BTreeMap<u64, u64>,
    pub not_plus: u64,
}

/// Visits every `m`-subset of `0..e` in lexicographic order.
pub fn for_each_subset(e: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if m > e {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < e - m + i {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Classifies every `m`-subset of the edge list by brute force.
pub fn naive_census(sizes: &[u64], r: usize, m: usize, max_clusters: u64) -> NaiveCensus {
    let edges = naive_edges(sizes, r);
    let mut out = NaiveCensus::default();
    for_each_subset(edges.len(), m, |idx| {
        out.total += 1;
        let chosen: Vec<&Vec<u32>> = idx.iter().map(|&i| &edges[i]).collect();
        match naive_stratum(&chosen, max_clusters) {
            Ok(t) => {
                *out.by_cluster.entry(t).or_default() += 1;
                if t == 0 {
                    out.linear += 1;
                }
            }
            Err(_) => out.not_plus += 1,
        }
    });
    out
}

/// Linear `m`-subsets only, by checking every pair.
pub fn naive_linear_count(sizes: &[u64], r: usize, m: usize) -> u64 {
    let edges = naive_edges(sizes, r);
    let mut count = 0;
    for_each_subset(edges.len(), m, |idx| {
        let ok = (0..idx.len()).all(|a| (a + 1..idx.len()).all(|b| overlap(&edges[idx[a]], &edges[idx[b]]) <= 1));
        count += u64::from(ok);
    });
    count
}

/// `σ_s` as a sum over `s`-subsets of parts, in `u128`.
pub fn naive_sigma(sizes: &[u64], s: usize) -> u128 {
    let k = sizes.len();
    (0u32..1 << k)
        .filter(|mask| mask.count_ones() as usize == s)
        .map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).map(|i| sizes[i] as u128).product::<u128>())
        .sum()
}
