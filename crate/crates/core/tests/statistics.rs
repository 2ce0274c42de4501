use std::collections::BTreeMap;

use linhyper::census::EdgeTable;
use linhyper::hypergraphs::edge_space;
use linhyper::montecarlo::{
    cluster_stats, estimate_linear_probability, expected_overlap_pairs, linked_pairs, par_samples,
};
use linhyper::partitions::PartitionVector;
use linhyper::util::binomial;
use num_bigint::BigUint;
use num_traits::ToPrimitive;

fn pv(s: &[u64]) -> PartitionVector {
    PartitionVector::new(s.to_vec()).unwrap()
}

/// Chi-square statistic of `draws` over every `m`-subset of the edge space.
fn chi_square(p: &PartitionVector, r: usize, m: u64, draws: u64, seed: u64) -> (f64, usize) {
    let table = EdgeTable::new(p, r).unwrap();
    let parts = par_samples(p, r, m, draws, seed, BTreeMap::<Vec<usize>, u64>::new, |acc, h| {
        let key: Vec<usize> = h.edges().iter().map(|e| table.index_of(e).unwrap()).collect();
        *acc.entry(key).or_default() += 1;
    })
    .unwrap();
    let mut counts = BTreeMap::new();
    for part in parts {
        for (k, c) in part {
            *counts.entry(k).or_insert(0u64) += c;
        }
    }
    let cells = binomial(&BigUint::from(table.len()), m).to_usize().unwrap();
    let expect = draws as f64 / cells as f64;
    let seen: f64 = counts.values().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let unseen = (cells - counts.len()) as f64 * expect;
    (seen + unseen, cells)
}

#[test]
fn single_edges_are_uniform() {
    let (stat, cells) = chi_square(&pv(&[2, 2, 2]), 3, 1, 100_000, 3);
    assert_eq!(cells, 8);
    // upper 0.001 point of chi-square with 7 degrees of freedom
    assert!(stat < 24.32, "{stat}");
}

#[test]
fn hypergraphs_are_uniform() {
    // upper 0.001 points with 27 and 19 degrees of freedom
    for (s, m, crit) in [(&[2u64, 2, 2][..], 2, 55.48), (&[3, 1, 2][..], 3, 43.82)] {
        let (stat, cells) = chi_square(&pv(s), 3, m, 1_000_000, 11);
        assert!(cells <= 5000);
        assert!(stat < crit, "{s:?} m={m}: {stat} over {cells} cells");
    }
}

#[test]
fn linked_pair_mean_matches_expectation() {
    for (s, r, m) in [(&[2u64, 2, 2][..], 3, 2u64), (&[1, 1, 1, 1, 1, 1][..], 3, 2), (&[3, 3, 3][..], 3, 4), (&[2, 2, 2, 2][..], 4, 3)] {
        let p = pv(s);
        let (_, exact) = expected_overlap_pairs(&p, r, m, 8192).unwrap();
        let rep = estimate_linear_probability(&p, r, m, 100_000, 21).unwrap();
        let want = exact.to_f64().unwrap();
        assert!(
            (rep.linked_pairs_mean - want).abs() <= 4.0 * rep.linked_pairs_stderr,
            "{s:?}: {} vs {want} (se {})",
            rep.linked_pairs_mean,
            rep.linked_pairs_stderr
        );
    }
}

#[test]
fn linked_pairs_of_a_single_sample() {
    let p = pv(&[2, 2, 2]);
    let edges: Vec<_> = edge_space(&p, 3).unwrap().collect();
    let h = linhyper::hypergraphs::Hypergraph::new(p, 3, edges[..3].to_vec()).unwrap();
    // 135, 136, 145: pairs {135,136} and {135,145}
    assert_eq!(linked_pairs(&h), 2);
}

#[test]
fn structure_violations_thin_out_with_n() {
    let mut last = (f64::INFINITY, f64::INFINITY);
    // below n = 16 most samples fail on overlap first, which hides the cluster-size failures
    for n in [16u64, 20, 24, 32] {
        let rep = estimate_linear_probability(&PartitionVector::uniform(n).unwrap(), 4, 6, 100_000, 5).unwrap();
        let st = cluster_stats(&rep);
        assert!(st.overlap_ge3_fraction < last.0, "n={n}: {st:?}");
        assert!(st.cluster_gt2_fraction < last.1, "n={n}: {st:?}");
        last = (st.overlap_ge3_fraction, st.cluster_gt2_fraction);
    }
}

#[test]
fn report_counts_add_up() {
    let rep = estimate_linear_probability(&pv(&[3, 3, 3]), 3, 5, 20_000, 8).unwrap();
    let sum: u64 = rep.cluster_histogram.values().sum::<u64>() + rep.violation_counts.values().sum::<u64>();
    assert_eq!(sum, rep.trials);
    assert_eq!(rep.p_hat, rep.hits as f64 / rep.trials as f64);
    assert_eq!(rep.stderr, (rep.p_hat * (1.0 - rep.p_hat) / rep.trials as f64).sqrt());
}
