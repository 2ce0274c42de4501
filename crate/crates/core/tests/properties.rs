mod common;

use linhyper::census::EdgeTable;
use linhyper::hypergraphs::{classify, decompose, edge_space, threshold_m, EdgeRanker, Hypergraph, Stratum};
use linhyper::montecarlo::{sample_hypergraph, stream_rng};
use linhyper::partitions::{lemma23_bound_check, log_sigma, newton_gap, sigma, PartitionVector};
use linhyper::switching::{
    apply_forward, apply_reverse, count_forward_indexed, count_reverse_indexed, enumerate_forward, enumerate_reverse,
    greenhill_sum_bounds, SeriesSpec,
};
use linhyper::util::{binomial, ln_biguint};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;

use common::naive_sigma;

fn sizes(max_k: usize, max_size: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1..=max_size, 1..=max_k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sigma_matches_sum_of_products(s in sizes(10, 30)) {
        let pv = PartitionVector::new(s.clone()).unwrap();
        for j in 0..=s.len() {
            prop_assert_eq!(sigma(&pv, j).unwrap(), BigUint::from(naive_sigma(&s, j)));
        }
    }

    #[test]
    fn sigma_are_coefficients_of_the_product(s in sizes(8, 9)) {
        // Π(1 + n_i x) evaluated at x = 10^d with d large enough to separate coefficients
        let pv = PartitionVector::new(s.clone()).unwrap();
        let x = BigUint::from(10u32).pow(12);
        let prod: BigUint = s.iter().map(|&n| BigUint::from(1u32) + &x * n).product();
        let series: BigUint = (0..=s.len()).map(|j| sigma(&pv, j).unwrap() * x.pow(j as u32)).sum();
        prop_assert_eq!(prod, series);
    }

    #[test]
    fn all_ones_gives_binomials(k in 1usize..40) {
        let pv = PartitionVector::uniform(k as u64).unwrap();
        for j in 0..=k {
            prop_assert_eq!(sigma(&pv, j).unwrap(), binomial(&BigUint::from(k), j as u64));
        }
    }

    #[test]
    fn newton_gap_nonnegative(s in sizes(14, 1000)) {
        let pv = PartitionVector::new(s.clone()).unwrap();
        for j in 1..s.len() {
            prop_assert!(newton_gap(&pv, j).unwrap() >= BigRational::zero());
        }
    }

    #[test]
    fn log_sigma_tracks_exact_value(s in sizes(30, 100_000)) {
        let pv = PartitionVector::new(s.clone()).unwrap();
        for j in 1..=s.len() {
            let exact = ln_biguint(&sigma(&pv, j).unwrap());
            let approx = log_sigma(&pv, j).unwrap();
            prop_assert!((exact - approx).abs() <= 1e-9 * exact.abs().max(1.0), "j={} {} {}", j, exact, approx);
        }
    }

    #[test]
    fn ratio_bound_holds(s in sizes(12, 50)) {
        let pv = PartitionVector::new(s.clone()).unwrap();
        for r in 1..=s.len() {
            for t in 1..=r {
                prop_assert!(lemma23_bound_check(&pv, t, r).unwrap().holds);
            }
        }
    }

    #[test]
    fn ranking_round_trips(s in sizes(6, 4), r in 1usize..=4) {
        prop_assume!(r <= s.len());
        let pv = PartitionVector::new(s.clone()).unwrap();
        let ranker = EdgeRanker::new(&pv, r).unwrap();
        let edges: Vec<_> = edge_space(&pv, r).unwrap().collect();
        prop_assert_eq!(edges.len() as u128, ranker.len());
        prop_assert_eq!(BigUint::from(edges.len()), sigma(&pv, r).unwrap());
        let naive = common::naive_edges(&s, r);
        prop_assert_eq!(edges.iter().map(|e| e.vertices().to_vec()).collect::<Vec<_>>(), naive);
        for (i, e) in edges.iter().enumerate() {
            prop_assert_eq!(ranker.rank(e), i as u128);
            prop_assert_eq!(&ranker.unrank(i as u128), e);
        }
    }

    #[test]
    fn decomposition_ignores_edge_order(seed in 0u64..1000, m in 2u64..7) {
        let pv = PartitionVector::new(vec![2, 3, 2, 2]).unwrap();
        let mut rng = stream_rng(seed, 0);
        let h = sample_hypergraph(&pv, 3, m, &mut rng).unwrap();
        let mut shuffled = h.edges().to_vec();
        shuffled.shuffle(&mut rng);
        let h2 = Hypergraph::new(pv.clone(), 3, shuffled).unwrap();
        prop_assert_eq!(&h, &h2);
        let as_sets = |h: &Hypergraph| {
            let d = decompose(h);
            let mut c: Vec<Vec<_>> = d.clusters.iter().map(|c| {
                let mut v: Vec<_> = c.iter().map(|&i| h.edges()[i].clone()).collect();
                v.sort();
                v
            }).collect();
            c.sort();
            (d.links, c)
        };
        prop_assert_eq!(as_sets(&h), as_sets(&h2));
        let threshold = threshold_m(&pv, 3, m).unwrap();
        let lists: Vec<Vec<u32>> = h.edges().iter().map(|e| e.vertices().to_vec()).collect();
        let expected = common::naive_stratum(&lists.iter().collect::<Vec<_>>(), threshold);
        let got = match classify(&h, threshold) {
            Stratum::InPlus(t) => Ok(t),
            Stratum::NotPlus(v) => Err(v.to_string()),
        };
        prop_assert_eq!(got, expected.map_err(str::to_string));
    }

    #[test]
    fn text_form_round_trips(seed in 0u64..500, m in 0u64..6) {
        let pv = PartitionVector::new(vec![3, 1, 2, 2]).unwrap();
        let h = sample_hypergraph(&pv, 3, m, &mut stream_rng(seed, 1)).unwrap();
        let back = Hypergraph::parse(&h.to_string(), Some(3)).unwrap();
        prop_assert_eq!(h, back);
    }

    #[test]
    fn series_bound_holds(
        n in 2usize..40,
        c_hat in 0.01f64..0.33,
        a_frac in 0.0f64..1.0,
        raw in prop::collection::vec((0.0f64..1.0, -1.0f64..1.0), 40),
    ) {
        let a_max = c_hat * n as f64 * a_frac;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 1..=n {
            let (u, v) = raw[i - 1];
            let ai = u * a_max;
            let cap = if ai > 0.0 { c_hat / ai } else { 1.0 };
            let hi = if i > 1 { cap.min(1.0 / (i - 1) as f64) } else { cap };
            a.push(ai);
            b.push(if v >= 0.0 { v * hi } else { -v * -cap });
        }
        let spec = SeriesSpec { a, b, c_hat };
        prop_assume!(spec.violations().is_empty());
        let out = greenhill_sum_bounds(&spec).unwrap();
        prop_assert!(out.sigma1 <= out.sum && out.sum <= out.sigma2);
    }

    #[test]
    fn switchings_pair_up(seed in 0u64..300) {
        let pv = PartitionVector::new(vec![2, 2, 3]).unwrap();
        let mut rng = stream_rng(seed, 2);
        let h = sample_hypergraph(&pv, 3, 3, &mut rng).unwrap();
        let table = EdgeTable::with_overlaps(&pv, 3).unwrap();
        let idx: Vec<usize> = h.edges().iter().map(|e| table.index_of(e).unwrap()).collect();
        let threshold = threshold_m(&pv, 3, 3).unwrap();
        match classify(&h, threshold) {
            Stratum::InPlus(t) => {
                let rev = enumerate_reverse(&h).unwrap();
                prop_assert_eq!(rev.len() as u128, count_reverse_indexed(&table, &idx, t, threshold));
                for mv in rev.iter().take(20) {
                    let up = apply_reverse(&h, mv).unwrap();
                    prop_assert_eq!(classify(&up, threshold), Stratum::InPlus(t + 1));
                    prop_assert_eq!(apply_forward(&up, &mv.paired()).unwrap(), h.clone());
                }
                if t >= 1 {
                    let fwd = enumerate_forward(&h).unwrap();
                    prop_assert_eq!(fwd.len() as u128, count_forward_indexed(&table, &idx));
                    for mv in fwd.iter().take(20) {
                        let down = apply_forward(&h, mv).unwrap();
                        prop_assert_eq!(classify(&down, threshold), Stratum::InPlus(t - 1));
                        prop_assert_eq!(apply_reverse(&down, &mv.paired()).unwrap(), h.clone());
                    }
                } else {
                    prop_assert!(enumerate_forward(&h).is_err());
                }
            }
            Stratum::NotPlus(_) => prop_assert!(enumerate_forward(&h).is_err()),
        }
    }
}
