mod common;

use cyclebreak_core::corpus::corpus;
use cyclebreak_core::network::{Network, NodeIndex};
use cyclebreak_core::oracle::{enumerate_spanning_trees, kirchhoff_total, oriented_state_space};
use cyclebreak_core::rng::rng_from_seed;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

use common::{brute_force_total, brute_force_trees, q, random_contraction};

#[test]
fn corpus_totals_agree_three_ways() {
    for entry in corpus().unwrap() {
        let g = entry.contraction.network();
        let enumerated = enumerate_spanning_trees(g, None).unwrap();
        assert_eq!(enumerated.total_weight(), &kirchhoff_total(g), "{}", entry.name);
        assert_eq!(enumerated.total_weight(), &brute_force_total(g), "{}", entry.name);
        assert_eq!(enumerated.len(), brute_force_trees(g).len(), "{}", entry.name);
    }
}

#[test]
fn probabilities_sum_to_one() {
    for entry in corpus().unwrap() {
        let dist = oriented_state_space(&entry.contraction).unwrap();
        assert!(dist.probability_sum().is_one(), "{}", entry.name);
    }
}

#[test]
fn cycle_has_n_trees() {
    for n in 3..8u64 {
        let mut b = Network::builder();
        for i in 0..n {
            b = b.unit_edge(i, (i + 1) % n);
        }
        let g = b.build().unwrap();
        assert_eq!(kirchhoff_total(&g), q(n as i64, 1));
        assert_eq!(enumerate_spanning_trees(&g, None).unwrap().len(), n as usize);
    }
}

#[test]
fn cayley_count_on_complete_graphs() {
    for n in 2..6u64 {
        let mut b = Network::builder();
        for u in 0..n {
            for v in u + 1..n {
                b = b.unit_edge(u, v);
            }
        }
        let g = b.build().unwrap();
        let cayley = (n as i64).pow(n as u32 - 2);
        assert_eq!(kirchhoff_total(&g), q(cayley, 1));
    }
}

#[test]
fn per_tree_weights_match_brute_force() {
    let mut rng = rng_from_seed(17);
    for _ in 0..40 {
        let k = rng.random_range(1..=4);
        let extra = rng.random_range(0..=4);
        let c = random_contraction(&mut rng, k, extra);
        let g = c.network();
        let dist = enumerate_spanning_trees(g, Some(NodeIndex::new(0))).unwrap();
        let total = brute_force_total(g);
        for (edges, weight) in brute_force_trees(g) {
            let list: Vec<_> = edges.into_iter().collect();
            let i = dist.index_of_edges(&list).expect("brute-force tree is enumerated");
            assert_eq!(dist.trees()[i].probability, weight / &total);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kirchhoff_matches_subset_enumeration(seed in any::<u64>(), k in 1usize..=5, extra in 0usize..=5) {
        let mut rng = rng_from_seed(seed);
        let c = random_contraction(&mut rng, k, extra);
        let g = c.network();
        let brute = brute_force_total(g);
        prop_assert!(brute > BigRational::zero());
        prop_assert_eq!(kirchhoff_total(g), brute);
    }
}
