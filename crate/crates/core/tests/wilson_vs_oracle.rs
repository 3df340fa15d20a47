mod common;

use cyclebreak_core::corpus::corpus;
use cyclebreak_core::oracle::{chi_square_gof, chi_square_two_sample, oriented_state_space};
use cyclebreak_core::parallel::{default_workers, map_indexed};
use cyclebreak_core::rng::{rng_from_seed, split_seed};
use cyclebreak_core::wilson::{sample_oust, VertexOrder};

const SAMPLES: usize = 40_000;

fn counts(name: &str, order: &VertexOrder, seed: u64) -> (Vec<u64>, Vec<f64>) {
    let entry = corpus().unwrap().into_iter().find(|e| e.name == name).unwrap();
    let dist = oriented_state_space(&entry.contraction).unwrap();
    let hits = map_indexed(SAMPLES, default_workers(), |i| {
        let mut rng = rng_from_seed(split_seed(seed, i as u64));
        let f = sample_oust(&entry.contraction, order, &mut rng).unwrap();
        dist.index_of_forest(&f).expect("sample lies in the state space")
    });
    let mut c = vec![0u64; dist.len()];
    for h in hits {
        c[h] += 1;
    }
    (c, dist.probabilities())
}

#[test]
fn oust_matches_exact_law() {
    for (i, name) in ["k4-wired", "square-diagonal", "multi-edge-pair", "triangle-tail"].iter().enumerate() {
        let (observed, expected) = counts(name, &VertexOrder::Natural, 100 + i as u64);
        let r = chi_square_gof(&observed, &expected).unwrap();
        assert!(r.p_value > 1e-3, "{name}: p = {}", r.p_value);
    }
}

#[test]
fn oust_law_does_not_depend_on_order() {
    for (i, name) in ["k4-wired", "five-path-loop"].iter().enumerate() {
        let (a, _) = counts(name, &VertexOrder::Natural, 200 + i as u64);
        let (b, _) = counts(name, &VertexOrder::Reversed, 300 + i as u64);
        let r = chi_square_two_sample(&a, &b).unwrap();
        assert!(r.p_value > 1e-3, "{name}: p = {}", r.p_value);
    }
}

#[test]
fn wrong_law_is_rejected() {
    let (observed, expected) = counts("k4-wired", &VertexOrder::Natural, 400);
    let uniform = vec![1.0 / expected.len() as f64; expected.len()];
    let r = chi_square_gof(&observed, &uniform).unwrap();
    assert!(r.p_value < 1e-6, "uniform law accepted: p = {}", r.p_value);
}
