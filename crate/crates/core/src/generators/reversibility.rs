use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::Serialize;

use crate::network::VertexId;
use crate::parallel::try_map_indexed;
use crate::rng::{rng_from_seed, split_seed, SimRng};
use crate::source::{NetworkSource, SourceError};

/// Samples per independently seeded chunk.
const CHUNK: u64 = 10_000;

/// One step of the conductance walk from `v` on a source. A self-loop,
/// reported once, is weighted twice.
pub fn source_step(source: &(impl NetworkSource + ?Sized), v: VertexId, rng: &mut SimRng) -> Result<VertexId, SourceError> {
    let nbrs = source.neighbors(v)?;
    let weights: Vec<f64> = nbrs
        .iter()
        .map(|i| if i.other == v { 2.0 } else { 1.0 } * i.conductance.value())
        .collect();
    let law = WeightedIndex::new(&weights).map_err(|e| SourceError::BadParameters(e.to_string()))?;
    Ok(nbrs[law.sample(rng)].other)
}

/// Counts of the class of `(G, ρ, X_1)` over `samples` draws of `ρ` from
/// `root_law` followed by one walk step. Independent of the worker count.
pub fn sample_root_step_classes<S, L, C, K>(
    source: &S,
    root_law: L,
    classify: C,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<BTreeMap<K, u64>, SourceError>
where
    S: NetworkSource + ?Sized,
    L: Fn(&mut SimRng) -> VertexId + Sync,
    C: Fn(VertexId, VertexId) -> Result<K, String> + Sync,
    K: Ord + Send,
{
    let chunks = samples.div_ceil(CHUNK) as usize;
    let partial = try_map_indexed(chunks, workers, |k| {
        let mut rng = rng_from_seed(split_seed(seed, k as u64));
        let n = CHUNK.min(samples - k as u64 * CHUNK);
        let mut counts = BTreeMap::new();
        for _ in 0..n {
            let rho = root_law(&mut rng);
            let x1 = source_step(source, rho, &mut rng)?;
            let class = classify(rho, x1).map_err(SourceError::Classifier)?;
            *counts.entry(class).or_insert(0u64) += 1;
        }
        Ok::<_, SourceError>(counts)
    })?;
    let mut total = BTreeMap::new();
    for counts in partial {
        for (k, c) in counts {
            *total.entry(k).or_insert(0) += c;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassRow {
    pub class: String,
    pub count: u64,
    pub frequency: f64,
    pub std_error: f64,
    /// The class with the two roots exchanged.
    pub swapped: String,
    pub swapped_frequency: f64,
    pub swap_z: f64,
    pub reference: Option<String>,
    pub reference_z: Option<f64>,
    pub within_3se: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReversibilityReport {
    pub samples: u64,
    pub rows: Vec<ClassRow>,
    /// Largest `|z|` between a class and its swap.
    pub max_swap_z: f64,
}

impl ReversibilityReport {
    pub fn row(&self, class: &str) -> Option<&ClassRow> {
        self.rows.iter().find(|r| r.class == class)
    }
}

/// Compares every class with its swapped partner and with optional exact
/// reference probabilities. Standard errors against a reference use the
/// reference probability.
pub fn reversibility_report<K, W>(
    counts: &BTreeMap<K, u64>,
    samples: u64,
    swap: W,
    reference: &BTreeMap<K, BigRational>,
) -> ReversibilityReport
where
    K: Ord + Clone + Display,
    W: Fn(&K) -> K,
{
    let n = samples.max(1) as f64;
    let freq = |k: &K| counts.get(k).copied().unwrap_or(0) as f64 / n;
    let classes: BTreeSet<K> = counts.keys().chain(reference.keys()).cloned().collect();
    let mut rows = Vec::with_capacity(classes.len());
    let mut max_swap_z: f64 = 0.0;
    for k in classes {
        let partner = swap(&k);
        let (p, q) = (freq(&k), freq(&partner));
        let var = (p * (1.0 - p) + q * (1.0 - q)) / n;
        let swap_z = if var > 0.0 { (p - q) / var.sqrt() } else { 0.0 };
        max_swap_z = max_swap_z.max(swap_z.abs());
        let reference_value = reference.get(&k).map(|r| (r, r.to_f64().unwrap_or(f64::NAN)));
        let reference_z = reference_value.map(|(_, r)| {
            let se = (r * (1.0 - r) / n).sqrt();
            if se > 0.0 {
                (p - r) / se
            } else if p == r {
                0.0
            } else {
                f64::INFINITY
            }
        });
        rows.push(ClassRow {
            class: k.to_string(),
            count: counts.get(&k).copied().unwrap_or(0),
            frequency: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            swapped: partner.to_string(),
            swapped_frequency: q,
            swap_z,
            reference: reference_value.map(|(r, _)| crate::network::format_exact(r)),
            reference_z,
            within_3se: reference_z.map(|z| z.abs() <= 3.0),
        });
    }
    ReversibilityReport {
        samples,
        rows,
        max_swap_z,
    }
}
