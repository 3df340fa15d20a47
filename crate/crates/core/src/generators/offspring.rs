use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::network::format_exact;
use crate::source::SourceError;

/// Finite-support offspring law `p_0, …, p_K` with exact rational weights.
#[derive(Clone, Debug)]
pub struct OffspringDistribution {
    probs: Vec<BigRational>,
    approx: Vec<f64>,
    law: WeightedIndex<f64>,
}

impl PartialEq for OffspringDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.probs == other.probs
    }
}

impl OffspringDistribution {
    pub fn new(probs: Vec<BigRational>) -> Result<Self, SourceError> {
        if probs.is_empty() {
            return Err(SourceError::BadOffspring("no probabilities".into()));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(SourceError::BadOffspring("negative probability".into()));
        }
        let sum = probs.iter().fold(BigRational::zero(), |acc, p| acc + p);
        if !sum.is_one() {
            return Err(SourceError::BadOffspring(format!("probabilities sum to {}", format_exact(&sum))));
        }
        let approx: Vec<f64> = probs.iter().map(|p| p.to_f64().unwrap_or(0.0)).collect();
        let law = WeightedIndex::new(&approx).map_err(|e| SourceError::BadOffspring(e.to_string()))?;
        Ok(OffspringDistribution { probs, approx, law })
    }

    /// Parses decimal or `p/q` strings, e.g. `["1/4", "0", "3/4"]`.
    pub fn parse<S: AsRef<str>>(probs: &[S]) -> Result<Self, SourceError> {
        let parsed = probs
            .iter()
            .map(|s| parse_probability(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(parsed)
    }

    /// Every vertex has exactly `k` children.
    pub fn deterministic(k: usize) -> Self {
        let mut probs = vec![BigRational::zero(); k + 1];
        probs[k] = BigRational::one();
        Self::new(probs).expect("point mass is a distribution")
    }

    pub fn probabilities(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn max_offspring(&self) -> usize {
        self.probs.iter().rposition(|p| !p.is_zero()).unwrap_or(0)
    }

    pub fn mean(&self) -> BigRational {
        self.probs
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (k, p)| acc + p * BigRational::from_integer(k.into()))
    }

    pub fn is_supercritical(&self) -> bool {
        self.mean() > BigRational::one()
    }

    pub fn require_supercritical(&self) -> Result<(), SourceError> {
        if self.is_supercritical() {
            Ok(())
        } else {
            Err(SourceError::NotSupercritical {
                mean: self.mean().to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Generating function `Σ p_k s^k`.
    pub fn pgf(&self, s: f64) -> f64 {
        self.approx.iter().rev().fold(0.0, |acc, &p| acc * s + p)
    }

    /// Smallest fixed point of the generating function on `[0, 1]`.
    pub fn extinction_probability(&self) -> f64 {
        let mut q = 0.0;
        for _ in 0..100_000 {
            let next = self.pgf(q);
            if (next - q).abs() < 1e-15 {
                return next;
            }
            q = next;
        }
        q
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.law.sample(rng)
    }
}

fn parse_probability(s: &str) -> Result<BigRational, SourceError> {
    let bad = || SourceError::BadOffspring(format!("cannot parse probability {s:?}"));
    if s.trim() == "0" {
        return Ok(BigRational::zero());
    }
    // reuse the exact conductance parser; it only accepts positive values
    s.parse::<crate::network::Conductance>()
        .map(|c| c.exact().clone())
        .map_err(|_| bad())
}
