use std::ops::{AddAssign, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use super::{rational_string, OracleError, TreeDistribution};
use crate::network::{Network, OrientedEdge};
use crate::parallel::{default_workers, map_indexed};
use crate::rng::{rng_from_seed, split_seed};
use crate::update::update;

/// State spaces up to this size are checked on every event.
pub const EXHAUSTIVE_STATE_LIMIT: usize = 12;
/// Random events checked on larger state spaces (plus `∅` and the full space).
pub const SAMPLED_EVENTS: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct ToleranceReport {
    pub states: usize,
    pub events: usize,
    pub exhaustive: bool,
    /// `c(e)/c(e⁻)`.
    pub ratio: String,
    /// Smallest `P(U(A,e)) − ratio·P(A)` seen.
    pub min_slack: String,
    pub violations: usize,
    pub passed: bool,
}

/// Checks `P(U(A,e)) ≥ c(e)/c(e⁻)·P(A)` over events `A` of the state space
/// of `dist`, exactly.
pub fn certify_update_tolerance(
    g: &Network,
    dist: &TreeDistribution,
    e: OrientedEdge,
    seed: u64,
) -> Result<ToleranceReport, OracleError> {
    let states = dist.oriented_states();
    if states.len() != dist.len() {
        return Err(OracleError::StateMismatch);
    }
    let n = states.len();
    if n > super::STATE_LIMIT {
        return Err(OracleError::StateBudget {
            states: n,
            limit: super::STATE_LIMIT,
        });
    }
    let image: Vec<usize> = states
        .iter()
        .map(|f| {
            let out = update(g, f, e)?;
            dist.index_of_forest(&out.forest).ok_or(OracleError::LeftStateSpace)
        })
        .collect::<Result<_, _>>()?;
    let pi: Vec<&BigRational> = dist.trees().iter().map(|t| &t.probability).collect();
    let ratio = g.conductance(e.edge).exact() / g.conductance_at_exact(g.tail(e));

    // Slacks are computed as integers scaled by den(ratio)·L, where L clears
    // every probability's denominator.
    let scale = pi.iter().fold(BigInt::one(), |l, p| l.lcm(p.denom()));
    let weights: Vec<BigInt> = pi.iter().map(|p| p.numer() * (&scale / p.denom())).collect();
    let (a, b) = (ratio.numer().clone(), ratio.denom().clone());

    let exhaustive = n <= EXHAUSTIVE_STATE_LIMIT;
    let events = if exhaustive { 1usize << n } else { SAMPLED_EVENTS + 2 };
    let members = |k: usize| -> Vec<bool> {
        if exhaustive {
            (0..n).map(|i| k >> i & 1 == 1).collect()
        } else if k == 0 {
            vec![false; n]
        } else if k == 1 {
            vec![true; n]
        } else {
            let mut rng = rng_from_seed(split_seed(seed, k as u64));
            (0..n).map(|_| rng.random::<bool>()).collect()
        }
    };
    let narrow = scale.bits() + a.bits().max(b.bits()) < 120;
    let slacks: Vec<BigInt> = if narrow {
        let small = |x: &BigInt| x.to_i128().expect("fits");
        let w: Vec<i128> = weights.iter().map(small).collect();
        scaled_slacks(&w, &small(&a), &small(&b), &image, events, members)
            .into_iter()
            .map(BigInt::from)
            .collect()
    } else {
        scaled_slacks(&weights, &a, &b, &image, events, members)
    };
    let violations = slacks.iter().filter(|s| s.is_negative()).count();
    let min = slacks.iter().min().cloned().unwrap_or_else(BigInt::zero);
    let min = BigRational::new(min, b * scale);
    Ok(ToleranceReport {
        states: n,
        events,
        exhaustive,
        ratio: rational_string(&ratio),
        min_slack: rational_string(&min),
        violations,
        passed: violations == 0,
    })
}

/// `b·P(U(A,e)) − a·P(A)` for each event, in integer weights.
fn scaled_slacks<T, M>(weights: &[T], a: &T, b: &T, image: &[usize], events: usize, members: M) -> Vec<T>
where
    T: Clone + Zero + Send + Sync + for<'x> AddAssign<&'x T> + Mul<Output = T> + Sub<Output = T>,
    M: Fn(usize) -> Vec<bool> + Sync + Send,
{
    let n = weights.len();
    map_indexed(events, default_workers(), |k| {
        let members = members(k);
        let mut hit = vec![false; n];
        let mut p_a = T::zero();
        let mut p_image = T::zero();
        for i in (0..n).filter(|&i| members[i]) {
            p_a += &weights[i];
            if !std::mem::replace(&mut hit[image[i]], true) {
                p_image += &weights[image[i]];
            }
        }
        b.clone() * p_image - a.clone() * p_a
    })
}
