use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use super::lattice::regular_tree_adjacency;
use super::reversibility::{reversibility_report, sample_root_step_classes, ReversibilityReport};
use crate::contraction::truncate;
use crate::network::{Conductance, EdgeId, EdgeIndex, VertexId};
use crate::parallel::try_map_indexed;
use crate::rng::{rng_from_seed, split_seed, SimRng};
use crate::source::{Incidence, NetworkSource, SourceError};
use crate::wilson::{sample_oust, VertexOrder, WilsonError};

const PATH_BITS: u32 = 24;
const PATH_MASK: u64 = (1 << PATH_BITS) - 1;

/// Vertex `n` of the path hanging at tree vertex `t` (`n = 0` is `t` itself).
pub fn decorated_vertex(t: u64, n: u64) -> VertexId {
    VertexId(t << PATH_BITS | n)
}

/// `(t, n)` for a vertex of the network.
pub fn decorated_coords(v: VertexId) -> (u64, u64) {
    (v.0 >> PATH_BITS, v.0 & PATH_MASK)
}

/// Whether the edge is the `n`th edge of some added path, and which `n`.
pub fn decorated_path_edge(e: EdgeId) -> Option<u64> {
    match e.0 & PATH_MASK {
        0 => None,
        n => Some(n),
    }
}

/// The 3-regular tree with an infinite path attached at every vertex; the
/// `n`th path edge has conductance `2^{-n-1}`. Tree edges default to unit
/// conductance. Tree vertices are numbered as in the regular-tree source.
#[derive(Clone, Debug)]
pub struct DecoratedTreeSource {
    tree_conductance: Conductance,
    root: VertexId,
}

impl Default for DecoratedTreeSource {
    fn default() -> Self {
        DecoratedTreeSource {
            tree_conductance: Conductance::one(),
            root: decorated_vertex(0, 0),
        }
    }
}

impl DecoratedTreeSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_tree_conductance(mut self, c: Conductance) -> Self {
        self.tree_conductance = c;
        self
    }

    pub fn rooted_at(mut self, v: VertexId) -> Self {
        self.root = v;
        self
    }

    pub fn tree_conductance(&self) -> &Conductance {
        &self.tree_conductance
    }
}

impl NetworkSource for DecoratedTreeSource {
    fn root(&self) -> VertexId {
        self.root
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError> {
        let (t, n) = decorated_coords(v);
        if n + 1 >= PATH_MASK {
            return Err(SourceError::UnknownVertex(v.0));
        }
        let path = |k: u64| Incidence {
            edge: EdgeId(t << PATH_BITS | k),
            conductance: Conductance::pow2_inv(k as u32 + 1),
            other: decorated_vertex(t, k),
        };
        let mut out = Vec::new();
        if n == 0 {
            let adj = regular_tree_adjacency(3, t)
                .filter(|a| a.iter().all(|(_, w)| w >> (64 - PATH_BITS) == 0))
                .ok_or(SourceError::UnknownVertex(v.0))?;
            for (edge, w) in adj {
                out.push(Incidence {
                    edge: EdgeId(edge.0 << PATH_BITS),
                    conductance: self.tree_conductance.clone(),
                    other: decorated_vertex(w, 0),
                });
            }
        } else {
            let mut back = path(n);
            back.other = decorated_vertex(t, n - 1);
            out.push(back);
        }
        let mut forward = path(n + 1);
        forward.other = decorated_vertex(t, n + 1);
        out.push(forward);
        Ok(out)
    }
}

/// `o` with probability 4/7, else `o_n` with probability `3/(7·2^n)`.
pub fn decorated_root<R: Rng + ?Sized>(rng: &mut R) -> VertexId {
    if rng.random_range(0..7) < 4 {
        return decorated_vertex(0, 0);
    }
    let mut n = 1;
    while rng.random::<bool>() {
        n += 1;
    }
    decorated_vertex(0, n)
}

/// Isomorphism classes of `(G, ρ, X_1)` with `ρ` on the path at `o`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RootStepClass {
    /// `(o, o_1)`
    RootToPath,
    /// `(o_1, o)`
    PathToRoot,
    /// `(o, o')` with `o'` a tree neighbour.
    TreeStep,
    /// `(o_n, o_{n+1})`, `n ≥ 1`.
    Outward(u64),
    /// `(o_{n+1}, o_n)`, `n ≥ 1`.
    Inward(u64),
}

impl RootStepClass {
    pub fn swapped(self) -> Self {
        match self {
            RootStepClass::RootToPath => RootStepClass::PathToRoot,
            RootStepClass::PathToRoot => RootStepClass::RootToPath,
            RootStepClass::TreeStep => RootStepClass::TreeStep,
            RootStepClass::Outward(n) => RootStepClass::Inward(n),
            RootStepClass::Inward(n) => RootStepClass::Outward(n),
        }
    }
}

impl fmt::Display for RootStepClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootStepClass::RootToPath => write!(f, "(o,o_1)"),
            RootStepClass::PathToRoot => write!(f, "(o_1,o)"),
            RootStepClass::TreeStep => write!(f, "(o,o')"),
            RootStepClass::Outward(n) => write!(f, "(o_{},o_{})", n, n + 1),
            RootStepClass::Inward(n) => write!(f, "(o_{},o_{})", n + 1, n),
        }
    }
}

/// Classifies a root and its first walk step; `ρ` must lie on the path at `o`.
pub fn classify_decorated(rho: VertexId, x1: VertexId) -> Result<RootStepClass, String> {
    let ((t, n), (s, m)) = (decorated_coords(rho), decorated_coords(x1));
    if t != 0 {
        return Err(format!("root {rho} is off the path at o"));
    }
    match (n, m) {
        (0, 0) if s != 0 => Ok(RootStepClass::TreeStep),
        (0, 1) if s == 0 => Ok(RootStepClass::RootToPath),
        (1, 0) if s == 0 => Ok(RootStepClass::PathToRoot),
        (n, m) if s == 0 && n >= 1 && m == n + 1 => Ok(RootStepClass::Outward(n)),
        (n, m) if s == 0 && n >= 2 && m + 1 == n => Ok(RootStepClass::Inward(m)),
        _ => Err(format!("{rho} and {x1} are not adjacent")),
    }
}

fn q(n: i64, d: BigInt) -> BigRational {
    BigRational::new(BigInt::from(n), d)
}

/// The class probabilities as printed: `1/(7·2^n)` for both path classes
/// and `1/7` for both classes at `o`, for `n ≤ max_n`.
pub fn decorated_stated_probabilities(max_n: u64) -> BTreeMap<RootStepClass, BigRational> {
    let mut out = BTreeMap::new();
    let seventh = q(1, BigInt::from(7));
    out.insert(RootStepClass::RootToPath, seventh.clone());
    out.insert(RootStepClass::PathToRoot, seventh);
    for n in 1..=max_n {
        let p = q(1, BigInt::from(7) << n as usize);
        out.insert(RootStepClass::Outward(n), p.clone());
        out.insert(RootStepClass::Inward(n), p);
    }
    out
}

/// Exact class probabilities implied by the root law and the network with
/// tree conductance `c_T`: `P(ρ = x)·c(x, y)/c(x)`.
pub fn decorated_exact_probabilities(tree_conductance: &BigRational, max_n: u64) -> BTreeMap<RootStepClass, BigRational> {
    let mut out = decorated_stated_probabilities(max_n);
    let quarter = q(1, BigInt::from(4));
    let c_o = tree_conductance * BigRational::from_integer(3.into()) + &quarter;
    let p_o = q(4, BigInt::from(7));
    out.insert(RootStepClass::RootToPath, &p_o * &quarter / &c_o);
    out.insert(
        RootStepClass::TreeStep,
        &p_o * tree_conductance * BigRational::from_integer(3.into()) / &c_o,
    );
    out
}

/// Empirical check of `(G, ρ, X_1) = (G, X_1, ρ)` in law on the decorated tree,
/// compared with the stated class probabilities.
pub fn decorated_reversibility(
    source: &DecoratedTreeSource,
    samples: u64,
    seed: u64,
    workers: usize,
    max_n: u64,
) -> Result<ReversibilityReport, SourceError> {
    let counts = sample_root_step_classes(source, decorated_root, classify_decorated, samples, seed, workers)?;
    Ok(reversibility_report(
        &counts,
        samples,
        |k| k.swapped(),
        &decorated_stated_probabilities(max_n),
    ))
}

/// Same as [`decorated_reversibility`] with `ρ = o` always.
pub fn decorated_fixed_root_reversibility(
    source: &DecoratedTreeSource,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<ReversibilityReport, SourceError> {
    let fixed = |_: &mut SimRng| decorated_vertex(0, 0);
    let counts = sample_root_step_classes(source, fixed, classify_decorated, samples, seed, workers)?;
    Ok(reversibility_report(&counts, samples, |k| k.swapped(), &BTreeMap::new()))
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub depth: u32,
    pub samples: usize,
    /// Path edges checked per sample.
    pub interior_edges: usize,
    pub violations: u64,
    pub samples_with_violation: usize,
    /// Violations by position `n` of the edge along its path.
    pub violations_by_position: BTreeMap<u64, u64>,
    pub passed: bool,
}

/// Samples wired window forests at `depth` and counts added-path edges
/// absent from the forest among those whose outer endpoint lies at distance
/// at most `depth − 2` from the window root.
pub fn decorated_path_membership(
    source: &DecoratedTreeSource,
    depth: u32,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<MembershipReport, WilsonError> {
    let window = truncate(source, depth)?;
    let g = window.network();
    let interior: Vec<(EdgeIndex, u64)> = g
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let n = decorated_path_edge(e.id)?;
            if window.is_boundary(e.u) || window.is_boundary(e.v) {
                return None;
            }
            let far = window.distance(e.u)?.max(window.distance(e.v)?);
            (far + 2 <= depth).then_some((EdgeIndex::new(i), n))
        })
        .collect();
    let missing = try_map_indexed(samples, workers, |k| {
        let mut rng = rng_from_seed(split_seed(seed, k as u64));
        let forest = sample_oust(&window, &VertexOrder::Natural, &mut rng)?;
        Ok::<_, WilsonError>(
            interior
                .iter()
                .filter(|(e, _)| !forest.contains_edge(g, *e))
                .map(|&(_, n)| n)
                .collect::<Vec<_>>(),
        )
    })?;
    let mut by_position = BTreeMap::new();
    for n in missing.iter().flatten() {
        *by_position.entry(*n).or_insert(0u64) += 1;
    }
    let violations = by_position.values().sum();
    Ok(MembershipReport {
        depth,
        samples,
        interior_edges: interior.len(),
        violations,
        samples_with_violation: missing.iter().filter(|m| !m.is_empty()).count(),
        violations_by_position: by_position,
        passed: violations == 0,
    })
}

/// `1/4` as a tree conductance: the value at which `c(o) = 1` and the
/// stated root law is exactly the conductance-biased one.
pub fn decorated_balanced_tree_conductance() -> BigRational {
    q(1, BigInt::from(4))
}
