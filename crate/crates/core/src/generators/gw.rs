use std::sync::Mutex;

use serde::Serialize;

use super::OffspringDistribution;
use crate::network::{Conductance, EdgeId, VertexId};
use crate::parallel::map_indexed;
use crate::rng::{rng_from_seed, split_seed, SimRng};
use crate::source::{Incidence, NetworkSource, SourceError};

/// Unexpanded vertices beyond which a realization counts as surviving.
pub const SURVIVAL_CAP: usize = 4096;
/// Realizations tried before giving up on reaching the survival depth.
pub const MAX_REJECTIONS: u32 = 10_000;
const NODE_LIMIT: usize = 1 << 24;

// Vertices are numbered in breadth-first order; vertex i's children are
// assigned (as a contiguous id range) when i is expanded, in id order.
#[derive(Debug)]
struct Growth {
    rng: SimRng,
    parent: Vec<u64>,
    depth: Vec<u32>,
    first_child: Vec<u64>,
    child_count: Vec<u32>,
}

impl Growth {
    fn new(seed: u64) -> Self {
        Growth {
            rng: rng_from_seed(seed),
            parent: vec![0],
            depth: vec![0],
            first_child: Vec::new(),
            child_count: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    fn expanded(&self) -> usize {
        self.first_child.len()
    }

    fn expand_next(&mut self, law: &OffspringDistribution) -> Result<(), SourceError> {
        let i = self.expanded();
        let k = law.sample(&mut self.rng);
        if self.len() + k > NODE_LIMIT {
            return Err(SourceError::BadParameters(format!("tree exceeds {NODE_LIMIT} vertices")));
        }
        self.first_child.push(self.len() as u64);
        self.child_count.push(k as u32);
        let d = self.depth[i] + 1;
        for _ in 0..k {
            self.parent.push(i as u64);
            self.depth.push(d);
        }
        Ok(())
    }

    /// Expands until `v` is expanded; false if the tree dies out first.
    fn ensure_expanded(&mut self, v: usize, law: &OffspringDistribution) -> Result<bool, SourceError> {
        while self.expanded() <= v {
            if self.expanded() == self.len() {
                return Ok(false);
            }
            self.expand_next(law)?;
        }
        Ok(true)
    }

    fn survives(&mut self, law: &OffspringDistribution, survive_depth: u32) -> Result<bool, SourceError> {
        loop {
            if self.depth.last().copied().unwrap_or(0) >= survive_depth {
                return Ok(true);
            }
            let pending = self.len() - self.expanded();
            if pending == 0 {
                return Ok(false);
            }
            if pending >= SURVIVAL_CAP {
                return Ok(true);
            }
            self.expand_next(law)?;
        }
    }
}

/// Lazy Galton–Watson tree with unit conductances, regenerated until it
/// reaches `survive_depth`. Vertex 0 is the root; the edge to a vertex's
/// parent carries the vertex's id.
#[derive(Debug)]
pub struct GaltonWatsonSource {
    law: OffspringDistribution,
    seed: u64,
    survive_depth: u32,
    attempts: u32,
    growth: Mutex<Growth>,
}

impl GaltonWatsonSource {
    pub fn new(law: OffspringDistribution, seed: u64, survive_depth: u32) -> Result<Self, SourceError> {
        law.require_supercritical()?;
        for attempt in 0..MAX_REJECTIONS {
            let mut growth = Growth::new(split_seed(seed, attempt as u64));
            if growth.survives(&law, survive_depth)? {
                return Ok(GaltonWatsonSource {
                    law,
                    seed,
                    survive_depth,
                    attempts: attempt + 1,
                    growth: Mutex::new(growth),
                });
            }
        }
        Err(SourceError::RejectionBudget {
            attempts: MAX_REJECTIONS,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn survive_depth(&self) -> u32 {
        self.survive_depth
    }

    /// Realizations drawn, including the accepted one.
    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    pub fn offspring(&self) -> &OffspringDistribution {
        &self.law
    }

    /// Vertices generated so far.
    pub fn generated(&self) -> usize {
        self.growth.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

impl NetworkSource for GaltonWatsonSource {
    fn root(&self) -> VertexId {
        VertexId(0)
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError> {
        let unknown = SourceError::UnknownVertex(v.0);
        let i = usize::try_from(v.0).ok().filter(|&i| i < NODE_LIMIT).ok_or(unknown.clone())?;
        let mut g = self.growth.lock().unwrap_or_else(|e| e.into_inner());
        // v exists once some earlier vertex has been expanded to create it
        while g.len() <= i {
            if g.expanded() == g.len() || g.len() >= NODE_LIMIT {
                return Err(unknown);
            }
            g.expand_next(&self.law)?;
        }
        g.ensure_expanded(i, &self.law)?;
        let mut out = Vec::with_capacity(g.child_count[i] as usize + 1);
        if i > 0 {
            out.push(Incidence {
                edge: EdgeId(v.0),
                conductance: Conductance::one(),
                other: VertexId(g.parent[i]),
            });
        }
        let first = g.first_child[i];
        for c in first..first + g.child_count[i] as u64 {
            out.push(Incidence {
                edge: EdgeId(c),
                conductance: Conductance::one(),
                other: VertexId(c),
            });
        }
        Ok(out)
    }
}

/// Two independent Galton–Watson trees joined by an edge between their
/// roots, rooted at the first root. Vertex `2·i + t` is vertex `i` of tree
/// `t`; the joining edge has id 0.
#[derive(Debug)]
pub struct AugmentedGwSource {
    trees: [GaltonWatsonSource; 2],
}

impl AugmentedGwSource {
    /// `survive_depth = 0` leaves both trees unconditioned.
    pub fn new(law: OffspringDistribution, seed: u64, survive_depth: u32) -> Result<Self, SourceError> {
        let first = GaltonWatsonSource::new(law.clone(), split_seed(seed, 0), survive_depth)?;
        let second = GaltonWatsonSource::new(law, split_seed(seed, 1), survive_depth)?;
        Ok(AugmentedGwSource { trees: [first, second] })
    }

    pub fn tree(&self, t: usize) -> &GaltonWatsonSource {
        &self.trees[t]
    }
}

impl NetworkSource for AugmentedGwSource {
    fn root(&self) -> VertexId {
        VertexId(0)
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError> {
        let (local, t) = (v.0 / 2, v.0 % 2);
        let global = |x: u64| x.checked_mul(2).map(|x| x + t);
        let mut out = Vec::new();
        if local == 0 {
            out.push(Incidence {
                edge: EdgeId(0),
                conductance: Conductance::one(),
                other: VertexId(1 - t),
            });
        }
        for inc in self.trees[t as usize]
            .neighbors(VertexId(local))
            .map_err(|_| SourceError::UnknownVertex(v.0))?
        {
            let (edge, other) = global(inc.edge.0)
                .zip(global(inc.other.0))
                .ok_or(SourceError::UnknownVertex(v.0))?;
            out.push(Incidence {
                edge: EdgeId(edge),
                conductance: inc.conductance,
                other: VertexId(other),
            });
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub trials: usize,
    pub survived: usize,
    pub fraction: f64,
    pub std_error: f64,
}

/// Fraction of unconditioned trees with a vertex at `depth`, by simulating
/// generation sizes only. A generation of at least [`SURVIVAL_CAP`] counts
/// as surviving.
pub fn survival_fraction(
    law: &OffspringDistribution,
    depth: u32,
    trials: usize,
    seed: u64,
    workers: usize,
) -> SurvivalEstimate {
    let outcomes = map_indexed(trials, workers, |k| {
        let mut rng = rng_from_seed(split_seed(seed, k as u64));
        let mut population = 1usize;
        for _ in 0..depth {
            if population == 0 || population >= SURVIVAL_CAP {
                break;
            }
            population = (0..population).map(|_| law.sample(&mut rng)).sum();
        }
        population > 0
    });
    let survived = outcomes.iter().filter(|&&s| s).count();
    let p = survived as f64 / trials.max(1) as f64;
    SurvivalEstimate {
        trials,
        survived,
        fraction: p,
        std_error: (p * (1.0 - p) / trials.max(1) as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::truncate;
    use crate::source::check_source_invariants;

    fn sparse() -> OffspringDistribution {
        OffspringDistribution::parse(&["1/4", "0", "3/4"]).unwrap()
    }

    #[test]
    fn binary_tree_needs_no_rejection() {
        let s = GaltonWatsonSource::new(OffspringDistribution::deterministic(2), 9, 6).unwrap();
        assert_eq!(s.attempts(), 1);
        assert_eq!(s.neighbors(VertexId(0)).unwrap().len(), 2);
        assert_eq!(s.neighbors(VertexId(5)).unwrap().len(), 3);
        check_source_invariants(&s, 5).unwrap();
    }

    #[test]
    fn critical_law_rejected() {
        let law = OffspringDistribution::parse(&["1/2", "1/2"]).unwrap();
        assert!(matches!(
            GaltonWatsonSource::new(law, 0, 5),
            Err(SourceError::NotSupercritical { .. })
        ));
    }

    #[test]
    fn conditioned_tree_reaches_depth() {
        for seed in 0..20 {
            let s = GaltonWatsonSource::new(sparse(), seed, 8).unwrap();
            let w = truncate(&s, 8).unwrap();
            let far = w.network().nodes().filter_map(|v| w.distance(v)).max().unwrap();
            assert_eq!(far, 8, "seed {seed}");
            check_source_invariants(&s, 6).unwrap();
        }
    }

    #[test]
    fn seeded_windows_are_reproducible_and_nested() {
        let a = GaltonWatsonSource::new(sparse(), 77, 6).unwrap();
        let b = GaltonWatsonSource::new(sparse(), 77, 6).unwrap();
        // query b out of order first
        let _ = b.neighbors(VertexId(3));
        let wa = truncate(&a, 5).unwrap();
        let wb = truncate(&b, 5).unwrap();
        assert_eq!(wa.network().to_file(), wb.network().to_file());
        let small = truncate(&a, 3).unwrap();
        assert!(small.kept().iter().all(|v| wa.kept().contains(v)));
    }

    #[test]
    fn augmented_binary_tree() {
        let s = AugmentedGwSource::new(OffspringDistribution::deterministic(2), 5, 0).unwrap();
        let root = s.neighbors(VertexId(0)).unwrap();
        assert_eq!(root.len(), 3);
        assert!(root.iter().any(|i| i.other == VertexId(1) && i.edge == EdgeId(0)));
        check_source_invariants(&s, 5).unwrap();
        // window at depth D has at most 2·K^(D+1) vertices
        let w = truncate(&s, 4).unwrap();
        assert!(w.kept().len() <= 2 * 2usize.pow(5));
    }

    #[test]
    fn unknown_vertices() {
        let s = GaltonWatsonSource::new(OffspringDistribution::deterministic(2), 1, 2).unwrap();
        assert!(s.neighbors(VertexId(u64::MAX)).is_err());
    }

    #[test]
    fn survival_matches_fixed_point() {
        let est = survival_fraction(&sparse(), 50, 4000, 11, 4);
        assert!((est.fraction - 2.0 / 3.0).abs() < 4.0 * est.std_error, "{est:?}");
    }
}
