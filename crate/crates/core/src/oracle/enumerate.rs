use std::collections::{HashMap, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::OracleError;
use crate::forest::OrientedForest;
use crate::network::{EdgeIndex, Network, NodeIndex, OrientedEdge};
use crate::parallel::map_indexed;

/// Largest edge count accepted by [`enumerate_spanning_trees`].
pub const ENUMERATION_EDGE_LIMIT: usize = 25;

#[derive(Clone, Debug)]
pub struct WeightedTree {
    /// Sorted edge indices.
    pub edges: Vec<EdgeIndex>,
    /// Orientation toward the root, when one was requested.
    pub oriented: Option<OrientedForest>,
    /// `∏ c(e)` over the tree's edges.
    pub weight: BigRational,
    pub probability: BigRational,
}

/// The weighted uniform spanning tree law, listed exhaustively.
#[derive(Clone, Debug)]
pub struct TreeDistribution {
    trees: Vec<WeightedTree>,
    total: BigRational,
    root: Option<NodeIndex>,
    by_edges: HashMap<Vec<EdgeIndex>, usize>,
    by_forest: HashMap<OrientedForest, usize>,
}

impl TreeDistribution {
    pub fn trees(&self) -> &[WeightedTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// `Σ_t ∏_{e∈t} c(e)`.
    pub fn total_weight(&self) -> &BigRational {
        &self.total
    }

    pub fn root(&self) -> Option<NodeIndex> {
        self.root
    }

    pub fn index_of_edges(&self, edges: &[EdgeIndex]) -> Option<usize> {
        let mut key = edges.to_vec();
        key.sort();
        self.by_edges.get(&key).copied()
    }

    pub fn index_of_forest(&self, f: &OrientedForest) -> Option<usize> {
        self.by_forest.get(f).copied()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.trees.iter().map(|t| t.probability.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn probability_sum(&self) -> BigRational {
        self.trees.iter().fold(BigRational::zero(), |acc, t| acc + &t.probability)
    }

    /// The oriented states, in distribution order. Empty unless rooted.
    pub fn oriented_states(&self) -> Vec<OrientedForest> {
        self.trees.iter().filter_map(|t| t.oriented.clone()).collect()
    }
}

struct RollbackDsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    history: Vec<(usize, usize)>,
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        RollbackDsu {
            parent: (0..n).collect(),
            size: vec![1; n],
            history: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.history.push((a, b));
        true
    }

    fn rollback(&mut self) {
        let (a, b) = self.history.pop().expect("union to undo");
        self.parent[b] = b;
        self.size[a] -= self.size[b];
    }
}

fn search(
    g: &Network,
    candidates: &[EdgeIndex],
    from: usize,
    need: usize,
    dsu: &mut RollbackDsu,
    chosen: &mut Vec<EdgeIndex>,
    out: &mut Vec<Vec<EdgeIndex>>,
) {
    if chosen.len() == need {
        out.push(chosen.clone());
        return;
    }
    for k in from..candidates.len() {
        if candidates.len() - k < need - chosen.len() {
            break;
        }
        let edge = g.edge(candidates[k]);
        if dsu.union(edge.u.index(), edge.v.index()) {
            chosen.push(candidates[k]);
            search(g, candidates, k + 1, need, dsu, chosen, out);
            chosen.pop();
            dsu.rollback();
        }
    }
}

fn orient(g: &Network, edges: &[EdgeIndex], root: NodeIndex) -> OrientedForest {
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for &e in edges {
        let edge = g.edge(e);
        adj[edge.u.index()].push(OrientedEdge::new(e, true));
        adj[edge.v.index()].push(OrientedEdge::new(e, false));
    }
    let mut forest = OrientedForest::empty(g.vertex_count());
    let mut seen = vec![false; g.vertex_count()];
    seen[root.index()] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &e in &adj[x.index()] {
            let y = g.head(e);
            if !seen[y.index()] {
                seen[y.index()] = true;
                forest.set_out(y, Some(e.reversal()));
                queue.push_back(y);
            }
        }
    }
    forest
}

/// Lists every spanning tree of `g` with its exact weight and probability.
/// With a root, each tree also carries its (unique) orientation toward it.
///
/// Trees come out in lexicographic order of their sorted edge indices.
pub fn enumerate_spanning_trees(g: &Network, root: Option<NodeIndex>) -> Result<TreeDistribution, OracleError> {
    enumerate_with_workers(g, root, crate::parallel::default_workers())
}

pub(crate) fn enumerate_with_workers(
    g: &Network,
    root: Option<NodeIndex>,
    workers: usize,
) -> Result<TreeDistribution, OracleError> {
    if g.edge_count() > ENUMERATION_EDGE_LIMIT {
        return Err(OracleError::EdgeBudget {
            edges: g.edge_count(),
            limit: ENUMERATION_EDGE_LIMIT,
        });
    }
    let need = g.vertex_count() - 1;
    let candidates: Vec<EdgeIndex> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_self_loop())
        .map(|(i, _)| EdgeIndex::new(i))
        .collect();

    let edge_sets: Vec<Vec<EdgeIndex>> = if need == 0 {
        vec![Vec::new()]
    } else {
        // split the search by the smallest chosen edge
        map_indexed(candidates.len(), workers, |first| {
            let mut out = Vec::new();
            let mut dsu = RollbackDsu::new(g.vertex_count());
            let edge = g.edge(candidates[first]);
            if dsu.union(edge.u.index(), edge.v.index()) {
                let mut chosen = vec![candidates[first]];
                search(g, &candidates, first + 1, need, &mut dsu, &mut chosen, &mut out);
            }
            out
        })
        .into_iter()
        .flatten()
        .collect()
    };

    let weights: Vec<BigRational> = edge_sets
        .iter()
        .map(|set| set.iter().fold(BigRational::one(), |acc, &e| acc * g.conductance(e).exact()))
        .collect();
    let total = weights.iter().fold(BigRational::zero(), |acc, w| acc + w);
    let mut trees = Vec::with_capacity(edge_sets.len());
    let mut by_edges = HashMap::with_capacity(edge_sets.len());
    let mut by_forest = HashMap::new();
    for (i, (edges, weight)) in edge_sets.into_iter().zip(weights).enumerate() {
        let oriented = root.map(|r| orient(g, &edges, r));
        if let Some(f) = &oriented {
            by_forest.insert(f.clone(), i);
        }
        by_edges.insert(edges.clone(), i);
        let probability = &weight / &total;
        trees.push(WeightedTree {
            edges,
            oriented,
            weight,
            probability,
        });
    }
    Ok(TreeDistribution {
        trees,
        total,
        root,
        by_edges,
        by_forest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn unit_triangle() {
        let g = Network::builder().unit_edge(0, 1).unit_edge(1, 2).unit_edge(2, 0).build().unwrap();
        let d = enumerate_spanning_trees(&g, None).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.trees().iter().all(|t| t.probability == q(1, 3)));
    }

    #[test]
    fn weighted_triangle() {
        // ab=1, bc=2, ca=3
        let g = Network::builder().edge(0, 1, "1").edge(1, 2, "2").edge(2, 0, "3").build().unwrap();
        let d = enumerate_spanning_trees(&g, None).unwrap();
        assert_eq!(d.total_weight(), &q(11, 1));
        let p = |a: usize, b: usize| d.trees()[d.index_of_edges(&[EdgeIndex::new(a), EdgeIndex::new(b)]).unwrap()].probability.clone();
        assert_eq!(p(0, 1), q(2, 11));
        assert_eq!(p(0, 2), q(3, 11));
        assert_eq!(p(1, 2), q(6, 11));
        assert_eq!(d.probability_sum(), q(1, 1));
    }

    #[test]
    fn unit_k4_matches_cayley() {
        let mut b = Network::builder();
        for u in 0..4 {
            for v in u + 1..4 {
                b = b.unit_edge(u, v);
            }
        }
        let g = b.build().unwrap();
        let d = enumerate_spanning_trees(&g, Some(NodeIndex::new(0))).unwrap();
        assert_eq!(d.len(), 16);
        for t in d.trees() {
            let f = t.oriented.as_ref().unwrap();
            f.validate(&g).unwrap();
            assert_eq!(f.roots(), vec![NodeIndex::new(0)]);
        }
    }

    #[test]
    fn parallel_edges_and_loops() {
        let g = Network::builder().edge(0, 1, "1").edge(0, 1, "2").edge(1, 1, "5").build().unwrap();
        let d = enumerate_spanning_trees(&g, None).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.total_weight(), &q(3, 1));
        let single = Network::new(vec![crate::network::VertexId(0)], vec![]).unwrap();
        assert_eq!(enumerate_spanning_trees(&single, None).unwrap().len(), 1);
    }

    #[test]
    fn budget_guard() {
        let mut b = Network::builder();
        for i in 0..26 {
            b = b.unit_edge(0, i % 3 + 1);
        }
        let g = b.build().unwrap();
        assert!(matches!(
            enumerate_spanning_trees(&g, None),
            Err(OracleError::EdgeBudget { edges: 26, .. })
        ));
    }

    #[test]
    fn worker_count_does_not_change_order() {
        let g = Network::builder()
            .edge(0, 1, "1")
            .edge(1, 2, "2")
            .edge(2, 3, "3")
            .edge(3, 0, "4")
            .edge(0, 2, "5")
            .build()
            .unwrap();
        let a = enumerate_with_workers(&g, None, 1).unwrap();
        let b = enumerate_with_workers(&g, None, 4).unwrap();
        let ea: Vec<_> = a.trees().iter().map(|t| t.edges.clone()).collect();
        let eb: Vec<_> = b.trees().iter().map(|t| t.edges.clone()).collect();
        assert_eq!(ea, eb);
    }
}
