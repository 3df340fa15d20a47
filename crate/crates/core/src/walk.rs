//! Conductance-weighted random walks and chronological loop erasure.

use std::collections::HashMap;

use rand::Rng;
use thiserror::Error;

use crate::network::{Network, NodeIndex, OrientedEdge};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error("vertex {0} has no incident edge")]
    NoIncidentEdge(usize),
    #[error("target set is empty")]
    EmptyTargets,
    #[error("target mask has length {got}, network has {expected} vertices")]
    TargetMask { got: usize, expected: usize },
    #[error("walk did not hit the target set within {max_steps} steps")]
    StepBudgetExceeded { max_steps: u64 },
    #[error("edge {step} of path does not start where the previous one ended")]
    Unchained { step: usize },
}

/// A walk: a start vertex and the oriented edges it traversed, with the
/// visited vertex sequence kept alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    edges: Vec<OrientedEdge>,
    vertices: Vec<NodeIndex>,
}

impl Path {
    pub fn new(start: NodeIndex) -> Self {
        Path {
            edges: Vec::new(),
            vertices: vec![start],
        }
    }

    pub fn from_edges(g: &Network, start: NodeIndex, edges: &[OrientedEdge]) -> Result<Self, WalkError> {
        let mut p = Path::new(start);
        for (step, &e) in edges.iter().enumerate() {
            if g.tail(e) != p.end() {
                return Err(WalkError::Unchained { step });
            }
            p.push(g, e);
        }
        Ok(p)
    }

    fn push(&mut self, g: &Network, e: OrientedEdge) {
        debug_assert_eq!(g.tail(e), self.end());
        self.edges.push(e);
        self.vertices.push(g.head(e));
    }

    pub fn start(&self) -> NodeIndex {
        self.vertices[0]
    }

    pub fn end(&self) -> NodeIndex {
        *self.vertices.last().expect("nonempty")
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    /// `γ_0, γ_1, …`; one longer than `edges()`.
    pub fn vertices(&self) -> &[NodeIndex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.vertices.iter().all(|v| seen.insert(*v))
    }
}

/// One step of the walk from `v`: edge `e` with probability `c(e)/c(v)`.
pub fn walk_step<R: Rng + ?Sized>(g: &Network, v: NodeIndex, rng: &mut R) -> Result<OrientedEdge, WalkError> {
    g.sample_step(v, rng).ok_or(WalkError::NoIncidentEdge(v.index()))
}

/// Runs the walk from `start` until it first visits a vertex marked in
/// `targets` (a mask indexed by node). Starting inside the targets gives the
/// empty path.
pub fn walk_until_hit<R: Rng + ?Sized>(
    g: &Network,
    start: NodeIndex,
    targets: &[bool],
    rng: &mut R,
    max_steps: u64,
) -> Result<Path, WalkError> {
    if targets.len() != g.vertex_count() {
        return Err(WalkError::TargetMask {
            got: targets.len(),
            expected: g.vertex_count(),
        });
    }
    if !targets.iter().any(|&t| t) {
        return Err(WalkError::EmptyTargets);
    }
    let mut path = Path::new(start);
    let mut steps = 0u64;
    while !targets[path.end().index()] {
        if steps == max_steps {
            return Err(WalkError::StepBudgetExceeded { max_steps });
        }
        let e = walk_step(g, path.end(), rng)?;
        path.push(g, e);
        steps += 1;
    }
    Ok(path)
}

/// Chronological loop erasure.
///
/// With `t_0 = 0` and `t_i = 1 + max{t ≥ t_{i-1} : γ_t = γ_{t_{i-1}}}`, the
/// output visits `γ_{t_0}, γ_{t_1}, …`, and its `i`th edge is the edge the
/// walk used at step `t_i - 1`, so parallel edges keep their identity.
pub fn loop_erase(p: &Path) -> Path {
    let verts = p.vertices();
    let mut last = HashMap::with_capacity(verts.len());
    for (t, v) in verts.iter().enumerate() {
        last.insert(*v, t);
    }
    let mut edges = Vec::new();
    let mut out_vertices = vec![verts[0]];
    let mut t = 0usize;
    loop {
        let next = 1 + last[&verts[t]];
        if next > p.len() {
            break;
        }
        edges.push(p.edges()[next - 1]);
        out_vertices.push(verts[next]);
        t = next;
    }
    Path {
        edges,
        vertices: out_vertices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EdgeIndex, VertexId};
    use crate::rng::rng_from_seed;

    // vertex labels a=0, b=1, c=2, d=3 on K4 with one edge per pair
    fn k4() -> Network {
        Network::builder()
            .unit_edge(0, 1)
            .unit_edge(0, 2)
            .unit_edge(0, 3)
            .unit_edge(1, 2)
            .unit_edge(1, 3)
            .unit_edge(2, 3)
            .build()
            .unwrap()
    }

    fn path_through(g: &Network, labels: &[u64]) -> Path {
        let nodes: Vec<_> = labels.iter().map(|&l| g.node(VertexId(l)).unwrap()).collect();
        let edges: Vec<_> = nodes.windows(2).map(|w| g.lowest_edge_between(w[0], w[1]).unwrap()).collect();
        Path::from_edges(g, nodes[0], &edges).unwrap()
    }

    fn labels(g: &Network, p: &Path) -> Vec<u64> {
        p.vertices().iter().map(|&v| g.vertex_id(v).0).collect()
    }

    #[test]
    fn loop_erasure_examples() {
        let g = k4();
        assert_eq!(labels(&g, &loop_erase(&path_through(&g, &[0, 1, 2]))), vec![0, 1, 2]);
        assert_eq!(labels(&g, &loop_erase(&path_through(&g, &[0, 1, 0, 2]))), vec![0, 2]);
        assert_eq!(
            labels(&g, &loop_erase(&path_through(&g, &[0, 1, 2, 0, 2, 3]))),
            vec![0, 2, 3]
        );
        let single = Path::new(NodeIndex::new(0));
        assert_eq!(loop_erase(&single), single);
    }

    #[test]
    fn loop_erasure_keeps_traversed_parallel_edge() {
        let g = Network::builder().unit_edge(0, 1).unit_edge(0, 1).unit_edge(1, 2).build().unwrap();
        let (a, b) = (NodeIndex::new(0), NodeIndex::new(1));
        let e0 = OrientedEdge::new(EdgeIndex::new(0), true);
        let e1 = OrientedEdge::new(EdgeIndex::new(1), true);
        // a -e0-> b -e1-> a -e1-> b: the surviving edge is the last one used
        let p = Path::from_edges(&g, a, &[e0, e1.reversal(), e1]).unwrap();
        let le = loop_erase(&p);
        assert_eq!(le.edges(), &[e1]);
        assert_eq!(le.vertices(), &[a, b]);
    }

    #[test]
    fn unchained_edges_rejected() {
        let g = k4();
        let e = OrientedEdge::new(EdgeIndex::new(5), true);
        assert_eq!(
            Path::from_edges(&g, NodeIndex::new(0), &[e]).unwrap_err(),
            WalkError::Unchained { step: 0 }
        );
    }

    #[test]
    fn walk_until_hit_contracts() {
        let g = k4();
        let mut rng = rng_from_seed(1);
        let mut t = vec![false; 4];
        assert_eq!(walk_until_hit(&g, NodeIndex::new(0), &t, &mut rng, 10).unwrap_err(), WalkError::EmptyTargets);
        t[0] = true;
        assert!(walk_until_hit(&g, NodeIndex::new(0), &t, &mut rng, 10).unwrap().is_empty());
        let p = walk_until_hit(&g, NodeIndex::new(3), &t, &mut rng, 1_000).unwrap();
        assert_eq!(p.end(), NodeIndex::new(0));
        assert!(p.vertices()[..p.len()].iter().all(|v| *v != NodeIndex::new(0)));
        let mut t2 = vec![false; 4];
        t2[1] = true;
        let err = walk_until_hit(&g, NodeIndex::new(0), &t2, &mut rng_from_seed(3), 0).unwrap_err();
        assert_eq!(err, WalkError::StepBudgetExceeded { max_steps: 0 });
    }

    #[test]
    fn single_edge_is_forced() {
        let g = Network::builder().edge(0, 1, "2.5").build().unwrap();
        let mut rng = rng_from_seed(9);
        for _ in 0..100 {
            let e = walk_step(&g, NodeIndex::new(0), &mut rng).unwrap();
            assert_eq!(g.head(e), NodeIndex::new(1));
        }
    }
}
