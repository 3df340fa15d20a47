//! Wilson's algorithm with chronologically oriented loop-erased branches.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use thiserror::Error;

use crate::contraction::{truncate, ContractionError, WiredContraction};
use crate::forest::OrientedForest;
use crate::network::{EdgeId, Network, NetworkError, NodeIndex, OrientedEdge, VertexId};
use crate::source::NetworkSource;
use crate::walk::{loop_erase, walk_until_hit, WalkError};

/// Default walk budget per branch.
pub const DEFAULT_MAX_STEPS: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WilsonError {
    #[error("vertex order is not a permutation of the network's vertices: {0}")]
    BadOrder(String),
    #[error("window depth must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Enumeration of vertices from which branches are started.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum VertexOrder {
    /// Construction order.
    #[default]
    Natural,
    Reversed,
    /// Explicit order; must list every vertex exactly once.
    Custom(Vec<VertexId>),
}

impl VertexOrder {
    pub fn resolve(&self, g: &Network) -> Result<Vec<NodeIndex>, WilsonError> {
        match self {
            VertexOrder::Natural => Ok(g.nodes().collect()),
            VertexOrder::Reversed => Ok(g.nodes().rev().collect()),
            VertexOrder::Custom(ids) => {
                if ids.len() != g.vertex_count() {
                    return Err(WilsonError::BadOrder(format!(
                        "{} entries for {} vertices",
                        ids.len(),
                        g.vertex_count()
                    )));
                }
                let mut seen = HashSet::new();
                ids.iter()
                    .map(|&id| {
                        let v = g.node(id).ok_or_else(|| WilsonError::BadOrder(format!("unknown vertex {id}")))?;
                        if !seen.insert(v) {
                            return Err(WilsonError::BadOrder(format!("vertex {id} repeated")));
                        }
                        Ok(v)
                    })
                    .collect()
            }
        }
    }
}

/// Random spanning tree of `g` oriented toward `root`, with probability
/// proportional to the product of its edge conductances.
pub fn wilson_rooted<R: Rng + ?Sized>(
    g: &Network,
    root: NodeIndex,
    order: &VertexOrder,
    rng: &mut R,
) -> Result<OrientedForest, WilsonError> {
    wilson_rooted_with_budget(g, root, order, rng, DEFAULT_MAX_STEPS)
}

pub fn wilson_rooted_with_budget<R: Rng + ?Sized>(
    g: &Network,
    root: NodeIndex,
    order: &VertexOrder,
    rng: &mut R,
    max_steps: u64,
) -> Result<OrientedForest, WilsonError> {
    let order = order.resolve(g)?;
    let mut in_tree = vec![false; g.vertex_count()];
    in_tree[root.index()] = true;
    let mut forest = OrientedForest::empty(g.vertex_count());
    for v in order {
        if in_tree[v.index()] {
            continue;
        }
        let walk = walk_until_hit(g, v, &in_tree, rng, max_steps)?;
        // branch edges point from the start toward the tree, in walk order
        for &e in loop_erase(&walk).edges() {
            let tail = g.tail(e);
            forest.set_out(tail, Some(e));
            in_tree[tail.index()] = true;
        }
    }
    Ok(forest)
}

/// Oriented uniform spanning tree of a wired contraction, rooted at `∂`.
pub fn sample_oust<R: Rng + ?Sized>(
    c: &WiredContraction,
    order: &VertexOrder,
    rng: &mut R,
) -> Result<OrientedForest, WilsonError> {
    let boundary = c.require_boundary()?;
    wilson_rooted(c.network(), boundary, order, rng)
}

/// Finite-window approximation of the oriented wired forest: the oriented
/// UST of the ball of radius `depth` with its complement wired.
pub fn sample_owusf_window<S: NetworkSource + ?Sized, R: Rng + ?Sized>(
    source: &S,
    depth: u32,
    order: &VertexOrder,
    rng: &mut R,
) -> Result<(WiredContraction, OrientedForest), WilsonError> {
    if depth == 0 {
        return Err(WilsonError::ZeroDepth);
    }
    let window = truncate(source, depth)?;
    let forest = sample_oust(&window, order, rng)?;
    Ok((window, forest))
}

/// Free-boundary window: UST of the ball itself rooted at the window root,
/// embedded in the contraction's vertex set (`∂`, if present, is an isolated
/// root). On recurrent networks this is the finite stand-in for the wired
/// forest.
pub fn sample_free_window<S: NetworkSource + ?Sized, R: Rng + ?Sized>(
    source: &S,
    depth: u32,
    rng: &mut R,
) -> Result<(WiredContraction, OrientedForest), WilsonError> {
    let window = truncate(source, depth)?;
    let interior = window.interior_network()?;
    let root = interior.try_node(source.root())?;
    let tree = wilson_rooted(&interior, root, &VertexOrder::Natural, rng)?;
    let net = window.network();
    let mut forest = OrientedForest::empty(net.vertex_count());
    for (v, e) in tree.out_edges() {
        let id = interior.edge(e.edge).id;
        let mapped = window.edge_map()[&id];
        let tail = net.try_node(interior.vertex_id(v))?;
        // endpoints keep their order, so the direction flag carries over
        let oriented = OrientedEdge::new(mapped, e.forward);
        debug_assert_eq!(net.tail(oriented), tail);
        forest.set_out(tail, Some(oriented));
    }
    Ok((window, forest))
}

/// Where a kept vertex points in a forest on a contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeptStep {
    To { edge: EdgeId, head: VertexId },
    /// Edge into `∂`: escape to infinity.
    Escape { edge: EdgeId },
    Root,
}

/// The forest restricted to kept vertices, via the contraction's edge labels.
pub fn kept_view(c: &WiredContraction, forest: &OrientedForest) -> BTreeMap<VertexId, KeptStep> {
    let net = c.network();
    c.kept()
        .iter()
        .map(|&id| {
            let v = net.node(id).expect("kept vertex");
            let step = match forest.out(v) {
                None => KeptStep::Root,
                Some(e) => {
                    let head = net.head(e);
                    let edge = net.edge(e.edge).id;
                    if c.is_boundary(head) {
                        KeptStep::Escape { edge }
                    } else {
                        KeptStep::To {
                            edge,
                            head: net.vertex_id(head),
                        }
                    }
                }
            };
            (id, step)
        })
        .collect()
}
