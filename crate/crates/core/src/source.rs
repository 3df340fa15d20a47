//! Lazy, possibly infinite networks explored through neighborhood queries.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::network::{Conductance, EdgeId, Network, NetworkError, NodeIndex, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error("vertex {0} does not belong to this source")]
    UnknownVertex(u64),
    #[error("offspring distribution is not supercritical (mean {mean})")]
    NotSupercritical { mean: f64 },
    #[error("invalid offspring distribution: {0}")]
    BadOffspring(String),
    #[error("survival rejection budget of {attempts} attempts exhausted")]
    RejectionBudget { attempts: u32 },
    #[error("cannot classify rooted pair: {0}")]
    Classifier(String),
    #[error("invalid source parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// One edge seen from a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub edge: EdgeId,
    pub conductance: Conductance,
    pub other: VertexId,
}

/// A deterministic window onto a locally finite network.
///
/// Implementations must be pure: repeated queries return identical lists, and
/// every edge is reported from both endpoints with the same id and
/// conductance. A self-loop is reported once.
pub trait NetworkSource: Send + Sync {
    fn root(&self) -> VertexId;

    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError>;

    /// Whether the underlying infinite network is recurrent. Used to pick a
    /// free rather than wired window where that matters.
    fn is_recurrent(&self) -> bool {
        false
    }
}

impl<S: NetworkSource + ?Sized> NetworkSource for Arc<S> {
    fn root(&self) -> VertexId {
        (**self).root()
    }
    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError> {
        (**self).neighbors(v)
    }
    fn is_recurrent(&self) -> bool {
        (**self).is_recurrent()
    }
}

impl<S: NetworkSource + ?Sized> NetworkSource for Box<S> {
    fn root(&self) -> VertexId {
        (**self).root()
    }
    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError> {
        (**self).neighbors(v)
    }
    fn is_recurrent(&self) -> bool {
        (**self).is_recurrent()
    }
}

/// A finite network viewed as a source.
#[derive(Clone, Debug)]
pub struct FiniteSource {
    network: Arc<Network>,
    root: NodeIndex,
}

impl FiniteSource {
    pub fn new(network: Arc<Network>, root: VertexId) -> Result<Self, SourceError> {
        let root = network.try_node(root)?;
        Ok(FiniteSource { network, root })
    }
}

impl NetworkSource for FiniteSource {
    fn root(&self) -> VertexId {
        self.network.vertex_id(self.root)
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<Incidence>, SourceError> {
        let n = self.network.node(v).ok_or(SourceError::UnknownVertex(v.0))?;
        let mut seen_loops = HashSet::new();
        let mut out = Vec::new();
        for &e in self.network.incident(n) {
            let edge = self.network.edge(e.edge);
            if edge.is_self_loop() && !seen_loops.insert(e.edge) {
                continue;
            }
            out.push(Incidence {
                edge: edge.id,
                conductance: edge.conductance.clone(),
                other: self.network.vertex_id(self.network.head(e)),
            });
        }
        Ok(out)
    }
}

/// Checks purity and symmetry of `source` on the ball of radius `depth`.
/// Returns a description of the first violation found.
pub fn check_source_invariants<S: NetworkSource + ?Sized>(source: &S, depth: u32) -> Result<(), String> {
    let root = source.root();
    let mut dist = HashMap::from([(root, 0u32)]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let first = source.neighbors(v).map_err(|e| e.to_string())?;
        let again = source.neighbors(v).map_err(|e| e.to_string())?;
        if first != again {
            return Err(format!("neighbors({v}) is not pure"));
        }
        for inc in &first {
            let back = source.neighbors(inc.other).map_err(|e| e.to_string())?;
            let mirrored = back
                .iter()
                .any(|b| b.edge == inc.edge && b.other == v && b.conductance == inc.conductance);
            if !mirrored {
                return Err(format!("edge {} at {v} is not reported back by {}", inc.edge, inc.other));
            }
            let d = dist[&v];
            if d < depth && !dist.contains_key(&inc.other) {
                dist.insert(inc.other, d + 1);
                queue.push_back(inc.other);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_source_is_symmetric() {
        let g = Network::builder()
            .edge(0, 1, "1")
            .edge(1, 2, "2")
            .edge(2, 2, "0.5")
            .edge(0, 1, "3")
            .build()
            .unwrap();
        let s = FiniteSource::new(Arc::new(g), VertexId(0)).unwrap();
        check_source_invariants(&s, 5).unwrap();
        let at2 = s.neighbors(VertexId(2)).unwrap();
        assert_eq!(at2.len(), 2);
        assert!(matches!(s.neighbors(VertexId(9)), Err(SourceError::UnknownVertex(9))));
    }
}
