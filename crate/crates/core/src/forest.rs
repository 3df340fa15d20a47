//! Oriented spanning forests: every non-root vertex has exactly one outgoing
//! edge and following outgoing edges always ends at a root.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{EdgeId, EdgeIndex, Network, NodeIndex, OrientedEdge, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("forest has {got} slots, network has {expected} vertices")]
    SizeMismatch { got: usize, expected: usize },
    #[error("outgoing edge of vertex {0} does not start at it")]
    WrongTail(usize),
    #[error("oriented cycle through vertex {0}")]
    Cycle(usize),
    #[error("record references unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("record references unknown edge {0}")]
    UnknownEdge(u64),
    #[error("vertex {0} appears twice in record")]
    DuplicateVertex(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedForest {
    out: Vec<Option<OrientedEdge>>,
}

impl OrientedForest {
    /// Every vertex a root.
    pub fn empty(vertex_count: usize) -> Self {
        OrientedForest {
            out: vec![None; vertex_count],
        }
    }

    pub fn from_out(out: Vec<Option<OrientedEdge>>) -> Self {
        OrientedForest { out }
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn out(&self, v: NodeIndex) -> Option<OrientedEdge> {
        self.out[v.index()]
    }

    pub(crate) fn set_out(&mut self, v: NodeIndex, e: Option<OrientedEdge>) {
        self.out[v.index()] = e;
    }

    pub fn out_edges(&self) -> impl Iterator<Item = (NodeIndex, OrientedEdge)> + '_ {
        self.out
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|e| (NodeIndex::new(i), e)))
    }

    pub fn roots(&self) -> Vec<NodeIndex> {
        self.out
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_none())
            .map(|(i, _)| NodeIndex::new(i))
            .collect()
    }

    pub fn is_root(&self, v: NodeIndex) -> bool {
        self.out[v.index()].is_none()
    }

    pub fn parent(&self, g: &Network, v: NodeIndex) -> Option<NodeIndex> {
        self.out(v).map(|e| g.head(e))
    }

    /// Whether the oriented edge `e` is in the forest.
    pub fn contains(&self, g: &Network, e: OrientedEdge) -> bool {
        self.out[g.tail(e).index()] == Some(e)
    }

    /// Whether the physical edge is used in either direction.
    pub fn contains_edge(&self, g: &Network, e: EdgeIndex) -> bool {
        let fwd = OrientedEdge::new(e, true);
        self.contains(g, fwd) || self.contains(g, fwd.reversal())
    }

    pub fn unoriented(&self) -> BTreeSet<EdgeIndex> {
        self.out.iter().flatten().map(|e| e.edge).collect()
    }

    pub fn root_of(&self, g: &Network, mut v: NodeIndex) -> NodeIndex {
        while let Some(e) = self.out(v) {
            v = g.head(e);
        }
        v
    }

    /// Checks the forest invariants against `g`.
    pub fn validate(&self, g: &Network) -> Result<(), ForestError> {
        if self.out.len() != g.vertex_count() {
            return Err(ForestError::SizeMismatch {
                got: self.out.len(),
                expected: g.vertex_count(),
            });
        }
        for (v, e) in self.out_edges() {
            if g.tail(e) != v {
                return Err(ForestError::WrongTail(v.index()));
            }
        }
        // 0 = unvisited, 1 = on current chain, 2 = known to reach a root
        let mut state = vec![0u8; self.out.len()];
        for start in 0..self.out.len() {
            let mut chain = Vec::new();
            let mut v = NodeIndex::new(start);
            loop {
                match state[v.index()] {
                    2 => break,
                    1 => return Err(ForestError::Cycle(v.index())),
                    _ => {}
                }
                state[v.index()] = 1;
                chain.push(v);
                match self.out(v) {
                    Some(e) => v = g.head(e),
                    None => break,
                }
            }
            for c in chain {
                state[c.index()] = 2;
            }
        }
        Ok(())
    }

    pub fn to_record(&self, g: &Network) -> ForestRecord {
        let entries = self
            .out_edges()
            .map(|(v, e)| ForestEntry {
                vertex: g.vertex_id(v),
                edge: g.edge(e.edge).id,
                forward: e.forward,
            })
            .collect();
        let roots = self.roots().into_iter().map(|v| g.vertex_id(v)).collect();
        ForestRecord { entries, roots }
    }

    pub fn from_record(g: &Network, record: &ForestRecord) -> Result<Self, ForestError> {
        let mut forest = OrientedForest::empty(g.vertex_count());
        let mut seen = vec![false; g.vertex_count()];
        for entry in &record.entries {
            let v = g.node(entry.vertex).ok_or(ForestError::UnknownVertex(entry.vertex.0))?;
            let e = g.edge_by_id(entry.edge).ok_or(ForestError::UnknownEdge(entry.edge.0))?;
            if std::mem::replace(&mut seen[v.index()], true) {
                return Err(ForestError::DuplicateVertex(entry.vertex.0));
            }
            forest.out[v.index()] = Some(OrientedEdge::new(e, entry.forward));
        }
        forest.validate(g)?;
        Ok(forest)
    }
}

/// Serialized forest: one entry per non-root vertex plus the root set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestRecord {
    pub entries: Vec<ForestEntry>,
    pub roots: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestEntry {
    pub vertex: VertexId,
    pub edge: EdgeId,
    /// `true` when the edge is traversed from its `u` to its `v` endpoint.
    pub forward: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Network {
        Network::builder().unit_edge(0, 1).unit_edge(1, 2).build().unwrap()
    }

    #[test]
    fn validates_chain_and_detects_cycle() {
        let g = path3();
        let e0 = OrientedEdge::new(EdgeIndex::new(0), true);
        let e1 = OrientedEdge::new(EdgeIndex::new(1), true);
        let chain = OrientedForest::from_out(vec![Some(e0), Some(e1), None]);
        chain.validate(&g).unwrap();
        assert_eq!(chain.roots(), vec![NodeIndex::new(2)]);
        assert_eq!(chain.root_of(&g, NodeIndex::new(0)), NodeIndex::new(2));
        // 0 -> 1 and 1 -> 0 along the same edge
        let bad = OrientedForest::from_out(vec![Some(e0), Some(e0.reversal()), None]);
        assert!(matches!(bad.validate(&g), Err(ForestError::Cycle(_))));
        let wrong = OrientedForest::from_out(vec![Some(e1), None, None]);
        assert_eq!(wrong.validate(&g), Err(ForestError::WrongTail(0)));
    }

    #[test]
    fn self_loop_out_edge_is_a_cycle() {
        let g = Network::builder().unit_edge(0, 1).unit_edge(0, 0).build().unwrap();
        let f = OrientedForest::from_out(vec![Some(OrientedEdge::new(EdgeIndex::new(1), true)), None]);
        assert!(matches!(f.validate(&g), Err(ForestError::Cycle(0))));
    }

    #[test]
    fn record_round_trip() {
        let g = path3();
        let f = OrientedForest::from_out(vec![
            None,
            Some(OrientedEdge::new(EdgeIndex::new(0), false)),
            Some(OrientedEdge::new(EdgeIndex::new(1), false)),
        ]);
        let rec = f.to_record(&g);
        let json = serde_json::to_string(&rec).unwrap();
        let back: ForestRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(OrientedForest::from_record(&g, &back).unwrap(), f);
        assert_eq!(back.roots, vec![VertexId(0)]);
    }
}
