//! Wired contractions: everything outside a kept set is identified into a
//! single boundary vertex `∂`, and the self-loops this creates are dropped.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::network::{Conductance, EdgeId, EdgeIndex, Network, NetworkError, NodeIndex, VertexId};
use crate::source::{Incidence, NetworkSource, SourceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractionError {
    #[error("kept vertex set is empty")]
    EmptyKeep,
    #[error("vertex {0} is not a vertex of the base network")]
    NotDiscovered(u64),
    #[error("contraction has no boundary vertex")]
    MissingBoundary,
    #[error("window radius {radius} must be below depth {depth}")]
    RadiusTooLarge { radius: u32, depth: u32 },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Source(#[from] SourceError),
}

/// Root and graph distances of a ball-shaped window.
#[derive(Clone, Debug)]
pub struct WindowInfo {
    pub root: NodeIndex,
    pub depth: u32,
    // by node index of the contracted network; u32::MAX for ∂ and unreachable
    distance: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct WiredContraction {
    network: Network,
    boundary: Option<NodeIndex>,
    kept: Vec<VertexId>,
    edge_map: BTreeMap<EdgeId, EdgeIndex>,
    window: Option<WindowInfo>,
}

impl WiredContraction {
    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn boundary(&self) -> Option<NodeIndex> {
        self.boundary
    }

    pub fn require_boundary(&self) -> Result<NodeIndex, ContractionError> {
        self.boundary.ok_or(ContractionError::MissingBoundary)
    }

    pub fn kept(&self) -> &[VertexId] {
        &self.kept
    }

    /// Original edge id → edge of the contracted network.
    pub fn edge_map(&self) -> &BTreeMap<EdgeId, EdgeIndex> {
        &self.edge_map
    }

    pub fn window(&self) -> Option<&WindowInfo> {
        self.window.as_ref()
    }

    pub fn is_boundary(&self, v: NodeIndex) -> bool {
        self.boundary == Some(v)
    }

    /// Graph distance from the window root, measured inside the kept set.
    pub fn distance(&self, v: NodeIndex) -> Option<u32> {
        let w = self.window.as_ref()?;
        match w.distance[v.index()] {
            u32::MAX => None,
            d => Some(d),
        }
    }

    /// Whether `v` is a kept vertex joined to `∂` by an edge of the network.
    pub fn boundary_adjacent(&self, v: NodeIndex) -> bool {
        match self.boundary {
            Some(b) if b != v => self.network.incident(v).iter().any(|&e| self.network.head(e) == b),
            _ => false,
        }
    }

    /// Attaches a window root and depth, computing distances by breadth-first
    /// search over kept vertices only.
    pub fn with_window(mut self, root: VertexId, depth: u32) -> Result<Self, ContractionError> {
        let root = self.network.try_node(root)?;
        let mut distance = vec![u32::MAX; self.network.vertex_count()];
        distance[root.index()] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &e in self.network.incident(x) {
                let y = self.network.head(e);
                if Some(y) != self.boundary && distance[y.index()] == u32::MAX {
                    distance[y.index()] = distance[x.index()] + 1;
                    queue.push_back(y);
                }
            }
        }
        self.window = Some(WindowInfo { root, depth, distance });
        Ok(self)
    }

    /// The network induced on the kept vertices (no `∂`). Fails if that
    /// subgraph is disconnected.
    pub fn interior_network(&self) -> Result<Network, NetworkError> {
        let Some(b) = self.boundary else {
            return Ok(self.network.clone());
        };
        let vertices = self.network.nodes().filter(|&v| v != b).map(|v| self.network.vertex_id(v)).collect();
        let edges = self
            .network
            .edges()
            .iter()
            .filter(|e| e.u != b && e.v != b)
            .map(|e| {
                (
                    e.id,
                    self.network.vertex_id(e.u),
                    self.network.vertex_id(e.v),
                    e.conductance.clone(),
                )
            })
            .collect();
        Network::new(vertices, edges)
    }
}

/// Contracts the complement of `keep` in a finite network.
///
/// When no edge leaves `keep`, the induced network is returned without a
/// boundary vertex.
pub fn wired_contract(g: &Network, keep: &[VertexId]) -> Result<WiredContraction, ContractionError> {
    let mut kept_set = HashSet::new();
    for &v in keep {
        g.try_node(v).map_err(|_| ContractionError::NotDiscovered(v.0))?;
        kept_set.insert(v);
    }
    let edges = g.edges().iter().map(|e| {
        let (u, v) = (g.vertex_id(e.u), g.vertex_id(e.v));
        (e.id, u, v, e.conductance.clone())
    });
    build(keep, &kept_set, edges)
}

/// Contracts the complement of `keep` in a lazily explored source. Edges are
/// discovered from the kept vertices in `keep` order.
pub fn wired_contract_source<S: NetworkSource + ?Sized>(
    source: &S,
    keep: &[VertexId],
) -> Result<WiredContraction, ContractionError> {
    let mut lists = HashMap::with_capacity(keep.len());
    for &v in keep {
        let nbrs = source.neighbors(v).map_err(|e| match e {
            SourceError::UnknownVertex(x) => ContractionError::NotDiscovered(x),
            other => other.into(),
        })?;
        lists.insert(v, nbrs);
    }
    contract_discovered(keep, &lists)
}

fn contract_discovered(
    keep: &[VertexId],
    lists: &HashMap<VertexId, Vec<Incidence>>,
) -> Result<WiredContraction, ContractionError> {
    let kept_set: HashSet<VertexId> = keep.iter().copied().collect();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for v in keep {
        for inc in &lists[v] {
            if seen.insert(inc.edge) {
                edges.push((inc.edge, *v, inc.other, inc.conductance.clone()));
            }
        }
    }
    build(keep, &kept_set, edges.into_iter())
}

fn build(
    keep: &[VertexId],
    kept_set: &HashSet<VertexId>,
    edges: impl Iterator<Item = (EdgeId, VertexId, VertexId, Conductance)>,
) -> Result<WiredContraction, ContractionError> {
    if keep.is_empty() {
        return Err(ContractionError::EmptyKeep);
    }
    let mut vertices = Vec::with_capacity(keep.len() + 1);
    let mut dedup = HashSet::new();
    for &v in keep {
        if dedup.insert(v) {
            vertices.push(v);
        }
    }
    let kept = vertices.clone();
    let mut out = Vec::new();
    let mut uses_boundary = false;
    for (id, u, v, c) in edges {
        match (kept_set.contains(&u), kept_set.contains(&v)) {
            (true, true) => out.push((id, u, v, c)),
            (true, false) => {
                uses_boundary = true;
                out.push((id, u, VertexId::BOUNDARY, c));
            }
            (false, true) => {
                uses_boundary = true;
                out.push((id, VertexId::BOUNDARY, v, c));
            }
            (false, false) => {}
        }
    }
    if uses_boundary {
        vertices.push(VertexId::BOUNDARY);
    }
    let network = Network::new(vertices, out)?;
    let boundary = network.node(VertexId::BOUNDARY);
    let edge_map = network.edges().iter().enumerate().map(|(i, e)| (e.id, EdgeIndex::new(i))).collect();
    Ok(WiredContraction {
        network,
        boundary,
        kept,
        edge_map,
        window: None,
    })
}

/// Wired contraction of the ball of radius `depth` around the source root.
pub fn truncate<S: NetworkSource + ?Sized>(source: &S, depth: u32) -> Result<WiredContraction, ContractionError> {
    let root = source.root();
    let mut keep = vec![root];
    let mut dist = HashMap::from([(root, 0u32)]);
    let mut lists = HashMap::new();
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let nbrs = source.neighbors(v)?;
        let d = dist[&v];
        if d < depth {
            for inc in &nbrs {
                if !dist.contains_key(&inc.other) {
                    dist.insert(inc.other, d + 1);
                    keep.push(inc.other);
                    queue.push_back(inc.other);
                }
            }
        }
        lists.insert(v, nbrs);
    }
    contract_discovered(&keep, &lists)?.with_window(root, depth)
}
