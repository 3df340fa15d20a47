//! Finite weighted multigraphs with positive conductances.
//!
//! Vertices and edges carry opaque external labels ([`VertexId`], [`EdgeId`])
//! and dense internal handles ([`NodeIndex`], [`EdgeIndex`]) assigned in
//! construction order. Edge iteration order is always construction order.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("conductance must be strictly positive, got {0}")]
    NonPositiveConductance(String),
    #[error("cannot parse conductance {0:?}")]
    BadConductance(String),
    #[error("network is disconnected ({reached} of {total} vertices reachable)")]
    Disconnected { reached: usize, total: usize },
    #[error("network has no vertices")]
    Empty,
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(u64),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(u64),
    #[error("unknown vertex id {0}")]
    UnknownVertex(u64),
    #[error("unknown edge id {0}")]
    UnknownEdge(u64),
    #[error("malformed graph file: {0}")]
    Format(String),
}

impl NetworkError {
    /// Stable machine-readable code, used by the graph loader.
    pub fn code(&self) -> &'static str {
        match self {
            NetworkError::NonPositiveConductance(_) => "E_NONPOSITIVE_CONDUCTANCE",
            NetworkError::BadConductance(_) => "E_BAD_CONDUCTANCE",
            NetworkError::Disconnected { .. } => "E_DISCONNECTED",
            NetworkError::Empty => "E_EMPTY",
            NetworkError::DuplicateVertex(_) => "E_DUPLICATE_VERTEX",
            NetworkError::DuplicateEdge(_) => "E_DUPLICATE_EDGE",
            NetworkError::UnknownVertex(_) => "E_UNKNOWN_VERTEX",
            NetworkError::UnknownEdge(_) => "E_UNKNOWN_EDGE",
            NetworkError::Format(_) => "E_FORMAT",
        }
    }
}

/// External vertex label.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl VertexId {
    /// Label reserved for the wired boundary vertex of a contraction.
    pub const BOUNDARY: VertexId = VertexId(u64::MAX);

    pub fn is_boundary(self) -> bool {
        self == Self::BOUNDARY
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_boundary() {
            f.write_str("∂")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// External edge label.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u64);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense vertex handle, valid for the network that issued it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeIndex(u32);

impl NodeIndex {
    pub fn new(i: usize) -> Self {
        NodeIndex(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense edge handle, valid for the network that issued it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeIndex(u32);

impl EdgeIndex {
    pub fn new(i: usize) -> Self {
        EdgeIndex(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A positive conductance held both exactly and as a double.
#[derive(Clone, Debug)]
pub struct Conductance {
    exact: BigRational,
    approx: f64,
}

impl PartialEq for Conductance {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl Eq for Conductance {}

impl Conductance {
    pub fn new(exact: BigRational) -> Result<Self, NetworkError> {
        if !exact.is_positive() {
            return Err(NetworkError::NonPositiveConductance(exact.to_string()));
        }
        let approx = exact.to_f64().unwrap_or(f64::NAN);
        Ok(Conductance { exact, approx })
    }

    pub fn one() -> Self {
        Conductance {
            exact: BigRational::one(),
            approx: 1.0,
        }
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self, NetworkError> {
        if den == 0 {
            return Err(NetworkError::BadConductance(format!("{num}/{den}")));
        }
        Self::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `2^-k`, exactly.
    pub fn pow2_inv(k: u32) -> Self {
        let den = BigInt::one() << k as usize;
        Conductance::new(BigRational::new(BigInt::one(), den)).expect("positive")
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn value(&self) -> f64 {
        self.approx
    }
}

impl FromStr for Conductance {
    type Err = NetworkError;

    /// Accepts decimal strings (`"1.5"`, `"0.25"`, `"3"`, `"2.5e-3"`) and
    /// fractions (`"1/3"`). Parsing is exact.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let exact = parse_exact(s.trim()).ok_or_else(|| NetworkError::BadConductance(s.into()))?;
        Conductance::new(exact)
    }
}

impl fmt::Display for Conductance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_exact(&self.exact))
    }
}

fn parse_exact(s: &str) -> Option<BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_exact(n.trim())?;
        let d = parse_exact(d.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Formats a rational as a terminating decimal when possible, else `p/q`.
pub fn format_exact(r: &BigRational) -> String {
    let mut den = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return r.numer().to_string();
    }
    let scaled = (r * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits))).to_integer();
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    if s.len() <= digits {
        s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
    }
    let split = s.len() - digits;
    format!("{}{}.{}", if neg { "-" } else { "" }, &s[..split], &s[split..])
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub id: EdgeId,
    pub u: NodeIndex,
    pub v: NodeIndex,
    pub conductance: Conductance,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.u == self.v
    }
}

/// An edge together with a direction: `forward` runs from `u` to `v`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedEdge {
    pub edge: EdgeIndex,
    pub forward: bool,
}

impl OrientedEdge {
    pub fn new(edge: EdgeIndex, forward: bool) -> Self {
        OrientedEdge { edge, forward }
    }

    pub fn reversal(self) -> Self {
        OrientedEdge {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// A connected finite network. Immutable once built.
#[derive(Clone, Debug)]
pub struct Network {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, NodeIndex>,
    edges: Vec<Edge>,
    edge_index: HashMap<EdgeId, EdgeIndex>,
    // outgoing oriented edges; a self-loop contributes both orientations
    incidence: Vec<Vec<OrientedEdge>>,
    vertex_conductance: Vec<f64>,
    step_law: Vec<Option<WeightedIndex<f64>>>,
}

impl Network {
    pub fn new(
        vertices: Vec<VertexId>,
        edges: Vec<(EdgeId, VertexId, VertexId, Conductance)>,
    ) -> Result<Self, NetworkError> {
        if vertices.is_empty() {
            return Err(NetworkError::Empty);
        }
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            if index.insert(v, NodeIndex::new(i)).is_some() {
                return Err(NetworkError::DuplicateVertex(v.0));
            }
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut built = Vec::with_capacity(edges.len());
        for (k, (id, u, v, c)) in edges.into_iter().enumerate() {
            let ui = *index.get(&u).ok_or(NetworkError::UnknownVertex(u.0))?;
            let vi = *index.get(&v).ok_or(NetworkError::UnknownVertex(v.0))?;
            let ei = EdgeIndex::new(k);
            if edge_index.insert(id, ei).is_some() {
                return Err(NetworkError::DuplicateEdge(id.0));
            }
            incidence[ui.index()].push(OrientedEdge::new(ei, true));
            incidence[vi.index()].push(OrientedEdge::new(ei, false));
            built.push(Edge {
                id,
                u: ui,
                v: vi,
                conductance: c,
            });
        }
        let vertex_conductance: Vec<f64> = incidence
            .iter()
            .map(|out| out.iter().map(|e| built[e.edge.index()].conductance.value()).sum())
            .collect();
        let step_law = incidence
            .iter()
            .map(|out| {
                if out.is_empty() {
                    None
                } else {
                    WeightedIndex::new(out.iter().map(|e| built[e.edge.index()].conductance.value())).ok()
                }
            })
            .collect();
        let net = Network {
            ids: vertices,
            index,
            edges: built,
            edge_index,
            incidence,
            vertex_conductance,
            step_law,
        };
        let reached = net.reachable_from(NodeIndex::new(0));
        if reached != net.vertex_count() {
            return Err(NetworkError::Disconnected {
                reached,
                total: net.vertex_count(),
            });
        }
        Ok(net)
    }

    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::default()
    }

    fn reachable_from(&self, start: NodeIndex) -> usize {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([start]);
        seen[start.index()] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &e in &self.incidence[x.index()] {
                let y = self.head(e);
                if !seen[y.index()] {
                    seen[y.index()] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeIndex> + DoubleEndedIterator + '_ {
        (0..self.ids.len()).map(NodeIndex::new)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeIndex) -> &Edge {
        &self.edges[e.index()]
    }

    pub fn vertex_id(&self, v: NodeIndex) -> VertexId {
        self.ids[v.index()]
    }

    pub fn vertex_ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn node(&self, id: VertexId) -> Option<NodeIndex> {
        self.index.get(&id).copied()
    }

    pub fn try_node(&self, id: VertexId) -> Result<NodeIndex, NetworkError> {
        self.node(id).ok_or(NetworkError::UnknownVertex(id.0))
    }

    pub fn edge_by_id(&self, id: EdgeId) -> Option<EdgeIndex> {
        self.edge_index.get(&id).copied()
    }

    pub fn tail(&self, e: OrientedEdge) -> NodeIndex {
        let edge = &self.edges[e.edge.index()];
        if e.forward {
            edge.u
        } else {
            edge.v
        }
    }

    pub fn head(&self, e: OrientedEdge) -> NodeIndex {
        self.tail(e.reversal())
    }

    pub fn conductance(&self, e: EdgeIndex) -> &Conductance {
        &self.edges[e.index()].conductance
    }

    /// Outgoing oriented edges at `v` in construction order.
    pub fn incident(&self, v: NodeIndex) -> &[OrientedEdge] {
        &self.incidence[v.index()]
    }

    /// `c(v)`: total conductance at `v`, self-loops counted twice.
    pub fn conductance_at(&self, v: VertexId) -> Result<f64, NetworkError> {
        Ok(self.vertex_conductance[self.try_node(v)?.index()])
    }

    pub fn conductance_of(&self, v: NodeIndex) -> f64 {
        self.vertex_conductance[v.index()]
    }

    pub fn conductance_at_exact(&self, v: NodeIndex) -> BigRational {
        self.incidence[v.index()]
            .iter()
            .fold(BigRational::zero(), |acc, e| acc + self.conductance(e.edge).exact())
    }

    /// Draws an outgoing edge at `v` with probability `c(e)/c(v)`.
    pub(crate) fn sample_step<R: Rng + ?Sized>(&self, v: NodeIndex, rng: &mut R) -> Option<OrientedEdge> {
        let law = self.step_law[v.index()].as_ref()?;
        Some(self.incidence[v.index()][law.sample(rng)])
    }

    /// Oriented edge `u → v` of lowest edge id, if any.
    pub fn lowest_edge_between(&self, u: NodeIndex, v: NodeIndex) -> Option<OrientedEdge> {
        self.incidence[u.index()]
            .iter()
            .copied()
            .filter(|&e| self.head(e) == v)
            .min_by_key(|e| self.edges[e.edge.index()].id)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            vertices: self.ids.iter().map(|v| v.0).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| GraphEdge {
                    id: e.id.0,
                    u: self.ids[e.u.index()].0,
                    v: self.ids[e.v.index()].0,
                    c: e.conductance.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self, NetworkError> {
        let edges = file
            .edges
            .iter()
            .map(|e| Ok((EdgeId(e.id), VertexId(e.u), VertexId(e.v), e.c.parse()?)))
            .collect::<Result<Vec<_>, NetworkError>>()?;
        Network::new(file.vertices.iter().copied().map(VertexId).collect(), edges)
    }

    pub fn from_json(s: &str) -> Result<Self, NetworkError> {
        let file: GraphFile = serde_json::from_str(s).map_err(|e| NetworkError::Format(e.to_string()))?;
        Network::from_file(&file)
    }

    pub fn load(path: &Path) -> Result<Self, NetworkError> {
        let text = std::fs::read_to_string(path).map_err(|e| NetworkError::Format(format!("{}: {e}", path.display())))?;
        Network::from_json(&text)
    }
}

/// On-disk graph format: `{"vertices":[ids],"edges":[{"id","u","v","c"}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<u64>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub id: u64,
    pub u: u64,
    pub v: u64,
    /// Decimal string.
    pub c: String,
}

/// Convenience builder: vertices are registered on first mention and edges
/// get sequential ids.
#[derive(Default, Debug)]
pub struct NetworkBuilder {
    vertices: Vec<VertexId>,
    seen: HashSet<VertexId>,
    edges: Vec<(EdgeId, VertexId, VertexId, Conductance)>,
    error: Option<NetworkError>,
}

impl NetworkBuilder {
    pub fn vertex(mut self, v: u64) -> Self {
        self.touch(VertexId(v));
        self
    }

    fn touch(&mut self, v: VertexId) {
        if self.seen.insert(v) {
            self.vertices.push(v);
        }
    }

    /// Adds an edge with a conductance given as a decimal or fraction string.
    pub fn edge(mut self, u: u64, v: u64, c: &str) -> Self {
        match c.parse() {
            Ok(c) => self = self.edge_c(u, v, c),
            Err(e) => self.error = self.error.or(Some(e)),
        }
        self
    }

    pub fn edge_c(mut self, u: u64, v: u64, c: Conductance) -> Self {
        self.touch(VertexId(u));
        self.touch(VertexId(v));
        let id = EdgeId(self.edges.len() as u64);
        self.edges.push((id, VertexId(u), VertexId(v), c));
        self
    }

    pub fn unit_edge(self, u: u64, v: u64) -> Self {
        self.edge_c(u, v, Conductance::one())
    }

    pub fn build(self) -> Result<Network, NetworkError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        Network::new(self.vertices, self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_exact("1.5"), Some(q(3, 2)));
        assert_eq!(parse_exact("0.1"), Some(q(1, 10)));
        assert_eq!(parse_exact(".25"), Some(q(1, 4)));
        assert_eq!(parse_exact("2.5e-3"), Some(q(1, 400)));
        assert_eq!(parse_exact("1/3"), Some(q(1, 3)));
        assert_eq!(parse_exact("3"), Some(q(3, 1)));
        assert_eq!(parse_exact("abc"), None);
        assert_eq!(parse_exact("."), None);
    }

    #[test]
    fn formats_round_trip() {
        for s in ["1.5", "0.125", "3", "1/3", "0.0078125", "22/7"] {
            let c: Conductance = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
    }

    #[test]
    fn rejects_nonpositive() {
        let err = "0".parse::<Conductance>().unwrap_err();
        assert_eq!(err.code(), "E_NONPOSITIVE_CONDUCTANCE");
        let err = "-1.5".parse::<Conductance>().unwrap_err();
        assert_eq!(err.code(), "E_NONPOSITIVE_CONDUCTANCE");
    }

    #[test]
    fn conductance_counts_self_loops_twice() {
        let g = Network::builder()
            .edge(0, 1, "1.5")
            .edge(0, 2, "2.5")
            .edge(0, 0, "1")
            .build()
            .unwrap();
        assert_eq!(g.conductance_at(VertexId(0)).unwrap(), 6.0);
        assert_eq!(g.conductance_at_exact(NodeIndex::new(0)), q(6, 1));
        assert_eq!(g.conductance_at(VertexId(1)).unwrap(), 1.5);
    }

    #[test]
    fn single_edge_and_regular_vertex() {
        let g = Network::builder().edge(0, 1, "0.7").build().unwrap();
        assert_eq!(g.conductance_at(VertexId(0)).unwrap(), 0.7);
        let k4 = Network::builder()
            .unit_edge(0, 1)
            .unit_edge(0, 2)
            .unit_edge(0, 3)
            .unit_edge(1, 2)
            .unit_edge(1, 3)
            .unit_edge(2, 3)
            .build()
            .unwrap();
        assert_eq!(k4.conductance_at(VertexId(2)).unwrap(), 3.0);
        assert!(matches!(
            k4.conductance_at(VertexId(9)),
            Err(NetworkError::UnknownVertex(9))
        ));
    }

    #[test]
    fn oriented_edge_laws() {
        let g = Network::builder().unit_edge(0, 1).unit_edge(1, 1).build().unwrap();
        for ei in 0..g.edge_count() {
            for fwd in [true, false] {
                let e = OrientedEdge::new(EdgeIndex::new(ei), fwd);
                assert_eq!(e.reversal().reversal(), e);
                assert_eq!(g.tail(e), g.head(e.reversal()));
            }
        }
        let lp = OrientedEdge::new(EdgeIndex::new(1), true);
        assert_eq!(g.tail(lp), g.head(lp));
    }

    #[test]
    fn loader_error_codes() {
        let disconnected = r#"{"vertices":[0,1,2,3],"edges":[{"id":0,"u":0,"v":1,"c":"1"},{"id":1,"u":2,"v":3,"c":"1"}]}"#;
        assert_eq!(Network::from_json(disconnected).unwrap_err().code(), "E_DISCONNECTED");
        let zero = r#"{"vertices":[0,1],"edges":[{"id":0,"u":0,"v":1,"c":"0.0"}]}"#;
        assert_eq!(Network::from_json(zero).unwrap_err().code(), "E_NONPOSITIVE_CONDUCTANCE");
        let dup = r#"{"vertices":[0,1],"edges":[{"id":0,"u":0,"v":1,"c":"1"},{"id":0,"u":0,"v":1,"c":"1"}]}"#;
        assert_eq!(Network::from_json(dup).unwrap_err().code(), "E_DUPLICATE_EDGE");
    }

    #[test]
    fn file_round_trip() {
        let g = Network::builder().edge(5, 7, "0.25").edge(7, 7, "1/3").edge(7, 9, "2").build().unwrap();
        let text = serde_json::to_string(&g.to_file()).unwrap();
        let back = Network::from_json(&text).unwrap();
        assert_eq!(back.to_file(), g.to_file());
    }
}
