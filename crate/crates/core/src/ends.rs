//! Finite-window proxies for the ends of forest components.
//!
//! Within a ball-shaped window, a component's boundary-ray count at radius
//! `r` is the number of pieces of (component ∖ B_r) that reach a vertex
//! adjacent to `∂`. Two rays at `r = depth/2` is the window-level notion of
//! a two-ended component; the path joining the two rays is its trunk.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::contraction::{wired_contract, ContractionError, WiredContraction};
use crate::forest::OrientedForest;
use crate::network::{Network, NetworkError, NodeIndex, VertexId};
use crate::update::{update_along_path, EdgeChoice, UpdateCase, UpdateError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EndsError {
    #[error("contraction carries no window (root and depth)")]
    NoWindow,
    #[error("radius {radius} must be below window depth {depth}")]
    RadiusTooLarge { radius: u32, depth: u32 },
    #[error("vertex {0} is not a kept vertex of the window")]
    NotKept(u64),
    #[error("forest does not match the window network")]
    ForestMismatch,
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// A forest on a window, split into components on the kept vertices (forest
/// edges into `∂` removed).
#[derive(Clone, Debug)]
pub struct WindowForest<'a> {
    window: &'a WiredContraction,
    adj: Vec<Vec<NodeIndex>>,
    component: Vec<Option<usize>>,
    members: Vec<Vec<NodeIndex>>,
    depth: u32,
}

impl<'a> WindowForest<'a> {
    pub fn new(window: &'a WiredContraction, forest: &OrientedForest) -> Result<Self, EndsError> {
        let info = window.window().ok_or(EndsError::NoWindow)?;
        let g = window.network();
        if forest.vertex_count() != g.vertex_count() {
            return Err(EndsError::ForestMismatch);
        }
        let mut adj = vec![Vec::new(); g.vertex_count()];
        for (v, e) in forest.out_edges() {
            let h = g.head(e);
            if window.is_boundary(v) || window.is_boundary(h) {
                continue;
            }
            adj[v.index()].push(h);
            adj[h.index()].push(v);
        }
        let mut component = vec![None; g.vertex_count()];
        let mut members = Vec::new();
        for start in g.nodes().filter(|&v| !window.is_boundary(v)) {
            if component[start.index()].is_some() {
                continue;
            }
            let id = members.len();
            let mut list = vec![start];
            component[start.index()] = Some(id);
            let mut i = 0;
            while i < list.len() {
                for &y in &adj[list[i].index()] {
                    if component[y.index()].is_none() {
                        component[y.index()] = Some(id);
                        list.push(y);
                    }
                }
                i += 1;
            }
            list.sort();
            members.push(list);
        }
        Ok(WindowForest {
            window,
            adj,
            component,
            members,
            depth: info.depth,
        })
    }

    pub fn network(&self) -> &Network {
        self.window.network()
    }

    pub fn component_count(&self) -> usize {
        self.members.len()
    }

    pub fn component_of(&self, v: NodeIndex) -> Option<usize> {
        self.component[v.index()]
    }

    pub fn component_of_id(&self, v: VertexId) -> Result<usize, EndsError> {
        self.network()
            .node(v)
            .and_then(|n| self.component_of(n))
            .ok_or(EndsError::NotKept(v.0))
    }

    pub fn members(&self, component: usize) -> &[NodeIndex] {
        &self.members[component]
    }

    /// Component containing the window root.
    pub fn root_component(&self) -> usize {
        let root = self.window.window().expect("checked on construction").root;
        self.component[root.index()].expect("window root is kept")
    }

    fn check_radius(&self, r: u32) -> Result<(), EndsError> {
        if r >= self.depth {
            return Err(EndsError::RadiusTooLarge {
                radius: r,
                depth: self.depth,
            });
        }
        Ok(())
    }

    fn outside(&self, v: NodeIndex, r: u32) -> bool {
        self.window.distance(v).is_none_or(|d| d > r)
    }

    /// Pieces of the component outside `B_r` that contain a `∂`-adjacent vertex.
    fn rays(&self, component: usize, r: u32) -> Vec<Vec<NodeIndex>> {
        let mut seen = vec![false; self.adj.len()];
        let mut rays = Vec::new();
        for &start in &self.members[component] {
            if seen[start.index()] || !self.outside(start, r) {
                continue;
            }
            seen[start.index()] = true;
            let mut piece = vec![start];
            let mut i = 0;
            while i < piece.len() {
                for &y in &self.adj[piece[i].index()] {
                    if !seen[y.index()] && self.outside(y, r) {
                        seen[y.index()] = true;
                        piece.push(y);
                    }
                }
                i += 1;
            }
            if piece.iter().any(|&v| self.window.boundary_adjacent(v)) {
                rays.push(piece);
            }
        }
        rays
    }

    pub fn boundary_rays(&self, component: usize, r: u32) -> Result<usize, EndsError> {
        self.check_radius(r)?;
        Ok(self.rays(component, r).len())
    }

    /// The tree path between the outermost `∂`-adjacent vertices of the two
    /// rays, when there are exactly two.
    pub fn trunk_candidate(&self, component: usize, r: u32) -> Result<Option<Vec<NodeIndex>>, EndsError> {
        self.check_radius(r)?;
        let rays = self.rays(component, r);
        if rays.len() != 2 {
            return Ok(None);
        }
        let extremity = |piece: &[NodeIndex]| {
            piece
                .iter()
                .copied()
                .filter(|&v| self.window.boundary_adjacent(v))
                .max_by_key(|&v| (self.window.distance(v).unwrap_or(u32::MAX), std::cmp::Reverse(v)))
                .expect("ray has a boundary-adjacent vertex")
        };
        let (from, to) = (extremity(&rays[0]), extremity(&rays[1]));
        let mut parent = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[from.index()] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                break;
            }
            for &y in &self.adj[x.index()] {
                if !seen[y.index()] {
                    seen[y.index()] = true;
                    parent[y.index()] = Some(x);
                    queue.push_back(y);
                }
            }
        }
        let mut path = vec![to];
        let mut x = to;
        while let Some(p) = parent[x.index()] {
            path.push(p);
            x = p;
        }
        path.reverse();
        Ok(Some(path))
    }

    pub fn summarize(&self, r: u32) -> Result<Vec<ComponentSummary>, EndsError> {
        self.check_radius(r)?;
        let g = self.network();
        let root = self.root_component();
        (0..self.members.len())
            .map(|c| {
                Ok(ComponentSummary {
                    id: c,
                    vertices: self.members[c].len(),
                    boundary_rays: self.boundary_rays(c, r)?,
                    contains_root: c == root,
                    trunk: self
                        .trunk_candidate(c, r)?
                        .map(|p| p.into_iter().map(|v| g.vertex_id(v)).collect()),
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentSummary {
    pub id: usize,
    pub vertices: usize,
    pub boundary_rays: usize,
    pub contains_root: bool,
    pub trunk: Option<Vec<VertexId>>,
}

/// Boundary rays of the component containing the window root.
pub fn root_component_rays(window: &WiredContraction, forest: &OrientedForest, r: u32) -> Result<usize, EndsError> {
    let wf = WindowForest::new(window, forest)?;
    wf.boundary_rays(wf.root_component(), r)
}

/// A hand-built window forest and path for the three-ends construction.
#[derive(Clone, Debug)]
pub struct ThreeEndsFixture {
    pub name: String,
    pub window: WiredContraction,
    pub forest: OrientedForest,
    pub gamma: Vec<VertexId>,
    pub radius: u32,
    /// A negative control: its preconditions are expected to fail.
    pub control: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreeEndsReport {
    pub fixture: String,
    pub preconditions_met: bool,
    pub precondition_failures: Vec<String>,
    pub components: Vec<ComponentSummary>,
    pub cases: Vec<UpdateCase>,
    /// Rays of γ_0's component in F_0, then of γ_i's component in F_i.
    pub step_rays: Vec<usize>,
    pub final_rays: usize,
    pub nondecreasing: bool,
    pub passed: bool,
}

/// Updates along γ and tracks the boundary rays of γ_i's component.
pub fn three_ends_experiment(fixture: &ThreeEndsFixture) -> Result<ThreeEndsReport, EndsError> {
    let g = fixture.window.network();
    let r = fixture.radius;
    let gamma: Vec<NodeIndex> = fixture
        .gamma
        .iter()
        .map(|&v| {
            g.node(v)
                .filter(|&n| !fixture.window.is_boundary(n))
                .ok_or(EndsError::NotKept(v.0))
        })
        .collect::<Result<_, _>>()?;
    let n = gamma.len().saturating_sub(1);

    let initial = WindowForest::new(&fixture.window, &fixture.forest)?;
    let components = initial.summarize(r)?;
    let mut failures = Vec::new();
    let two_ended: Vec<usize> = components.iter().filter(|c| c.boundary_rays == 2).map(|c| c.id).collect();
    if two_ended.len() < 2 {
        failures.push(format!("{} two-ended components, need at least 2", two_ended.len()));
    }
    if gamma.is_empty() {
        failures.push("empty path".to_string());
    } else {
        let first = initial.component_of(gamma[0]).expect("kept");
        let last = initial.component_of(gamma[n]).expect("kept");
        if first == last {
            failures.push("γ_0 and γ_n lie in the same component".to_string());
        }
        if !two_ended.contains(&first) || !two_ended.contains(&last) {
            failures.push("γ_0 or γ_n is not in a two-ended component".to_string());
        }
        match initial.trunk_candidate(last, r)? {
            Some(trunk) if trunk.contains(&gamma[n]) => {
                if let Some(i) = gamma[..n].iter().position(|v| trunk.contains(v)) {
                    failures.push(format!("γ_{i} lies on the trunk of γ_n"));
                }
            }
            _ => failures.push("γ_n is not on a trunk".to_string()),
        }
    }

    let run = update_along_path(g, &fixture.forest, &gamma, &EdgeChoice::LowestId)?;
    let mut step_rays = Vec::with_capacity(n + 1);
    if let Some(&g0) = gamma.first() {
        step_rays.push(initial.boundary_rays(initial.component_of(g0).expect("kept"), r)?);
    }
    for (i, step) in run.steps.iter().enumerate() {
        let wf = WindowForest::new(&fixture.window, &step.forest)?;
        let c = wf.component_of(gamma[i + 1]).expect("kept");
        step_rays.push(wf.boundary_rays(c, r)?);
    }
    let final_rays = step_rays.last().copied().unwrap_or(0);
    let nondecreasing = step_rays.windows(2).all(|w| w[0] <= w[1]);
    let preconditions_met = failures.is_empty();
    Ok(ThreeEndsReport {
        fixture: fixture.name.clone(),
        preconditions_met,
        precondition_failures: failures,
        components,
        cases: run.cases(),
        step_rays,
        passed: preconditions_met && nondecreasing && final_rays >= 3,
        nondecreasing,
        final_rays,
    })
}

// Ladder window: rows a_i, b_i for |i| ≤ 9, rungs a_i–b_i for |i| ≤ 8, and a
// vertex x joined to a_0, b_0 and b_2. The outermost columns are wired to ∂.
fn a(i: i64) -> u64 {
    (109 + i) as u64
}

fn b(i: i64) -> u64 {
    (209 + i) as u64
}

const X: u64 = 300;

fn ladder_window() -> Result<WiredContraction, EndsError> {
    let mut builder = Network::builder();
    for i in -9..9 {
        builder = builder.unit_edge(a(i), a(i + 1)).unit_edge(b(i), b(i + 1));
    }
    for i in -8..=8 {
        builder = builder.unit_edge(a(i), b(i));
    }
    builder = builder.unit_edge(X, a(0)).unit_edge(X, b(0)).unit_edge(X, b(2));
    let g = builder.build()?;
    let mut keep: Vec<VertexId> = (-8..=8).flat_map(|i| [VertexId(a(i)), VertexId(b(i))]).collect();
    keep.push(VertexId(X));
    Ok(wired_contract(&g, &keep)?.with_window(VertexId(a(0)), 8)?)
}

// Both rows point toward +∞ and x hangs off b_0.
fn ladder_forest(window: &WiredContraction) -> OrientedForest {
    let g = window.network();
    let node = |id: u64| g.node(VertexId(id)).expect("ladder vertex");
    let boundary = window.boundary().expect("ladder is wired");
    let mut out = vec![None; g.vertex_count()];
    for row in [a as fn(i64) -> u64, b] {
        for i in -8..8 {
            out[node(row(i)).index()] = g.lowest_edge_between(node(row(i)), node(row(i + 1)));
        }
        out[node(row(8)).index()] = g.lowest_edge_between(node(row(8)), boundary);
    }
    out[node(X).index()] = g.lowest_edge_between(node(X), node(b(0)));
    OrientedForest::from_out(out)
}

/// The canonical (single rung), two-step (through x) and degenerate fixtures.
pub fn three_ends_fixtures() -> Result<Vec<ThreeEndsFixture>, EndsError> {
    let window = ladder_window()?;
    let forest = ladder_forest(&window);
    let make = |name: &str, gamma: Vec<u64>, control: bool| ThreeEndsFixture {
        name: name.to_string(),
        window: window.clone(),
        forest: forest.clone(),
        gamma: gamma.into_iter().map(VertexId).collect(),
        radius: 4,
        control,
    };
    Ok(vec![
        make("canonical", vec![a(0), b(0)], false),
        make("two-step", vec![a(0), X, b(2)], false),
        make("degenerate", vec![a(0), X], true),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_window(len: u64) -> (WiredContraction, OrientedForest) {
        // 0 - 1 - ... - len, both ends wired
        let mut builder = Network::builder();
        for i in 0..len + 1 {
            builder = builder.unit_edge(i, i + 1);
        }
        let g = builder.build().unwrap();
        let keep: Vec<VertexId> = (1..=len).map(VertexId).collect();
        let mid = len.div_ceil(2);
        let w = wired_contract(&g, &keep).unwrap().with_window(VertexId(mid), len as u32 / 2).unwrap();
        let net = w.network();
        let mut out = vec![None; net.vertex_count()];
        for i in 1..len {
            let v = net.node(VertexId(i)).unwrap();
            out[v.index()] = net.lowest_edge_between(v, net.node(VertexId(i + 1)).unwrap());
        }
        let last = net.node(VertexId(len)).unwrap();
        out[last.index()] = net.lowest_edge_between(last, w.boundary().unwrap());
        (w, OrientedForest::from_out(out))
    }

    #[test]
    fn bi_infinite_path_has_two_rays() {
        let (w, f) = path_window(9);
        f.validate(w.network()).unwrap();
        let wf = WindowForest::new(&w, &f).unwrap();
        assert_eq!(wf.component_count(), 1);
        for r in 0..w.window().unwrap().depth {
            assert_eq!(wf.boundary_rays(0, r).unwrap(), 2);
        }
        let trunk = wf.trunk_candidate(0, 1).unwrap().unwrap();
        assert_eq!(trunk.len(), 9);
        assert!(matches!(wf.boundary_rays(0, 99), Err(EndsError::RadiusTooLarge { .. })));
    }

    #[test]
    fn tripod_and_single_ray() {
        // root 0 with legs 0-1i-2i-3i wired at the far end, i = 1..3
        let mut builder = Network::builder().vertex(0);
        for leg in 1..=3u64 {
            let (p, q, s) = (10 * leg + 1, 10 * leg + 2, 10 * leg + 3);
            builder = builder.unit_edge(0, p).unit_edge(p, q).unit_edge(q, s).unit_edge(s, 99);
        }
        let g = builder.build().unwrap();
        let keep: Vec<VertexId> = g.vertex_ids().iter().copied().filter(|v| v.0 != 99).collect();
        let w = wired_contract(&g, &keep).unwrap().with_window(VertexId(0), 3).unwrap();
        let net = w.network();
        let node = |i: u64| net.node(VertexId(i)).unwrap();
        let boundary = w.boundary().unwrap();
        let step = |from: u64, to: Option<u64>| {
            let target = to.map(node).unwrap_or(boundary);
            (node(from).index(), net.lowest_edge_between(node(from), target))
        };
        // leg 1 escapes to ∂, legs 2 and 3 point in toward the root
        let mut out = vec![None; net.vertex_count()];
        for (v, e) in [step(0, Some(11)), step(11, Some(12)), step(12, Some(13)), step(13, None)] {
            out[v] = e;
        }
        for leg in [2u64, 3] {
            let (p, q, s) = (10 * leg + 1, 10 * leg + 2, 10 * leg + 3);
            for (v, e) in [step(s, Some(q)), step(q, Some(p)), step(p, Some(0))] {
                out[v] = e;
            }
        }
        let tripod = OrientedForest::from_out(out);
        tripod.validate(net).unwrap();
        let wf = WindowForest::new(&w, &tripod).unwrap();
        assert_eq!(wf.component_count(), 1);
        assert_eq!(wf.boundary_rays(wf.root_component(), 0).unwrap(), 3);
        assert_eq!(wf.trunk_candidate(wf.root_component(), 0).unwrap(), None);

        // every leg escapes on its own: three single-ray components and the root
        let mut split = vec![None; net.vertex_count()];
        for leg in 1..=3u64 {
            let (p, q, s) = (10 * leg + 1, 10 * leg + 2, 10 * leg + 3);
            for (v, e) in [step(p, Some(q)), step(q, Some(s)), step(s, None)] {
                split[v] = e;
            }
        }
        split[node(0).index()] = net.lowest_edge_between(node(0), node(11));
        let f = OrientedForest::from_out(split);
        f.validate(net).unwrap();
        let wf = WindowForest::new(&w, &f).unwrap();
        assert_eq!(wf.component_count(), 3);
        for c in 0..3 {
            assert_eq!(wf.boundary_rays(c, 0).unwrap(), 1);
            assert_eq!(wf.trunk_candidate(c, 0).unwrap(), None);
        }
    }

    #[test]
    fn trunk_skips_bushes() {
        let w = ladder_window().unwrap();
        let f = ladder_forest(&w);
        f.validate(w.network()).unwrap();
        let wf = WindowForest::new(&w, &f).unwrap();
        let b_comp = wf.component_of_id(VertexId(b(0))).unwrap();
        let trunk = wf.trunk_candidate(b_comp, 4).unwrap().unwrap();
        assert_eq!(trunk.len(), 17);
        let x = w.network().node(VertexId(X)).unwrap();
        assert!(!trunk.contains(&x));
        assert_eq!(wf.members(b_comp).len(), 18);
    }

    #[test]
    fn fixtures_behave() {
        let fixtures = three_ends_fixtures().unwrap();
        let reports: Vec<_> = fixtures.iter().map(|f| three_ends_experiment(f).unwrap()).collect();
        assert!(reports[0].passed, "{:?}", reports[0]);
        assert_eq!(reports[0].step_rays, vec![2, 3]);
        assert!(reports[1].passed, "{:?}", reports[1]);
        assert_eq!(reports[1].step_rays, vec![2, 2, 3]);
        assert!(!reports[2].preconditions_met);
        assert!(!reports[2].passed);
        assert!(reports[2].precondition_failures.iter().any(|s| s.contains("trunk")));
    }
}
