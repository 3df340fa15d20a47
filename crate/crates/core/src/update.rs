//! Updating an oriented forest at an edge, and the wired cycle-breaking
//! dynamics built from it.
//!
//! Updating `f` at `e` adds `e` and deletes one edge `d`:
//!
//! * if `e` or its reversal is already in `f`, or `e` is a self-loop, nothing
//!   changes;
//! * if `head(e)` lies in the past of `tail(e)`, the directed path
//!   `e_1, …, e_k, d` from `head(e)` to `tail(e)` is reversed in place of
//!   `d`: the result is `f ∪ {-e, -e_1, …, -e_k} ∖ {d, e_k, …, e_1}`;
//! * otherwise `d` is the outgoing edge of `tail(e)` and is replaced by `e`.
//!
//! Either way the unoriented result is `f ∪ {e} ∖ {d}`.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::OrientedForest;
use crate::network::{EdgeId, Network, NodeIndex, OrientedEdge};
use crate::walk::{walk_step, WalkError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UpdateError {
    #[error("update at an edge whose tail {0} is a root")]
    RootTail(usize),
    #[error("no edge from path vertex {from} to {to}")]
    MissingEdge { from: usize, to: usize },
    #[error("edge choice has {got} edges for a path of {expected} steps")]
    ChoiceLength { got: usize, expected: usize },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateCase {
    NoOp,
    PastCase,
    NonPastCase,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateOutcome {
    pub forest: OrientedForest,
    pub case: UpdateCase,
    /// `d`; absent for no-ops.
    pub deleted: Option<OrientedEdge>,
    /// `e_1, …, e_k` as they were oriented before reversal; empty unless past-case.
    pub reversed: Vec<OrientedEdge>,
}

/// All `u` with a directed path `u → v`, including `v` itself.
pub fn past(g: &Network, f: &OrientedForest, v: NodeIndex) -> Vec<NodeIndex> {
    let mut children = vec![Vec::new(); f.vertex_count()];
    for (u, e) in f.out_edges() {
        children[g.head(e).index()].push(u);
    }
    let mut out = vec![v];
    let mut i = 0;
    while i < out.len() {
        out.extend_from_slice(&children[out[i].index()]);
        i += 1;
    }
    out.sort();
    out
}

/// The update `U(f, e)`.
pub fn update(g: &Network, f: &OrientedForest, e: OrientedEdge) -> Result<UpdateOutcome, UpdateError> {
    let (tail, head) = (g.tail(e), g.head(e));
    if tail == head || f.out(tail) == Some(e) || f.out(head) == Some(e.reversal()) {
        return Ok(UpdateOutcome {
            forest: f.clone(),
            case: UpdateCase::NoOp,
            deleted: None,
            reversed: Vec::new(),
        });
    }
    let current = f.out(tail).ok_or(UpdateError::RootTail(tail.index()))?;

    // climb from head(e); reaching tail(e) means head(e) is in its past
    let mut chain = Vec::new();
    let mut x = head;
    while x != tail {
        match f.out(x) {
            Some(a) => {
                chain.push(a);
                x = g.head(a);
            }
            None => break,
        }
    }

    let mut forest = f.clone();
    if x == tail {
        let d = chain.pop().expect("head differs from tail");
        forest.set_out(head, Some(e.reversal()));
        for &ei in &chain {
            forest.set_out(g.head(ei), Some(ei.reversal()));
        }
        Ok(UpdateOutcome {
            forest,
            case: UpdateCase::PastCase,
            deleted: Some(d),
            reversed: chain,
        })
    } else {
        forest.set_out(tail, Some(e));
        Ok(UpdateOutcome {
            forest,
            case: UpdateCase::NonPastCase,
            deleted: Some(current),
            reversed: Vec::new(),
        })
    }
}

/// One step of the dynamics rooted at `v`: propose an edge out of `v` with
/// probability `c(e)/c(v)` (self-loops counted twice) and update at it.
pub fn dynamics_step<R: Rng + ?Sized>(
    g: &Network,
    f: &OrientedForest,
    v: NodeIndex,
    rng: &mut R,
) -> Result<(OrientedEdge, UpdateOutcome), UpdateError> {
    if f.is_root(v) {
        return Err(UpdateError::RootTail(v.index()));
    }
    let e = walk_step(g, v, rng)?;
    Ok((e, update(g, f, e)?))
}

/// One line of a dynamics trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub proposed: EdgeRef,
    pub case: UpdateCase,
    pub deleted: Option<EdgeRef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub edge: EdgeId,
    pub forward: bool,
}

impl EdgeRef {
    pub fn new(g: &Network, e: OrientedEdge) -> Self {
        EdgeRef {
            edge: g.edge(e.edge).id,
            forward: e.forward,
        }
    }
}

/// Runs `steps` steps of the dynamics rooted at `v`, writing one JSON line
/// per step to `trace` when given.
pub fn run_dynamics<R: Rng + ?Sized>(
    g: &Network,
    start: &OrientedForest,
    v: NodeIndex,
    steps: u64,
    rng: &mut R,
    mut trace: Option<&mut dyn Write>,
) -> Result<OrientedForest, UpdateError> {
    let mut f = start.clone();
    for step in 0..steps {
        let (proposed, outcome) = dynamics_step(g, &f, v, rng)?;
        if let Some(w) = trace.as_deref_mut() {
            let rec = TraceRecord {
                step,
                proposed: EdgeRef::new(g, proposed),
                case: outcome.case,
                deleted: outcome.deleted.map(|d| EdgeRef::new(g, d)),
            };
            // trace sinks are files or buffers; a failed write is not a sampling error
            let _ = writeln!(w, "{}", serde_json::to_string(&rec).expect("serializable"));
        }
        f = outcome.forest;
    }
    Ok(f)
}

/// How `e_i` (tail `γ_i`, head `γ_{i-1}`) is picked among parallel edges.
#[derive(Clone, Debug, Default)]
pub enum EdgeChoice {
    #[default]
    LowestId,
    Explicit(Vec<OrientedEdge>),
}

#[derive(Clone, Debug)]
pub struct PathUpdate {
    pub forest: OrientedForest,
    pub steps: Vec<UpdateOutcome>,
}

impl PathUpdate {
    pub fn cases(&self) -> Vec<UpdateCase> {
        self.steps.iter().map(|s| s.case).collect()
    }
}

/// Iterates `F_i = U(F_{i-1}, e_i)` along `γ_0, …, γ_n`.
pub fn update_along_path(
    g: &Network,
    f: &OrientedForest,
    gamma: &[NodeIndex],
    choice: &EdgeChoice,
) -> Result<PathUpdate, UpdateError> {
    let n = gamma.len().saturating_sub(1);
    if let EdgeChoice::Explicit(edges) = choice {
        if edges.len() != n {
            return Err(UpdateError::ChoiceLength {
                got: edges.len(),
                expected: n,
            });
        }
    }
    let mut forest = f.clone();
    let mut steps = Vec::with_capacity(n);
    for i in 1..=n {
        let (from, to) = (gamma[i], gamma[i - 1]);
        let e = match choice {
            EdgeChoice::LowestId => g.lowest_edge_between(from, to),
            EdgeChoice::Explicit(edges) => Some(edges[i - 1]).filter(|&e| g.tail(e) == from && g.head(e) == to),
        }
        .ok_or(UpdateError::MissingEdge {
            from: from.index(),
            to: to.index(),
        })?;
        let outcome = update(g, &forest, e)?;
        forest = outcome.forest.clone();
        steps.push(outcome);
    }
    Ok(PathUpdate { forest, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EdgeIndex, VertexId};
    use crate::rng::rng_from_seed;

    // a=0, b=1, c=2, ∂=3; edges ab, bc, ca, c∂
    fn triangle() -> Network {
        Network::builder()
            .unit_edge(0, 1)
            .unit_edge(1, 2)
            .unit_edge(2, 0)
            .unit_edge(2, 3)
            .build()
            .unwrap()
    }

    fn oe(i: usize, fwd: bool) -> OrientedEdge {
        OrientedEdge::new(EdgeIndex::new(i), fwd)
    }

    fn n(i: usize) -> NodeIndex {
        NodeIndex::new(i)
    }

    // a→b, b→c, c→∂
    fn chain() -> OrientedForest {
        OrientedForest::from_out(vec![Some(oe(0, true)), Some(oe(1, true)), Some(oe(3, true)), None])
    }

    #[test]
    fn past_examples() {
        let g = triangle();
        let f = chain();
        assert_eq!(past(&g, &f, n(2)), vec![n(0), n(1), n(2)]);
        assert_eq!(past(&g, &f, n(0)), vec![n(0)]);
        let star = Network::builder().vertex(0).unit_edge(1, 0).unit_edge(2, 0).unit_edge(3, 0).build().unwrap();
        let sf = OrientedForest::from_out(vec![None, Some(oe(0, true)), Some(oe(1, true)), Some(oe(2, true))]);
        assert_eq!(past(&star, &sf, n(0)).len(), 4);
        assert_eq!(past(&star, &sf, n(3)), vec![n(3)]);
    }

    #[test]
    fn no_op_cases() {
        let g = triangle();
        let f = chain();
        let out = update(&g, &f, oe(0, true)).unwrap();
        assert_eq!(out.case, UpdateCase::NoOp);
        assert_eq!(out.forest, f);
        // reversal of an in-forest edge
        assert_eq!(update(&g, &f, oe(1, false)).unwrap().case, UpdateCase::NoOp);
        let looped = Network::builder().unit_edge(0, 1).unit_edge(0, 0).build().unwrap();
        let lf = OrientedForest::from_out(vec![Some(oe(0, true)), None]);
        assert_eq!(update(&looped, &lf, oe(1, true)).unwrap().case, UpdateCase::NoOp);
    }

    #[test]
    fn past_case_reverses_the_path() {
        let g = triangle();
        // e = c→a is edge 2 forward
        let out = update(&g, &chain(), oe(2, true)).unwrap();
        assert_eq!(out.case, UpdateCase::PastCase);
        assert_eq!(out.deleted, Some(oe(1, true)));
        assert_eq!(out.reversed, vec![oe(0, true)]);
        // {b→a, a→c, c→∂}
        let expected = OrientedForest::from_out(vec![Some(oe(2, false)), Some(oe(0, false)), Some(oe(3, true)), None]);
        assert_eq!(out.forest, expected);
        out.forest.validate(&g).unwrap();
    }

    #[test]
    fn non_past_case_swaps_the_outgoing_edge() {
        let g = triangle();
        // e = a→c is edge 2 backward
        let out = update(&g, &chain(), oe(2, false)).unwrap();
        assert_eq!(out.case, UpdateCase::NonPastCase);
        assert_eq!(out.deleted, Some(oe(0, true)));
        let expected = OrientedForest::from_out(vec![Some(oe(2, false)), Some(oe(1, true)), Some(oe(3, true)), None]);
        assert_eq!(out.forest, expected);
    }

    #[test]
    fn root_tail_rejected() {
        let g = triangle();
        // ∂→c reverses the forest edge c→∂
        assert_eq!(update(&g, &chain(), oe(3, false)).unwrap().case, UpdateCase::NoOp);
        let g = Network::builder()
            .unit_edge(0, 1)
            .unit_edge(1, 2)
            .unit_edge(2, 0)
            .unit_edge(2, 3)
            .unit_edge(0, 3)
            .build()
            .unwrap();
        let f = OrientedForest::from_out(vec![Some(oe(0, true)), Some(oe(1, true)), Some(oe(3, true)), None]);
        let err = update(&g, &f, oe(4, false)).unwrap_err();
        assert_eq!(err, UpdateError::RootTail(3));
    }

    #[test]
    fn parallel_edge_dynamics_two_states() {
        // v=0, ∂=1, two parallel edges
        let g = Network::builder().edge(0, 1, "1").edge(0, 1, "3").build().unwrap();
        let f = OrientedForest::from_out(vec![Some(oe(0, true)), None]);
        let mut rng = rng_from_seed(11);
        let trials = 40_000;
        let moved = (0..trials)
            .filter(|_| dynamics_step(&g, &f, n(0), &mut rng).unwrap().1.forest != f)
            .count();
        let p = 0.75;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((moved as f64 / trials as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn all_edges_in_forest_is_a_no_op_step() {
        let g = Network::builder().unit_edge(0, 1).build().unwrap();
        let f = OrientedForest::from_out(vec![Some(oe(0, true)), None]);
        let mut rng = rng_from_seed(0);
        for _ in 0..50 {
            assert_eq!(dynamics_step(&g, &f, n(0), &mut rng).unwrap().1.case, UpdateCase::NoOp);
        }
        assert_eq!(dynamics_step(&g, &f, n(1), &mut rng).unwrap_err(), UpdateError::RootTail(1));
    }

    #[test]
    fn path_updates() {
        let g = triangle();
        let f = chain();
        let none = update_along_path(&g, &f, &[n(1)], &EdgeChoice::LowestId).unwrap();
        assert_eq!(none.forest, f);
        assert!(none.steps.is_empty());
        let missing = update_along_path(&g, &f, &[n(3), n(0)], &EdgeChoice::LowestId).unwrap_err();
        assert_eq!(missing, UpdateError::MissingEdge { from: 0, to: 3 });
    }

    #[test]
    fn single_step_across_components_is_non_past() {
        // two chains 0→1→∂ and 2→3→∂ with a rung 0–2
        let g = Network::builder()
            .unit_edge(0, 1)
            .unit_edge(1, 9)
            .unit_edge(2, 3)
            .unit_edge(3, 9)
            .unit_edge(0, 2)
            .build()
            .unwrap();
        let (a, c) = (g.node(VertexId(0)).unwrap(), g.node(VertexId(2)).unwrap());
        let mut out = vec![None; g.vertex_count()];
        for (i, e) in g.edges().iter().enumerate().take(4) {
            out[e.u.index()] = Some(oe(i, true));
        }
        let f = OrientedForest::from_out(out);
        f.validate(&g).unwrap();
        let res = update_along_path(&g, &f, &[a, c], &EdgeChoice::LowestId).unwrap();
        assert_eq!(res.cases(), vec![UpdateCase::NonPastCase]);
        assert_eq!(res.forest.parent(&g, c), Some(a));
    }

    #[test]
    fn trace_lines_are_json() {
        let g = triangle();
        let mut buf = Vec::new();
        let mut rng = rng_from_seed(5);
        let end = run_dynamics(&g, &chain(), n(0), 10, &mut rng, Some(&mut buf)).unwrap();
        end.validate(&g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let recs: Vec<TraceRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(recs.len(), 10);
        assert_eq!(recs[3].step, 3);
    }
}
