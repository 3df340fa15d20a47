use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{enumerate_spanning_trees, rational_string, OracleError, TreeDistribution};
use crate::contraction::WiredContraction;
use crate::forest::OrientedForest;
use crate::network::{Network, NodeIndex, VertexId};
use crate::parallel::{default_workers, try_map_indexed};
use crate::update::update;

/// Largest oriented-tree state space a kernel is built on.
pub const STATE_LIMIT: usize = 5000;

/// Exact transition matrix of the cycle-breaking dynamics rooted at one vertex.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    states: Vec<OrientedForest>,
    /// Sparse rows, sorted by column.
    rows: Vec<Vec<(usize, BigRational)>>,
    vertex: NodeIndex,
}

impl KernelMatrix {
    pub fn states(&self) -> &[OrientedForest] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn vertex(&self) -> NodeIndex {
        self.vertex
    }

    pub fn row(&self, i: usize) -> &[(usize, BigRational)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        match self.rows[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(k) => self.rows[i][k].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p))
            .collect()
    }

    /// `P(t0,t1) > 0` exactly when `P(t1,t0) > 0`.
    pub fn support_is_symmetric(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().all(|(j, _)| !self.entry(*j, i).is_zero()))
    }
}

/// Oriented spanning trees of the contraction toward `∂`, with their law.
pub fn oriented_state_space(c: &WiredContraction) -> Result<TreeDistribution, OracleError> {
    let boundary = c.require_boundary()?;
    let dist = enumerate_spanning_trees(c.network(), Some(boundary))?;
    if dist.len() > STATE_LIMIT {
        return Err(OracleError::StateBudget {
            states: dist.len(),
            limit: STATE_LIMIT,
        });
    }
    Ok(dist)
}

/// Kernel of the dynamics rooted at the kept vertex `v`, on the oriented
/// trees of `c` toward `∂`.
pub fn build_kernel(c: &WiredContraction, v: VertexId) -> Result<(KernelMatrix, TreeDistribution), OracleError> {
    let node = c.network().node(v).ok_or(OracleError::UnknownVertex(v.0))?;
    if c.is_boundary(node) {
        return Err(OracleError::BoundaryVertex);
    }
    let dist = oriented_state_space(c)?;
    let k = build_kernel_on(c.network(), &dist, node)?;
    Ok((k, dist))
}

/// Kernel on the states of a rooted distribution. `v` must not be its root.
pub fn build_kernel_on(g: &Network, dist: &TreeDistribution, v: NodeIndex) -> Result<KernelMatrix, OracleError> {
    if dist.root() == Some(v) || dist.root().is_none() {
        return Err(OracleError::BoundaryVertex);
    }
    if dist.len() > STATE_LIMIT {
        return Err(OracleError::StateBudget {
            states: dist.len(),
            limit: STATE_LIMIT,
        });
    }
    let states = dist.oriented_states();
    let cv = g.conductance_at_exact(v);
    let rows = try_map_indexed(states.len(), default_workers(), |i| {
        let mut row: BTreeMap<usize, BigRational> = BTreeMap::new();
        // a self-loop shows up once per orientation, which is the double count
        for &e in g.incident(v) {
            let outcome = update(g, &states[i], e)?;
            let j = dist.index_of_forest(&outcome.forest).ok_or(OracleError::LeftStateSpace)?;
            *row.entry(j).or_insert_with(BigRational::zero) += g.conductance(e.edge).exact() / &cv;
        }
        Ok::<_, OracleError>(row.into_iter().collect::<Vec<_>>())
    })?;
    Ok(KernelMatrix { states, rows, vertex: v })
}

/// Exact residuals of `πP = π` and of detailed balance.
#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    pub states: usize,
    pub vertex: VertexId,
    pub max_stationarity_residual: String,
    pub max_detailed_balance_residual: String,
    pub rows_stochastic: bool,
    pub passed: bool,
    #[serde(skip)]
    pub stationarity_residual: BigRational,
    #[serde(skip)]
    pub detailed_balance_residual: BigRational,
}

/// Certifies that `dist` is stationary and reversible for `k`.
pub fn certify_stationarity(
    g: &Network,
    k: &KernelMatrix,
    dist: &TreeDistribution,
) -> Result<StationarityReport, OracleError> {
    if dist.oriented_states() != k.states {
        return Err(OracleError::StateMismatch);
    }
    let pi: Vec<BigRational> = dist.trees().iter().map(|t| t.probability.clone()).collect();
    certify_with_weights(g, k, &pi)
}

/// As [`certify_stationarity`] with an arbitrary candidate vector `π`.
pub fn certify_with_weights(
    g: &Network,
    k: &KernelMatrix,
    pi: &[BigRational],
) -> Result<StationarityReport, OracleError> {
    if pi.len() != k.len() {
        return Err(OracleError::StateMismatch);
    }
    let mut flow = vec![BigRational::zero(); k.len()];
    let mut balance = BigRational::zero();
    for (i, row) in k.rows.iter().enumerate() {
        for (j, p) in row {
            let forward = &pi[i] * p;
            flow[*j] += &forward;
            let backward = &pi[*j] * k.entry(*j, i);
            let gap = (forward - backward).abs();
            if gap > balance {
                balance = gap;
            }
        }
    }
    let stationarity = flow
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(BigRational::zero(), |m, x| if x > m { x } else { m });
    let one = BigRational::from_integer(1.into());
    let rows_stochastic = k.row_sums().iter().all(|s| *s == one);
    let passed = stationarity.is_zero() && balance.is_zero() && rows_stochastic;
    Ok(StationarityReport {
        states: k.len(),
        vertex: g.vertex_id(k.vertex),
        max_stationarity_residual: rational_string(&stationarity),
        max_detailed_balance_residual: rational_string(&balance),
        rows_stochastic,
        passed,
        stationarity_residual: stationarity,
        detailed_balance_residual: balance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::wired_contract;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    // v=0 joined to an outside vertex 9 by conductances 1 and 3
    fn parallel_pair() -> WiredContraction {
        let g = Network::builder().edge(0, 9, "1").edge(0, 9, "3").build().unwrap();
        wired_contract(&g, &[VertexId(0)]).unwrap()
    }

    #[test]
    fn parallel_edge_kernel() {
        let c = parallel_pair();
        let (k, dist) = build_kernel(&c, VertexId(0)).unwrap();
        assert_eq!(k.len(), 2);
        for i in 0..2 {
            assert_eq!(k.entry(i, 0), q(1, 4));
            assert_eq!(k.entry(i, 1), q(3, 4));
        }
        let report = certify_stationarity(c.network(), &k, &dist).unwrap();
        assert!(report.passed);
        assert_eq!(report.max_stationarity_residual, "0");
        assert!(k.support_is_symmetric());
    }

    #[test]
    fn triangle_with_pendant_boundary() {
        let g = Network::builder()
            .edge(0, 1, "1")
            .edge(1, 2, "2")
            .edge(2, 0, "3")
            .edge(2, 9, "1/2")
            .edge(0, 0, "2")
            .build()
            .unwrap();
        let c = wired_contract(&g, &[VertexId(0), VertexId(1), VertexId(2)]).unwrap();
        for v in [0, 1, 2] {
            let (k, dist) = build_kernel(&c, VertexId(v)).unwrap();
            assert!(k.row_sums().iter().all(|s| *s == q(1, 1)));
            let report = certify_stationarity(c.network(), &k, &dist).unwrap();
            assert!(report.passed, "vertex {v}: {report:?}");
            assert!(k.support_is_symmetric());
        }
    }

    #[test]
    fn swapped_weights_are_caught() {
        let g = Network::builder().edge(0, 1, "1").edge(1, 9, "2").edge(0, 9, "5").build().unwrap();
        let c = wired_contract(&g, &[VertexId(0), VertexId(1)]).unwrap();
        let (k, dist) = build_kernel(&c, VertexId(0)).unwrap();
        let mut pi: Vec<BigRational> = dist.trees().iter().map(|t| t.probability.clone()).collect();
        assert!(pi[0] != pi[1]);
        pi.swap(0, 1);
        let report = certify_with_weights(c.network(), &k, &pi).unwrap();
        assert!(!report.passed);
        assert!(!report.detailed_balance_residual.is_zero() || !report.stationarity_residual.is_zero());
    }

    #[test]
    fn boundary_vertex_rejected() {
        let c = parallel_pair();
        assert_eq!(
            build_kernel(&c, VertexId::BOUNDARY).unwrap_err(),
            OracleError::BoundaryVertex
        );
    }
}
