//! Exact ground truth for small networks.
//!
//! Everything here works in exact rational arithmetic: a certificate is a
//! set of residuals that are exactly zero, not small.

mod chisq;
mod enumerate;
mod kernel;
mod kirchhoff;
mod tolerance;

pub use chisq::{chi_square_gof, chi_square_two_sample, ChiSquare, StatError};
pub use enumerate::{enumerate_spanning_trees, TreeDistribution, WeightedTree, ENUMERATION_EDGE_LIMIT};
pub use kernel::{
    build_kernel, build_kernel_on, certify_stationarity, certify_with_weights, oriented_state_space, KernelMatrix, StationarityReport,
    STATE_LIMIT,
};
pub use kirchhoff::kirchhoff_total;
pub use tolerance::{certify_update_tolerance, ToleranceReport, EXHAUSTIVE_STATE_LIMIT, SAMPLED_EVENTS};

use thiserror::Error;

use crate::contraction::ContractionError;
use crate::update::UpdateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{edges} edges exceeds the enumeration budget of {limit}")]
    EdgeBudget { edges: usize, limit: usize },
    #[error("{states} oriented trees exceeds the state budget of {limit}")]
    StateBudget { states: usize, limit: usize },
    #[error("the dynamics vertex must not be the boundary vertex")]
    BoundaryVertex,
    #[error("kernel and distribution have different state lists")]
    StateMismatch,
    #[error("unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("update left the state space")]
    LeftStateSpace,
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Update(#[from] UpdateError),
}

/// Serializes exact rationals as strings (`"0"`, `"3/11"`).
pub(crate) fn rational_string(r: &num_rational::BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
