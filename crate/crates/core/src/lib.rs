//! Wired uniform spanning forests on weighted multigraphs: Wilson sampling,
//! the cycle-breaking update and its dynamics, and exact rational oracles
//! for small networks.

pub mod contraction;
pub mod corpus;
pub mod ends;
pub mod forest;
pub mod generators;
pub mod harness;
pub mod network;
pub mod oracle;
pub mod parallel;
pub mod rng;
pub mod source;
pub mod update;
pub mod walk;
pub mod wilson;
