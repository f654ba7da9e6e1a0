//! Social welfare maximization under network externalities.
//!
//! Agents each receive exactly one item, and an agent's utility for an item
//! depends on which other agents share it. The crate provides relaxations,
//! randomized rounding pipelines with provable guarantees, and an exhaustive
//! oracle for checking those guarantees on small instances.

pub mod cli;
pub mod concave;
pub mod config;
pub mod contention;
pub mod error;
pub mod format;
pub mod generate;
pub mod instance;
pub mod lovasz;
pub mod negative;
pub mod oracle;
pub mod report;
pub mod seed;
pub mod simplex;
pub mod solve;
pub mod stats;

mod ascent;
mod pipeline;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use instance::{
    eval_externality, welfare, welfare_binary, Allocation, ExternalitySpec, FractionalAllocation,
    Instance, SignRegime,
};
pub use report::{Algorithm, SolveReport};
pub use solve::{solve, solve_with_oracle};
