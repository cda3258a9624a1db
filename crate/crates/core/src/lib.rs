//! Overlapping-community detection from influence-based divisions.

pub mod blocks;
pub mod config;
pub mod error;
pub mod exec;
pub mod graph;
pub mod influence;
pub mod overlap;
pub mod partition;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::Graph;
pub use influence::InfluenceMatrix;
pub use partition::{Division, DivisionSet};
