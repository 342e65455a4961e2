//! Toolkit for partially ordered scripts.
//!
//! - [`script_graph`]: validated DAG model with reduction and closure.
//! - [`dot`]: DOT-subset codec used as the model input/output format.
//! - [`aggregation`]: pairwise precedence scores to a valid script.
//! - [`metrics`]: edge precision/recall/F1 and graph edit distance.
//! - [`dataset`]: JSONL corpus ingestion, agreement filtering and statistics.
//! - [`baselines`]: seeded random scripts and their evaluation.

pub mod aggregation;
pub mod baselines;
pub mod dataset;
pub mod dot;
pub mod error;
pub mod metrics;
pub mod script_graph;

pub use error::{Error, Result};
pub use script_graph::{EventNode, ScriptGraph};
