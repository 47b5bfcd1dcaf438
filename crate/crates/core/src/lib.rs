//! Causal structure learning from mixed observational and interventional
//! discrete data: constraint-based skeleton discovery, BDeu-scored CPDAG
//! search, posterior fusion into a PAG, synthetic-data generation, and
//! graph-comparison metrics.

pub mod cli;
pub mod data;
pub mod error;
pub mod fusion;
pub mod graph;
pub mod indep;
pub mod metrics;
pub mod score;
pub mod search;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
