//! Experiment harness, file formats, and IO for the blind graph-filter
//! identification pipeline in `graphdeconv-core`.
//!
//! - [`experiments`]: deterministic phase-transition grids over sparsity,
//!   observation count, or filter order, with per-trial replay;
//! - [`bundle`]: versioned JSON schemas for ground-truth bundles, solve
//!   results, certificates, and ambiguity reports;
//! - [`edgelist`]: the whitespace edge-list file format.

pub mod bundle;
pub mod edgelist;
pub mod experiments;

/// Schema version stamped into every JSON artifact.
pub const SCHEMA_VERSION: &str = "1";
