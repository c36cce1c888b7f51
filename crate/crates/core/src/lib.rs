//! Ollivier-Ricci curvature on hypergraphs with a closed-form upper bound on
//! the Wasserstein-1 distance between neighboring measures.

pub mod bound;
pub mod curvature;
pub mod generators;
pub mod harness;
pub mod hypergraph;
pub mod measure;
pub mod metric;
pub mod par;
pub mod report;
pub mod transport;
