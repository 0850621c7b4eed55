//! Exact search for LOCC protocols realizing a separable product measurement.

pub mod cone;
pub mod engine;
pub mod exact;
pub mod fixtures;
pub mod format;
pub mod kraus;
pub mod lp;
pub mod measurement;
pub mod tree;
