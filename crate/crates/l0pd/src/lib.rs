//! IO, synthetic data generation, benchmarking, and solver configuration
//! around the `l0pd-core` solvers.

pub mod bench;
pub mod config;
pub mod data;

pub use l0pd_core as core;
