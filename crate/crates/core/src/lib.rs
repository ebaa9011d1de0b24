//! Solver core for the generalized best-subset-selection problem
//!
//! ```text
//!     min_beta  sum_i l(x_i' beta, y_i) + lambda1 ||beta||_1
//!               + lambda2 ||beta||_2^2 + lambda0 ||beta||_0
//! ```
//!
//! with a convex per-sample loss `l` (square, logistic, Huber). The solver
//! works in both primal and dual spaces: a super-gradient ascent on the
//! concave dual with feasible projection, a closed-form primal-dual link,
//! and a primal coordinate-descent refinement, wrapped in an outer loop
//! that grows a working set of features incrementally and permanently
//! discards features certified inactive by a duality-gap ball bound.
//!
//! The crate is `no_std` (with `alloc`); IO, data generation, and the CLI
//! live in the companion `l0pd` crate.

#![no_std]

extern crate alloc;

pub mod active_set;
pub mod baselines;
pub mod dual;
pub mod error;
pub mod inner;
pub mod loss;
pub mod outer;
pub mod problem;

pub use active_set::FeatureSets;
pub use error::Error;
pub use inner::{InnerConfig, InnerResult, StepSchedule};
pub use loss::LossModel;
pub use outer::{OuterConfig, SolveReport};
pub use problem::{Hyperparams, ProblemData};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
