//! Exact nonnegative matrix factorization: benchmark generators, local NMF
//! solvers, the multi-start / annealing / rank-by-rank heuristics and an
//! experiment harness that reproduces success-rate tables.

pub mod error;
pub mod factor;
pub mod generators;
pub mod harness;
pub mod heuristics;
pub mod init;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod solvers;

pub use error::{Error, Result};
pub use factor::FactorPair;
pub use init::{init_pair, init_rank_one, InitStrategy, RandomSource};
pub use matrix::DenseMatrix;
pub use solvers::{algo_nmf, Solver, SolverBudget, SolverKind};
pub use heuristics::{HeuristicKind, HeuristicSpec, Outcome, RefineConfig};
pub use harness::{format_cell, run_trials, BenchmarkReport, Protocol, TrialRecord};
