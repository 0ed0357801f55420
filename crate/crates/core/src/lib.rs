//! Sparse linear regression from marginal statistics and a reference panel.
//!
//! When only per-variable summary statistics of a study are available, the
//! Lasso objective can still be optimized by replacing the unavailable
//! `XᵀX/n` with a shrunk, block-diagonal estimate from a small external
//! reference sample. This crate provides:
//!
//! * [`refpanel`]: panel standardization and block-wise shrunk correlation or
//!   covariance matrices,
//! * [`solver`]: warm-started coordinate-descent paths for the covariance and
//!   correlation formulations and for the individual-level Lasso, with KKT checks,
//! * [`selection`]: BIC along a path,
//! * [`simulate`], [`metrics`] and [`experiment`]: synthetic benchmarks,
//! * [`io`] and [`cli`]: file formats and the `remi` command line.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod refpanel;
pub mod selection;
pub mod simulate;
pub mod solver;

pub use error::{RemiError, Result};
