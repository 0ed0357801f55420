//! Coordinate-descent path solvers for the three objectives:
//!
//! * individual-level Lasso: `(1/n)‖y − Xβ‖² + λ‖β‖₁`
//! * covariance form: `βᵀΣ̂ᵣβ − 2βᵀỹ + λ‖β‖₁`, with `Σ̂ᵣ` from a reference panel
//! * correlation form: `βᵀS⁻¹R̂S⁻¹β − 2βᵀS⁻²β̂ᵐ + λ‖β‖₁`, from summary statistics
//!
//! The last two share one engine ([`QuadraticProblem`] + [`fit_path`]) over a
//! block-diagonal gram matrix. Each block is an independent subproblem, so
//! blocks are solved separately (and concurrently) with per-block warm starts
//! and per-block convergence checks. The Lasso engine works on residuals and
//! never forms `XᵀX`.

mod kkt;
mod lasso;
mod path;
mod problem;

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{RemiError, Result};
use crate::model::CoefficientPath;

pub use kkt::{kkt_check, kkt_check_lasso, KktReport};
pub use lasso::{fit_lasso_path, lasso_lambda_max, lasso_loss_scale};
pub use path::fit_path;
pub use problem::{coordinate_update_c, coordinate_update_r, QuadraticProblem};

pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_SWEEPS: usize = 1000;
pub const DEFAULT_PATH_LENGTH: usize = 100;
pub const DEFAULT_TAU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RemiC,
    RemiR,
    Lasso,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::RemiC => "remi-c",
            Method::RemiR => "remi-r",
            Method::Lasso => "lasso",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = RemiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "remi-c" => Ok(Method::RemiC),
            "remi-r" => Ok(Method::RemiR),
            "lasso" => Ok(Method::Lasso),
            other => Err(RemiError::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Order in which coordinates are visited within a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisitOrder {
    #[default]
    Cyclic,
    /// Fixed pseudo-random permutation derived from the seed.
    Shuffled(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Threshold on the max coefficient change of a full sweep, relative to
    /// `max(1, max|β|)`.
    pub tol: f64,
    pub max_sweeps: usize,
    pub path_length: usize,
    /// Ratio of the smallest to the largest penalty on the grid.
    pub tau: f64,
    #[serde(default)]
    pub order: VisitOrder,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: DEFAULT_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            path_length: DEFAULT_PATH_LENGTH,
            tau: DEFAULT_TAU,
            order: VisitOrder::Cyclic,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(RemiError::InvalidArgument(format!("tol = {} must be > 0", self.tol)));
        }
        if self.max_sweeps == 0 {
            return Err(RemiError::InvalidArgument("max_sweeps must be >= 1".into()));
        }
        if self.path_length == 0 {
            return Err(RemiError::InvalidArgument("path length must be >= 1".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(RemiError::InvalidArgument(format!(
                "tau = {} outside (0, 1)",
                self.tau
            )));
        }
        Ok(())
    }
}

/// `sign(z) · max(|z| − γ, 0)`.
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0, "threshold must be nonnegative");
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Smallest penalty with an all-zero solution: `2 · max_j |linear_j|`.
pub fn lambda_max(linear: ArrayView1<'_, f64>) -> Result<f64> {
    let m = linear.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return Err(RemiError::DegenerateProblem);
    }
    Ok(2.0 * m)
}

/// Geometric grid of `d` points from `lambda_max` down to `tau · lambda_max`.
pub fn lambda_grid(lambda_max: f64, tau: f64, d: usize) -> Vec<f64> {
    match d {
        0 => Vec::new(),
        1 => vec![lambda_max],
        _ => {
            let last = d - 1;
            (0..d)
                .map(|l| {
                    if l == 0 {
                        lambda_max
                    } else if l == last {
                        tau * lambda_max
                    } else {
                        lambda_max * tau.powf(l as f64 / last as f64)
                    }
                })
                .collect()
        }
    }
}

pub(crate) fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(RemiError::InvalidArgument("lambda grid is empty".into()));
    }
    for (l, &lam) in lambdas.iter().enumerate() {
        if !(lam.is_finite() && lam > 0.0) {
            return Err(RemiError::InvalidArgument(format!("lambda[{l}] = {lam} is not positive")));
        }
        if l > 0 && lam >= lambdas[l - 1] {
            return Err(RemiError::InvalidArgument(format!(
                "lambda grid is not strictly decreasing at {l}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn converged_threshold(tol: f64, beta: &[f64]) -> f64 {
    let max_abs = beta.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    tol * max_abs.max(1.0)
}

/// Fits a quadratic problem on its default grid (λ_max down to τ·λ_max).
pub fn fit_problem(problem: &QuadraticProblem, config: &SolverConfig) -> Result<CoefficientPath> {
    config.validate()?;
    let grid = lambda_grid(problem.lambda_max()?, config.tau, config.path_length);
    fit_path(problem, config, &grid)
}

/// Fits the individual-level Lasso on its default grid.
pub fn fit_lasso(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    config: &SolverConfig,
) -> Result<CoefficientPath> {
    config.validate()?;
    let grid = lambda_grid(lasso_lambda_max(x, y)?, config.tau, config.path_length);
    fit_lasso_path(x, y, config, &grid)
}
