//! End-to-end fitting shared by the CLI and the experiment runner.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{BlockPartition, CoefficientPath, MarginalVector, MatrixKind, SummaryStats};
use crate::refpanel::{build_block_set, standardize, ReferencePanel, DEFAULT_KAPPA};
use crate::selection::{bic_select, BicTable};
use crate::solver::{fit_lasso, fit_problem, Method, QuadraticProblem, SolverConfig};

/// Inputs for one of the three formulations.
#[derive(Debug, Clone)]
pub enum FitData {
    RemiC {
        marginal: MarginalVector,
        panel: ReferencePanel,
    },
    RemiR {
        summary: SummaryStats,
        panel: ReferencePanel,
    },
    Lasso {
        x: Array2<f64>,
        y: Array1<f64>,
    },
}

impl FitData {
    pub fn method(&self) -> Method {
        match self {
            FitData::RemiC { .. } => Method::RemiC,
            FitData::RemiR { .. } => Method::RemiR,
            FitData::Lasso { .. } => Method::Lasso,
        }
    }

    /// Sample size used in the BIC penalty.
    pub fn sample_size(&self) -> usize {
        match self {
            FitData::RemiC { marginal, .. } => marginal.n,
            FitData::RemiR { summary, .. } => summary.n,
            FitData::Lasso { x, .. } => x.nrows(),
        }
    }
}

/// Standardizes a raw panel matrix read from disk.
pub fn prepare_panel(raw: Array2<f64>) -> Result<ReferencePanel> {
    standardize(raw)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub kappa: f64,
    pub solver: SolverConfig,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            kappa: DEFAULT_KAPPA,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub method: Method,
    pub n: usize,
    pub path: CoefficientPath,
    pub bic: BicTable,
}

/// Builds the problem for `data`, fits the path and runs BIC selection.
/// `partition` is ignored for the Lasso.
pub fn fit(data: &FitData, partition: &BlockPartition, settings: &FitSettings) -> Result<FitOutput> {
    let path = match data {
        FitData::RemiC { marginal, panel } => {
            let cov = build_block_set(panel, partition, settings.kappa, MatrixKind::Covariance)?;
            fit_problem(&QuadraticProblem::remi_c(marginal, cov)?, &settings.solver)?
        }
        FitData::RemiR { summary, panel } => {
            let corr = build_block_set(panel, partition, settings.kappa, MatrixKind::Correlation)?;
            fit_problem(&QuadraticProblem::remi_r(summary, &corr)?, &settings.solver)?
        }
        FitData::Lasso { x, y } => fit_lasso(x.view(), y.view(), &settings.solver)?,
    };
    let n = data.sample_size();
    let bic = bic_select(&path, n)?;
    Ok(FitOutput {
        method: data.method(),
        n,
        path,
        bic,
    })
}
