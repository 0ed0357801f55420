//! Reference panel ingestion and block-wise shrunk correlation/covariance.

use std::ops::Range;

use ndarray::{s, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RemiError, Result};
use crate::model::{BlockMatrixSet, BlockPartition, MatrixKind, Validate, ValidationReport};

pub const DEFAULT_KAPPA: f64 = 0.9;

/// `n_r × p` reference data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePanel {
    pub data: Array2<f64>,
    pub standardized: bool,
}

impl ReferencePanel {
    pub fn n_r(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }
}

impl Validate for ReferencePanel {
    fn validate(&self) -> std::result::Result<(), ValidationReport> {
        let mut report = ValidationReport::default();
        if self.data.iter().any(|v| !v.is_finite()) {
            report.violations.push("panel contains non-finite entries".into());
        }
        if self.standardized {
            let n = self.n_r() as f64;
            for (j, col) in self.data.axis_iter(Axis(1)).enumerate() {
                let mean = col.sum() / n;
                let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
                if mean.abs() > 1e-10 {
                    report.violations.push(format!("column {j} mean {mean:e} is not 0"));
                }
                if (sd - 1.0).abs() > 1e-8 {
                    report.violations.push(format!("column {j} sd {sd} is not 1"));
                }
            }
        }
        if report.is_empty() {
            Ok(())
        } else {
            Err(report)
        }
    }
}

/// Centers every column and scales it to unit standard deviation with
/// divisor `n` (not `n - 1`), in place.
pub fn standardize_columns(data: &mut Array2<f64>) -> Result<()> {
    let n = data.nrows();
    if n < 2 {
        return Err(RemiError::InvalidArgument(format!(
            "standardization needs at least 2 rows, got {n}"
        )));
    }
    let nf = n as f64;
    for (j, mut col) in data.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / nf;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        let sd = var.sqrt();
        if !(sd > 1e-12 * mean.abs().max(1.0)) {
            return Err(RemiError::ConstantColumn(j));
        }
        col.mapv_inplace(|v| (v - mean) / sd);
    }
    Ok(())
}

pub fn standardize(raw: Array2<f64>) -> Result<ReferencePanel> {
    let mut data = raw;
    standardize_columns(&mut data)?;
    Ok(ReferencePanel {
        data,
        standardized: true,
    })
}

fn cross_product(block: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut g = block.t().dot(&block);
    // matrixmultiply does not promise a bitwise-symmetric result
    let b = g.nrows();
    for i in 0..b {
        for j in (i + 1)..b {
            let v = g[[i, j]];
            g[[j, i]] = v;
        }
    }
    g
}

/// Pairwise correlations of the columns in `block`; the diagonal is exactly 1.
pub fn empirical_correlation(panel: &ReferencePanel, block: Range<usize>) -> Array2<f64> {
    let mut g = cross_product(panel.data.slice(s![.., block]));
    let norms: Vec<f64> = g.diag().iter().map(|v| v.sqrt()).collect();
    let b = g.nrows();
    for i in 0..b {
        for j in i..b {
            let r = if i == j {
                1.0
            } else {
                (g[[i, j]] / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            g[[i, j]] = r;
            g[[j, i]] = r;
        }
    }
    g
}

/// `kappa * emp + (1 - kappa) * I`.
pub fn shrink(emp: &Array2<f64>, kappa: f64) -> Array2<f64> {
    let mut out = emp.mapv(|v| kappa * v);
    for i in 0..out.nrows() {
        out[[i, i]] += 1.0 - kappa;
    }
    out
}

/// `kappa * emp + (1 - kappa) * diag(emp)`: off-diagonals shrink, variances stay.
pub fn shrink_to_diagonal(emp: &Array2<f64>, kappa: f64) -> Array2<f64> {
    let mut out = emp.mapv(|v| kappa * v);
    for i in 0..out.nrows() {
        out[[i, i]] = emp[[i, i]];
    }
    out
}

pub fn build_block_set(
    panel: &ReferencePanel,
    partition: &BlockPartition,
    kappa: f64,
    kind: MatrixKind,
) -> Result<BlockMatrixSet> {
    partition.validate_for(panel.p())?;
    if !(0.0..=1.0).contains(&kappa) {
        return Err(RemiError::InvalidArgument(format!(
            "shrinkage kappa = {kappa} outside [0, 1]"
        )));
    }
    let n_r = panel.n_r() as f64;
    let blocks: Vec<Array2<f64>> = partition
        .blocks
        .par_iter()
        .map(|range| match kind {
            MatrixKind::Correlation => shrink(&empirical_correlation(panel, range.clone()), kappa),
            MatrixKind::Covariance => {
                let cov = cross_product(panel.data.slice(s![.., range.clone()])) / n_r;
                shrink_to_diagonal(&cov, kappa)
            }
        })
        .collect();
    Ok(BlockMatrixSet {
        partition: partition.clone(),
        blocks,
        kind,
        shrinkage: kappa,
    })
}
