use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{RemiError, Result};
use crate::model::{
    BlockMatrixSet, MarginalVector, MatrixKind, SparseVector, SummaryStats, Validate,
    ValidationReport,
};

use super::soft_threshold;

/// `min βᵀGβ − 2βᵀc + λ‖β‖₁` with block-diagonal `G`.
///
/// `loss_scale` multiplies the recorded smooth loss (not the objective being
/// minimized) so that losses from different formulations sit on the same
/// study scale for BIC.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    pub gram: BlockMatrixSet,
    pub linear: Array1<f64>,
    pub scale: Array1<f64>,
    pub loss_scale: f64,
}

impl QuadraticProblem {
    pub fn new(gram: BlockMatrixSet, linear: Array1<f64>) -> Result<Self> {
        let scale = gram.diag();
        let problem = QuadraticProblem {
            gram,
            linear,
            scale,
            loss_scale: 1.0,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Covariance form from marginal cross-products and a shrunk panel
    /// covariance. When `marginal.y_sq_mean` is known the recorded loss is
    /// multiplied by `n² / yᵀy`.
    pub fn remi_c(marginal: &MarginalVector, covariance: BlockMatrixSet) -> Result<Self> {
        marginal.validate()?;
        if covariance.dim() != marginal.len() {
            return Err(RemiError::DimensionMismatch {
                expected: marginal.len(),
                found: covariance.dim(),
            });
        }
        let mut problem = Self::new(covariance, marginal.values.clone())?;
        if let Some(ysq) = marginal.y_sq_mean {
            problem.loss_scale = marginal.n as f64 / ysq;
        }
        Ok(problem)
    }

    /// Correlation form: gram `S⁻¹R̂S⁻¹`, linear term `β̂ᵐ / ŝ²`.
    pub fn remi_r(summary: &SummaryStats, correlation: &BlockMatrixSet) -> Result<Self> {
        summary.validate()?;
        if correlation.kind != MatrixKind::Correlation {
            return Err(RemiError::InvalidArgument(
                "summary-statistic problems need a correlation block set".into(),
            ));
        }
        if correlation.dim() != summary.len() {
            return Err(RemiError::DimensionMismatch {
                expected: summary.len(),
                found: correlation.dim(),
            });
        }
        let inv_s: Array1<f64> = summary.s2.mapv(|v| 1.0 / v.sqrt());
        let blocks = correlation
            .partition
            .iter()
            .zip(&correlation.blocks)
            .map(|(range, r)| {
                let b = range.len();
                Array2::from_shape_fn((b, b), |(i, k)| {
                    if i == k {
                        r[[i, i]] / summary.s2[range.start + i]
                    } else {
                        r[[i, k]] * inv_s[range.start + i] * inv_s[range.start + k]
                    }
                })
            })
            .collect();
        let gram = BlockMatrixSet {
            partition: correlation.partition.clone(),
            blocks,
            kind: MatrixKind::Covariance,
            shrinkage: correlation.shrinkage,
        };
        let linear = &summary.beta_m / &summary.s2;
        Self::new(gram, linear)
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn lambda_max(&self) -> Result<f64> {
        super::lambda_max(self.linear.view())
    }

    /// Recorded loss `loss_scale · (βᵀGβ − 2βᵀc)`.
    pub fn smooth_loss(&self, beta: ArrayView1<'_, f64>) -> f64 {
        self.loss_scale * (self.gram.quad_form(beta) - 2.0 * beta.dot(&self.linear))
    }

    /// The minimized objective `βᵀGβ − 2βᵀc + λ‖β‖₁`.
    pub fn penalized_objective(&self, beta: ArrayView1<'_, f64>, lambda: f64) -> f64 {
        self.gram.quad_form(beta) - 2.0 * beta.dot(&self.linear)
            + lambda * beta.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn sparse_smooth_loss(&self, beta: &SparseVector) -> f64 {
        self.smooth_loss(beta.to_dense().view())
    }
}

impl Validate for QuadraticProblem {
    fn validate(&self) -> std::result::Result<(), ValidationReport> {
        let mut report = match self.gram.validate() {
            Ok(()) => ValidationReport::default(),
            Err(r) => r,
        };
        let p = self.gram.dim();
        if self.linear.len() != p {
            report
                .violations
                .push(format!("linear term has length {} but gram is {p}", self.linear.len()));
        }
        if self.scale.len() != p {
            report
                .violations
                .push(format!("scale has length {} but gram is {p}", self.scale.len()));
        } else {
            let diag = self.gram.diag();
            for j in 0..p {
                if !(self.scale[j] > 0.0) {
                    report.violations.push(format!("scale[{j}] is not positive"));
                } else if (self.scale[j] - diag[j]).abs() > 1e-12 * diag[j].abs().max(1.0) {
                    report
                        .violations
                        .push(format!("scale[{j}] differs from the gram diagonal"));
                }
            }
        }
        if self.linear.iter().any(|v| !v.is_finite()) {
            report.violations.push("linear term is not finite".into());
        }
        if !(self.loss_scale > 0.0 && self.loss_scale.is_finite()) {
            report.violations.push("loss scale must be positive".into());
        }
        if report.is_empty() {
            Ok(())
        } else {
            Err(report)
        }
    }
}

fn locate(gram: &BlockMatrixSet, j: usize) -> (usize, std::ops::Range<usize>) {
    let bi = gram
        .partition
        .blocks
        .partition_point(|r| r.end <= j);
    (bi, gram.partition.blocks[bi].clone())
}

/// One exact coordinate minimization of the covariance-form objective:
/// `S(η_j, λ/2) / σ_jj` with `η_j = c_j − Σ_{k≠j} β_k σ_jk` over j's block.
pub fn coordinate_update_c(
    j: usize,
    beta: ArrayView1<'_, f64>,
    problem: &QuadraticProblem,
    lambda: f64,
) -> f64 {
    let (bi, range) = locate(&problem.gram, j);
    let g = &problem.gram.blocks[bi];
    let local = j - range.start;
    let mut eta = problem.linear[j];
    for (a, k) in range.enumerate() {
        if k != j {
            eta -= beta[k] * g[[local, a]];
        }
    }
    soft_threshold(eta, lambda / 2.0) / problem.scale[j]
}

/// The correlation-form update written directly in summary-statistic terms:
/// `η_j = β̂ᵐ_j/ŝ²_j − (1/ŝ_j) Σ_{k≠j} β_k r̂_jk / ŝ_k`, then `S(η_j, λ/2) · ŝ²_j`.
pub fn coordinate_update_r(
    j: usize,
    beta: ArrayView1<'_, f64>,
    summary: &SummaryStats,
    correlation: &BlockMatrixSet,
    lambda: f64,
) -> f64 {
    let (bi, range) = locate(correlation, j);
    let r = &correlation.blocks[bi];
    let local = j - range.start;
    let mut cross = 0.0;
    for (a, k) in range.enumerate() {
        if k != j {
            cross += beta[k] * r[[local, a]] / summary.s2[k].sqrt();
        }
    }
    let eta = summary.beta_m[j] / summary.s2[j] - cross / summary.s2[j].sqrt();
    soft_threshold(eta, lambda / 2.0) * summary.s2[j]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BlockPartition;
    use ndarray::array;

    fn identity_set(p: usize, kind: MatrixKind) -> BlockMatrixSet {
        BlockMatrixSet {
            partition: BlockPartition::single(p),
            blocks: vec![Array2::eye(p)],
            kind,
            shrinkage: 1.0,
        }
    }

    fn identity_problem(linear: Array1<f64>) -> QuadraticProblem {
        let p = linear.len();
        QuadraticProblem::new(identity_set(p, MatrixKind::Covariance), linear).unwrap()
    }

    #[test]
    fn update_c_orthonormal_cases() {
        let prob = identity_problem(array![1.0, 0.2]);
        let zero = Array1::zeros(2);
        assert_eq!(coordinate_update_c(0, zero.view(), &prob, 0.5), 0.75);
        assert_eq!(coordinate_update_c(1, zero.view(), &prob, 0.5), 0.0);
        assert_eq!(coordinate_update_c(0, zero.view(), &prob, 0.0), 1.0);
        assert_eq!(coordinate_update_c(1, zero.view(), &prob, 0.0), 0.2);
    }

    #[test]
    fn update_r_reduces_to_update_c_for_identity() {
        let summary = SummaryStats {
            beta_m: array![0.9, -0.4, 0.05],
            s2: array![1.0, 1.0, 1.0],
            n: 100,
        };
        let corr = identity_set(3, MatrixKind::Correlation);
        let prob = QuadraticProblem::remi_r(&summary, &corr).unwrap();
        let beta = array![0.3, 0.0, -0.1];
        for j in 0..3 {
            let r = coordinate_update_r(j, beta.view(), &summary, &corr, 0.3);
            let c = coordinate_update_c(j, beta.view(), &prob, 0.3);
            assert!((r - c).abs() < 1e-14);
        }
    }

    #[test]
    fn update_r_hand_example() {
        let summary = SummaryStats {
            beta_m: array![1.0, 0.5],
            s2: array![1.0, 1.0],
            n: 100,
        };
        let corr = BlockMatrixSet {
            partition: BlockPartition::single(2),
            blocks: vec![array![[1.0, 0.45], [0.45, 1.0]]],
            kind: MatrixKind::Correlation,
            shrinkage: 0.9,
        };
        let beta = array![0.75, 0.0];
        // eta_2 = 0.5 - 0.45 * 0.75 = 0.1625 <= 0.25
        assert_eq!(coordinate_update_r(1, beta.view(), &summary, &corr, 0.5), 0.0);
        assert!(
            (coordinate_update_r(1, beta.view(), &summary, &corr, 0.3) - (0.1625 - 0.15)).abs()
                < 1e-15
        );
    }

    #[test]
    fn update_r_matches_scaled_gram_form() {
        let summary = SummaryStats {
            beta_m: array![0.4, -0.2, 0.3, 0.1],
            s2: array![0.5, 0.8, 0.3, 1.7],
            n: 1000,
        };
        let corr = BlockMatrixSet {
            partition: BlockPartition::new(vec![0..3, 3..4]),
            blocks: vec![
                array![[1.0, 0.3, -0.2], [0.3, 1.0, 0.4], [-0.2, 0.4, 1.0]],
                array![[1.0]],
            ],
            kind: MatrixKind::Correlation,
            shrinkage: 0.9,
        };
        let prob = QuadraticProblem::remi_r(&summary, &corr).unwrap();
        let beta = array![0.2, -0.1, 0.05, 0.3];
        for j in 0..4 {
            let r = coordinate_update_r(j, beta.view(), &summary, &corr, 0.2);
            let c = coordinate_update_c(j, beta.view(), &prob, 0.2);
            assert!((r - c).abs() < 1e-13 * r.abs().max(1.0), "j={j}: {r} vs {c}");
        }
        for j in 0..4 {
            assert!((prob.scale[j] - 1.0 / summary.s2[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn large_lambda_keeps_zero() {
        let summary = SummaryStats {
            beta_m: array![0.4, -0.9],
            s2: array![0.5, 0.8],
            n: 50,
        };
        let corr = identity_set(2, MatrixKind::Correlation);
        let prob = QuadraticProblem::remi_r(&summary, &corr).unwrap();
        let lmax = prob.lambda_max().unwrap();
        let zero = Array1::zeros(2);
        for j in 0..2 {
            assert_eq!(coordinate_update_r(j, zero.view(), &summary, &corr, lmax), 0.0);
        }
    }

    #[test]
    fn summary_lambda_max_example() {
        let summary = SummaryStats {
            beta_m: array![0.2],
            s2: array![0.5],
            n: 50,
        };
        let prob = QuadraticProblem::remi_r(&summary, &identity_set(1, MatrixKind::Correlation))
            .unwrap();
        assert!((prob.lambda_max().unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn remi_r_rejects_covariance_kind() {
        let summary = SummaryStats {
            beta_m: array![0.2],
            s2: array![0.5],
            n: 50,
        };
        assert!(QuadraticProblem::remi_r(&summary, &identity_set(1, MatrixKind::Covariance)).is_err());
    }
}
