use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::model::SparseVector;

use super::QuadraticProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub max_violation: f64,
    /// Coordinate attaining the maximum, if any violation is positive.
    pub worst: Option<usize>,
    pub pass: bool,
}

/// Subgradient residuals given the smooth gradient `q = 2(Gβ − c)`.
fn report(q: &Array1<f64>, beta: &Array1<f64>, lambda: f64, tol: f64) -> KktReport {
    let mut max_violation = 0.0f64;
    let mut worst = None;
    for (j, (&qj, &bj)) in q.iter().zip(beta.iter()).enumerate() {
        let v = if bj != 0.0 {
            (qj + lambda * bj.signum()).abs()
        } else {
            (qj.abs() - lambda).max(0.0)
        };
        if v > max_violation {
            max_violation = v;
            worst = Some(j);
        }
    }
    KktReport {
        max_violation,
        worst,
        pass: max_violation <= tol,
    }
}

/// Largest violation of the optimality conditions of `βᵀGβ − 2βᵀc + λ‖β‖₁`.
pub fn kkt_check(problem: &QuadraticProblem, beta: &SparseVector, lambda: f64, tol: f64) -> KktReport {
    let dense = beta.to_dense();
    let q = (problem.gram.mul_vec(dense.view()) - &problem.linear) * 2.0;
    report(&q, &dense, lambda, tol)
}

/// Same check for `(1/n)‖y − Xβ‖² + λ‖β‖₁`, computed from residuals.
pub fn kkt_check_lasso(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    beta: &SparseVector,
    lambda: f64,
    tol: f64,
) -> KktReport {
    let n = x.nrows() as f64;
    let dense = beta.to_dense();
    let resid = &y - &x.dot(&dense);
    let q = x.t().dot(&resid) * (-2.0 / n);
    report(&q, &dense, lambda, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BlockMatrixSet, BlockPartition, MatrixKind};
    use ndarray::array;

    fn problem() -> QuadraticProblem {
        let gram = BlockMatrixSet {
            partition: BlockPartition::single(2),
            blocks: vec![array![[1.0, 0.0], [0.0, 1.0]]],
            kind: MatrixKind::Covariance,
            shrinkage: 1.0,
        };
        QuadraticProblem::new(gram, array![1.0, 0.1]).unwrap()
    }

    #[test]
    fn zero_passes_above_lambda_max() {
        let prob = problem();
        let rep = kkt_check(&prob, &SparseVector::zeros(2), prob.lambda_max().unwrap(), 0.0);
        assert!(rep.pass);
        assert_eq!(rep.max_violation, 0.0);
        assert_eq!(rep.worst, None);
    }

    #[test]
    fn perturbation_is_detected() {
        let prob = problem();
        // exact solution at λ = 0.5: β = (0.75, 0)
        let exact = SparseVector::from_dense(array![0.75, 0.0].view());
        assert!(kkt_check(&prob, &exact, 0.5, 1e-12).pass);
        let off = SparseVector::from_dense(array![0.76, 0.0].view());
        let rep = kkt_check(&prob, &off, 0.5, 1e-12);
        assert!(!rep.pass);
        assert!(rep.max_violation >= 0.01 * 2.0 * 1.0 - 1e-12);
        assert_eq!(rep.worst, Some(0));
    }
}
