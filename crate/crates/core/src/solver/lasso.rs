use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{RemiError, Result};
use crate::model::{CoefficientPath, SparseVector};

use super::{check_grid, converged_threshold, soft_threshold, SolverConfig, VisitOrder};

/// `2 · max_j |X_jᵀy / n|`.
pub fn lasso_lambda_max(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    check_dims(x, y)?;
    let n = x.nrows() as f64;
    super::lambda_max(x.t().dot(&y).mapv(|v| v / n).view())
}

/// `n² / yᵀy`: puts `(1/n)(‖y − Xβ‖² − yᵀy)` on the summary-statistic scale.
pub fn lasso_loss_scale(y: ArrayView1<'_, f64>) -> f64 {
    let n = y.len() as f64;
    n * n / y.dot(&y)
}

fn check_dims(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(RemiError::DimensionMismatch {
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(RemiError::InvalidArgument("design matrix is empty".into()));
    }
    Ok(())
}

struct ResidualSolver {
    /// Columns of X stored contiguously (p × n).
    cols: Array2<f64>,
    /// `X_jᵀX_j / n`.
    col_sq: Vec<f64>,
    resid: Array1<f64>,
    beta: Vec<f64>,
    inv_n: f64,
    order: Vec<usize>,
}

impl ResidualSolver {
    #[inline]
    fn update(&mut self, j: usize, lambda: f64) -> f64 {
        let col = self.cols.row(j);
        let old = self.beta[j];
        let eta = col.dot(&self.resid) * self.inv_n + self.col_sq[j] * old;
        let new = soft_threshold(eta, lambda / 2.0) / self.col_sq[j];
        let delta = new - old;
        if delta != 0.0 {
            self.beta[j] = new;
            self.resid.scaled_add(-delta, &col);
        }
        delta.abs()
    }

    fn sweep(&mut self, coords: &[usize], lambda: f64) -> f64 {
        let mut max_delta = 0.0f64;
        for &j in coords {
            max_delta = max_delta.max(self.update(j, lambda));
        }
        max_delta
    }

    fn penalized(&self, lambda: f64) -> f64 {
        self.resid.dot(&self.resid) * self.inv_n
            + lambda * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    fn solve(&mut self, lambda: f64, tol: f64, max_sweeps: usize) -> (bool, usize) {
        let all = self.order.clone();
        let mut sweeps = 0;
        let mut objective = self.penalized(lambda);
        let mut check = |s: &Self| {
            let now = s.penalized(lambda);
            debug_assert!(
                now <= objective + 1e-9 * objective.abs().max(1.0),
                "coordinate sweep increased the objective: {objective} -> {now}"
            );
            objective = now;
        };
        while sweeps < max_sweeps {
            let delta = self.sweep(&all, lambda);
            sweeps += 1;
            if cfg!(debug_assertions) {
                check(self);
            }
            if delta < converged_threshold(tol, &self.beta) {
                return (true, sweeps);
            }
            if sweeps >= 2 {
                let active: Vec<usize> = all.iter().copied().filter(|&j| self.beta[j] != 0.0).collect();
                while sweeps < max_sweeps {
                    let delta = self.sweep(&active, lambda);
                    sweeps += 1;
                    if cfg!(debug_assertions) {
                        check(self);
                    }
                    if delta < converged_threshold(tol, &self.beta) {
                        break;
                    }
                }
            }
        }
        (false, sweeps)
    }
}

/// Individual-level Lasso path, `(1/n)‖y − Xβ‖² + λ‖β‖₁`, by residual-updating
/// coordinate descent. The recorded loss is
/// `(n²/yᵀy) · (‖y − Xβ‖² − yᵀy)/n`, matching the other solvers' scale.
pub fn fit_lasso_path(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    config: &SolverConfig,
    lambdas: &[f64],
) -> Result<CoefficientPath> {
    config.validate()?;
    check_dims(x, y)?;
    check_grid(lambdas)?;
    let n = x.nrows() as f64;
    let p = x.ncols();
    let cols = x.t().as_standard_layout().into_owned();
    let col_sq: Vec<f64> = cols.rows().into_iter().map(|c| c.dot(&c) / n).collect();
    if let Some(j) = col_sq.iter().position(|&v| !(v > 0.0)) {
        return Err(RemiError::ConstantColumn(j));
    }
    let mut order: Vec<usize> = (0..p).collect();
    if let VisitOrder::Shuffled(seed) = config.order {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    }
    let yty = y.dot(&y);
    let loss_scale = lasso_loss_scale(y);
    let mut solver = ResidualSolver {
        cols,
        col_sq,
        resid: y.to_owned(),
        beta: vec![0.0; p],
        inv_n: 1.0 / n,
        order,
    };
    let d = lambdas.len();
    let mut path = CoefficientPath {
        lambdas: lambdas.to_vec(),
        coefs: Vec::with_capacity(d),
        objective: Vec::with_capacity(d),
        df: Vec::with_capacity(d),
        converged: Vec::with_capacity(d),
        sweeps: Vec::with_capacity(d),
    };
    for &lambda in lambdas {
        let (ok, sweeps) = solver.solve(lambda, config.tol, config.max_sweeps);
        let coef = SparseVector::from_dense(ArrayView1::from(&solver.beta[..]));
        let beta = coef.to_dense();
        // fresh residual for the record; the running one carries rounding drift
        let rss = {
            let r = &y - &x.dot(&beta);
            r.dot(&r)
        };
        path.objective.push(loss_scale * (rss - yty) / n);
        path.df.push(coef.nnz());
        path.coefs.push(coef);
        path.converged.push(ok);
        path.sweeps.push(sweeps);
    }
    Ok(path)
}
