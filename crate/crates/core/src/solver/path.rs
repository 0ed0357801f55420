use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{CoefficientPath, SparseVector, Validate};

use super::{check_grid, converged_threshold, soft_threshold, QuadraticProblem, SolverConfig, VisitOrder};

/// Per-block result for every grid point.
struct BlockTrace {
    coefs: Vec<Vec<f64>>,
    losses: Vec<f64>,
    converged: Vec<bool>,
    sweeps: Vec<usize>,
}

struct BlockSolver<'a> {
    gram: &'a Array2<f64>,
    linear: ArrayView1<'a, f64>,
    beta: Vec<f64>,
    /// Cached `G β`.
    grad: Vec<f64>,
    order: Vec<usize>,
}

impl<'a> BlockSolver<'a> {
    fn new(gram: &'a Array2<f64>, linear: ArrayView1<'a, f64>, order: Vec<usize>) -> Self {
        let b = linear.len();
        BlockSolver {
            gram,
            linear,
            beta: vec![0.0; b],
            grad: vec![0.0; b],
            order,
        }
    }

    #[inline]
    fn update(&mut self, j: usize, lambda: f64) -> f64 {
        let gjj = self.gram[[j, j]];
        let old = self.beta[j];
        let eta = self.linear[j] - (self.grad[j] - gjj * old);
        let new = soft_threshold(eta, lambda / 2.0) / gjj;
        let delta = new - old;
        if delta != 0.0 {
            self.beta[j] = new;
            let row = self.gram.row(j);
            for (g, &gjk) in self.grad.iter_mut().zip(row.iter()) {
                *g += delta * gjk;
            }
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

    #[cfg(debug_assertions)]
    fn penalized(&self, lambda: f64) -> f64 {
        self.beta
            .iter()
            .zip(&self.grad)
            .zip(self.linear.iter())
            .map(|((b, g), c)| b * g - 2.0 * b * c + lambda * b.abs())
            .sum()
    }

    #[cfg(debug_assertions)]
    fn assert_descent(&self, before: &mut f64, lambda: f64) {
        let now = self.penalized(lambda);
        debug_assert!(
            now <= *before + 1e-9 * before.abs().max(1.0),
            "coordinate sweep increased the objective: {before} -> {now}"
        );
        *before = now;
    }

    /// Runs sweeps at one penalty. Returns (converged, sweeps used).
    fn solve(&mut self, lambda: f64, tol: f64, max_sweeps: usize) -> (bool, usize) {
        let all = self.order.clone();
        let mut sweeps = 0;
        #[cfg(debug_assertions)]
        let mut objective = self.penalized(lambda);
        while sweeps < max_sweeps {
            let delta = self.sweep(&all, lambda);
            sweeps += 1;
            #[cfg(debug_assertions)]
            self.assert_descent(&mut objective, lambda);
            if delta < converged_threshold(tol, &self.beta) {
                return (true, sweeps);
            }
            if sweeps >= 2 {
                let active: Vec<usize> = all.iter().copied().filter(|&j| self.beta[j] != 0.0).collect();
                while sweeps < max_sweeps {
                    let delta = self.sweep(&active, lambda);
                    sweeps += 1;
                    #[cfg(debug_assertions)]
                    self.assert_descent(&mut objective, lambda);
                    if delta < converged_threshold(tol, &self.beta) {
                        break;
                    }
                }
            }
        }
        (false, sweeps)
    }

    fn smooth_loss(&self) -> f64 {
        let beta = ArrayView1::from(&self.beta[..]);
        beta.dot(&self.gram.dot(&beta)) - 2.0 * beta.dot(&self.linear)
    }
}

fn visit_order(b: usize, order: VisitOrder, block_index: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..b).collect();
    if let VisitOrder::Shuffled(seed) = order {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block_index as u64);
        idx.shuffle(&mut rng);
    }
    idx
}

fn trace_block<'a>(
    gram: &'a Array2<f64>,
    linear: ArrayView1<'a, f64>,
    block_index: usize,
    config: &SolverConfig,
    lambdas: &[f64],
) -> BlockTrace {
    let order = visit_order(linear.len(), config.order, block_index);
    let mut solver = BlockSolver::new(gram, linear, order);
    let mut trace = BlockTrace {
        coefs: Vec::with_capacity(lambdas.len()),
        losses: Vec::with_capacity(lambdas.len()),
        converged: Vec::with_capacity(lambdas.len()),
        sweeps: Vec::with_capacity(lambdas.len()),
    };
    for &lambda in lambdas {
        let (ok, sweeps) = solver.solve(lambda, config.tol, config.max_sweeps);
        trace.coefs.push(solver.beta.clone());
        trace.losses.push(solver.smooth_loss());
        trace.converged.push(ok);
        trace.sweeps.push(sweeps);
    }
    trace
}

/// Warm-started coordinate descent along `lambdas`.
///
/// Blocks of the gram matrix are independent subproblems; each runs its own
/// warm-start chain and convergence test, concurrently when a thread pool is
/// available. A grid point is converged when every block converged there.
/// Results do not depend on scheduling.
pub fn fit_path(
    problem: &QuadraticProblem,
    config: &SolverConfig,
    lambdas: &[f64],
) -> Result<CoefficientPath> {
    config.validate()?;
    problem.validate()?;
    check_grid(lambdas)?;
    let partition = &problem.gram.partition;
    let traces: Vec<BlockTrace> = partition
        .blocks
        .par_iter()
        .zip(problem.gram.blocks.par_iter())
        .enumerate()
        .map(|(bi, (range, gram))| {
            let linear = problem.linear.slice(ndarray::s![range.clone()]);
            trace_block(gram, linear, bi, config, lambdas)
        })
        .collect();

    let p = problem.dim();
    let d = lambdas.len();
    let mut path = CoefficientPath {
        lambdas: lambdas.to_vec(),
        coefs: Vec::with_capacity(d),
        objective: Vec::with_capacity(d),
        df: Vec::with_capacity(d),
        converged: Vec::with_capacity(d),
        sweeps: Vec::with_capacity(d),
    };
    for l in 0..d {
        let mut dense = Array1::zeros(p);
        let mut loss = 0.0;
        let mut ok = true;
        let mut sweeps = 0;
        for (range, trace) in partition.iter().zip(&traces) {
            for (a, j) in range.clone().enumerate() {
                dense[j] = trace.coefs[l][a];
            }
            loss += trace.losses[l];
            ok &= trace.converged[l];
            sweeps = sweeps.max(trace.sweeps[l]);
        }
        let coef = SparseVector::from_dense(dense.view());
        path.df.push(coef.nnz());
        path.coefs.push(coef);
        path.objective.push(problem.loss_scale * loss);
        path.converged.push(ok);
        path.sweeps.push(sweeps);
    }
    Ok(path)
}
