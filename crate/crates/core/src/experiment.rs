//! Replicated simulation runs over a grid of study and panel sizes.
//!
//! Replicate `r` draws every split from the scenario seed mixed with `r`.
//! Cells of the same replicate share the true effects, the individual-level
//! data and the test set; summary studies of different sizes and panels of
//! different sizes come from their own substreams. Replicates run
//! concurrently and are collected in order, so the table does not depend on
//! the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RemiError, Result};
use crate::metrics::{evaluate, EvalReport, DEFAULT_FPR_MAX};
use crate::model::{BlockPartition, MatrixKind, SimScenario, Validate};
use crate::refpanel::{build_block_set, DEFAULT_KAPPA};
use crate::selection::bic_select;
use crate::simulate::{
    generate_effects, simulate_individual, simulate_panel, simulate_summary, simulate_test, substream,
    SeMode,
};
use crate::solver::{fit_lasso, fit_problem, Method, QuadraticProblem, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base: SimScenario,
    pub n_list: Vec<usize>,
    pub n_r_list: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub kappa: f64,
    pub solver: SolverConfig,
    pub fpr_max: f64,
    pub se_mode: SeMode,
}

impl ExperimentConfig {
    pub fn new(base: SimScenario, n_list: Vec<usize>, n_r_list: Vec<usize>, reps: usize) -> Self {
        ExperimentConfig {
            base,
            n_list,
            n_r_list,
            reps,
            methods: vec![Method::RemiC],
            kappa: DEFAULT_KAPPA,
            solver: SolverConfig::default(),
            fpr_max: DEFAULT_FPR_MAX,
            se_mode: SeMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.solver.validate()?;
        if self.reps < 10 {
            return Err(RemiError::InvalidArgument(format!(
                "experiments need at least 10 replicates, got {}",
                self.reps
            )));
        }
        if self.n_list.is_empty() || self.n_r_list.is_empty() || self.methods.is_empty() {
            return Err(RemiError::InvalidArgument(
                "n list, n_r list and methods must be nonempty".into(),
            ));
        }
        if self.n_list.iter().chain(&self.n_r_list).any(|&v| v < 2) {
            return Err(RemiError::InvalidArgument("sample sizes must be >= 2".into()));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer applied to `(seed, rep)`.
pub fn replicate_seed(seed: u64, rep: usize) -> u64 {
    let mut z = seed ^ (rep as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One method on one replicate. The Lasso ignores `n` and `n_r`; its cells
/// are keyed by `n = n_ind` and `n_r = 0`.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub method: Method,
    pub n: usize,
    pub n_r: usize,
    pub rep: usize,
    pub outcome: std::result::Result<EvalReport, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: Method,
    pub n: usize,
    pub n_r: usize,
    pub rep_count: usize,
    pub failed: usize,
    pub median_l2: f64,
    pub q25: f64,
    pub q75: f64,
    pub median_pauc: f64,
    pub median_pearson: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentTable {
    pub cells: Vec<CellSummary>,
    pub runs: Vec<CellRun>,
}

impl ExperimentTable {
    pub fn cell(&self, method: Method, n: usize, n_r: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.n == n && c.n_r == n_r)
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn run_replicate(config: &ExperimentConfig, partition: &BlockPartition, rep: usize) -> Vec<CellRun> {
    let scenario = SimScenario {
        seed: replicate_seed(config.base.seed, rep),
        ..config.base.clone()
    };
    let mut runs = Vec::new();
    let beta = generate_effects(scenario.p, scenario.alpha, scenario.seed, substream::EFFECTS);
    let fail_all = |msg: String, runs: &mut Vec<CellRun>| {
        for &method in &config.methods {
            if method == Method::Lasso {
                runs.push(CellRun {
                    method,
                    n: scenario.n_ind,
                    n_r: 0,
                    rep,
                    outcome: Err(msg.clone()),
                });
                continue;
            }
            for &n in &config.n_list {
                for &n_r in &config.n_r_list {
                    runs.push(CellRun {
                        method,
                        n,
                        n_r,
                        rep,
                        outcome: Err(msg.clone()),
                    });
                }
            }
        }
    };
    let ind = match simulate_individual(&scenario, &beta) {
        Ok(ind) => ind,
        Err(e) => {
            fail_all(e.to_string(), &mut runs);
            return runs;
        }
    };
    let (x_test, y_test) = match simulate_test(&scenario, &beta, ind.sigma_eps) {
        Ok(t) => t,
        Err(e) => {
            fail_all(e.to_string(), &mut runs);
            return runs;
        }
    };
    let score = |path: Result<crate::model::CoefficientPath>, n: usize| -> std::result::Result<EvalReport, String> {
        let path = path.map_err(|e| e.to_string())?;
        let bic = bic_select(&path, n).map_err(|e| e.to_string())?;
        evaluate(&path, bic.chosen, &beta, x_test.view(), y_test.view(), config.fpr_max)
            .map_err(|e| e.to_string())
    };

    let summary_methods: Vec<Method> = config
        .methods
        .iter()
        .copied()
        .filter(|m| *m != Method::Lasso)
        .collect();
    if !summary_methods.is_empty() {
        // block sets per panel size, built once and reused for every n
        let panels: Vec<(usize, Result<_>)> = config
            .n_r_list
            .iter()
            .map(|&n_r| {
                let sets = simulate_panel(&scenario, n_r).and_then(|panel| {
                    let corr = build_block_set(&panel, partition, config.kappa, MatrixKind::Correlation)?;
                    let cov = build_block_set(&panel, partition, config.kappa, MatrixKind::Covariance)?;
                    Ok((corr, cov))
                });
                (n_r, sets)
            })
            .collect();
        for &n in &config.n_list {
            let stats = simulate_summary(&scenario, n, &beta, ind.sigma_eps, config.se_mode);
            for &method in &summary_methods {
                for (n_r, sets) in &panels {
                    let outcome = match (&stats, sets) {
                        (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
                        (Ok(stats), Ok((corr, cov))) => {
                            let problem = match method {
                                Method::RemiR => QuadraticProblem::remi_r(&stats.summary, corr),
                                _ => QuadraticProblem::remi_c(&stats.marginal, cov.clone()),
                            };
                            score(problem.and_then(|p| fit_problem(&p, &config.solver)), n)
                        }
                    };
                    runs.push(CellRun {
                        method,
                        n,
                        n_r: *n_r,
                        rep,
                        outcome,
                    });
                }
            }
        }
    }
    if config.methods.contains(&Method::Lasso) {
        let outcome = score(fit_lasso(ind.x.view(), ind.y.view(), &config.solver), scenario.n_ind);
        runs.push(CellRun {
            method: Method::Lasso,
            n: scenario.n_ind,
            n_r: 0,
            rep,
            outcome,
        });
    }
    runs
}

pub fn scaling_experiment(config: &ExperimentConfig) -> Result<ExperimentTable> {
    config.validate()?;
    let partition = BlockPartition::fixed_width(config.base.p, config.base.block_size);
    let runs: Vec<CellRun> = (0..config.reps)
        .into_par_iter()
        .map(|rep| run_replicate(config, &partition, rep))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut keys: Vec<(Method, usize, usize)> = Vec::new();
    for run in &runs {
        let key = (run.method, run.n, run.n_r);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let cells = keys
        .into_iter()
        .map(|(method, n, n_r)| {
            let ok: Vec<&EvalReport> = runs
                .iter()
                .filter(|r| r.method == method && r.n == n && r.n_r == n_r)
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            let failed = runs
                .iter()
                .filter(|r| r.method == method && r.n == n && r.n_r == n_r && r.outcome.is_err())
                .count();
            let l2 = sorted(ok.iter().map(|r| r.l2_error).collect());
            let pauc = sorted(ok.iter().map(|r| r.partial_auc).collect());
            let pear = sorted(ok.iter().map(|r| r.pearson_r).collect());
            CellSummary {
                method,
                n,
                n_r,
                rep_count: ok.len(),
                failed,
                median_l2: quantile(&l2, 0.5),
                q25: quantile(&l2, 0.25),
                q75: quantile(&l2, 0.75),
                median_pauc: quantile(&pauc, 0.5),
                median_pearson: quantile(&pear, 0.5),
            }
        })
        .collect();
    Ok(ExperimentTable { cells, runs })
}
