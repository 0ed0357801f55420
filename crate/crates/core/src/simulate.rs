//! Synthetic data: block AR(1) Gaussian designs, sparse effects, phenotypes
//! at a target heritability, and the marginal statistics a study would
//! release.
//!
//! Every random draw comes from a ChaCha stream selected by
//! `(scenario.seed, substream)`, so each split can be regenerated on its own
//! without touching the others.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{RemiError, Result};
use crate::model::{MarginalVector, SimScenario, SparseVector, SummaryStats, Validate};
use crate::refpanel::{standardize_columns, ReferencePanel};

/// Substream identifiers for the independent draws of one scenario.
pub mod substream {
    pub const DESIGN_IND: u64 = 1;
    pub const DESIGN_SUMMARY: u64 = 2;
    pub const DESIGN_PANEL: u64 = 3;
    pub const DESIGN_TEST: u64 = 4;
    pub const EFFECTS: u64 = 5;
    pub const NOISE_IND: u64 = 6;
    pub const NOISE_SUMMARY: u64 = 7;
    pub const NOISE_TEST: u64 = 8;
}

pub fn stream_rng(seed: u64, substream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(substream);
    rng
}

/// How squared standard errors are computed from individual data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeMode {
    /// Residual variance of each univariate fit.
    #[default]
    Exact,
    /// `yᵀy / (n · X_jᵀX_j)`, accurate when each variable explains little.
    Approximate,
}

/// `n × p` standardized design with i.i.d. rows. Within each block of
/// `block_size` columns, cov(j, k) = rho^|j−k|; blocks are independent.
pub fn generate_design(n: usize, scenario: &SimScenario, substream: u64) -> Result<Array2<f64>> {
    scenario.validate()?;
    let p = scenario.p;
    let rho = scenario.rho;
    let innov = (1.0 - rho * rho).sqrt();
    let mut rng = stream_rng(scenario.seed, substream);
    let mut x = Array2::<f64>::zeros((n, p));
    for mut row in x.rows_mut() {
        let row = row.as_slice_mut().expect("owned array rows are contiguous");
        for v in row.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        for start in (0..p).step_by(scenario.block_size) {
            let end = (start + scenario.block_size).min(p);
            for j in (start + 1)..end {
                row[j] = rho * row[j - 1] + innov * row[j];
            }
        }
    }
    standardize_columns(&mut x)?;
    Ok(x)
}

/// `max(1, round(alpha · p))` nonzero effects at uniformly chosen positions,
/// values standard normal.
pub fn generate_effects(p: usize, alpha: f64, seed: u64, substream: u64) -> SparseVector {
    let k = ((alpha * p as f64).round() as usize).clamp(1, p);
    let mut rng = stream_rng(seed, substream);
    let mut indices = rand::seq::index::sample(&mut rng, p, k).into_vec();
    indices.sort_unstable();
    let values = indices
        .iter()
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    SparseVector {
        dim: p,
        indices,
        values,
    }
}

pub fn genetic_component(x: ArrayView2<'_, f64>, beta: &SparseVector) -> Array1<f64> {
    let mut g = Array1::zeros(x.nrows());
    for (j, b) in beta.iter() {
        g.scaled_add(b, &x.column(j));
    }
    g
}

/// Variance with divisor n.
pub fn empirical_variance(v: ArrayView1<'_, f64>) -> f64 {
    let n = v.len() as f64;
    let mean = v.sum() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

pub fn add_noise(genetic: &Array1<f64>, sigma: f64, rng: &mut ChaCha8Rng) -> Array1<f64> {
    genetic.mapv(|g| {
        let z: f64 = StandardNormal.sample(rng);
        g + sigma * z
    })
}

/// `y = Xβ + ε` with `σ²_ε = Var(Xβ)(1 − h²)/h²` from the sample at hand.
pub fn generate_phenotype(
    x: ArrayView2<'_, f64>,
    beta: &SparseVector,
    h2: f64,
    seed: u64,
    substream: u64,
) -> Result<(Array1<f64>, f64)> {
    if !(h2 > 0.0 && h2 < 1.0) {
        return Err(RemiError::InvalidArgument(format!("h2 = {h2} outside (0, 1)")));
    }
    let g = genetic_component(x, beta);
    let var_g = empirical_variance(g.view());
    if !(var_g > 0.0) {
        return Err(RemiError::ZeroGeneticVariance);
    }
    let sigma = (var_g * (1.0 - h2) / h2).sqrt();
    let y = add_noise(&g, sigma, &mut stream_rng(seed, substream));
    Ok((y, sigma))
}

pub fn center(y: &mut Array1<f64>) {
    let mean = y.sum() / y.len() as f64;
    y.mapv_inplace(|v| v - mean);
}

/// Univariate regression outputs of `y` on every column of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalStats {
    pub summary: SummaryStats,
    pub marginal: MarginalVector,
    /// `d̂²_j = X_jᵀX_j / n`.
    pub d2: Array1<f64>,
}

/// `β̂ᵐ_j = X_jᵀy / X_jᵀX_j` and `ŝ²_j = ‖y − X_j β̂ᵐ_j‖² / (n X_jᵀX_j)`
/// (or its approximation), plus `ỹ_j = X_jᵀy / n`.
pub fn marginal_stats(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, mode: SeMode) -> Result<MarginalStats> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(RemiError::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    let nf = n as f64;
    let mut xty = vec![0.0; p];
    let mut xtx = vec![0.0; p];
    for (row, &yi) in x.rows().into_iter().zip(y.iter()) {
        for ((a, b), &v) in xty.iter_mut().zip(xtx.iter_mut()).zip(row.iter()) {
            *a += v * yi;
            *b += v * v;
        }
    }
    if let Some(j) = xtx.iter().position(|&v| !(v > 0.0)) {
        return Err(RemiError::ConstantColumn(j));
    }
    let beta_m: Vec<f64> = xty.iter().zip(&xtx).map(|(a, b)| a / b).collect();
    let yty = y.dot(&y);
    let s2: Vec<f64> = match mode {
        SeMode::Approximate => xtx.iter().map(|b| yty / (nf * b)).collect(),
        SeMode::Exact => {
            let mut rss = vec![0.0; p];
            for (row, &yi) in x.rows().into_iter().zip(y.iter()) {
                for ((acc, &bm), &v) in rss.iter_mut().zip(&beta_m).zip(row.iter()) {
                    let r = yi - v * bm;
                    *acc += r * r;
                }
            }
            rss.iter().zip(&xtx).map(|(r, b)| r / (nf * b)).collect()
        }
    };
    // studies release standard errors; keep s2 equal to the square of the
    // released value so it survives a write/read cycle bit for bit
    let s2: Vec<f64> = s2.iter().map(|v| {
        let se = v.sqrt();
        se * se
    }).collect();
    Ok(MarginalStats {
        summary: SummaryStats {
            beta_m: Array1::from(beta_m),
            s2: Array1::from(s2),
            n,
        },
        marginal: MarginalVector {
            values: Array1::from_iter(xty.iter().map(|v| v / nf)),
            n,
            y_sq_mean: Some(yty / nf),
        },
        d2: Array1::from_iter(xtx.iter().map(|v| v / nf)),
    })
}

/// Checks `ỹ_j = d̂²_j β̂ᵐ_j` up to rounding.
pub fn marginal_consistency_gap(stats: &MarginalStats) -> f64 {
    stats
        .marginal
        .values
        .iter()
        .zip(stats.d2.iter().zip(stats.summary.beta_m.iter()))
        .map(|(yt, (d2, bm))| (yt - d2 * bm).abs() / yt.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// All splits of one simulated replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub scenario: SimScenario,
    pub x_ind: Array2<f64>,
    pub y_ind: Array1<f64>,
    pub summary: SummaryStats,
    pub marginal: MarginalVector,
    pub panel: ReferencePanel,
    pub x_test: Array2<f64>,
    pub y_test: Array1<f64>,
    pub beta_true: SparseVector,
    /// Noise SD, calibrated on the individual-level split and reused for
    /// every other split.
    pub sigma_eps: f64,
}

/// Individual-level split plus the noise level calibrated on it.
pub struct IndividualData {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub sigma_eps: f64,
}

pub fn simulate_individual(scenario: &SimScenario, beta: &SparseVector) -> Result<IndividualData> {
    let x = generate_design(scenario.n_ind, scenario, substream::DESIGN_IND)?;
    let (mut y, sigma_eps) =
        generate_phenotype(x.view(), beta, scenario.h2, scenario.seed, substream::NOISE_IND)?;
    center(&mut y);
    Ok(IndividualData { x, y, sigma_eps })
}

/// Summary statistics from an independent study of `n` samples.
pub fn simulate_summary(
    scenario: &SimScenario,
    n: usize,
    beta: &SparseVector,
    sigma_eps: f64,
    mode: SeMode,
) -> Result<MarginalStats> {
    let x = generate_design(n, scenario, substream::DESIGN_SUMMARY)?;
    let g = genetic_component(x.view(), beta);
    let mut y = add_noise(&g, sigma_eps, &mut stream_rng(scenario.seed, substream::NOISE_SUMMARY));
    center(&mut y);
    marginal_stats(x.view(), y.view(), mode)
}

pub fn simulate_panel(scenario: &SimScenario, n_r: usize) -> Result<ReferencePanel> {
    Ok(ReferencePanel {
        data: generate_design(n_r, scenario, substream::DESIGN_PANEL)?,
        standardized: true,
    })
}

pub fn simulate_test(
    scenario: &SimScenario,
    beta: &SparseVector,
    sigma_eps: f64,
) -> Result<(Array2<f64>, Array1<f64>)> {
    let x = generate_design(scenario.n_test, scenario, substream::DESIGN_TEST)?;
    let g = genetic_component(x.view(), beta);
    let y = add_noise(&g, sigma_eps, &mut stream_rng(scenario.seed, substream::NOISE_TEST));
    Ok((x, y))
}

pub fn simulate(scenario: &SimScenario, mode: SeMode) -> Result<SimOutput> {
    scenario.validate()?;
    let beta_true = generate_effects(scenario.p, scenario.alpha, scenario.seed, substream::EFFECTS);
    let ind = simulate_individual(scenario, &beta_true)?;
    let stats = simulate_summary(scenario, scenario.n, &beta_true, ind.sigma_eps, mode)?;
    let panel = simulate_panel(scenario, scenario.n_r)?;
    let (x_test, y_test) = simulate_test(scenario, &beta_true, ind.sigma_eps)?;
    Ok(SimOutput {
        scenario: scenario.clone(),
        x_ind: ind.x,
        y_ind: ind.y,
        summary: stats.summary,
        marginal: stats.marginal,
        panel,
        x_test,
        y_test,
        beta_true,
        sigma_eps: ind.sigma_eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(p: usize, rho: f64, seed: u64) -> SimScenario {
        SimScenario {
            p,
            n: 200,
            n_ind: 100,
            n_r: 50,
            n_test: 20,
            alpha: 0.1,
            h2: 0.5,
            block_size: 5,
            rho,
            seed,
        }
    }

    #[test]
    fn design_is_deterministic_and_standardized() {
        let sc = scenario(12, 0.5, 3);
        let a = generate_design(60, &sc, 1).unwrap();
        let b = generate_design(60, &sc, 1).unwrap();
        assert_eq!(a, b);
        let c = generate_design(60, &sc, 2).unwrap();
        assert_ne!(a, c);
        let panel = ReferencePanel {
            data: a,
            standardized: true,
        };
        assert!(panel.validate().is_ok());
    }

    #[test]
    fn effects_support_size() {
        let e = generate_effects(1000, 0.01, 1, substream::EFFECTS);
        assert_eq!(e.nnz(), 10);
        assert!(e.indices.windows(2).all(|w| w[0] < w[1]));
        let tiny = generate_effects(50, 0.001, 1, substream::EFFECTS);
        assert_eq!(tiny.nnz(), 1);
    }

    #[test]
    fn phenotype_at_half_heritability() {
        let sc = scenario(10, 0.0, 9);
        let x = generate_design(500, &sc, 1).unwrap();
        let beta = generate_effects(10, 0.3, 9, substream::EFFECTS);
        let (y, sigma) = generate_phenotype(x.view(), &beta, 0.5, 9, 6).unwrap();
        let g = genetic_component(x.view(), &beta);
        assert!((sigma * sigma - empirical_variance(g.view())).abs() < 1e-12);
        assert_eq!(y.len(), 500);
    }

    #[test]
    fn zero_effects_have_no_genetic_variance() {
        let sc = scenario(10, 0.0, 9);
        let x = generate_design(50, &sc, 1).unwrap();
        let beta = SparseVector::zeros(10);
        assert!(matches!(
            generate_phenotype(x.view(), &beta, 0.4, 1, 6),
            Err(RemiError::ZeroGeneticVariance)
        ));
    }

    #[test]
    fn perfect_fit_marginals() {
        let sc = scenario(4, 0.3, 2);
        let x = generate_design(40, &sc, 1).unwrap();
        let y = x.column(0).to_owned();
        let stats = marginal_stats(x.view(), y.view(), SeMode::Exact).unwrap();
        assert_eq!(stats.summary.beta_m[0], 1.0);
        assert_eq!(stats.summary.s2[0], 0.0);
        assert!(marginal_consistency_gap(&stats) < 1e-14);
    }

    #[test]
    fn approximate_se_relative_gap_bound() {
        let sc = scenario(20, 0.5, 4);
        let out = simulate(&sc, SeMode::Exact).unwrap();
        let approx = simulate(&sc, SeMode::Approximate).unwrap();
        assert_eq!(out.summary.beta_m, approx.summary.beta_m);
        let n = sc.n as f64;
        let ysq = out.marginal.y_sq_mean.unwrap() * n;
        for j in 0..sc.p {
            let ex = out.summary.s2[j];
            let ap = approx.summary.s2[j];
            let bm = out.summary.beta_m[j];
            // d̂² = 1 on standardized columns
            let bound = bm * bm * n / ysq;
            assert!(ap >= ex);
            assert!((ap - ex) / ap <= bound + 1e-12, "j={j}");
        }
    }

    #[test]
    fn regenerating_test_split_leaves_summary_untouched() {
        let sc = scenario(15, 0.4, 11);
        let a = simulate(&sc, SeMode::Exact).unwrap();
        let sc2 = SimScenario { n_test: 37, ..sc.clone() };
        let b = simulate(&sc2, SeMode::Exact).unwrap();
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.panel, b.panel);
        assert_ne!(a.x_test.nrows(), b.x_test.nrows());
    }
}
