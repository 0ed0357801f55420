mod common;

use remi::model::{BlockPartition, MatrixKind, SimScenario};
use remi::refpanel::{build_block_set, standardize};
use remi::simulate::{
    empirical_variance, generate_design, generate_effects, generate_phenotype, genetic_component,
    marginal_stats, stream_rng, SeMode,
};

use common::*;

fn column_correlation(x: &ndarray::Array2<f64>, j: usize, k: usize) -> f64 {
    // columns are already standardized with divisor n
    x.column(j).dot(&x.column(k)) / x.nrows() as f64
}

#[test]
fn shrunk_panel_correlations_of_independent_columns_stay_small() {
    let (n_r, p, kappa) = (500, 10, 0.9);
    let bound = kappa * 5.0 / (n_r as f64).sqrt();
    let seeds = 1000;
    let mut within = 0;
    for seed in 0..seeds {
        let raw = normal_matrix(n_r, p, &mut rng(seed));
        let panel = standardize(raw).unwrap();
        let set = build_block_set(&panel, &BlockPartition::single(p), kappa, MatrixKind::Correlation).unwrap();
        let m = &set.blocks[0];
        let ok = (0..p).all(|i| (0..p).all(|j| i == j || m[[i, j]].abs() <= bound));
        assert!((0..p).all(|i| m[[i, i]] == 1.0));
        within += ok as usize;
    }
    assert!(within as f64 >= 0.99 * seeds as f64, "{within} of {seeds}");
}

#[test]
fn uncorrelated_design_has_small_sample_correlations() {
    let scenario = SimScenario { p: 40, rho: 0.0, block_size: 10, seed: 3, ..SimScenario::default() };
    let n = 2000;
    let x = generate_design(n, &scenario, 1).unwrap();
    let bound = 5.0 / (n as f64).sqrt();
    for j in 0..40 {
        for k in 0..j {
            assert!(column_correlation(&x, j, k).abs() < bound, "({j}, {k})");
        }
    }
}

#[test]
fn correlated_design_matches_target_within_blocks() {
    let scenario = SimScenario { p: 30, rho: 0.9, block_size: 10, seed: 5, ..SimScenario::default() };
    let x = generate_design(10_000, &scenario, 1).unwrap();
    for j in 1..30 {
        let r = column_correlation(&x, j - 1, j);
        if j % 10 == 0 {
            // adjacent columns in different blocks are independent
            assert!(r.abs() < 0.05, "boundary {j}: {r}");
        } else {
            assert!((r - 0.9).abs() < 0.05, "({}, {j}): {r}", j - 1);
        }
    }
    let two_apart = column_correlation(&x, 0, 2);
    assert!((two_apart - 0.81).abs() < 0.05, "{two_apart}");
}

#[test]
fn realized_heritability_is_close_to_target() {
    for (k, h2) in [0.1, 0.4, 0.8].into_iter().enumerate() {
        let scenario = SimScenario { p: 300, h2, seed: 20 + k as u64, ..SimScenario::default() };
        let x = generate_design(20_000, &scenario, 1).unwrap();
        let beta = generate_effects(scenario.p, 0.05, scenario.seed, 2);
        let (y, _) = generate_phenotype(x.view(), &beta, h2, scenario.seed, 3).unwrap();
        let g = genetic_component(x.view(), &beta);
        let realized = empirical_variance(g.view()) / empirical_variance(y.view());
        assert!((realized - h2).abs() < 0.03, "h2 {h2}: realized {realized}");
    }
}

#[test]
fn effect_sizes_are_standard_normal_on_average() {
    let (p, alpha) = (1000, 0.01);
    let mut values = Vec::new();
    for seed in 0..1000 {
        let beta = generate_effects(p, alpha, seed, 2);
        assert_eq!(beta.nnz(), 10);
        values.extend(beta.values);
    }
    assert_eq!(values.len(), 10_000);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    assert!(mean.abs() < 0.03, "mean {mean}");
    assert!((var - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn marginal_effects_under_the_null_are_small() {
    let n = 2000;
    let scenario = SimScenario { p: 200, seed: 9, ..SimScenario::default() };
    let x = generate_design(n, &scenario, 1).unwrap();
    let mut r = stream_rng(9, 99);
    let y = normal_vector(n, &mut r);
    let stats = marginal_stats(x.view(), y.view(), SeMode::Exact).unwrap();
    let bound = 5.0 / (n as f64).sqrt();
    assert!(stats.summary.beta_m.iter().all(|b| b.abs() < bound));
    // standard errors near 1/√n when y has unit variance
    for s2 in &stats.summary.s2 {
        assert!((s2 * n as f64 - 1.0).abs() < 0.15, "{s2}");
    }
}
