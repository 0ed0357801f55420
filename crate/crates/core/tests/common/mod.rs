#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng))
}

pub fn normal_vector(n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || StandardNormal.sample(rng))
}

/// Design with correlated neighbouring columns.
pub fn correlated_matrix(rows: usize, cols: usize, rho: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let z = normal_matrix(rows, cols, rng);
    let mut x = z.clone();
    for i in 0..rows {
        for j in 1..cols {
            x[[i, j]] = rho * x[[i, j - 1]] + (1.0 - rho * rho).sqrt() * z[[i, j]];
        }
    }
    x
}

/// Exact minimizer of `βᵀGβ − 2βᵀc + λ‖β‖₁` by enumerating all 3^p sign
/// patterns. For each pattern the stationarity equations
/// `G_AA β_A = c_A − (λ/2) s_A` are solved and the candidate kept when its
/// signs agree with the pattern and the inactive coordinates satisfy
/// `|2(Gβ − c)_j| ≤ λ`. The lowest objective among survivors is returned.
pub fn sign_enumeration(g: &Array2<f64>, c: &Array1<f64>, lambda: f64) -> Array1<f64> {
    let p = c.len();
    assert!(p <= 10, "enumeration is exponential in p");
    let mut best: Option<(f64, Array1<f64>)> = None;
    let total = 3usize.pow(p as u32);
    for code in 0..total {
        let mut signs = vec![0i8; p];
        let mut rest = code;
        for s in signs.iter_mut() {
            *s = (rest % 3) as i8 - 1;
            rest /= 3;
        }
        let active: Vec<usize> = (0..p).filter(|&j| signs[j] != 0).collect();
        let mut beta = Array1::zeros(p);
        if !active.is_empty() {
            let k = active.len();
            let gaa = DMatrix::from_fn(k, k, |a, b| g[[active[a], active[b]]]);
            let rhs = DVector::from_fn(k, |a, _| c[active[a]] - 0.5 * lambda * signs[active[a]] as f64);
            let Some(sol) = gaa.lu().solve(&rhs) else {
                continue;
            };
            let mut ok = true;
            for (a, &j) in active.iter().enumerate() {
                if sol[a] * signs[j] as f64 <= 0.0 {
                    ok = false;
                }
                beta[j] = sol[a];
            }
            if !ok {
                continue;
            }
        }
        let grad = 2.0 * (g.dot(&beta) - c);
        let slack = lambda * (1.0 + 1e-9) + 1e-12;
        if (0..p).any(|j| signs[j] == 0 && grad[j].abs() > slack) {
            continue;
        }
        let obj = beta.dot(&g.dot(&beta)) - 2.0 * beta.dot(c) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>();
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, beta));
        }
    }
    best.expect("a strictly convex problem has a KKT point").1
}

/// Full AUC by counting ordered (positive, negative) pairs; ties count half.
pub fn mann_whitney_auc(scores: &[f64], truth: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !truth[i] {
            continue;
        }
        for (k, &sk) in scores.iter().enumerate() {
            if truth[k] {
                continue;
            }
            pairs += 1.0;
            if si > sk {
                wins += 1.0;
            } else if si == sk {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn max_abs_diff(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Centers every column and scales it to unit variance (divisor n).
pub fn standardized(mut x: Array2<f64>) -> Array2<f64> {
    let n = x.nrows() as f64;
    for mut col in x.columns_mut() {
        let mean = col.sum() / n;
        col.mapv_inplace(|v| v - mean);
        let sd = (col.dot(&col) / n).sqrt();
        col.mapv_inplace(|v| v / sd);
    }
    x
}
