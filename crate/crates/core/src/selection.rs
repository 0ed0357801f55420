//! BIC selection along a fitted path: `BIC(λ) = L(β̂(λ)) + ln(n) · df(λ)`,
//! with df the number of nonzero coefficients. Natural logarithm throughout.

use serde::{Deserialize, Serialize};

use crate::error::{RemiError, Result};
use crate::model::CoefficientPath;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicTable {
    pub lambdas: Vec<f64>,
    pub loss: Vec<f64>,
    pub df: Vec<usize>,
    pub bic: Vec<f64>,
    pub chosen: usize,
}

impl BicTable {
    pub fn chosen_lambda(&self) -> f64 {
        self.lambdas[self.chosen]
    }
}

/// Index of the smallest score; ties go to the earlier (larger-λ) point.
fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

pub fn bic_from_parts(lambdas: &[f64], loss: &[f64], df: &[usize], n: usize) -> Result<BicTable> {
    if lambdas.is_empty() {
        return Err(RemiError::InvalidArgument("cannot select on an empty path".into()));
    }
    if n < 2 {
        return Err(RemiError::InvalidArgument(format!("BIC needs n >= 2, got {n}")));
    }
    if loss.len() != lambdas.len() || df.len() != lambdas.len() {
        return Err(RemiError::DimensionMismatch {
            expected: lambdas.len(),
            found: loss.len().min(df.len()),
        });
    }
    Ok(bic_with_weight(lambdas, loss, df, (n as f64).ln()))
}

/// `loss + weight · df`; `bic_from_parts` uses `weight = ln(n)`.
pub fn bic_with_weight(lambdas: &[f64], loss: &[f64], df: &[usize], log_n: f64) -> BicTable {
    let bic: Vec<f64> = loss
        .iter()
        .zip(df)
        .map(|(l, &d)| l + log_n * d as f64)
        .collect();
    let chosen = argmin_first(&bic);
    BicTable {
        lambdas: lambdas.to_vec(),
        loss: loss.to_vec(),
        df: df.to_vec(),
        bic,
        chosen,
    }
}

pub fn bic_select(path: &CoefficientPath, n: usize) -> Result<BicTable> {
    bic_from_parts(&path.lambdas, &path.objective, &path.df, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SparseVector;

    fn path(loss: Vec<f64>, df: Vec<usize>) -> CoefficientPath {
        let d = loss.len();
        CoefficientPath {
            lambdas: (0..d).map(|l| 1.0 / (l as f64 + 1.0)).collect(),
            coefs: vec![SparseVector::zeros(3); d],
            objective: loss,
            df,
            converged: vec![true; d],
            sweeps: vec![1; d],
        }
    }

    #[test]
    fn single_zero_point() {
        let t = bic_select(&path(vec![0.0], vec![0]), 100).unwrap();
        assert_eq!(t.bic, vec![0.0]);
        assert_eq!(t.chosen, 0);
    }

    #[test]
    fn two_points_with_n_e_squared() {
        // ln(e²) = 2
        let loss = [-1.0, -1.5];
        let df = [1usize, 2];
        let t = bic_with_weight(&[2.0, 1.0], &loss, &df, 2.0);
        assert_eq!(t.bic, vec![1.0, 2.5]);
        assert_eq!(t.chosen, 0);
        // nearest integer n gives the same choice
        let t = bic_select(&path(loss.to_vec(), df.to_vec()), 7).unwrap();
        assert_eq!(t.chosen, 0);
    }

    #[test]
    fn ties_prefer_larger_lambda() {
        let ln = (50f64).ln();
        let t = bic_select(&path(vec![0.0, -ln, -2.0 * ln], vec![0, 1, 2]), 50).unwrap();
        assert_eq!(t.bic[0], t.bic[1]);
        assert_eq!(t.chosen, 0);
    }

    #[test]
    fn bic_is_loss_plus_log_n_df_exactly() {
        let t = bic_select(&path(vec![-3.2, -20.7, -30.0], vec![0, 2, 5]), 1234).unwrap();
        for l in 0..3 {
            assert_eq!(t.bic[l], t.loss[l] + (1234f64).ln() * t.df[l] as f64);
        }
        assert_eq!(t.chosen, 1);
    }

    #[test]
    fn rejects_small_n() {
        assert!(bic_select(&path(vec![0.0], vec![0]), 1).is_err());
    }
}
