//! Shared domain types.
//!
//! Every type here is a plain value: fields are public, construction does not
//! check anything, and [`Validate::validate`] reports every broken invariant at
//! once. Algorithms call `validate` on their inputs before doing work.

use std::fmt;
use std::ops::Range;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

const SYMMETRY_TOL: f64 = 1e-12;
const UNIT_DIAG_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;

/// List of invariant violations found on one object.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    fn push(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    fn into_result(self) -> Result<(), ValidationReport> {
        if self.violations.is_empty() {
            Ok(())
        } else {
            Err(self)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.violations.join("; "))
    }
}

impl std::error::Error for ValidationReport {}

pub trait Validate {
    fn validate(&self) -> Result<(), ValidationReport>;
}

fn check_finite(report: &mut ValidationReport, name: &str, values: ArrayView1<'_, f64>) {
    for (j, v) in values.iter().enumerate() {
        if !v.is_finite() {
            report.push(format!("{name}[{j}] is not finite"));
        }
    }
}

/// Marginal cross-products `X_jᵀy / n` of a study with `n` samples.
///
/// `y_sq_mean` optionally carries `yᵀy / n`, which lets the fitted loss be put
/// on the same scale as the summary-statistic objective for BIC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalVector {
    pub values: Array1<f64>,
    pub n: usize,
    #[serde(default)]
    pub y_sq_mean: Option<f64>,
}

impl MarginalVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Validate for MarginalVector {
    fn validate(&self) -> Result<(), ValidationReport> {
        let mut report = ValidationReport::default();
        if self.values.is_empty() {
            report.push("marginal vector is empty (p must be >= 1)");
        }
        if self.n == 0 {
            report.push("sample size n must be >= 1");
        }
        check_finite(&mut report, "values", self.values.view());
        if let Some(v) = self.y_sq_mean {
            if !(v.is_finite() && v > 0.0) {
                report.push("y_sq_mean must be positive and finite");
            }
        }
        report.into_result()
    }
}

/// Per-variable marginal effect estimates and squared standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub beta_m: Array1<f64>,
    pub s2: Array1<f64>,
    pub n: usize,
}

impl SummaryStats {
    pub fn len(&self) -> usize {
        self.beta_m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_m.is_empty()
    }
}

impl Validate for SummaryStats {
    fn validate(&self) -> Result<(), ValidationReport> {
        let mut report = ValidationReport::default();
        if self.beta_m.len() != self.s2.len() {
            report.push(format!(
                "beta_m has length {} but s2 has length {}",
                self.beta_m.len(),
                self.s2.len()
            ));
        }
        if self.beta_m.is_empty() {
            report.push("summary statistics are empty (p must be >= 1)");
        }
        if self.n == 0 {
            report.push("sample size n must be >= 1");
        }
        check_finite(&mut report, "beta_m", self.beta_m.view());
        for (j, &v) in self.s2.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                report.push(format!("s2[{j}] = {v} is not positive and finite"));
            }
        }
        report.into_result()
    }
}

/// Ordered, contiguous cover of `0..p` by nonempty half-open ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Range<usize>>) -> Self {
        BlockPartition { blocks }
    }

    /// Fixed-width windows; the last block takes the remainder.
    pub fn fixed_width(p: usize, width: usize) -> Self {
        assert!(width > 0, "block width must be positive");
        let blocks = (0..p)
            .step_by(width)
            .map(|start| start..(start + width).min(p))
            .collect();
        BlockPartition { blocks }
    }

    pub fn single(p: usize) -> Self {
        BlockPartition { blocks: vec![0..p] }
    }

    /// Number of variables covered.
    pub fn p(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Range<usize>> {
        self.blocks.iter()
    }

    /// Checks the partition covers exactly `0..p`.
    pub fn validate_for(&self, p: usize) -> Result<(), ValidationReport> {
        let mut report = match self.validate() {
            Ok(()) => ValidationReport::default(),
            Err(r) => r,
        };
        if self.p() != p {
            report.push(format!(
                "partition covers 0..{} but p = {}",
                self.p(),
                p
            ));
        }
        report.into_result()
    }
}

impl Validate for BlockPartition {
    fn validate(&self) -> Result<(), ValidationReport> {
        let mut report = ValidationReport::default();
        if self.blocks.is_empty() {
            report.push("partition has no blocks");
        }
        let mut expected_start = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.start != expected_start {
                report.push(format!(
                    "block {i} starts at {} but previous block ended at {expected_start}",
                    b.start
                ));
            }
            if b.end <= b.start {
                report.push(format!("block {i} [{}, {}) is empty", b.start, b.end));
            }
            expected_start = b.end;
        }
        report.into_result()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Covariance,
    Correlation,
}

/// Block-diagonal symmetric matrix stored as one dense matrix per block.
/// Entries across blocks are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrixSet {
    pub partition: BlockPartition,
    pub blocks: Vec<Array2<f64>>,
    pub kind: MatrixKind,
    pub shrinkage: f64,
}

impl BlockMatrixSet {
    pub fn dim(&self) -> usize {
        self.partition.p()
    }

    pub fn diag(&self) -> Array1<f64> {
        let mut d = Array1::zeros(self.dim());
        for (range, m) in self.partition.iter().zip(&self.blocks) {
            for (i, j) in range.clone().enumerate() {
                d[j] = m[[i, i]];
            }
        }
        d
    }

    /// Block-diagonal matrix-vector product.
    pub fn mul_vec(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        assert_eq!(v.len(), self.dim(), "vector length must equal matrix dimension");
        let mut out = Array1::zeros(self.dim());
        for (range, m) in self.partition.iter().zip(&self.blocks) {
            let prod = m.dot(&v.slice(ndarray::s![range.clone()]));
            out.slice_mut(ndarray::s![range.clone()]).assign(&prod);
        }
        out
    }

    /// Quadratic form `vᵀ M v`.
    pub fn quad_form(&self, v: ArrayView1<'_, f64>) -> f64 {
        v.dot(&self.mul_vec(v))
    }

    /// Materializes the full p × p matrix. Intended for small p.
    pub fn to_dense(&self) -> Array2<f64> {
        let p = self.dim();
        let mut out = Array2::zeros((p, p));
        for (range, m) in self.partition.iter().zip(&self.blocks) {
            out.slice_mut(ndarray::s![range.clone(), range.clone()])
                .assign(m);
        }
        out
    }
}

/// Eigenvalues of a small dense symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let b = m.nrows();
    let dm = nalgebra::DMatrix::from_fn(b, b, |i, j| m[[i, j]]);
    let mut eig: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

impl Validate for BlockMatrixSet {
    fn validate(&self) -> Result<(), ValidationReport> {
        let mut report = match self.partition.validate() {
            Ok(()) => ValidationReport::default(),
            Err(r) => r,
        };
        if !(0.0..=1.0).contains(&self.shrinkage) {
            report.push(format!("shrinkage {} outside [0, 1]", self.shrinkage));
        }
        if self.blocks.len() != self.partition.len() {
            report.push(format!(
                "{} matrices for {} partition blocks",
                self.blocks.len(),
                self.partition.len()
            ));
            return report.into_result();
        }
        for (bi, (range, m)) in self.partition.iter().zip(&self.blocks).enumerate() {
            let len = range.len();
            if m.dim() != (len, len) {
                report.push(format!(
                    "block {bi}: matrix is {:?} but block length is {len}",
                    m.dim()
                ));
                continue;
            }
            let mut finite = true;
            for i in 0..len {
                for j in 0..len {
                    let v = m[[i, j]];
                    if !v.is_finite() {
                        report.push(format!("block {bi}: entry ({i},{j}) is not finite"));
                        finite = false;
                        continue;
                    }
                    if j > i && (v - m[[j, i]]).abs() > SYMMETRY_TOL {
                        report.push(format!("block {bi}: asymmetric at ({i},{j})"));
                    }
                    if self.kind == MatrixKind::Correlation {
                        if i == j && (v - 1.0).abs() > UNIT_DIAG_TOL {
                            report.push(format!("block {bi}: diagonal {v} != 1 at ({i},{i})"));
                        }
                        if i != j && v.abs() > 1.0 {
                            report.push(format!("block {bi}: off-diagonal > 1 at ({i},{j})"));
                        }
                    }
                }
            }
            if finite {
                if let Some(&min) = symmetric_eigenvalues(m).first() {
                    if min < PSD_TOL {
                        report.push(format!(
                            "block {bi}: not positive semidefinite (min eigenvalue {min:e})"
                        ));
                    }
                }
            }
        }
        report.into_result()
    }
}

/// Sparse vector of fixed dimension with sorted indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(dense: ArrayView1<'_, f64>) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .unzip();
        SparseVector {
            dim: dense.len(),
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> Array1<f64> {
        let mut out = Array1::zeros(self.dim);
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            out[j] = v;
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn get(&self, j: usize) -> f64 {
        match self.indices.binary_search(&j) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

/// Warm-started solutions along a decreasing penalty grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPath {
    pub lambdas: Vec<f64>,
    pub coefs: Vec<SparseVector>,
    /// Smooth (unpenalized) loss at each solution.
    pub objective: Vec<f64>,
    pub df: Vec<usize>,
    pub converged: Vec<bool>,
    pub sweeps: Vec<usize>,
}

impl CoefficientPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.coefs.first().map_or(0, |c| c.dim)
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

impl Validate for CoefficientPath {
    fn validate(&self) -> Result<(), ValidationReport> {
        let mut report = ValidationReport::default();
        let d = self.lambdas.len();
        if d == 0 {
            report.push("path is empty");
        }
        for (name, len) in [
            ("coefs", self.coefs.len()),
            ("objective", self.objective.len()),
            ("df", self.df.len()),
            ("converged", self.converged.len()),
            ("sweeps", self.sweeps.len()),
        ] {
            if len != d {
                report.push(format!("{name} has length {len} but there are {d} lambdas"));
            }
        }
        for (l, &lam) in self.lambdas.iter().enumerate() {
            if !(lam.is_finite() && lam > 0.0) {
                report.push(format!("lambda[{l}] = {lam} is not positive"));
            }
            if l > 0 && lam >= self.lambdas[l - 1] {
                report.push(format!("lambdas not strictly decreasing at {l}"));
            }
        }
        let p = self.dim();
        for (l, c) in self.coefs.iter().enumerate() {
            if c.dim != p {
                report.push(format!("coefs[{l}] has dimension {} but expected {p}", c.dim));
            }
            if c.indices.len() != c.values.len() {
                report.push(format!("coefs[{l}] index/value lengths differ"));
            }
            if c.indices.windows(2).any(|w| w[0] >= w[1]) || c.indices.iter().any(|&j| j >= c.dim) {
                report.push(format!("coefs[{l}] indices not sorted or out of range"));
            }
            if let Some(&df) = self.df.get(l) {
                if df != c.nnz() {
                    report.push(format!("df[{l}] = {df} but coefs[{l}] has {} nonzeros", c.nnz()));
                }
            }
        }
        for (l, v) in self.objective.iter().enumerate() {
            if !v.is_finite() {
                report.push(format!("objective[{l}] is not finite"));
            }
        }
        report.into_result()
    }
}

/// Generative settings for one synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScenario {
    pub p: usize,
    /// Sample size behind the summary statistics.
    pub n: usize,
    /// Individual-level sample size.
    pub n_ind: usize,
    /// Reference panel size.
    pub n_r: usize,
    pub n_test: usize,
    pub alpha: f64,
    pub h2: f64,
    pub block_size: usize,
    /// Within-block AR(1) correlation.
    pub rho: f64,
    pub seed: u64,
}

impl Default for SimScenario {
    fn default() -> Self {
        SimScenario {
            p: 2000,
            n: 4000,
            n_ind: 1000,
            n_r: 400,
            n_test: 200,
            alpha: 0.005,
            h2: 0.4,
            block_size: 50,
            rho: 0.5,
            seed: 1,
        }
    }
}

impl Validate for SimScenario {
    fn validate(&self) -> Result<(), ValidationReport> {
        let mut report = ValidationReport::default();
        for (name, v) in [
            ("p", self.p),
            ("n", self.n),
            ("n_ind", self.n_ind),
            ("n_r", self.n_r),
            ("n_test", self.n_test),
            ("block_size", self.block_size),
        ] {
            if v == 0 {
                report.push(format!("{name} must be >= 1"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            report.push(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        if !(self.h2 > 0.0 && self.h2 < 1.0) {
            report.push(format!("h2 = {} outside (0, 1)", self.h2));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            report.push(format!("rho = {} outside [0, 1)", self.rho));
        }
        report.into_result()
    }
}
