//! On-disk formats.
//!
//! Text formats are tab-separated with a fixed header. Floats are written in
//! the shortest form that parses back to the same bits, so every writer here
//! round-trips exactly through its reader. Matrices may also be stored in a
//! little-endian binary layout: the magic `REMI1`, `u64` rows, `u64` cols,
//! then row-major `f64` values.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{RemiError, Result};
use crate::experiment::CellSummary;
use crate::metrics::EvalReport;
use crate::model::{BlockPartition, CoefficientPath, MarginalVector, SparseVector, SummaryStats, Validate};
use crate::selection::BicTable;

pub const MATRIX_MAGIC: &[u8; 5] = b"REMI1";

pub const SUMMARY_HEADER: [&str; 4] = ["id", "beta", "se", "n"];
pub const MARGINAL_HEADER: [&str; 4] = ["id", "ytilde", "n", "ysq"];
pub const PATH_HEADER: &str = "step,lambda,index,value,converged";
pub const LAMBDAS_HEADER: &str = "step,lambda,objective,df,converged,sweeps";
pub const BIC_HEADER: &str = "lambda,loss,df,bic,chosen";
pub const EVAL_HEADER: &str = "partial_auc,pearson_r,l2_error,support_precision,support_recall";
pub const EXPERIMENT_HEADER: &str =
    "method,n,n_r,rep_count,failed,median_l2,q25,q75,median_pauc,median_pearson";
pub const TRUTH_HEADER: [&str; 2] = ["id", "beta"];

/// Shortest round-trip representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| RemiError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| RemiError::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| RemiError::io(path, e))
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> RemiError {
    RemiError::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn parse_f64(path: &Path, line: usize, field: &str, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| malformed(path, line, format!("{field} `{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(malformed(path, line, format!("{field} `{tok}` is not finite")));
    }
    Ok(v)
}

fn parse_usize(path: &Path, line: usize, field: &str, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| malformed(path, line, format!("{field} `{tok}` is not a nonnegative integer")))
}

fn parse_bool(path: &Path, line: usize, tok: &str) -> Result<bool> {
    match tok {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(malformed(path, line, format!("`{tok}` is not true/false"))),
    }
}

/// Splits a text file into numbered lines, checking the header. Blank lines
/// are rejected since no writer produces them.
fn tsv_rows<'a>(path: &Path, text: &'a str, header: &[&str]) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h.split('\t').eq(header.iter().copied()) => {}
        Some((_, h)) => {
            return Err(malformed(
                path,
                1,
                format!("header `{h}`, expected `{}`", header.join("\t")),
            ))
        }
        None => return Err(malformed(path, 1, "file is empty")),
    }
    let mut rows = Vec::new();
    for (no, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != header.len() {
            return Err(malformed(
                path,
                no,
                format!("{} fields, expected {}", fields.len(), header.len()),
            ));
        }
        rows.push((no, fields));
    }
    if rows.is_empty() {
        return Err(malformed(path, 1, "no data rows"));
    }
    Ok(rows)
}

fn csv_rows<'a>(path: &Path, text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((_, h)) => return Err(malformed(path, 1, format!("header `{h}`, expected `{header}`"))),
        None => return Err(malformed(path, 1, "file is empty")),
    }
    let width = header.split(',').count();
    lines
        .map(|(no, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != width {
                return Err(malformed(path, no, format!("{} fields, expected {width}", fields.len())));
            }
            Ok((no, fields))
        })
        .collect()
}

fn check_id(path: &Path, line: usize, id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(malformed(path, line, "empty or blank id"));
    }
    Ok(())
}

/// Reads `id beta se n`. Row order defines the variable index; `s2 = se²`.
pub fn read_summary(path: &Path) -> Result<SummaryStats> {
    let text = read_text(path)?;
    let rows = tsv_rows(path, &text, &SUMMARY_HEADER)?;
    let mut beta = Vec::with_capacity(rows.len());
    let mut s2 = Vec::with_capacity(rows.len());
    let mut n_shared = None;
    for (no, f) in rows {
        check_id(path, no, f[0])?;
        beta.push(parse_f64(path, no, "beta", f[1])?);
        let se: f64 = f[2].parse().map_err(|_| malformed(path, no, format!("se `{}` is not a number", f[2])))?;
        if !(se > 0.0 && se.is_finite()) {
            return Err(RemiError::NonPositiveSE {
                path: path.to_path_buf(),
                line: no,
            });
        }
        s2.push(se * se);
        let n = parse_usize(path, no, "n", f[3])?;
        if n == 0 {
            return Err(malformed(path, no, "n must be >= 1"));
        }
        match n_shared {
            None => n_shared = Some(n),
            Some(m) if m != n => {
                return Err(RemiError::InconsistentN {
                    path: path.to_path_buf(),
                    line: no,
                })
            }
            _ => {}
        }
    }
    let stats = SummaryStats {
        beta_m: Array1::from(beta),
        s2: Array1::from(s2),
        n: n_shared.unwrap_or(0),
    };
    stats.validate()?;
    Ok(stats)
}

/// Writes `se = √s2`; reading squares it back to the same `s2` whenever `s2`
/// is itself the square of a double.
pub fn write_summary(path: &Path, stats: &SummaryStats) -> Result<()> {
    stats.validate()?;
    let mut w = create(path)?;
    let mut body = SUMMARY_HEADER.join("\t");
    body.push('\n');
    for (j, (b, s2)) in stats.beta_m.iter().zip(&stats.s2).enumerate() {
        body.push_str(&format!("{j}\t{}\t{}\t{}\n", fmt_f64(*b), fmt_f64(s2.sqrt()), stats.n));
    }
    w.write_all(body.as_bytes()).map_err(|e| RemiError::io(path, e))?;
    finish(path, w)
}

/// Reads `id ytilde n ysq`, where `ysq` is `yᵀy/n` or `NA`.
pub fn read_marginal(path: &Path) -> Result<MarginalVector> {
    let text = read_text(path)?;
    let rows = tsv_rows(path, &text, &MARGINAL_HEADER)?;
    let mut values = Vec::with_capacity(rows.len());
    let mut shared: Option<(usize, Option<f64>)> = None;
    for (no, f) in rows {
        check_id(path, no, f[0])?;
        values.push(parse_f64(path, no, "ytilde", f[1])?);
        let n = parse_usize(path, no, "n", f[2])?;
        if n == 0 {
            return Err(malformed(path, no, "n must be >= 1"));
        }
        let ysq = match f[3] {
            "NA" => None,
            tok => Some(parse_f64(path, no, "ysq", tok)?),
        };
        match shared {
            None => shared = Some((n, ysq)),
            Some((m, _)) if m != n => {
                return Err(RemiError::InconsistentN {
                    path: path.to_path_buf(),
                    line: no,
                })
            }
            Some((_, prev)) if prev.map(f64::to_bits) != ysq.map(f64::to_bits) => {
                return Err(malformed(path, no, "ysq differs from earlier rows"))
            }
            _ => {}
        }
    }
    let (n, y_sq_mean) = shared.unwrap_or((0, None));
    let marginal = MarginalVector {
        values: Array1::from(values),
        n,
        y_sq_mean,
    };
    marginal.validate()?;
    Ok(marginal)
}

pub fn write_marginal(path: &Path, marginal: &MarginalVector) -> Result<()> {
    marginal.validate()?;
    let ysq = marginal.y_sq_mean.map_or_else(|| "NA".to_string(), fmt_f64);
    let mut body = MARGINAL_HEADER.join("\t");
    body.push('\n');
    for (j, v) in marginal.values.iter().enumerate() {
        body.push_str(&format!("{j}\t{}\t{}\t{ysq}\n", fmt_f64(*v), marginal.n));
    }
    let mut w = create(path)?;
    w.write_all(body.as_bytes()).map_err(|e| RemiError::io(path, e))?;
    finish(path, w)
}

/// Reads a dense matrix, choosing the binary or text layout by the magic.
pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| RemiError::io(path, e))?;
    if bytes.starts_with(b"REMI") {
        decode_binary(path, &bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| RemiError::BadMagic(path.to_path_buf()))?;
        decode_text(path, &text)
    }
}

/// Decodes the binary layout. Anything that does not start with the exact
/// magic is rejected.
pub fn decode_binary(path: &Path, bytes: &[u8]) -> Result<Array2<f64>> {
    if !bytes.starts_with(MATRIX_MAGIC) {
        return Err(RemiError::BadMagic(path.to_path_buf()));
    }
    let truncated = || RemiError::TruncatedPayload(path.to_path_buf());
    let header = bytes.get(5..21).ok_or_else(truncated)?;
    let rows = u64::from_le_bytes(header[..8].try_into().unwrap());
    let cols = u64::from_le_bytes(header[8..].try_into().unwrap());
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(truncated)?;
    let payload = &bytes[21..];
    if payload.len() < count {
        return Err(truncated());
    }
    if payload.len() > count {
        return Err(RemiError::TrailingBytes(path.to_path_buf()));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Array2::from_shape_vec((rows as usize, cols as usize), values).expect("shape checked"))
}

/// Whitespace-separated rows of equal width.
pub fn decode_text(path: &Path, text: &str) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let start = values.len();
        for tok in line.split_whitespace() {
            values.push(parse_f64(path, no, "entry", tok)?);
        }
        let w = values.len() - start;
        if w == 0 {
            return Err(malformed(path, no, "blank line"));
        }
        match width {
            None => width = Some(w),
            Some(prev) if prev != w => {
                return Err(RemiError::RaggedRows {
                    path: path.to_path_buf(),
                    line: no,
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = width.ok_or_else(|| malformed(path, 1, "matrix file is empty"))?;
    Ok(Array2::from_shape_vec((rows, cols), values).expect("width checked"))
}

pub fn encode_binary(m: &Array2<f64>) -> Vec<u8> {
    let (r, c) = m.dim();
    let mut out = Vec::with_capacity(21 + 8 * r * c);
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(r as u64).to_le_bytes());
    out.extend_from_slice(&(c as u64).to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_matrix_binary(path: &Path, m: &Array2<f64>) -> Result<()> {
    std::fs::write(path, encode_binary(m)).map_err(|e| RemiError::io(path, e))
}

/// Text layout; needs at least one row and column and finite entries.
pub fn write_matrix_text(path: &Path, m: &Array2<f64>) -> Result<()> {
    if m.is_empty() {
        return Err(RemiError::InvalidArgument(
            "text matrices need at least one row and one column".into(),
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(RemiError::InvalidArgument("matrix has non-finite entries".into()));
    }
    let mut body = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        body.push_str(&line.join(" "));
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| RemiError::io(path, e))
}

/// A vector stored as a one-column (or one-row) matrix.
pub fn read_vector(path: &Path) -> Result<Array1<f64>> {
    let m = read_matrix(path)?;
    match m.dim() {
        (_, 1) | (1, _) => Ok(Array1::from_iter(m.iter().copied())),
        (_, c) => Err(RemiError::DimensionMismatch { expected: 1, found: c }),
    }
}

pub fn write_vector_binary(path: &Path, v: &Array1<f64>) -> Result<()> {
    let m = v.clone().into_shape_with_order((v.len(), 1)).expect("column shape");
    write_matrix_binary(path, &m)
}

/// Lines `start end` of half-open ranges.
pub fn read_partition(path: &Path) -> Result<BlockPartition> {
    let text = read_text(path)?;
    let mut blocks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(malformed(path, no, format!("{} fields, expected `start end`", f.len())));
        }
        let start = parse_usize(path, no, "start", f[0])?;
        let end = parse_usize(path, no, "end", f[1])?;
        blocks.push(start..end);
    }
    let partition = BlockPartition::new(blocks);
    partition.validate_for(partition.p())?;
    Ok(partition)
}

pub fn write_partition(path: &Path, partition: &BlockPartition) -> Result<()> {
    let mut body = String::new();
    for r in partition.iter() {
        body.push_str(&format!("{} {}\n", r.start, r.end));
    }
    std::fs::write(path, body).map_err(|e| RemiError::io(path, e))
}

/// Nonzero coefficients as `step,lambda,index,value,converged` rows.
pub fn write_path_csv(path: &Path, fit: &CoefficientPath) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| RemiError::io(path, e);
    writeln!(w, "{PATH_HEADER}").map_err(io)?;
    for (l, coef) in fit.coefs.iter().enumerate() {
        let lambda = fmt_f64(fit.lambdas[l]);
        for (j, v) in coef.iter() {
            writeln!(w, "{l},{lambda},{j},{},{}", fmt_f64(v), fit.converged[l]).map_err(io)?;
        }
    }
    finish(path, w)
}

/// One row per grid point: `step,lambda,objective,df,converged,sweeps`.
pub fn write_lambdas_csv(path: &Path, fit: &CoefficientPath) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| RemiError::io(path, e);
    writeln!(w, "{LAMBDAS_HEADER}").map_err(io)?;
    for l in 0..fit.len() {
        writeln!(
            w,
            "{l},{},{},{},{},{}",
            fmt_f64(fit.lambdas[l]),
            fmt_f64(fit.objective[l]),
            fit.df[l],
            fit.converged[l],
            fit.sweeps[l]
        )
        .map_err(io)?;
    }
    finish(path, w)
}

/// Grid-level columns of a fitted path, without coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRows {
    pub lambdas: Vec<f64>,
    pub objective: Vec<f64>,
    pub df: Vec<usize>,
    pub converged: Vec<bool>,
    pub sweeps: Vec<usize>,
}

pub fn read_lambdas_csv(path: &Path) -> Result<GridRows> {
    let text = read_text(path)?;
    let mut g = GridRows {
        lambdas: Vec::new(),
        objective: Vec::new(),
        df: Vec::new(),
        converged: Vec::new(),
        sweeps: Vec::new(),
    };
    for (no, f) in csv_rows(path, &text, LAMBDAS_HEADER)? {
        let step = parse_usize(path, no, "step", f[0])?;
        if step != g.lambdas.len() {
            return Err(malformed(path, no, format!("step {step} out of order")));
        }
        g.lambdas.push(parse_f64(path, no, "lambda", f[1])?);
        g.objective.push(parse_f64(path, no, "objective", f[2])?);
        g.df.push(parse_usize(path, no, "df", f[3])?);
        g.converged.push(parse_bool(path, no, f[4])?);
        g.sweeps.push(parse_usize(path, no, "sweeps", f[5])?);
    }
    if g.lambdas.is_empty() {
        return Err(malformed(path, 1, "no data rows"));
    }
    Ok(g)
}

/// Rebuilds a path of dimension `p` from its grid file and coefficient file.
pub fn read_path(lambdas_csv: &Path, path_csv: &Path, p: usize) -> Result<CoefficientPath> {
    let g = read_lambdas_csv(lambdas_csv)?;
    let mut fit = CoefficientPath {
        coefs: vec![SparseVector::zeros(p); g.lambdas.len()],
        lambdas: g.lambdas,
        objective: g.objective,
        df: g.df,
        converged: g.converged,
        sweeps: g.sweeps,
    };
    let text = read_text(path_csv)?;
    let mut last: Option<(usize, usize)> = None;
    for (no, f) in csv_rows(path_csv, &text, PATH_HEADER)? {
        let step = parse_usize(path_csv, no, "step", f[0])?;
        let j = parse_usize(path_csv, no, "index", f[2])?;
        if step >= fit.len() {
            return Err(malformed(path_csv, no, format!("step {step} not in the grid file")));
        }
        if j >= p {
            return Err(malformed(path_csv, no, format!("index {j} >= p = {p}")));
        }
        if last.is_some_and(|prev| prev >= (step, j)) {
            return Err(malformed(path_csv, no, "rows not sorted by (step, index)"));
        }
        last = Some((step, j));
        let lambda = parse_f64(path_csv, no, "lambda", f[1])?;
        if lambda.to_bits() != fit.lambdas[step].to_bits() {
            return Err(malformed(path_csv, no, "lambda disagrees with the grid file"));
        }
        if parse_bool(path_csv, no, f[4])? != fit.converged[step] {
            return Err(malformed(path_csv, no, "converged flag disagrees with the grid file"));
        }
        let v = parse_f64(path_csv, no, "value", f[3])?;
        if v == 0.0 {
            return Err(malformed(path_csv, no, "zero coefficient listed"));
        }
        fit.coefs[step].indices.push(j);
        fit.coefs[step].values.push(v);
    }
    fit.validate()?;
    Ok(fit)
}

pub fn write_bic_csv(path: &Path, table: &BicTable) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| RemiError::io(path, e);
    writeln!(w, "{BIC_HEADER}").map_err(io)?;
    for l in 0..table.lambdas.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(table.lambdas[l]),
            fmt_f64(table.loss[l]),
            table.df[l],
            fmt_f64(table.bic[l]),
            l == table.chosen
        )
        .map_err(io)?;
    }
    finish(path, w)
}

pub fn read_bic_csv(path: &Path) -> Result<BicTable> {
    let text = read_text(path)?;
    let mut table = BicTable {
        lambdas: Vec::new(),
        loss: Vec::new(),
        df: Vec::new(),
        bic: Vec::new(),
        chosen: 0,
    };
    let mut chosen = None;
    for (no, f) in csv_rows(path, &text, BIC_HEADER)? {
        table.lambdas.push(parse_f64(path, no, "lambda", f[0])?);
        table.loss.push(parse_f64(path, no, "loss", f[1])?);
        table.df.push(parse_usize(path, no, "df", f[2])?);
        table.bic.push(parse_f64(path, no, "bic", f[3])?);
        if parse_bool(path, no, f[4])? {
            if chosen.is_some() {
                return Err(malformed(path, no, "more than one chosen row"));
            }
            chosen = Some(table.lambdas.len() - 1);
        }
    }
    table.chosen = chosen.ok_or_else(|| malformed(path, 1, "no chosen row"))?;
    Ok(table)
}

pub fn write_eval_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let body = format!(
        "{EVAL_HEADER}\n{},{},{},{},{}\n",
        fmt_f64(report.partial_auc),
        fmt_f64(report.pearson_r),
        fmt_f64(report.l2_error),
        fmt_f64(report.support_precision),
        fmt_f64(report.support_recall)
    );
    std::fs::write(path, body).map_err(|e| RemiError::io(path, e))
}

pub fn write_experiment_csv(path: &Path, cells: &[CellSummary]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| RemiError::io(path, e);
    writeln!(w, "{EXPERIMENT_HEADER}").map_err(io)?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            c.method,
            c.n,
            c.n_r,
            c.rep_count,
            c.failed,
            fmt_f64(c.median_l2),
            fmt_f64(c.q25),
            fmt_f64(c.q75),
            fmt_f64(c.median_pauc),
            fmt_f64(c.median_pearson)
        )
        .map_err(io)?;
    }
    finish(path, w)
}

/// Dense `id beta` listing of the true effects.
pub fn write_truth(path: &Path, beta: &SparseVector) -> Result<()> {
    let mut body = TRUTH_HEADER.join("\t");
    body.push('\n');
    for (j, v) in beta.to_dense().iter().enumerate() {
        body.push_str(&format!("{j}\t{}\n", fmt_f64(*v)));
    }
    std::fs::write(path, body).map_err(|e| RemiError::io(path, e))
}

pub fn read_truth(path: &Path) -> Result<SparseVector> {
    let text = read_text(path)?;
    let mut dense = Vec::new();
    for (no, f) in tsv_rows(path, &text, &TRUTH_HEADER)? {
        check_id(path, no, f[0])?;
        dense.push(parse_f64(path, no, "beta", f[1])?);
    }
    Ok(SparseVector::from_dense(Array1::from(dense).view()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RemiError::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| RemiError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| RemiError::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| RemiError::io(dir, e))?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use tempfile::tempdir;

    #[test]
    fn summary_two_rows() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("s.tsv");
        std::fs::write(&p, "id\tbeta\tse\tn\nrs1\t0.5\t0.1\t100\nrs2\t-0.2\t0.2\t100\n").unwrap();
        let s = read_summary(&p).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.n, 100);
        assert_eq!(s.s2[1], 0.2 * 0.2);
    }

    #[test]
    fn summary_errors() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("s.tsv");
        std::fs::write(&p, "id\tbeta\tse\tn\nrs1\t0.5\t0\t100\n").unwrap();
        assert!(matches!(read_summary(&p), Err(RemiError::NonPositiveSE { line: 2, .. })));
        std::fs::write(&p, "id\tbeta\tse\tn\nrs1\t0.5\t0.1\t100\nrs2\t0.5\t0.1\t101\n").unwrap();
        assert!(matches!(read_summary(&p), Err(RemiError::InconsistentN { line: 3, .. })));
        std::fs::write(&p, "id\tbeta\tse\tn\nrs1\tx\t0.1\t100\n").unwrap();
        assert!(matches!(read_summary(&p), Err(RemiError::MalformedRow { line: 2, .. })));
        std::fs::write(&p, "id\tbeta\tse\nrs1\t1\t0.1\n").unwrap();
        assert!(matches!(read_summary(&p), Err(RemiError::MalformedRow { line: 1, .. })));
    }

    #[test]
    fn text_matrix_matches_binary() {
        let dir = tempdir().unwrap();
        let t = dir.path().join("m.txt");
        let b = dir.path().join("m.bin");
        std::fs::write(&t, "1.5 -2\n0.1 3e-7\n").unwrap();
        let m = read_matrix(&t).unwrap();
        assert_eq!(m, array![[1.5, -2.0], [0.1, 3e-7]]);
        write_matrix_binary(&b, &m).unwrap();
        let back = read_matrix(&b).unwrap();
        assert!(m.iter().zip(back.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        write_matrix_text(&t, &back).unwrap();
        assert_eq!(read_matrix(&t).unwrap(), m);
    }

    #[test]
    fn matrix_errors() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m");
        std::fs::write(&p, "1 2\n3 4 5\n").unwrap();
        assert!(matches!(read_matrix(&p), Err(RemiError::RaggedRows { line: 2, .. })));
        let mut bytes = encode_binary(&array![[1.0, 2.0], [3.0, 4.0]]);
        bytes.pop();
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_matrix(&p), Err(RemiError::TruncatedPayload(_))));
        std::fs::write(&p, &bytes[..10]).unwrap();
        assert!(matches!(read_matrix(&p), Err(RemiError::TruncatedPayload(_))));
        let mut bytes = encode_binary(&array![[1.0]]);
        bytes.push(0);
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_matrix(&p), Err(RemiError::TrailingBytes(_))));
        let mut bytes = encode_binary(&array![[1.0]]);
        bytes[4] = b'2';
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_matrix(&p), Err(RemiError::BadMagic(_))));
    }

    #[test]
    fn partition_round_trip() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("blocks.txt");
        let part = BlockPartition::fixed_width(7, 3);
        write_partition(&p, &part).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "0 3\n3 6\n6 7\n");
        assert_eq!(read_partition(&p).unwrap(), part);
        std::fs::write(&p, "0 3\n4 6\n").unwrap();
        assert!(read_partition(&p).is_err());
    }
}
