//! Command-line front end.
//!
//! Every command resolves its flags into a [`RunConfig`] with all defaults
//! filled in and writes it to `manifest.json` next to its outputs. Passing
//! that manifest back through `--config` repeats the run exactly; `--out`
//! may redirect the outputs.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when a fitted
//! path has a grid point that did not converge (outputs are still written).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{RemiError, Result};
use crate::experiment::{scaling_experiment, ExperimentConfig};
use crate::io;
use crate::metrics::{evaluate, DEFAULT_FPR_MAX};
use crate::model::{BlockPartition, SimScenario, Validate};
use crate::pipeline::{fit, prepare_panel, FitData, FitSettings};
use crate::refpanel::DEFAULT_KAPPA;
use crate::selection::bic_from_parts;
use crate::simulate::{simulate, SeMode};
use crate::solver::{Method, SolverConfig, VisitOrder};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const THREADS_ENV: &str = "REMI_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "remi", version, about = "L1-penalized regression from marginal statistics and a reference panel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a regularization path and select a point by BIC.
    Fit(FitArgs),
    /// Recompute the BIC table of an existing fit.
    Select(SelectArgs),
    /// Generate a synthetic dataset.
    Simulate(SimulateArgs),
    /// Score a fit against known effects and a test set.
    Evaluate(EvaluateArgs),
    /// Replicated simulations over study and panel sizes.
    Scaling(ScalingArgs),
    /// Write a fixed-width block partition.
    Blocks(BlocksArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Convergence threshold on the largest coefficient change per sweep.
    #[arg(long, conflicts_with = "config")]
    pub tol: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    pub max_sweeps: Option<usize>,
    /// Number of grid points.
    #[arg(long, conflicts_with = "config")]
    pub path_length: Option<usize>,
    /// Smallest penalty as a fraction of the largest.
    #[arg(long, conflicts_with = "config")]
    pub tau: Option<f64>,
    /// Visit coordinates in a shuffled order drawn from this seed.
    #[arg(long, conflicts_with = "config")]
    pub shuffle_seed: Option<u64>,
}

impl SolverArgs {
    fn resolve(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            tol: self.tol.unwrap_or(d.tol),
            max_sweeps: self.max_sweeps.unwrap_or(d.max_sweeps),
            path_length: self.path_length.unwrap_or(d.path_length),
            tau: self.tau.unwrap_or(d.tau),
            order: self.shuffle_seed.map_or(VisitOrder::Cyclic, VisitOrder::Shuffled),
        }
    }
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long, conflicts_with = "config")]
    pub p: Option<usize>,
    /// Summary-statistic sample size.
    #[arg(long, conflicts_with = "config")]
    pub n: Option<usize>,
    #[arg(long, conflicts_with = "config")]
    pub n_ind: Option<usize>,
    #[arg(long, conflicts_with = "config")]
    pub n_r: Option<usize>,
    #[arg(long, conflicts_with = "config")]
    pub n_test: Option<usize>,
    /// Fraction of variables with a nonzero effect.
    #[arg(long, conflicts_with = "config")]
    pub alpha: Option<f64>,
    /// Heritability.
    #[arg(long, conflicts_with = "config")]
    pub h2: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    pub block_size: Option<usize>,
    /// Within-block AR(1) correlation.
    #[arg(long, conflicts_with = "config")]
    pub rho: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    pub seed: Option<u64>,
}

impl ScenarioArgs {
    fn resolve(&self) -> SimScenario {
        let d = SimScenario::default();
        SimScenario {
            p: self.p.unwrap_or(d.p),
            n: self.n.unwrap_or(d.n),
            n_ind: self.n_ind.unwrap_or(d.n_ind),
            n_r: self.n_r.unwrap_or(d.n_r),
            n_test: self.n_test.unwrap_or(d.n_test),
            alpha: self.alpha.unwrap_or(d.alpha),
            h2: self.h2.unwrap_or(d.h2),
            block_size: self.block_size.unwrap_or(d.block_size),
            rho: self.rho.unwrap_or(d.rho),
            seed: self.seed.unwrap_or(d.seed),
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Re-run from a manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub method: Option<Method>,
    /// Summary statistics TSV (remi-r).
    #[arg(long, conflicts_with = "config")]
    pub summary: Option<PathBuf>,
    /// Marginal cross-products TSV (remi-c).
    #[arg(long, conflicts_with = "config")]
    pub marginal: Option<PathBuf>,
    /// Reference panel matrix (remi-c, remi-r).
    #[arg(long, conflicts_with = "config")]
    pub panel: Option<PathBuf>,
    /// Design matrix (lasso).
    #[arg(long, conflicts_with = "config")]
    pub x: Option<PathBuf>,
    /// Response vector (lasso).
    #[arg(long, conflicts_with = "config")]
    pub y: Option<PathBuf>,
    /// Partition file with `start end` lines.
    #[arg(long, conflicts_with_all = ["config", "block_size"])]
    pub partition: Option<PathBuf>,
    /// Fixed block width; a single block when neither this nor --partition is given.
    #[arg(long, conflicts_with = "config")]
    pub block_size: Option<usize>,
    /// Shrinkage weight on the empirical panel matrix.
    #[arg(long, conflicts_with = "config")]
    pub kappa: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory.
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of a previous fit.
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub fit: Option<PathBuf>,
    /// Sample size for the BIC penalty.
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// A manifest, or a bare scenario JSON object.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, conflicts_with = "config")]
    pub se_mode: Option<SeModeArg>,
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SeModeArg {
    Exact,
    Approximate,
}

impl From<SeModeArg> for SeMode {
    fn from(v: SeModeArg) -> Self {
        match v {
            SeModeArg::Exact => SeMode::Exact,
            SeModeArg::Approximate => SeMode::Approximate,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory of a previous fit.
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub fit: Option<PathBuf>,
    /// True effects TSV.
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub truth: Option<PathBuf>,
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub x_test: Option<PathBuf>,
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub y_test: Option<PathBuf>,
    #[arg(long, conflicts_with = "config")]
    pub fpr_max: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// A manifest, or a bare experiment JSON object.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated summary-statistic sample sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "config")]
    pub n_list: Option<Vec<usize>>,
    /// Comma-separated panel sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "config")]
    pub n_r_list: Option<Vec<usize>>,
    #[arg(long, conflicts_with = "config")]
    pub reps: Option<usize>,
    #[arg(long, value_delimiter = ',', conflicts_with = "config")]
    pub methods: Option<Vec<Method>>,
    #[arg(long, conflicts_with = "config")]
    pub kappa: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    pub fpr_max: Option<f64>,
    #[arg(long, conflicts_with = "config")]
    pub se_mode: Option<SeModeArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BlocksArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub p: Option<usize>,
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub block_size: Option<usize>,
    #[arg(long, required_unless_present = "config")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PartitionSpec {
    Single,
    Width(usize),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitInputs {
    pub summary: Option<PathBuf>,
    pub marginal: Option<PathBuf>,
    pub panel: Option<PathBuf>,
    pub x: Option<PathBuf>,
    pub y: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub method: Method,
    pub inputs: FitInputs,
    pub partition: PartitionSpec,
    pub kappa: f64,
    pub solver: SolverConfig,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectConfig {
    pub fit: PathBuf,
    pub n: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub scenario: SimScenario,
    pub se_mode: SeMode,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub fit: PathBuf,
    pub truth: PathBuf,
    pub x_test: PathBuf,
    pub y_test: PathBuf,
    pub fpr_max: f64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub experiment: ExperimentConfig,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksConfig {
    pub p: usize,
    pub block_size: usize,
    pub out: PathBuf,
}

/// Fully resolved parameters of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum RunConfig {
    Fit(FitConfig),
    Select(SelectConfig),
    Simulate(SimulateConfig),
    Evaluate(EvaluateConfig),
    Scaling(ScalingConfig),
    Blocks(BlocksConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Fit(_) => "fit",
            RunConfig::Select(_) => "select",
            RunConfig::Simulate(_) => "simulate",
            RunConfig::Evaluate(_) => "evaluate",
            RunConfig::Scaling(_) => "scaling",
            RunConfig::Blocks(_) => "blocks",
        }
    }

    pub fn out(&self) -> &Path {
        match self {
            RunConfig::Fit(c) => &c.out,
            RunConfig::Select(c) => &c.out,
            RunConfig::Simulate(c) => &c.out,
            RunConfig::Evaluate(c) => &c.out,
            RunConfig::Scaling(c) => &c.out,
            RunConfig::Blocks(c) => &c.out,
        }
    }

    fn set_out(&mut self, out: PathBuf) {
        match self {
            RunConfig::Fit(c) => c.out = out,
            RunConfig::Select(c) => c.out = out,
            RunConfig::Simulate(c) => c.out = out,
            RunConfig::Evaluate(c) => c.out = out,
            RunConfig::Scaling(c) => c.out = out,
            RunConfig::Blocks(c) => c.out = out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub version: String,
    pub run: RunConfig,
}

impl Manifest {
    pub fn new(run: RunConfig) -> Self {
        Manifest {
            format_version: FORMAT_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            run,
        }
    }
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::path::absolute(path).map_err(|e| RemiError::io(path, e))
}

fn absolute_opt(path: &Option<PathBuf>) -> Result<Option<PathBuf>> {
    path.as_deref().map(absolute).transpose()
}

fn load_manifest(path: &Path, expected: &str) -> Result<RunConfig> {
    let manifest: Manifest = io::read_json(path)?;
    check_manifest(path, manifest, expected)
}

fn check_manifest(path: &Path, manifest: Manifest, expected: &str) -> Result<RunConfig> {
    if manifest.format_version != FORMAT_VERSION {
        return Err(RemiError::InvalidArgument(format!(
            "{}: format_version {} is not supported (expected {FORMAT_VERSION})",
            path.display(),
            manifest.format_version
        )));
    }
    if manifest.run.name() != expected {
        return Err(RemiError::InvalidArgument(format!(
            "{}: manifest is for `{}`, not `{expected}`",
            path.display(),
            manifest.run.name()
        )));
    }
    Ok(manifest.run)
}

/// Accepts either a manifest or a bare object of type `T`.
fn load_manifest_or<T: serde::de::DeserializeOwned>(
    path: &Path,
    expected: &str,
    wrap: impl FnOnce(T) -> Result<RunConfig>,
) -> Result<RunConfig> {
    let value: serde_json::Value = io::read_json(path)?;
    let json_err = |e| RemiError::Json {
        path: path.to_path_buf(),
        source: e,
    };
    if value.get("format_version").is_some() {
        let manifest: Manifest = serde_json::from_value(value).map_err(json_err)?;
        check_manifest(path, manifest, expected)
    } else {
        wrap(serde_json::from_value(value).map_err(json_err)?)
    }
}

fn missing(what: &str) -> RemiError {
    RemiError::InvalidArgument(format!("missing required input --{what}"))
}

/// Resolves parsed arguments into a complete configuration.
pub fn resolve(command: &Command) -> Result<RunConfig> {
    let (config, out) = match command {
        Command::Fit(a) => (&a.config, &a.out),
        Command::Select(a) => (&a.config, &a.out),
        Command::Simulate(a) => (&a.config, &a.out),
        Command::Evaluate(a) => (&a.config, &a.out),
        Command::Scaling(a) => (&a.config, &a.out),
        Command::Blocks(a) => (&a.config, &a.out),
    };
    let out_abs = absolute_opt(out)?;
    if let Some(path) = config {
        let mut run = match command {
            Command::Simulate(_) => load_manifest_or(path, "simulate", |scenario: SimScenario| {
                Ok(RunConfig::Simulate(SimulateConfig {
                    scenario,
                    se_mode: SeMode::default(),
                    out: out_abs.clone().ok_or_else(|| missing("out"))?,
                }))
            })?,
            Command::Scaling(_) => load_manifest_or(path, "scaling", |experiment: ExperimentConfig| {
                Ok(RunConfig::Scaling(ScalingConfig {
                    experiment,
                    out: out_abs.clone().ok_or_else(|| missing("out"))?,
                }))
            })?,
            Command::Fit(_) => load_manifest(path, "fit")?,
            Command::Select(_) => load_manifest(path, "select")?,
            Command::Evaluate(_) => load_manifest(path, "evaluate")?,
            Command::Blocks(_) => load_manifest(path, "blocks")?,
        };
        if let Some(out) = out_abs {
            run.set_out(out);
        }
        return Ok(run);
    }
    let out = out_abs.ok_or_else(|| missing("out"))?;
    Ok(match command {
        Command::Fit(a) => {
            let method = a.method.ok_or_else(|| missing("method"))?;
            let partition = match (&a.partition, a.block_size) {
                (Some(p), _) => PartitionSpec::File(absolute(p)?),
                (None, Some(w)) => PartitionSpec::Width(w),
                (None, None) => PartitionSpec::Single,
            };
            RunConfig::Fit(FitConfig {
                method,
                inputs: FitInputs {
                    summary: absolute_opt(&a.summary)?,
                    marginal: absolute_opt(&a.marginal)?,
                    panel: absolute_opt(&a.panel)?,
                    x: absolute_opt(&a.x)?,
                    y: absolute_opt(&a.y)?,
                },
                partition,
                kappa: a.kappa.unwrap_or(DEFAULT_KAPPA),
                solver: a.solver.resolve(),
                out,
            })
        }
        Command::Select(a) => RunConfig::Select(SelectConfig {
            fit: absolute(a.fit.as_deref().ok_or_else(|| missing("fit"))?)?,
            n: a.n.ok_or_else(|| missing("n"))?,
            out,
        }),
        Command::Simulate(a) => RunConfig::Simulate(SimulateConfig {
            scenario: a.scenario.resolve(),
            se_mode: a.se_mode.map_or(SeMode::default(), SeMode::from),
            out,
        }),
        Command::Evaluate(a) => RunConfig::Evaluate(EvaluateConfig {
            fit: absolute(a.fit.as_deref().ok_or_else(|| missing("fit"))?)?,
            truth: absolute(a.truth.as_deref().ok_or_else(|| missing("truth"))?)?,
            x_test: absolute(a.x_test.as_deref().ok_or_else(|| missing("x-test"))?)?,
            y_test: absolute(a.y_test.as_deref().ok_or_else(|| missing("y-test"))?)?,
            fpr_max: a.fpr_max.unwrap_or(DEFAULT_FPR_MAX),
            out,
        }),
        Command::Scaling(a) => {
            let mut experiment = ExperimentConfig::new(
                a.scenario.resolve(),
                a.n_list.clone().unwrap_or_else(|| vec![1000, 4000, 16000]),
                a.n_r_list.clone().unwrap_or_else(|| vec![400, 4000]),
                a.reps.unwrap_or(50),
            );
            experiment.methods = a
                .methods
                .clone()
                .unwrap_or_else(|| vec![Method::RemiC, Method::RemiR, Method::Lasso]);
            experiment.kappa = a.kappa.unwrap_or(DEFAULT_KAPPA);
            experiment.fpr_max = a.fpr_max.unwrap_or(DEFAULT_FPR_MAX);
            experiment.se_mode = a.se_mode.map_or(SeMode::default(), SeMode::from);
            experiment.solver = a.solver.resolve();
            RunConfig::Scaling(ScalingConfig { experiment, out })
        }
        Command::Blocks(a) => RunConfig::Blocks(BlocksConfig {
            p: a.p.ok_or_else(|| missing("p"))?,
            block_size: a.block_size.ok_or_else(|| missing("block-size"))?,
            out,
        }),
    })
}

fn dims_agree(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(RemiError::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn fit_data(cfg: &FitConfig) -> Result<FitData> {
    let inputs = &cfg.inputs;
    let need = |p: &Option<PathBuf>, what: &str| p.clone().ok_or_else(|| missing(what));
    Ok(match cfg.method {
        Method::RemiC => {
            let marginal = io::read_marginal(&need(&inputs.marginal, "marginal")?)?;
            let panel = prepare_panel(io::read_matrix(&need(&inputs.panel, "panel")?)?)?;
            dims_agree(marginal.len(), panel.p())?;
            FitData::RemiC { marginal, panel }
        }
        Method::RemiR => {
            let summary = io::read_summary(&need(&inputs.summary, "summary")?)?;
            let panel = prepare_panel(io::read_matrix(&need(&inputs.panel, "panel")?)?)?;
            dims_agree(summary.len(), panel.p())?;
            FitData::RemiR { summary, panel }
        }
        Method::Lasso => {
            let x = io::read_matrix(&need(&inputs.x, "x")?)?;
            let y = io::read_vector(&need(&inputs.y, "y")?)?;
            dims_agree(x.nrows(), y.len())?;
            FitData::Lasso { x, y }
        }
    })
}

fn data_dim(data: &FitData) -> usize {
    match data {
        FitData::RemiC { marginal, .. } => marginal.len(),
        FitData::RemiR { summary, .. } => summary.len(),
        FitData::Lasso { x, .. } => x.ncols(),
    }
}

fn partition_for(spec: &PartitionSpec, p: usize) -> Result<BlockPartition> {
    let partition = match spec {
        PartitionSpec::Single => BlockPartition::single(p),
        PartitionSpec::Width(0) => {
            return Err(RemiError::InvalidArgument("block size must be >= 1".into()))
        }
        PartitionSpec::Width(w) => BlockPartition::fixed_width(p, *w),
        PartitionSpec::File(path) => io::read_partition(path)?,
    };
    partition.validate_for(p)?;
    Ok(partition)
}

/// Executes a resolved configuration and returns the exit code.
pub fn execute(run: &RunConfig) -> Result<i32> {
    let out = io::ensure_dir(run.out())?;
    let mut code = EXIT_OK;
    match run {
        RunConfig::Fit(cfg) => {
            let data = fit_data(cfg)?;
            let partition = partition_for(&cfg.partition, data_dim(&data))?;
            let settings = FitSettings {
                kappa: cfg.kappa,
                solver: cfg.solver.clone(),
            };
            let result = fit(&data, &partition, &settings)?;
            io::write_path_csv(&out.join("path.csv"), &result.path)?;
            io::write_lambdas_csv(&out.join("lambdas.csv"), &result.path)?;
            io::write_bic_csv(&out.join("bic.csv"), &result.bic)?;
            if !result.path.all_converged() {
                let bad = result.path.converged.iter().filter(|c| !**c).count();
                eprintln!("warning: {bad} grid point(s) did not converge within {} sweeps", cfg.solver.max_sweeps);
                code = EXIT_NOT_CONVERGED;
            }
        }
        RunConfig::Select(cfg) => {
            let grid = io::read_lambdas_csv(&cfg.fit.join("lambdas.csv"))?;
            let table = bic_from_parts(&grid.lambdas, &grid.objective, &grid.df, cfg.n)?;
            io::write_bic_csv(&out.join("bic.csv"), &table)?;
        }
        RunConfig::Simulate(cfg) => {
            let sim = simulate(&cfg.scenario, cfg.se_mode)?;
            io::write_matrix_binary(&out.join("x_ind.bin"), &sim.x_ind)?;
            io::write_vector_binary(&out.join("y_ind.bin"), &sim.y_ind)?;
            io::write_summary(&out.join("summary.tsv"), &sim.summary)?;
            io::write_marginal(&out.join("marginal.tsv"), &sim.marginal)?;
            io::write_matrix_binary(&out.join("panel.bin"), &sim.panel.data)?;
            io::write_matrix_binary(&out.join("x_test.bin"), &sim.x_test)?;
            io::write_vector_binary(&out.join("y_test.bin"), &sim.y_test)?;
            io::write_truth(&out.join("beta_true.tsv"), &sim.beta_true)?;
            io::write_partition(
                &out.join("blocks.txt"),
                &BlockPartition::fixed_width(cfg.scenario.p, cfg.scenario.block_size),
            )?;
        }
        RunConfig::Evaluate(cfg) => {
            let truth = io::read_truth(&cfg.truth)?;
            let path = io::read_path(&cfg.fit.join("lambdas.csv"), &cfg.fit.join("path.csv"), truth.dim)?;
            let bic = io::read_bic_csv(&cfg.fit.join("bic.csv"))?;
            dims_agree(path.len(), bic.lambdas.len())?;
            let x_test = io::read_matrix(&cfg.x_test)?;
            let y_test = io::read_vector(&cfg.y_test)?;
            dims_agree(x_test.nrows(), y_test.len())?;
            let report = evaluate(&path, bic.chosen, &truth, x_test.view(), y_test.view(), cfg.fpr_max)?;
            io::write_eval_csv(&out.join("eval.csv"), &report)?;
        }
        RunConfig::Scaling(cfg) => {
            let table = scaling_experiment(&cfg.experiment)?;
            io::write_experiment_csv(&out.join("experiment.csv"), &table.cells)?;
        }
        RunConfig::Blocks(cfg) => {
            let partition = partition_for(&PartitionSpec::Width(cfg.block_size), cfg.p)?;
            io::write_partition(&out.join("blocks.txt"), &partition)?;
        }
    }
    io::write_json(&out.join(MANIFEST_FILE), &Manifest::new(run.clone()))?;
    Ok(code)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        RemiError::InvalidArgument(format!("{THREADS_ENV}=`{raw}` is not a nonnegative integer"))
    })?;
    // a pool may already exist when called twice in one process; keep it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = configure_threads()
        .and_then(|()| resolve(&cli.command))
        .and_then(|run| {
            if let RunConfig::Simulate(c) = &run {
                c.scenario.validate()?;
            }
            execute(&run)
        });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
