//! Command implementations behind the `wskdc` binary.
//!
//! Each `cmd_*` function is usable directly from Rust; [`Cli`] is the clap
//! front end that maps flags onto them.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bandwidth::{optimize_bandwidth, BandwidthSearchConfig, BandwidthSearchReport};
use crate::classifier::classify;
use crate::error::{Error, Result};
use crate::estimator::{fit, Dataset};
use crate::harness::{run_experiment, run_repeated, ExperimentConfig, ExperimentReport};
use crate::io::{self, fmt_real, ModelFile};
use crate::kernel::Bandwidth;
use crate::stats::MeanStd;

/// Subsample draws per size in `bench`.
pub const BENCH_DRAWS: usize = 10;

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const PLOT_FILE: &str = "curves.svg";

pub const BENCH_HEADER: [&str; 8] = [
    "size",
    "t_optim_mean",
    "t_optim_std",
    "t_infer_mean",
    "t_infer_std",
    "log10_size",
    "log10_t_optim_mean",
    "log10_t_infer_mean",
];

#[derive(Debug, Parser)]
#[command(name = "wskdc", version, about = "Wilson score kernel density classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on a labelled CSV and save it.
    Fit(FitArgs),
    /// Predict confidence bounds and selective decisions for query rows.
    Predict(PredictArgs),
    /// Run the repeated train/test experiment and write report tables.
    Eval(EvalArgs),
    /// Time bandwidth optimization and inference on subsets of several sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Cross-validation folds.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Number of candidate bandwidths.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Stratify folds by label.
    #[arg(long)]
    pub stratified: bool,
    /// Estimate the mean pairwise distance from this many sampled pairs.
    #[arg(long)]
    pub max_pairs: Option<usize>,
}

impl SearchArgs {
    fn config(&self, alpha: f64, seed: u64) -> BandwidthSearchConfig {
        BandwidthSearchConfig {
            folds: self.folds,
            steps: self.steps,
            alpha,
            seed,
            stratified: self.stratified,
            max_pairs: self.max_pairs,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Training CSV with a `label` column.
    pub data: PathBuf,
    /// Output model file.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Fixed bandwidth.
    #[arg(long, conflicts_with = "optimize", required_unless_present = "optimize")]
    pub h: Option<f64>,
    /// Select the bandwidth by cross-validation.
    #[arg(long)]
    pub optimize: bool,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Model file written by `fit`.
    pub model: PathBuf,
    /// Query CSV with the model's feature columns.
    pub queries: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    pub tau: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    pub data: PathBuf,
    /// Directory for records.csv, summary.csv, curves.csv (created if missing).
    #[arg(short, long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 50)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.95)]
    pub tau: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Run repeats on all cores.
    #[arg(long)]
    pub parallel: bool,
    /// Also write curves.svg.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    pub data: PathBuf,
    /// Subset sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[command(flatten)]
    pub search: SearchArgs,
}

impl EvalArgs {
    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            train_fraction: self.train_fraction,
            repeats: self.repeats,
            base_seed: self.seed,
            alpha: self.alpha,
            tau: self.tau,
            bandwidth: self.search.config(self.alpha, self.seed),
            parallel: self.parallel,
        }
    }
}

/// Sidecar path for the bandwidth search table: `model.csv` → `model.search.csv`.
pub fn search_report_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("search.csv")
}

pub fn cmd_fit(args: &FitArgs) -> Result<(ModelFile, Option<BandwidthSearchReport>)> {
    let table = io::read_feature_csv(&args.data)?;
    let (h, report) = match args.h {
        Some(h) => (Bandwidth::new(h)?, None),
        None => {
            let report = optimize_bandwidth(&table.data, &args.search.config(args.alpha, args.seed))?;
            (report.selected, Some(report))
        }
    };
    let file = ModelFile {
        feature_names: table.feature_names,
        model: fit(table.data, h, args.alpha)?,
    };
    file.save(&args.out)?;
    if let Some(report) = &report {
        io::write_search_report(search_report_path(&args.out), report)?;
    }
    Ok((file, report))
}

pub fn cmd_predict(args: &PredictArgs) -> Result<usize> {
    let file = ModelFile::load(&args.model)?;
    let (names, queries) = io::read_query_csv(&args.queries)?;
    let dim = file.model.dim();
    if names.len() != dim {
        return Err(Error::Domain(format!(
            "query file has {} feature columns, model expects {dim}",
            names.len()
        )));
    }
    let bounds = file.model.predict_batch(queries.view())?;
    let rows: Vec<_> = bounds.into_iter().map(|b| (b, classify(&b, args.tau))).collect();
    io::write_predictions(&args.out, &rows)?;
    Ok(rows.len())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<ExperimentReport> {
    let table = io::read_feature_csv(&args.data)?;
    let report = run_repeated(&table.data, &args.experiment_config())?;
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_records(dir.join(RECORDS_FILE), &report)?;
    io::write_summary(dir.join(SUMMARY_FILE), &report)?;
    io::write_curves(dir.join(CURVES_FILE), &report.summary.curves)?;
    if args.plot {
        crate::plot::write_svg(dir.join(PLOT_FILE), &report.summary.curves)?;
    }
    Ok(report)
}

/// Timing statistics for one subset size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub t_optim: MeanStd,
    pub t_infer: MeanStd,
}

/// Draws [`BENCH_DRAWS`] seeded subsets of each size and runs one
/// train/test experiment on each.
pub fn bench(
    data: &Dataset,
    sizes: &[usize],
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if let Some(&s) = sizes.iter().find(|&&s| s > data.len()) {
        return Err(Error::Domain(format!(
            "bench size {s} exceeds the {} available rows",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut t_optim = Vec::with_capacity(BENCH_DRAWS);
        let mut t_infer = Vec::with_capacity(BENCH_DRAWS);
        for draw in 0..BENCH_DRAWS as u64 {
            let mut idx = rand::seq::index::sample(&mut rng, data.len(), size).into_vec();
            idx.sort_unstable();
            let subset = data.select(&idx);
            let record = run_experiment(&subset, config, seed.wrapping_add(draw))?;
            t_optim.push(record.t_optim);
            t_infer.push(record.t_infer);
        }
        out.push(BenchRow {
            size,
            t_optim: MeanStd::of(&t_optim),
            t_infer: MeanStd::of(&t_infer),
        });
    }
    Ok(out)
}

pub fn write_bench(path: impl AsRef<Path>, rows: &[BenchRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        kind => Error::Domain(format!("{kind:?}")),
    })?;
    let to_io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        kind => Error::Domain(format!("{kind:?}")),
    };
    w.write_record(BENCH_HEADER).map_err(to_io)?;
    for r in rows {
        w.write_record([
            r.size.to_string(),
            fmt_real(r.t_optim.mean),
            fmt_real(r.t_optim.std),
            fmt_real(r.t_infer.mean),
            fmt_real(r.t_infer.std),
            fmt_real((r.size as f64).log10()),
            fmt_real(r.t_optim.mean.log10()),
            fmt_real(r.t_infer.mean.log10()),
        ])
        .map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    let table = io::read_feature_csv(&args.data)?;
    let config = ExperimentConfig {
        train_fraction: args.train_fraction,
        repeats: 1,
        base_seed: args.seed,
        alpha: args.alpha,
        bandwidth: args.search.config(args.alpha, args.seed),
        ..Default::default()
    };
    let rows = bench(&table.data, &args.sizes, &config, args.seed)?;
    write_bench(&args.out, &rows)?;
    Ok(rows)
}

/// Dispatches a parsed command line and returns a one-line status message.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Fit(a) => {
            let (file, _) = cmd_fit(&a)?;
            Ok(format!(
                "wrote {} (h = {})",
                a.out.display(),
                fmt_real(file.model.bandwidth().value())
            ))
        }
        Command::Predict(a) => {
            let n = cmd_predict(&a)?;
            Ok(format!("wrote {n} rows to {}", a.out.display()))
        }
        Command::Eval(a) => {
            let r = cmd_eval(&a)?;
            let s = &r.summary;
            Ok(format!(
                "{}: auprc {:.4} [{:.4}], aurrc {:.4} [{:.4}] over {} runs",
                r.method,
                s.auprc.mean,
                s.auprc.std,
                s.aurrc.mean,
                s.aurrc.std,
                r.records.len()
            ))
        }
        Command::Bench(a) => {
            let rows = cmd_bench(&a)?;
            Ok(format!("wrote {} rows to {}", rows.len(), a.out.display()))
        }
    }
}
