//! Commands behind the `mhscg` binary. Every command writes plain CSV/JSON
//! files; multi-file outputs are staged in temporary files and only moved
//! into place once all of them were written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::dataset::{load_dataset, load_labels, save_dataset, save_labels, synth_multiview};
use crate::error::{Error, Result};
use crate::metrics::{
    evaluate, friedman_chi2, iman_davenport, mean_ranks, nemenyi_cd, MetricReport,
};
use crate::pipeline::{self, Method, RepeatScope, RunConfig, RunOutput};
use crate::solver::ConvergenceTrace;
use crate::Matrix;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "MHSCG_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "mhscg-out";

pub const LABELS_FILE: &str = "labels.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Parser)]
#[command(
    name = "mhscg",
    version,
    about = "Multi-view hypergraph spectral clustering on the Grassmannian"
)]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic multi-view dataset (view CSVs, labels, manifest).
    Synth(SynthArgs),
    /// Cluster a dataset with MHSCG or the single-view HSC baseline.
    Cluster(ClusterArgs),
    /// Score a label file against ground truth.
    Eval(EvalArgs),
    /// Friedman / Nemenyi comparison of algorithms across datasets.
    Compare(CompareArgs),
    /// Re-run a clustering from its config snapshot.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub n_per_cluster: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub views: usize,
    /// Feature count per view, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Mhscg)]
    pub method: Method,
    /// Nearest neighbors per hyperedge.
    #[arg(long, default_value_t = 10)]
    pub sigma: usize,
    /// Per-view neighbor counts, comma separated; overrides --sigma.
    #[arg(long, value_delimiter = ',')]
    pub view_sigma: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda0: f64,
    #[arg(long, default_value_t = 50)]
    pub max_outer: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub obj_tol: f64,
    #[arg(long, default_value_t = 30)]
    pub kmeans_restarts: usize,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, value_enum, default_value_t = RepeatScope::Kmeans)]
    pub repeat_scope: RepeatScope,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Min-max scale every feature column first.
    #[arg(long)]
    pub minmax: bool,
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,
}

impl ClusterArgs {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            method: self.method,
            sigma: self.sigma,
            view_sigma: self.view_sigma.clone(),
            lambda0: self.lambda0,
            max_outer: self.max_outer,
            epsilon: self.epsilon,
            obj_tol: self.obj_tol,
            kmeans_restarts: self.kmeans_restarts,
            repeats: self.repeats,
            repeat_scope: self.repeat_scope,
            seed: self.seed,
            minmax: self.minmax,
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Report path (default: metrics.json in the output directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// CSV with a header of algorithm names and one row per dataset.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub higher_is_better: bool,
    /// Studentized range critical value for the Nemenyi test.
    #[arg(long)]
    pub q_alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: the one recorded in the snapshot).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Everything needed to repeat a clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub version: String,
    pub manifest: PathBuf,
    pub out_dir: PathBuf,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub algorithms: Vec<String>,
    pub n_datasets: usize,
    pub mean_ranks: Vec<f64>,
    pub chi2: f64,
    /// `None` when the Iman-Davenport denominator vanishes (complete rank agreement).
    pub ff: Option<f64>,
    pub q_alpha: f64,
    pub cd: f64,
}

pub fn execute(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::InvalidArgument(
                "--threads must be at least 1".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Synth(args) => cmd_synth(&args).map(|_| ()),
        Command::Cluster(args) => cmd_cluster(&args).map(|_| ()),
        Command::Eval(args) => cmd_eval(&args).map(|_| ()),
        Command::Compare(args) => cmd_compare(&args).map(|_| ()),
        Command::Replay(args) => cmd_replay(&args).map(|_| ()),
    }
}

/// Returns the manifest path.
pub fn cmd_synth(args: &SynthArgs) -> Result<PathBuf> {
    let ds = synth_multiview(
        args.n_per_cluster,
        args.k,
        args.views,
        &args.dims,
        args.noise,
        args.seed,
    )?;
    let path = save_dataset(&ds, &args.out_dir)?;
    info!(
        "wrote {} ({} samples, {} views)",
        path.display(),
        ds.n_samples(),
        ds.n_views()
    );
    Ok(path)
}

/// Returns the run output and the output directory.
pub fn cmd_cluster(args: &ClusterArgs) -> Result<RunOutput> {
    run_and_write(&args.manifest, &args.out_dir, &args.run_config())
}

pub fn cmd_replay(args: &ReplayArgs) -> Result<RunOutput> {
    let snap: RunSnapshot = read_json(&args.config)?;
    let out_dir = args.out_dir.clone().unwrap_or_else(|| snap.out_dir.clone());
    run_and_write(&snap.manifest, &out_dir, &snap.config)
}

fn run_and_write(manifest: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<RunOutput> {
    let ds = load_dataset(manifest)?;
    let out = pipeline::run(&ds, cfg)?;
    let manifest = fs::canonicalize(manifest).map_err(|e| Error::io(manifest, e))?;
    let snapshot = RunSnapshot {
        version: env!("CARGO_PKG_VERSION").to_string(),
        manifest,
        out_dir: out_dir.to_path_buf(),
        config: cfg.clone(),
    };
    write_artifacts(out_dir, &out, &snapshot, ds.n_views())?;
    if let Some(m) = &out.metrics {
        info!(
            "acc {:.4}±{:.4}  nmi {:.4}±{:.4}  over {} runs",
            m.acc.mean, m.acc.std, m.nmi.mean, m.nmi.std, m.runs
        );
    }
    Ok(out)
}

fn write_artifacts(
    dir: &Path,
    out: &RunOutput,
    snapshot: &RunSnapshot,
    n_views: usize,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut staged = Vec::new();

    let labels = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    save_labels(&out.labels, labels.path())?;
    staged.push((labels, LABELS_FILE));

    if let Some(metrics) = &out.metrics {
        staged.push((stage_json(dir, metrics)?, METRICS_FILE));
    }

    let lambda0 = snapshot.config.lambda0;
    let trace = stage(dir, &trace_csv(out.trace.as_ref(), n_views, lambda0))?;
    staged.push((trace, TRACE_FILE));

    staged.push((stage_json(dir, snapshot)?, CONFIG_FILE));

    for (file, name) in staged {
        let target = dir.join(name);
        file.persist(&target)
            .map_err(|e| Error::io(&target, e.error))?;
    }
    Ok(())
}

/// Trace CSV: `iter,objective,val,lambda_1..lambda_r`. Row 0 is the initial
/// state. HSC runs have no optimization and get a header-only file.
pub fn trace_csv(trace: Option<&ConvergenceTrace>, n_views: usize, lambda0: f64) -> String {
    let mut out = String::from("iter,objective,val");
    for l in 1..=n_views {
        out.push_str(&format!(",lambda_{l}"));
    }
    out.push('\n');
    let Some(trace) = trace else { return out };
    let row = |out: &mut String, iter: usize, f: f64, val: Option<f64>, lambdas: &[f64]| {
        let val = val.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{iter},{f},{val}"));
        for l in lambdas {
            out.push_str(&format!(",{l}"));
        }
        out.push('\n');
    };
    let initial = if trace.initial_lambdas.is_empty() {
        vec![lambda0; n_views]
    } else {
        trace.initial_lambdas.clone()
    };
    row(&mut out, 0, trace.initial_objective, None, &initial);
    for rec in &trace.records {
        row(
            &mut out,
            rec.iter,
            rec.objective,
            Some(rec.val),
            &rec.lambdas,
        );
    }
    out
}

pub fn cmd_eval(args: &EvalArgs) -> Result<MetricReport> {
    let pred = load_labels(&args.pred)?;
    let truth = load_labels(&args.truth)?;
    if pred.len() != truth.len() {
        return Err(Error::shape(
            format!("{} labels (truth)", truth.len()),
            format!("{} labels (pred)", pred.len()),
        ));
    }
    let report = MetricReport::from_runs(&[evaluate(&pred, &truth)?])?;
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| args.out_dir.join(METRICS_FILE));
    write_json_atomic(&path, &report)?;
    Ok(report)
}

/// Reads a score table: a header of algorithm names, then one numeric row per dataset.
pub fn read_score_table(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        if record.len() != names.len() {
            return Err(Error::parse(
                path,
                format!(
                    "row {} has {} cells, header has {}",
                    i + 1,
                    record.len(),
                    names.len()
                ),
            ));
        }
        for cell in record.iter() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::parse(path, format!("row {}: invalid number {cell:?}", i + 1))
            })?;
            if v.is_nan() {
                return Err(Error::parse(path, format!("row {}: NaN score", i + 1)));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows < 2 || names.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 datasets and 2 algorithms, got {rows}×{}",
            names.len()
        )));
    }
    Ok((
        names.clone(),
        Matrix::from_row_slice(rows, names.len(), &values),
    ))
}

pub fn cmd_compare(args: &CompareArgs) -> Result<CompareReport> {
    let (algorithms, scores) = read_score_table(&args.scores)?;
    let table = mean_ranks(&scores, args.higher_is_better)?;
    let chi2 = friedman_chi2(&table)?;
    let ff = iman_davenport(chi2, table.n_datasets(), table.n_algorithms()).ok();
    let report = CompareReport {
        cd: nemenyi_cd(table.n_algorithms(), table.n_datasets(), args.q_alpha),
        algorithms,
        n_datasets: table.n_datasets(),
        mean_ranks: table.mean_ranks,
        chi2,
        ff,
        q_alpha: args.q_alpha,
    };
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| args.out_dir.join("compare.json"));
    write_json_atomic(&path, &report)?;
    Ok(report)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

fn stage(dir: &Path, contents: &str) -> Result<NamedTempFile> {
    let mut file = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    file.write_all(contents.as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| Error::io(file.path(), e))?;
    Ok(file)
}

fn stage_json<T: Serialize>(dir: &Path, value: &T) -> Result<NamedTempFile> {
    let json = serde_json::to_string_pretty(value).expect("report types serialize");
    stage(dir, &(json + "\n"))
}

fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    stage_json(dir, value)?
        .persist(path)
        .map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
