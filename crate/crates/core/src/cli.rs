//! The `gshift` command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 non-convergence.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::cluster::cluster_all;
use crate::error::{Error, Result};
use crate::experiment::{run_grid, summaries_to_csv, ExperimentConfig};
use crate::generate::{
    Family, GeneratorMetadata, GeneratorSpec, DEFAULT_BTM_BLOCKS, DEFAULT_PDM_SPARSE_RATE,
};
use crate::io::{read_matrix_file, write_matrix_file, MatrixFormat};
use crate::matrix::AffinityMatrix;
use crate::solver::{solve, Algorithm, SolverConfig};
use crate::trace::{traces_to_json, RunTrace};
use crate::{
    DEFAULT_EPS_FIX, DEFAULT_EPS_KKT, DEFAULT_EPS_SUPP, DEFAULT_MAX_OUTER_ITERS,
    DEFAULT_DSPC_SPREAD, DEFAULT_MAX_RD_ITERS, DEFAULT_MERGE_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gshift", version, about = "Dense-subgraph mode seeking on affinity matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic affinity matrix and its JSON sidecar.
    Generate(GenerateArgs),
    /// Solve from one start vertex and print the result as JSON.
    Run(RunArgs),
    /// Solve from every vertex and group vertices by terminal mode.
    Cluster(ClusterArgs),
    /// Summarize a grid of families × scales × algorithms as CSV.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GeneratorFlags {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Target fraction of nonzero cells (PDM).
    #[arg(long)]
    pub sparse_rate: Option<f64>,
    /// Number of diagonal blocks (BTM).
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl GeneratorFlags {
    fn spec(&self) -> Result<GeneratorSpec> {
        let family = self
            .family
            .ok_or_else(|| Error::invalid("--family is required"))?;
        let n = self.n.ok_or_else(|| Error::invalid("--n is required with --family"))?;
        Ok(match family {
            Family::Fdm => GeneratorSpec::fdm(n, self.seed),
            Family::Pdm => GeneratorSpec::pdm(
                n,
                self.sparse_rate.unwrap_or(DEFAULT_PDM_SPARSE_RATE),
                self.seed,
            ),
            Family::Btm => {
                GeneratorSpec::btm(n, self.blocks.unwrap_or(DEFAULT_BTM_BLOCKS), self.seed)
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct MatrixSource {
    /// Read the matrix from a dense or sparse text file.
    #[arg(long, conflicts_with = "family")]
    pub matrix_file: Option<PathBuf>,
    #[command(flatten)]
    pub generator: GeneratorFlags,
}

impl MatrixSource {
    fn load(&self) -> Result<(AffinityMatrix, serde_json::Value)> {
        match (&self.matrix_file, self.generator.family) {
            (Some(path), None) => Ok((read_matrix_file(path)?, json!({ "matrix_file": path }))),
            (None, Some(_)) => {
                let spec = self.generator.spec()?;
                Ok((spec.generate()?, json!({ "generator": spec })))
            }
            _ => Err(Error::invalid("give exactly one of --matrix-file or --family")),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    #[arg(long, value_enum, default_value_t = Algorithm::Gs)]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = DEFAULT_EPS_KKT)]
    pub tol_kkt: f64,
    #[arg(long, default_value_t = DEFAULT_EPS_FIX)]
    pub tol_fix: f64,
    #[arg(long, default_value_t = DEFAULT_EPS_SUPP)]
    pub tol_supp: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_RD_ITERS)]
    pub max_rd_iters: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_OUTER_ITERS)]
    pub max_outer_iters: usize,
    #[arg(long, default_value_t = DEFAULT_MERGE_TOL)]
    pub merge_tol: f64,
    /// Share of a DSPC vertex start spread over all vertices.
    #[arg(long, default_value_t = DEFAULT_DSPC_SPREAD)]
    pub dspc_spread: f64,
    /// Keep every replicator step instead of pruning vanishing components.
    #[arg(long)]
    pub no_prune: bool,
}

impl SolverFlags {
    fn config(&self, record_trajectory: bool) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            algorithm: self.algorithm,
            eps_kkt: self.tol_kkt,
            eps_fix: self.tol_fix,
            eps_supp: self.tol_supp,
            max_rd_iters: self.max_rd_iters,
            max_outer_iters: self.max_outer_iters,
            record_trajectory,
            prune: !self.no_prune,
            merge_tol: self.merge_tol,
            dspc_spread: self.dspc_spread,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorFlags,
    /// Matrix path; defaults to `<family>_<n>_<seed>.txt`. The sidecar is
    /// written to the same path with `.json` appended.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Dense)]
    pub format: MatrixFormat,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long)]
    pub start: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Write the objective trajectory as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Labels CSV path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Modes JSON path; defaults to the labels path with `.modes.json` appended.
    #[arg(long)]
    pub modes: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Family::Fdm, Family::Pdm, Family::Btm])]
    pub families: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_values_t = [100, 500])]
    pub scales: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Algorithm::Gs, Algorithm::Dspc])]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_PDM_SPARSE_RATE)]
    pub sparse_rate: f64,
    #[arg(long, default_value_t = DEFAULT_BTM_BLOCKS)]
    pub blocks: usize,
    /// Run from this many evenly spaced vertices per matrix instead of all.
    #[arg(long)]
    pub max_starts: Option<usize>,
    /// Summary CSV path (stdout if absent); metadata goes to `<out>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trace path prefix; one `<prefix>.<alg>-<family>-<n>.json` per cell, family in lowercase.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
}

/// Parses `args` and runs the command, writing primary output to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INVALID;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Run(a) => cmd_run(&a, out),
        Command::Cluster(a) => with_threads(a.threads, || cmd_cluster(&a, out)),
        Command::Experiment(a) => with_threads(a.threads, || cmd_experiment(&a, out)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_INVALID,
    }
}

fn with_threads(threads: usize, f: impl FnOnce() -> Result<i32> + Send) -> Result<i32> {
    if threads == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {threads} worker threads: {e}")))?
        .install(f)
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn emit(out: &mut (dyn Write + Send), text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn solver_json(cfg: &SolverConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let spec = args.generator.spec()?;
    let a = spec.generate()?;
    let path = args.out.clone().unwrap_or_else(|| {
        PathBuf::from(format!(
            "{}_{}_{}.txt",
            spec.family.label().to_lowercase(),
            spec.n,
            spec.seed
        ))
    });
    write_matrix_file(&path, &a, args.format)?;
    let meta = GeneratorMetadata::new(spec, &a);
    let mut doc = serde_json::to_value(&meta).expect("metadata serializes");
    doc["format"] = json!(args.format);
    doc["matrix_file"] = json!(path);
    let text = pretty(&doc);
    write_file(&sidecar(&path, ".json"), &text)?;
    emit(out, &text)?;
    Ok(EXIT_OK)
}

pub fn cmd_run(args: &RunArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let cfg = args.solver.config(args.trace.is_some())?;
    let (a, source) = args.source.load()?;
    if args.start >= a.n() {
        return Err(Error::invalid(format!(
            "--start {} out of range for n = {}",
            args.start,
            a.n()
        )));
    }
    let mut result = solve(&a, args.start, &cfg)?;
    if let Some(path) = &args.trace {
        let trace = result.trace.take().into_iter().collect::<Vec<RunTrace>>();
        write_file(path, &traces_to_json(&trace))?;
    }
    let mut doc = serde_json::to_value(&result).expect("result serializes");
    doc["total_rd_steps"] = json!(result.total_rd_steps());
    doc["config"] = solver_json(&cfg);
    doc["source"] = source;
    emit(out, &pretty(&doc))?;
    Ok(if result.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

pub fn cmd_cluster(args: &ClusterArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let cfg = args.solver.config(args.trace.is_some())?;
    let (a, source) = args.source.load()?;
    let (mut results, assignment) = cluster_all(&a, &cfg)?;

    let mut csv = String::from("vertex,label\n");
    for (v, label) in assignment.labels.iter().enumerate() {
        let _ = writeln!(csv, "{v},{}", label.map_or(-1, |l| l as i64));
    }
    let all_converged = assignment.all_converged();
    let doc = json!({
        "modes": assignment.modes,
        "all_converged": all_converged,
        "unassigned": assignment.labels.iter().filter(|l| l.is_none()).count(),
        "config": solver_json(&cfg),
        "source": source,
    });
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => emit(out, &csv)?,
    }
    let modes_path = args
        .modes
        .clone()
        .or_else(|| args.out.as_ref().map(|p| sidecar(p, ".modes.json")));
    if let Some(path) = modes_path {
        write_file(&path, &pretty(&doc))?;
    }
    if let Some(path) = &args.trace {
        let traces: Vec<RunTrace> = results.iter_mut().filter_map(|r| r.trace.take()).collect();
        write_file(path, &traces_to_json(&traces))?;
    }
    Ok(if all_converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

pub fn cmd_experiment(args: &ExperimentArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let solver = args.solver.config(args.trace.is_some())?;
    if args.scales.iter().any(|&n| n < 2) {
        return Err(Error::invalid("every scale must be at least 2"));
    }
    let cfg = ExperimentConfig {
        families: args.families.clone(),
        scales: args.scales.clone(),
        algorithms: args.algorithms.clone(),
        repeats: args.repeats,
        seed: args.seed,
        pdm_sparse_rate: args.sparse_rate,
        btm_blocks: args.blocks,
        solver,
        max_starts: args.max_starts,
    };
    let cells = run_grid(&cfg)?;
    let rows: Vec<_> = cells.iter().map(|c| c.summary.clone()).collect();
    let csv = summaries_to_csv(&rows);
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            let meta = json!({ "experiment": cfg, "csv": path });
            write_file(&sidecar(path, ".json"), &pretty(&meta))?;
        }
        None => emit(out, &csv)?,
    }
    if let Some(prefix) = &args.trace {
        for c in &cells {
            let s = &c.summary;
            let path = sidecar(
                prefix,
                &format!(".{}-{}-{}.json", s.algorithm.name(), s.case.label().to_lowercase(), s.scale),
            );
            write_file(&path, &traces_to_json(&c.traces))?;
        }
    }
    Ok(if rows.iter().all(|r| r.converged_fraction == 1.0) {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}
