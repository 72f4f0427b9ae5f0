//! Experiment grids over matrix families and scales, summarized per cell.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{
    sparse_rate, Family, GeneratorSpec, DEFAULT_BTM_BLOCKS, DEFAULT_PDM_SPARSE_RATE,
};
use crate::solver::{solve, Algorithm, RunResult, SolverConfig};
use crate::trace::RunTrace;

pub const CSV_HEADER: &str = "algorithm,case,scale,m_k,m,T_s,t_s,sr_pct,runs,converged_frac";

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub algorithm: Algorithm,
    pub case: Family,
    pub scale: usize,
    /// Mean over runs of the total replicator steps per run.
    pub m_k_avg: f64,
    /// Mean outer iterations per run.
    pub m_avg: f64,
    /// Wall time of one full pass over all starts, averaged over repeats.
    pub t_total_seconds: f64,
    /// `t_total_seconds / m_avg`.
    pub t_iter_seconds: f64,
    pub sparse_rate_pct: f64,
    pub runs: usize,
    pub converged_fraction: f64,
}

impl ExperimentSummary {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{},{},{}",
            self.algorithm.name(),
            self.case.label(),
            self.scale,
            self.m_k_avg,
            self.m_avg,
            self.t_total_seconds,
            self.t_iter_seconds,
            self.sparse_rate_pct,
            self.runs,
            self.converged_fraction,
        )
    }
}

pub fn summaries_to_csv(rows: &[ExperimentSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Summarizes the runs of one `(algorithm, family, scale)` cell.
pub fn aggregate(
    results: &[RunResult],
    wall_time: f64,
    spec: &GeneratorSpec,
    algorithm: Algorithm,
    sparse_rate: f64,
) -> Result<ExperimentSummary> {
    aggregate_with_failures(results, 0, wall_time, spec, algorithm, sparse_rate)
}

/// As [`aggregate`], counting `failures` runs that errored out as
/// attempted but unconverged.
pub fn aggregate_with_failures(
    results: &[RunResult],
    failures: usize,
    wall_time: f64,
    spec: &GeneratorSpec,
    algorithm: Algorithm,
    sparse_rate: f64,
) -> Result<ExperimentSummary> {
    if results.is_empty() {
        return Err(Error::invalid("cannot summarize an empty set of runs"));
    }
    let count = results.len() as f64;
    let m_k_avg = results.iter().map(|r| r.total_rd_steps() as f64).sum::<f64>() / count;
    let m_avg = results.iter().map(|r| r.outer_iterations as f64).sum::<f64>() / count;
    let runs = results.len() + failures;
    let converged = results.iter().filter(|r| r.converged).count();
    Ok(ExperimentSummary {
        algorithm,
        case: spec.family,
        scale: spec.n,
        m_k_avg,
        m_avg,
        t_total_seconds: wall_time,
        t_iter_seconds: wall_time / m_avg,
        sparse_rate_pct: 100.0 * sparse_rate,
        runs,
        converged_fraction: converged as f64 / runs as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub families: Vec<Family>,
    pub scales: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub repeats: usize,
    pub seed: u64,
    pub pdm_sparse_rate: f64,
    pub btm_blocks: usize,
    pub solver: SolverConfig,
    /// Run from this many evenly spaced start vertices instead of all `n`.
    pub max_starts: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            families: vec![Family::Fdm, Family::Pdm, Family::Btm],
            scales: vec![100, 500],
            algorithms: vec![Algorithm::Gs, Algorithm::Dspc],
            repeats: 3,
            seed: 1,
            pdm_sparse_rate: DEFAULT_PDM_SPARSE_RATE,
            btm_blocks: DEFAULT_BTM_BLOCKS,
            solver: SolverConfig::default(),
            max_starts: None,
        }
    }
}

impl ExperimentConfig {
    pub fn spec(&self, family: Family, n: usize, repeat: usize) -> GeneratorSpec {
        let seed = derive_seed(self.seed, family, n, repeat);
        match family {
            Family::Fdm => GeneratorSpec::fdm(n, seed),
            Family::Pdm => GeneratorSpec::pdm(n, self.pdm_sparse_rate, seed),
            Family::Btm => GeneratorSpec::btm(n, self.btm_blocks, seed),
        }
    }

    pub fn starts(&self, n: usize) -> Vec<usize> {
        match self.max_starts {
            Some(k) if k < n => (0..k).map(|i| i * n / k).collect(),
            _ => (0..n).collect(),
        }
    }
}

/// Matrix seed for one repeat of one grid cell. Both algorithms see the same
/// matrices.
pub fn derive_seed(base: u64, family: Family, n: usize, repeat: usize) -> u64 {
    let tag = match family {
        Family::Fdm => 1u64,
        Family::Pdm => 2,
        Family::Btm => 3,
    };
    splitmix64(splitmix64(splitmix64(base ^ (tag << 56)) ^ n as u64) ^ repeat as u64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub summary: ExperimentSummary,
    /// Every run of every repeat, in repeat-then-vertex order.
    pub results: Vec<RunResult>,
    /// Traces from the first repeat, when recording was enabled.
    pub traces: Vec<RunTrace>,
    /// Wall time of each individual run, seconds.
    pub run_seconds: Vec<f64>,
}

/// Runs the grid in `algorithm × family × scale` order.
///
/// A run that fails numerically counts as unconverged; it never stops the
/// grid. Matrix generation failures (an infeasible sparse rate, say) do.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<CellOutcome>> {
    cfg.solver.validate()?;
    if cfg.repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    let mut cells = Vec::new();
    for &algorithm in &cfg.algorithms {
        let solver = SolverConfig {
            algorithm,
            ..cfg.solver
        };
        for &family in &cfg.families {
            for &n in &cfg.scales {
                cells.push(run_cell(cfg, &solver, family, n)?);
            }
        }
    }
    Ok(cells)
}

fn run_cell(
    cfg: &ExperimentConfig,
    solver: &SolverConfig,
    family: Family,
    n: usize,
) -> Result<CellOutcome> {
    let mut results = Vec::new();
    let mut run_seconds = Vec::new();
    let mut traces = Vec::new();
    let mut failures = 0;
    let mut wall_total = 0.0;
    let mut rate_total = 0.0;
    for repeat in 0..cfg.repeats {
        let spec = cfg.spec(family, n, repeat);
        let a = spec.generate()?;
        rate_total += sparse_rate(&a);
        let started = Instant::now();
        let runs: Vec<(Result<RunResult>, f64)> = cfg
            .starts(n)
            .into_par_iter()
            .map(|i| {
                let t = Instant::now();
                let r = solve(&a, i, solver);
                (r, t.elapsed().as_secs_f64())
            })
            .collect();
        wall_total += started.elapsed().as_secs_f64();
        for (r, secs) in runs {
            run_seconds.push(secs);
            match r {
                Ok(mut r) => {
                    if let Some(t) = r.trace.take() {
                        if repeat == 0 {
                            traces.push(t);
                        }
                    }
                    results.push(r);
                }
                Err(_) => failures += 1,
            }
        }
    }
    let reps = cfg.repeats as f64;
    let spec = cfg.spec(family, n, 0);
    let summary = if results.is_empty() {
        ExperimentSummary {
            algorithm: solver.algorithm,
            case: family,
            scale: n,
            m_k_avg: f64::NAN,
            m_avg: f64::NAN,
            t_total_seconds: wall_total / reps,
            t_iter_seconds: f64::NAN,
            sparse_rate_pct: 100.0 * rate_total / reps,
            runs: failures,
            converged_fraction: 0.0,
        }
    } else {
        aggregate_with_failures(
            &results,
            failures,
            wall_total / reps,
            &spec,
            solver.algorithm,
            rate_total / reps,
        )?
    };
    Ok(CellOutcome {
        summary,
        results,
        traces,
        run_seconds,
    })
}
