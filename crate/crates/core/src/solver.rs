//! Per-start solvers: Graph Shift and dominant-set replicator iteration.

use serde::{Deserialize, Serialize};

use crate::dynamics::{expand, run_phase, RdOptions};
use crate::error::{Error, Result};
use crate::kkt::{check_dims, kkt_check_with_support, KktReport};
use crate::matrix::AffinityMatrix;
use crate::simplex::{clamp_to_simplex, support_of, SimplexVector, Support};
use crate::trace::{Phase, RunTrace};
use crate::{
    DEFAULT_EPS_FIX, DEFAULT_EPS_KKT, DEFAULT_EPS_SUPP, DEFAULT_MAX_OUTER_ITERS,
    DEFAULT_DSPC_SPREAD, DEFAULT_MAX_RD_ITERS, DEFAULT_MERGE_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Replicator dynamics alternated with neighborhood expansion.
    Gs,
    /// Replicator dynamics alone.
    Dspc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gs => "gs",
            Algorithm::Dspc => "dspc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub eps_kkt: f64,
    pub eps_fix: f64,
    pub eps_supp: f64,
    pub max_rd_iters: usize,
    pub max_outer_iters: usize,
    pub record_trajectory: bool,
    /// See [`RdOptions::prune`].
    pub prune: bool,
    /// ∞-norm distance under which two terminal points are one mode.
    pub merge_tol: f64,
    /// Share of a DSPC vertex start spread uniformly over all vertices.
    pub dspc_spread: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Gs,
            eps_kkt: DEFAULT_EPS_KKT,
            eps_fix: DEFAULT_EPS_FIX,
            eps_supp: DEFAULT_EPS_SUPP,
            max_rd_iters: DEFAULT_MAX_RD_ITERS,
            max_outer_iters: DEFAULT_MAX_OUTER_ITERS,
            record_trajectory: false,
            prune: true,
            merge_tol: DEFAULT_MERGE_TOL,
            dspc_spread: DEFAULT_DSPC_SPREAD,
        }
    }
}

impl SolverConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_kkt", self.eps_kkt),
            ("eps_fix", self.eps_fix),
            ("eps_supp", self.eps_supp),
            ("merge_tol", self.merge_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.dspc_spread) {
            return Err(Error::invalid(format!(
                "dspc_spread must lie in [0, 1), got {}",
                self.dspc_spread
            )));
        }
        if self.max_rd_iters == 0 || self.max_outer_iters == 0 {
            return Err(Error::invalid("iteration budgets must be at least 1"));
        }
        Ok(())
    }

    pub fn rd_options(&self) -> RdOptions {
        RdOptions {
            eps_kkt: self.eps_kkt,
            eps_fix: self.eps_fix,
            eps_supp: self.eps_supp,
            max_iters: self.max_rd_iters,
            prune: self.prune,
            record: self.record_trajectory,
        }
    }
}

/// Where a run begins.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// The unit vector `e_i` for GS; mostly the barycenter of `{i} ∪ N(i)`
    /// for DSPC (see [`dspc_run`]).
    Vertex(usize),
    /// An explicit point, used as given by both algorithms.
    Point(SimplexVector),
}

impl From<usize> for Start {
    fn from(i: usize) -> Self {
        Start::Vertex(i)
    }
}

impl From<SimplexVector> for Start {
    fn from(x: SimplexVector) -> Self {
        Start::Point(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// The start vertex, or the largest component of an explicit start point.
    pub start_vertex: usize,
    pub final_x: SimplexVector,
    pub mode_support: Support,
    pub final_objective: f64,
    pub kkt: KktReport,
    /// Replicator steps in each outer iteration (`m_k`).
    pub rd_step_counts: Vec<usize>,
    /// Outer iterations (`m`).
    pub outer_iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub trace: Option<RunTrace>,
}

impl RunResult {
    /// Total replicator steps over the run.
    pub fn total_rd_steps(&self) -> usize {
        self.rd_step_counts.iter().sum()
    }
}

/// Runs whichever algorithm `cfg` selects.
pub fn solve(a: &AffinityMatrix, start: impl Into<Start>, cfg: &SolverConfig) -> Result<RunResult> {
    match cfg.algorithm {
        Algorithm::Gs => gs_run(a, start, cfg),
        Algorithm::Dspc => dspc_run(a, start, cfg),
    }
}

fn resolve_vertex(a: &AffinityMatrix, start: &Start) -> Result<usize> {
    match start {
        Start::Vertex(i) if *i < a.n() => Ok(*i),
        Start::Vertex(i) => Err(Error::invalid(format!(
            "start vertex {i} out of range for n = {}",
            a.n()
        ))),
        Start::Point(x) => {
            check_dims(a, x)?;
            Ok(x.as_slice()
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
                .0)
        }
    }
}

/// An isolated vertex is its own mode: `e_i` satisfies the KKT conditions
/// with `λ = 0` because every `(Ae_i)_j` is zero.
fn singleton(a: &AffinityMatrix, vertex: usize, cfg: &SolverConfig) -> Result<RunResult> {
    let x = SimplexVector::vertex(a.n(), vertex)?;
    Ok(RunResult {
        start_vertex: vertex,
        mode_support: support_of(&x, cfg.eps_supp),
        final_x: x,
        final_objective: 0.0,
        kkt: KktReport {
            lambda: 0.0,
            residual: 0.0,
            is_mode: true,
        },
        rd_step_counts: vec![0],
        outer_iterations: 1,
        converged: true,
        trace: cfg.record_trajectory.then(|| RunTrace::new(vertex, 0.0)),
    })
}

/// Graph Shift from one start.
///
/// Each outer iteration runs replicator dynamics to an ε-fixed point, tests
/// the KKT conditions, expands, and tests again. A zero-objective point (such
/// as `e_i`) skips the replicator phase, whose update is 0/0 there, and goes
/// straight to expansion.
pub fn gs_run(a: &AffinityMatrix, start: impl Into<Start>, cfg: &SolverConfig) -> Result<RunResult> {
    cfg.validate()?;
    let start = start.into();
    let vertex = resolve_vertex(a, &start)?;
    let mut x = match start {
        Start::Vertex(i) if !a.has_neighbors(i) => return singleton(a, i, cfg),
        Start::Vertex(i) => SimplexVector::vertex(a.n(), i)?,
        Start::Point(x) => x,
    };
    let rd = cfg.rd_options();
    let mut g = a.quad_form(x.as_slice());
    let mut trace = cfg.record_trajectory.then(|| RunTrace::new(vertex, g));
    let mut counts = Vec::new();
    let mut kkt;
    loop {
        let outer = counts.len() + 1;
        let mut steps = 0;
        if g > 0.0 {
            let out = run_phase(a, &x, &rd)?;
            if let Some(t) = trace.as_mut() {
                out.objectives
                    .iter()
                    .for_each(|&h| t.push(Phase::Replicator, h, outer));
            }
            steps = out.iterations;
            x = out.x;
            g = out.objective;
        }
        counts.push(steps);
        kkt = kkt_check_with_support(a, &x, cfg.eps_kkt, cfg.eps_supp)?;
        if kkt.is_mode {
            break;
        }
        let (y, _) = expand(a, &x, cfg.eps_supp)?;
        x = y;
        g = a.quad_form(x.as_slice());
        if let Some(t) = trace.as_mut() {
            t.push(Phase::Expansion, g, outer);
        }
        kkt = kkt_check_with_support(a, &x, cfg.eps_kkt, cfg.eps_supp)?;
        if kkt.is_mode || counts.len() >= cfg.max_outer_iters {
            break;
        }
    }
    Ok(RunResult {
        start_vertex: vertex,
        mode_support: support_of(&x, cfg.eps_supp),
        final_objective: g,
        final_x: x,
        converged: kkt.is_mode,
        kkt,
        outer_iterations: counts.len(),
        rd_step_counts: counts,
        trace,
    })
}

/// Dominant-set iteration: one replicator run, no expansion.
///
/// A vertex start uses the barycenter of the vertex's closed neighborhood,
/// since `e_i` itself has zero objective and the replicator update is
/// undefined there. A `dspc_spread` share of the mass goes to the global
/// barycenter so the start is interior; the replicator map never leaves the
/// face it starts on.
pub fn dspc_run(a: &AffinityMatrix, start: impl Into<Start>, cfg: &SolverConfig) -> Result<RunResult> {
    cfg.validate()?;
    let start = start.into();
    let vertex = resolve_vertex(a, &start)?;
    let x0 = match start {
        Start::Vertex(i) if !a.has_neighbors(i) => return singleton(a, i, cfg),
        Start::Vertex(i) => {
            let mut closed = a.neighbors(i);
            closed.push(i);
            closed.sort_unstable();
            let local = SimplexVector::uniform_on(a.n(), &closed)?;
            let eta = cfg.dspc_spread;
            if eta == 0.0 {
                local
            } else {
                let base = eta / a.n() as f64;
                clamp_to_simplex(local.as_slice().iter().map(|v| base + (1.0 - eta) * v).collect())?
            }
        }
        Start::Point(x) => x,
    };
    let g0 = a.quad_form(x0.as_slice());
    if !(g0 > 0.0) {
        let kkt = kkt_check_with_support(a, &x0, cfg.eps_kkt, cfg.eps_supp)?;
        if !kkt.is_mode {
            return Err(Error::invalid(
                "replicator iteration cannot start from a zero-objective point that is not a mode",
            ));
        }
        return Ok(RunResult {
            start_vertex: vertex,
            mode_support: support_of(&x0, cfg.eps_supp),
            final_x: x0,
            final_objective: g0,
            kkt,
            rd_step_counts: vec![0],
            outer_iterations: 1,
            converged: true,
            trace: cfg.record_trajectory.then(|| RunTrace::new(vertex, g0)),
        });
    }
    let out = run_phase(a, &x0, &cfg.rd_options())?;
    let mut trace = cfg.record_trajectory.then(|| RunTrace::new(vertex, g0));
    if let Some(t) = trace.as_mut() {
        out.objectives
            .iter()
            .for_each(|&h| t.push(Phase::Replicator, h, 1));
    }
    let kkt = kkt_check_with_support(a, &out.x, cfg.eps_kkt, cfg.eps_supp)?;
    Ok(RunResult {
        start_vertex: vertex,
        mode_support: support_of(&out.x, cfg.eps_supp),
        final_x: out.x,
        final_objective: out.objective,
        converged: kkt.is_mode,
        kkt,
        rd_step_counts: vec![out.iterations],
        outer_iterations: 1,
        trace,
    })
}
