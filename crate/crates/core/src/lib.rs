//! Dense-subgraph mode seeking on affinity matrices.
//!
//! Two solvers share one pair of simplex mappings:
//!
//! - **Graph Shift (GS)** alternates replicator dynamics, which shrinks the
//!   current subgraph towards a local mode, with a neighborhood expansion line
//!   search, which pulls in outside vertices whose affinity beats the current
//!   density.
//! - **Dominant sets / pairwise clustering (DSPC)** runs replicator dynamics
//!   alone from an interior start.
//!
//! Both maximize `g(x) = xᵀAx` over the standard simplex and stop at points
//! satisfying the KKT conditions of that problem. The objective never
//! decreases along either iteration; [`solver`] and [`trace`] expose enough
//! of each run to check that at runtime.

pub mod cli;
pub mod cluster;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod io;
pub mod kkt;
pub mod matrix;
pub mod simplex;
pub mod solver;
pub mod trace;

pub use cluster::{cluster_all, ClusterAssignment, Mode};
pub use dynamics::{
    delta_g_closed_form, expansion_components, expansion_step, replicator_run, replicator_step,
    ExpansionComponents, RdOptions, RdOutcome, RdStop,
};
pub use error::{Error, Result};
pub use generate::{gen_btm, gen_fdm, gen_pdm, sparse_rate, Family, GeneratorSpec};
pub use kkt::{kkt_check, kkt_check_with_support, KktReport};
pub use matrix::AffinityMatrix;
pub use simplex::{clamp_to_simplex, support_of, SimplexVector, Support};
pub use solver::{dspc_run, gs_run, solve, Algorithm, RunResult, SolverConfig, Start};
pub use trace::{record, Phase, RunTrace, StepRecord};

/// Components at or below this value are treated as outside the support.
pub const DEFAULT_EPS_SUPP: f64 = 1e-8;
/// Default KKT residual accepted as a mode.
pub const DEFAULT_EPS_KKT: f64 = 1e-6;
/// Default ∞-norm displacement under which a replicator run counts as fixed.
pub const DEFAULT_EPS_FIX: f64 = 1e-12;
/// Default budget of replicator steps for one phase.
pub const DEFAULT_MAX_RD_ITERS: usize = 100_000;
/// Default budget of outer GS iterations.
pub const DEFAULT_MAX_OUTER_ITERS: usize = 100;
/// Default ∞-norm tolerance for merging terminal points into one mode.
pub const DEFAULT_MERGE_TOL: f64 = 1e-4;
/// Default share of a DSPC vertex start placed on the global barycenter.
pub const DEFAULT_DSPC_SPREAD: f64 = 0.01;
