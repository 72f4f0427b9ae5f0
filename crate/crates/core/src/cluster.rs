//! Grouping start vertices by the mode their run terminates at.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::AffinityMatrix;
use crate::simplex::{SimplexVector, Support};
use crate::solver::{solve, RunResult, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub id: usize,
    /// Terminal point of the first run that reached this mode.
    pub representative: SimplexVector,
    pub support: Support,
    pub objective: f64,
    /// Number of start vertices assigned here.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub modes: Vec<Mode>,
    /// Mode id per start vertex; `None` where the run did not converge.
    pub labels: Vec<Option<usize>>,
}

impl ClusterAssignment {
    pub fn all_converged(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }
}

/// Runs the configured algorithm from every vertex and merges terminal points.
///
/// Two runs share a mode when their supports are equal or their terminal
/// points are within `cfg.merge_tol` in the ∞-norm. Mode ids are handed out
/// in order of the lowest start vertex reaching them. Runs may execute in
/// parallel; results come back in vertex order either way.
pub fn cluster_all(
    a: &AffinityMatrix,
    cfg: &SolverConfig,
) -> Result<(Vec<RunResult>, ClusterAssignment)> {
    cfg.validate()?;
    let results = (0..a.n())
        .into_par_iter()
        .map(|i| solve(a, i, cfg))
        .collect::<Result<Vec<_>>>()?;
    let assignment = assign_modes(&results, cfg.merge_tol);
    Ok((results, assignment))
}

pub fn assign_modes(results: &[RunResult], merge_tol: f64) -> ClusterAssignment {
    let mut modes: Vec<Mode> = Vec::new();
    let labels = results
        .iter()
        .map(|r| {
            if !r.converged {
                return None;
            }
            let found = modes.iter_mut().find(|m| {
                m.support == r.mode_support
                    || m.representative.max_abs_diff(&r.final_x) <= merge_tol
            });
            Some(match found {
                Some(m) => {
                    m.size += 1;
                    m.id
                }
                None => {
                    let id = modes.len();
                    modes.push(Mode {
                        id,
                        representative: r.final_x.clone(),
                        support: r.mode_support.clone(),
                        objective: r.final_objective,
                        size: 1,
                    });
                    id
                }
            })
        })
        .collect();
    ClusterAssignment { modes, labels }
}
