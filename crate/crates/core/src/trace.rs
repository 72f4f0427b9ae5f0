//! Objective trajectories of individual runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// One replicator step.
    #[serde(rename = "RD")]
    Replicator,
    /// One neighborhood expansion.
    #[serde(rename = "NE")]
    Expansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub phase: Phase,
    #[serde(rename = "g")]
    pub objective: f64,
    #[serde(rename = "outer")]
    pub outer_iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    #[serde(rename = "vertex")]
    pub start_vertex: usize,
    pub steps: Vec<StepRecord>,
    /// Objective at the start point, before the first recorded step.
    #[serde(skip)]
    pub initial_objective: f64,
}

/// A maximal run of consecutive steps with the same phase and outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSegment {
    pub phase: Phase,
    pub outer_iteration: usize,
    /// Objective gain of each step over the one before it.
    pub gains: Vec<f64>,
}

impl RunTrace {
    pub fn new(start_vertex: usize, initial_objective: f64) -> Self {
        Self {
            start_vertex,
            steps: Vec::new(),
            initial_objective,
        }
    }

    pub(crate) fn push(&mut self, phase: Phase, objective: f64, outer_iteration: usize) {
        self.steps.push(StepRecord {
            phase,
            objective,
            outer_iteration,
        });
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.initial_objective).chain(self.steps.iter().map(|s| s.objective))
    }

    /// Largest drop between consecutive objectives (0 when non-decreasing).
    pub fn max_decrease(&self) -> f64 {
        let g: Vec<f64> = self.objectives().collect();
        g.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.steps.iter().filter(|s| s.phase == phase).count()
    }

    pub fn segments(&self) -> Vec<PhaseSegment> {
        let mut out: Vec<PhaseSegment> = Vec::new();
        let mut prev = self.initial_objective;
        for s in &self.steps {
            let gain = s.objective - prev;
            prev = s.objective;
            match out.last_mut() {
                Some(seg) if seg.phase == s.phase && seg.outer_iteration == s.outer_iteration => {
                    seg.gains.push(gain)
                }
                _ => out.push(PhaseSegment {
                    phase: s.phase,
                    outer_iteration: s.outer_iteration,
                    gains: vec![gain],
                }),
            }
        }
        out
    }
}

impl PhaseSegment {
    /// Mean gain over the first and last quarter of the segment's steps.
    pub fn quartile_gains(&self) -> (f64, f64) {
        let q = (self.gains.len() / 4).max(1);
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        (mean(&self.gains[..q]), mean(&self.gains[self.gains.len() - q..]))
    }
}

/// The trace attached to a run, if recording was enabled.
pub fn record(run: &RunResult) -> Result<RunTrace> {
    run.trace.clone().ok_or_else(|| {
        Error::invalid(format!(
            "run from vertex {} was made without trajectory recording",
            run.start_vertex
        ))
    })
}

/// Serializes traces as `[{"vertex": .., "steps": [{"phase", "g", "outer"}]}]`.
pub fn traces_to_json(traces: &[RunTrace]) -> String {
    serde_json::to_string(traces).expect("traces serialize")
}
