//! The two simplex mappings shared by every solver.
//!
//! - [`replicator_step`]: `x'_i = x_i (Ax)_i / xᵀAx`. Never decreases the
//!   objective and keeps the support from growing.
//! - [`expansion_step`]: a line search `x + t*·b` along a direction that moves
//!   mass from the support onto outside vertices whose affinity to `x` beats
//!   the current density `λ = xᵀAx`.
//!
//! With `v_i = ((Ax)_i − λ)⁺` off the support, `s = Σv`, `ζ = Σv²`,
//! `ω = vᵀAv` and `b = v − s·x`, the gain along the line is exactly
//!
//! ```text
//! g(x + t·b) − g(x) = −(λs² + 2sζ − ω)·t² + 2ζ·t
//! ```
//!
//! since `bᵀAx = ζ` and `bᵀAb = ω − 2sζ − λs²`. [`delta_g_closed_form`]
//! evaluates the right-hand side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kkt::{check_dims, dot, support_residual};
use crate::matrix::{nonzero_indices, AffinityMatrix};
use crate::simplex::{clamp_with, support_of, SimplexVector};
use crate::{DEFAULT_EPS_FIX, DEFAULT_EPS_KKT, DEFAULT_EPS_SUPP, DEFAULT_MAX_RD_ITERS};

/// One replicator update. Fails with [`Error::Degenerate`] when `xᵀAx = 0`.
pub fn replicator_step(a: &AffinityMatrix, x: &SimplexVector) -> Result<SimplexVector> {
    check_dims(a, x)?;
    let active = nonzero_indices(x.as_slice());
    let omega = a.mul_vec_on(x.as_slice(), &active);
    let denom = dot(x.as_slice(), &omega);
    if !(denom > 0.0) {
        return Err(Error::Degenerate);
    }
    let next = x
        .as_slice()
        .iter()
        .zip(&omega)
        .map(|(xi, wi)| wi * xi / denom)
        .collect();
    clamp_with(next, "replicator_step")
}

/// Stopping rules and budget for a replicator run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdOptions {
    /// Stop once `max_{i∈σ} |(Ax)_i − xᵀAx|` is at most this.
    pub eps_kkt: f64,
    /// Stop once a step moves no component by `eps_fix` or more.
    pub eps_fix: f64,
    pub eps_supp: f64,
    pub max_iters: usize,
    /// Zero out components that are shrinking and have fallen to `eps_supp`
    /// or below, then renormalize. Keeps step cost proportional to the
    /// surviving support.
    pub prune: bool,
    /// Keep the objective after every step in [`RdOutcome::objectives`].
    pub record: bool,
}

impl Default for RdOptions {
    fn default() -> Self {
        Self {
            eps_kkt: DEFAULT_EPS_KKT,
            eps_fix: DEFAULT_EPS_FIX,
            eps_supp: DEFAULT_EPS_SUPP,
            max_iters: DEFAULT_MAX_RD_ITERS,
            prune: true,
            record: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RdStop {
    /// The on-support residual reached `eps_kkt`.
    Residual,
    /// The ∞-norm displacement fell below `eps_fix`.
    Fixed,
    /// `max_iters` steps were taken without meeting either rule.
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdOutcome {
    pub x: SimplexVector,
    /// Steps applied (`m_k`).
    pub iterations: usize,
    pub stop: RdStop,
    /// `max_{i∈σ} |(Ax)_i − xᵀAx|` at the final point.
    pub support_residual: f64,
    pub objective: f64,
    /// Objective after each step; empty unless recording.
    pub objectives: Vec<f64>,
}

/// Iterates [`replicator_step`] until a stop rule fires.
///
/// At least one step is always applied. Running out of budget is reported as
/// [`Error::NotConverged`] carrying the objective trace.
pub fn replicator_run(
    a: &AffinityMatrix,
    x0: &SimplexVector,
    opts: &RdOptions,
) -> Result<RdOutcome> {
    let mut opts = *opts;
    opts.record = true;
    let out = run_phase(a, x0, &opts)?;
    match out.stop {
        RdStop::Budget => Err(Error::NotConverged {
            iterations: out.iterations,
            last_objective: out.objective,
            trace: out.objectives,
        }),
        _ => Ok(out),
    }
}

/// Same iteration as [`replicator_run`], but budget exhaustion comes back as
/// [`RdStop::Budget`] rather than an error.
///
/// When a stop rule fires, and every [`SETTLE_EVERY`] steps otherwise,
/// [`settle_support`] gets a chance to move components the multiplicative
/// update would take very long to settle. A stop rule only ends the run if it
/// leaves `x` unchanged.
pub(crate) fn run_phase(
    a: &AffinityMatrix,
    x0: &SimplexVector,
    opts: &RdOptions,
) -> Result<RdOutcome> {
    check_dims(a, x0)?;
    if opts.max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    let n = a.n();
    let mut x = x0.clone();
    let mut active = nonzero_indices(x.as_slice());
    let mut omega = a.mul_vec_on(x.as_slice(), &active);
    let mut g = dot(x.as_slice(), &omega);
    if !(g > 0.0) {
        return Err(Error::Degenerate);
    }
    let mut pruned = vec![false; n];
    let mut objectives = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(&omega)
            .map(|(xi, wi)| wi * xi / g)
            .collect();
        if opts.prune {
            let mut removed = false;
            for &i in &active {
                if next[i] <= opts.eps_supp && next[i] < x[i] {
                    next[i] = 0.0;
                    pruned[i] = true;
                    removed = true;
                }
            }
            if removed {
                let kept: f64 = next.iter().sum();
                next.iter_mut().for_each(|v| *v /= kept);
            }
        }
        let next = clamp_with(next, "replicator_step")?;
        let displacement = next.max_abs_diff(&x);
        x = next;
        active = nonzero_indices(x.as_slice());
        omega = a.mul_vec_on(x.as_slice(), &active);
        g = dot(x.as_slice(), &omega);
        if opts.record {
            objectives.push(g);
        }
        let residual = support_residual(&omega, g, &support_of(&x, opts.eps_supp));
        let candidate = if residual <= opts.eps_kkt {
            Some(RdStop::Residual)
        } else if displacement < opts.eps_fix {
            Some(RdStop::Fixed)
        } else {
            None
        };
        if let Some(stop) = candidate {
            if !settle_support(a, &mut x, g, &mut pruned, opts)? {
                return Ok(RdOutcome {
                    x,
                    iterations,
                    stop,
                    support_residual: residual,
                    objective: g,
                    objectives,
                });
            }
            active = nonzero_indices(x.as_slice());
            omega = a.mul_vec_on(x.as_slice(), &active);
            g = dot(x.as_slice(), &omega);
        } else if iterations % SETTLE_EVERY == 0 && settle_support(a, &mut x, g, &mut pruned, opts)? {
            active = nonzero_indices(x.as_slice());
            omega = a.mul_vec_on(x.as_slice(), &active);
            g = dot(x.as_slice(), &omega);
        }
        if iterations >= opts.max_iters {
            let residual = support_residual(&omega, g, &support_of(&x, opts.eps_supp));
            return Ok(RdOutcome {
                x,
                iterations,
                stop: RdStop::Budget,
                support_residual: residual,
                objective: g,
                objectives,
            });
        }
    }
}

/// Replicator steps between unconditional [`settle_support`] passes.
pub const SETTLE_EVERY: usize = 1024;
/// Components above this are left to the multiplicative update.
pub const SETTLE_MAX: f64 = 1e-4;

/// Support moves at a would-be stopping point. Each one raises `g`. With
/// `e_j = (Ax)_j − λ`, moving mass `δ` onto or off `j` and renormalizing
/// changes `g` by `(2δ·e_j − λδ²) / (1 ± δ)²` (sign of `δ` included in
/// `e_j`), which is positive while `δ < 2|e_j| / λ`. For components at most
/// [`SETTLE_MAX`]:
///
/// - a nonzero one with `−e_j > eps_kkt` and `δ = x_j < 2|e_j| / λ` is
///   dropped. This cuts short the algebraic decay seen near degenerate
///   modes.
/// - one with `e_j > eps_kkt` that is alive or was pruned gains
///   `δ = e_j / λ`, the best single-coordinate move. The multiplicative update
///   grows such a component by a factor of only `1 + e_j / λ` per step.
///
/// Components that are exactly zero and were never pruned stay zero, so the
/// iteration never leaves its starting face. Returns whether `x` changed.
fn settle_support(
    a: &AffinityMatrix,
    x: &mut SimplexVector,
    lambda: f64,
    pruned: &mut [bool],
    opts: &RdOptions,
) -> Result<bool> {
    let ax = a.mul_vec(x.as_slice());
    let mut raw = x.as_slice().to_vec();
    let mut changed = false;
    for (j, (xj, axj)) in raw.iter_mut().zip(&ax).enumerate() {
        if *xj > SETTLE_MAX {
            continue;
        }
        let excess = axj - lambda;
        if *xj > 0.0 && -excess > opts.eps_kkt && lambda * *xj < -2.0 * excess {
            *xj = 0.0;
            pruned[j] = true;
            changed = true;
        } else if excess > opts.eps_kkt && (*xj > 0.0 || pruned[j]) {
            *xj += excess / lambda;
            pruned[j] = false;
            changed = true;
        }
    }
    if changed {
        let total: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|v| *v /= total);
        *x = clamp_with(raw, "replicator_step")?;
    }
    Ok(changed)
}

/// Everything the expansion line search derives from the current point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionComponents {
    /// `((Ax)_i − λ)⁺` off the support, zero on it.
    pub v: Vec<f64>,
    pub s: f64,
    pub zeta: f64,
    pub omega: f64,
    pub lambda: f64,
    /// Search direction `v − s·x`.
    pub b: Vec<f64>,
    pub t_star: f64,
}

impl ExpansionComponents {
    /// `λs² + 2sζ − ω`, the negated curvature of the gain along `b`.
    pub fn discriminant(&self) -> f64 {
        self.lambda * self.s * self.s + 2.0 * self.s * self.zeta - self.omega
    }
}

pub fn expansion_components(a: &AffinityMatrix, x: &SimplexVector) -> Result<ExpansionComponents> {
    expansion_components_with(a, x, DEFAULT_EPS_SUPP)
}

pub fn expansion_components_with(
    a: &AffinityMatrix,
    x: &SimplexVector,
    eps_supp: f64,
) -> Result<ExpansionComponents> {
    check_dims(a, x)?;
    let xs = x.as_slice();
    let ax = a.mul_vec(xs);
    let lambda = dot(xs, &ax);
    let support = support_of(x, eps_supp);
    let v: Vec<f64> = ax
        .iter()
        .enumerate()
        .map(|(i, &w)| if support.contains(i) { 0.0 } else { (w - lambda).max(0.0) })
        .collect();
    let s: f64 = v.iter().sum();
    let zeta: f64 = v.iter().map(|vi| vi * vi).sum();
    if s == 0.0 {
        return Ok(ExpansionComponents {
            b: vec![0.0; xs.len()],
            v,
            s,
            zeta,
            omega: 0.0,
            lambda,
            t_star: 0.0,
        });
    }
    let omega = a.quad_form(&v);
    let b = v.iter().zip(xs).map(|(vi, xi)| vi - s * xi).collect();
    let d = lambda * s * s + 2.0 * s * zeta - omega;
    let t_star = if d <= 0.0 { 1.0 / s } else { (1.0 / s).min(zeta / d) };
    Ok(ExpansionComponents {
        v,
        s,
        zeta,
        omega,
        lambda,
        b,
        t_star,
    })
}

/// `x + t*·b`; the identity when nothing outside the support beats `λ`.
pub fn expansion_step(a: &AffinityMatrix, x: &SimplexVector) -> Result<SimplexVector> {
    expand(a, x, DEFAULT_EPS_SUPP).map(|(y, _)| y)
}

pub(crate) fn expand(
    a: &AffinityMatrix,
    x: &SimplexVector,
    eps_supp: f64,
) -> Result<(SimplexVector, ExpansionComponents)> {
    let c = expansion_components_with(a, x, eps_supp)?;
    if c.s == 0.0 {
        return Ok((x.clone(), c));
    }
    let y = x
        .as_slice()
        .iter()
        .zip(&c.b)
        .map(|(xi, bi)| xi + c.t_star * bi)
        .collect();
    Ok((clamp_with(y, "expansion_step")?, c))
}

/// `−(λs² + 2sζ − ω)·t² + 2ζ·t`.
pub fn delta_g_closed_form(c: &ExpansionComponents, t: f64) -> f64 {
    -c.discriminant() * t * t + 2.0 * c.zeta * t
}
