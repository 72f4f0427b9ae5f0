//! Seeded synthetic affinity matrices.
//!
//! Three families, all with off-diagonal values uniform on `[0, 1]`:
//!
//! - `FDM`: every off-diagonal cell filled.
//! - `PDM`: each upper-triangle cell kept independently with the
//!   probability that makes the expected fraction of nonzero cells equal a
//!   target sparse rate.
//! - `BTM`: vertices cut into contiguous near-equal blocks; cells are filled
//!   only between a block and itself or its two neighbors.
//!
//! Row `i` of the upper triangle draws from its own ChaCha8 stream, so the
//! output is bit-identical however the rows are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::AffinityMatrix;

/// Recorded in metadata so a matrix can be regenerated elsewhere.
pub const PRNG_NAME: &str = "rand_chacha::ChaCha8Rng seed_from_u64(seed), stream = row index";

pub const DEFAULT_PDM_SPARSE_RATE: f64 = 0.263;
pub const DEFAULT_BTM_BLOCKS: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fdm,
    Pdm,
    Btm,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Fdm => "FDM",
            Family::Pdm => "PDM",
            Family::Btm => "BTM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_sparse_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub block_count: Option<usize>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn fdm(n: usize, seed: u64) -> Self {
        Self {
            family: Family::Fdm,
            n,
            target_sparse_rate: None,
            block_count: None,
            seed,
        }
    }

    pub fn pdm(n: usize, target_sparse_rate: f64, seed: u64) -> Self {
        Self {
            family: Family::Pdm,
            target_sparse_rate: Some(target_sparse_rate),
            ..Self::fdm(n, seed)
        }
    }

    pub fn btm(n: usize, block_count: usize, seed: u64) -> Self {
        Self {
            family: Family::Btm,
            block_count: Some(block_count),
            ..Self::fdm(n, seed)
        }
    }

    pub fn generate(&self) -> Result<AffinityMatrix> {
        match self.family {
            Family::Fdm => gen_fdm(self.n, self.seed),
            Family::Pdm => gen_pdm(
                self.n,
                self.target_sparse_rate
                    .ok_or_else(|| Error::invalid("PDM needs a target sparse rate"))?,
                self.seed,
            ),
            Family::Btm => gen_btm(
                self.n,
                self.block_count
                    .ok_or_else(|| Error::invalid("BTM needs a block count"))?,
                self.seed,
            ),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

/// Fills the upper triangle row by row, one RNG stream per row.
fn build<F>(n: usize, seed: u64, cell: F) -> AffinityMatrix
where
    F: Fn(&mut ChaCha8Rng, usize, usize) -> f64 + Sync,
{
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (i + 1..n).map(|j| cell(&mut rng, i, j)).collect()
        })
        .collect();
    AffinityMatrix::dense_from_upper(n, |i, j| rows[i][j - i - 1])
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.0..=1.0)
}

pub fn gen_fdm(n: usize, seed: u64) -> Result<AffinityMatrix> {
    check_n(n)?;
    Ok(build(n, seed, |rng, _, _| unit(rng)))
}

/// Largest sparse rate a zero-diagonal matrix can reach.
pub fn max_sparse_rate(n: usize) -> f64 {
    let n = n as f64;
    (n * n - n) / (n * n)
}

pub fn gen_pdm(n: usize, target_sparse_rate: f64, seed: u64) -> Result<AffinityMatrix> {
    check_n(n)?;
    if !(target_sparse_rate > 0.0 && target_sparse_rate < 1.0) {
        return Err(Error::invalid(format!(
            "PDM sparse rate must lie in (0, 1), got {target_sparse_rate}"
        )));
    }
    if target_sparse_rate > max_sparse_rate(n) {
        return Err(Error::invalid(format!(
            "sparse rate {target_sparse_rate} unreachable for n = {n} (max {})",
            max_sparse_rate(n)
        )));
    }
    let keep = (target_sparse_rate / max_sparse_rate(n)).min(1.0);
    Ok(build(n, seed, |rng, _, _| {
        if rng.gen::<f64>() < keep {
            unit(rng)
        } else {
            0.0
        }
    }))
}

/// Block of vertex `i` when `n` vertices are cut into `k` contiguous blocks.
pub fn block_of(i: usize, n: usize, k: usize) -> usize {
    i * k / n
}

pub fn gen_btm(n: usize, block_count: usize, seed: u64) -> Result<AffinityMatrix> {
    check_n(n)?;
    if block_count < 2 || block_count > n {
        return Err(Error::invalid(format!(
            "BTM needs 2 <= blocks <= n, got {block_count} blocks for n = {n}"
        )));
    }
    Ok(build(n, seed, |rng, i, j| {
        if block_of(j, n, block_count) - block_of(i, n, block_count) <= 1 {
            unit(rng)
        } else {
            0.0
        }
    }))
}

/// Fraction of the `n²` cells that are nonzero.
pub fn sparse_rate(a: &AffinityMatrix) -> f64 {
    let n = a.n() as f64;
    a.nnz() as f64 / (n * n)
}

/// Contents of the JSON sidecar written next to a generated matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMetadata {
    pub spec: GeneratorSpec,
    pub realized_sparse_rate: f64,
    pub prng: String,
}

impl GeneratorMetadata {
    pub fn new(spec: GeneratorSpec, a: &AffinityMatrix) -> Self {
        Self {
            spec,
            realized_sparse_rate: sparse_rate(a),
            prng: PRNG_NAME.to_string(),
        }
    }
}
