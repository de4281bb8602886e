//! Seeded, block-deterministic Monte-Carlo driver.
//!
//! Trial `i` of an experiment always draws from the same ChaCha8 stream:
//! the key is derived from `(master_seed, tag)` and the stream id is `i`.
//! Trials are grouped into fixed blocks whose summaries are merged in block
//! order, so the result does not depend on how many workers ran the blocks.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::stats::RunningStats;
use crate::{Error, Result};

/// Trials per block. Part of the reproducibility contract: changing it
/// changes the floating-point merge order.
pub const BLOCK_LEN: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Worker threads; affects speed only.
    pub workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        Self { trials, master_seed, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_stats(stats: &RunningStats, seed: u64) -> Self {
        Self { value: stats.mean(), stderr: stats.stderr(), trials: stats.count(), seed }
    }

    /// `|self - other| <= z * sqrt(se1^2 + se2^2)`.
    pub fn agrees_with(&self, other: &McEstimate, z: f64) -> bool {
        (self.value - other.value).abs() <= z * self.stderr.hypot(other.stderr)
    }

    /// `|self - exact| <= z * se`.
    pub fn covers(&self, exact: f64, z: f64) -> bool {
        (self.value - exact).abs() <= z * self.stderr
    }
}

/// FNV-1a, used to turn experiment names into stream tags.
pub const fn tag(name: &str) -> u64 {
    let bytes = name.as_bytes();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut i = 0;
    while i < bytes.len() {
        h ^= bytes[i] as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
        i += 1;
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for trial `index` of experiment `tag`.
pub fn trial_rng(master_seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ tag.rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Run `f` on consecutive index ranges of length `block_len` covering
/// `0..n`, returning the per-block outputs in index order.
pub fn run_blocks<T, F>(n: u64, block_len: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> Result<T> + Sync + Send,
{
    let block_len = block_len.max(1);
    let n_blocks = n.div_ceil(block_len);
    let range = |b: u64| b * block_len..((b + 1) * block_len).min(n);

    #[cfg(feature = "parallel")]
    if workers > 1 && n_blocks > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Numerical(format!("could not start worker pool: {e}")))?;
        return pool.install(|| (0..n_blocks).into_par_iter().map(|b| f(range(b))).collect());
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;

    (0..n_blocks).map(|b| f(range(b))).collect()
}

/// Mean of a per-trial scalar.
pub fn run_scalar<F>(cfg: &McConfig, tag: u64, f: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng, u64) -> Result<f64> + Sync + Send,
{
    cfg.validate()?;
    let blocks = run_blocks(cfg.trials, BLOCK_LEN, cfg.workers, |r| {
        let mut s = RunningStats::default();
        for i in r {
            let mut rng = trial_rng(cfg.master_seed, tag, i);
            let v = f(&mut rng, i)?;
            if !v.is_finite() {
                return Err(Error::Numerical(format!("trial {i} produced {v}")));
            }
            s.push(v);
        }
        Ok(s)
    })?;
    let mut total = RunningStats::default();
    for b in &blocks {
        total.merge(b);
    }
    Ok(McEstimate::from_stats(&total, cfg.master_seed))
}

/// Per-trial vectors concatenated in trial order.
pub fn run_collect<F>(cfg: &McConfig, tag: u64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng, u64, &mut Vec<f64>) -> Result<()> + Sync + Send,
{
    cfg.validate()?;
    let blocks = run_blocks(cfg.trials, BLOCK_LEN, cfg.workers, |r| {
        let mut out = Vec::new();
        for i in r {
            let mut rng = trial_rng(cfg.master_seed, tag, i);
            f(&mut rng, i, &mut out)?;
        }
        Ok(out)
    })?;
    Ok(blocks.concat())
}
