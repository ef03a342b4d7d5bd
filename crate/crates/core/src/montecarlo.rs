//! Seeded, parallel Monte Carlo estimates.
//!
//! Samples are drawn in fixed-size chunks, each from its own ChaCha stream,
//! and chunk results are combined in chunk order. Estimates therefore depend
//! only on `(seed, stream, samples)` and not on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::Channel;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::quantizer::{Codebook, Partition};
use crate::real::{lit, Real};

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub seed: u64,
    pub samples: usize,
    /// Separates estimates that share a seed.
    pub stream: u64,
}

impl McConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        Self { seed, samples, stream: 0 }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

/// Sample mean of a statistic with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub samples: usize,
}

impl<T: Real> McEstimate<T> {
    /// Whether `exact` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, exact: T, k: T) -> bool {
        (self.mean - exact).abs() <= k * self.stderr
    }
}

/// Means of `width` statistics of draws from `law`; `stat` fills one row per draw.
pub fn mc_means<T: Real>(
    law: &Distribution<T>,
    cfg: &McConfig,
    width: usize,
    stat: impl Fn(T, &mut [f64]) + Sync,
) -> Vec<McEstimate<T>> {
    mc_rows(cfg, width, |rng, row| stat(law.draw(rng), row))
}

/// Chunked driver: `stat` fills one row per trial from the chunk's generator.
fn mc_rows<T: Real>(cfg: &McConfig, width: usize, stat: impl Fn(&mut ChaCha8Rng, &mut [f64]) + Sync) -> Vec<McEstimate<T>> {
    let chunks = cfg.samples.div_ceil(CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream((cfg.stream << 24) | chunk as u64);
            let n = CHUNK.min(cfg.samples - chunk * CHUNK);
            let mut sum = vec![0.0; width];
            let mut sum_sq = vec![0.0; width];
            let mut row = vec![0.0; width];
            for _ in 0..n {
                row.iter_mut().for_each(|r| *r = 0.0);
                stat(&mut rng, &mut row);
                for ((s, q), r) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(&row) {
                    *s += r;
                    *q += r * r;
                }
            }
            (sum, sum_sq)
        })
        .collect();
    let n = cfg.samples as f64;
    (0..width)
        .map(|k| {
            let s: f64 = partials.iter().map(|p| p.0[k]).sum();
            let q: f64 = partials.iter().map(|p| p.1[k]).sum();
            let mean = s / n;
            let var = ((q / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
            McEstimate { mean: lit(mean), stderr: lit((var / n).sqrt()), samples: cfg.samples }
        })
        .collect()
}

/// Empirical squared-error distortion of each codebook on the same draws.
pub fn mc_distortions<T: Real>(
    partition: &Partition<T>,
    codebooks: &[&Codebook<T>],
    law: &Distribution<T>,
    cfg: &McConfig,
) -> Result<Vec<McEstimate<T>>> {
    for c in codebooks {
        c.check_len(partition.bin_count())?;
    }
    Ok(mc_means(law, cfg, codebooks.len(), |x, row| {
        let i = partition.encode(x);
        for (slot, c) in row.iter_mut().zip(codebooks) {
            let e = (x - c.get(i)).to_f64().unwrap_or(f64::NAN);
            *slot = e * e;
        }
    }))
}

/// Empirical distortion of each decoder table when indices pass through `channel`.
///
/// Every table sees the same source draw and the same received index.
pub fn mc_noisy_distortions<T: Real>(
    partition: &Partition<T>,
    channel: &Channel<T>,
    tables: &[&Codebook<T>],
    law: &Distribution<T>,
    cfg: &McConfig,
) -> Result<Vec<McEstimate<T>>> {
    let n = partition.bin_count();
    if channel.size() != n {
        return Err(Error::LengthMismatch { expected: n, actual: channel.size() });
    }
    for t in tables {
        t.check_len(n)?;
    }
    let cumulative: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            channel
                .row(i)
                .iter()
                .scan(0.0, |acc, p| {
                    *acc += p.to_f64().unwrap_or(f64::NAN);
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    Ok(mc_rows(cfg, tables.len(), |rng, row| {
        let x = law.draw(rng);
        let cdf = &cumulative[partition.encode(x)];
        let u: f64 = rng.random::<f64>() * cdf[n - 1];
        let j = cdf.partition_point(|&c| c <= u).min(n - 1);
        for (slot, t) in row.iter_mut().zip(tables) {
            let e = (x - t.get(j)).to_f64().unwrap_or(f64::NAN);
            *slot = e * e;
        }
    }))
}
