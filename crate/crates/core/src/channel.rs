//! Decoding quantization indices received over a discrete memoryless channel.

use serde::{Deserialize, Serialize};

use crate::distributions::{BinStats, Distribution};
use crate::error::{invalid, Error, Result};
use crate::mismatch::{bin_table, generative_codebook_with_fallback};
use crate::quantizer::{Codebook, Partition, Quantizer};
use crate::real::{count, lit, Real};

/// Row-stochastic transition matrix; entry `(i, j)` is `P(received j | sent i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T> {
    size: usize,
    transition: Vec<T>,
}

impl<T: Real> Channel<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return invalid("channel has no inputs");
        }
        let tol = lit::<T>(1e-12).max(T::epsilon() * count(4 * size));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::LengthMismatch { expected: size, actual: row.len() });
            }
            if row.iter().any(|&p| !(p >= T::zero()) || !p.is_finite()) {
                return invalid(format!("channel row {i} has a negative or non-finite entry"));
            }
            let total: T = row.iter().copied().sum();
            if (total - T::one()).abs() > tol {
                return invalid(format!("channel row {i} sums to {total}"));
            }
        }
        Ok(Self { size, transition: rows.into_iter().flatten().collect() })
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| (0..size).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect())
    }

    /// Independent bit flips with probability `epsilon` on natural binary labels.
    pub fn bsc(bits: u32, epsilon: T) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon <= lit(0.5)) {
            return invalid(format!("crossover probability {epsilon} outside [0, 0.5]"));
        }
        if !(1..=12).contains(&bits) {
            return invalid(format!("BSC index channel supports 1..=12 bits, got {bits}"));
        }
        let size = 1usize << bits;
        let keep = T::one() - epsilon;
        let rows = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| {
                        let flips = (i ^ j).count_ones() as i32;
                        epsilon.powi(flips) * keep.powi(bits as i32 - flips)
                    })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn prob(&self, sent: usize, received: usize) -> T {
        self.transition[sent * self.size + received]
    }

    pub fn row(&self, sent: usize) -> &[T] {
        &self.transition[sent * self.size..(sent + 1) * self.size]
    }

    /// `P(received = j)` for every `j` under the given input priors.
    pub fn received_marginals(&self, priors: &[T]) -> Vec<T> {
        (0..self.size).map(|j| priors.iter().enumerate().map(|(i, &p)| p * self.prob(i, j)).sum()).collect()
    }

    /// `P(sent = i | received)` by Bayes' rule.
    pub fn index_posterior(&self, priors: &[T], received: usize) -> Result<Vec<T>> {
        if priors.len() != self.size {
            return Err(Error::LengthMismatch { expected: self.size, actual: priors.len() });
        }
        if received >= self.size {
            return invalid(format!("received index {received} outside 0..{}", self.size));
        }
        let joint: Vec<T> = priors.iter().enumerate().map(|(i, &p)| p * self.prob(i, received)).collect();
        let evidence: T = joint.iter().copied().sum();
        if !(evidence > T::zero()) {
            return Err(Error::ZeroEvidence { received });
        }
        Ok(joint.into_iter().map(|j| j / evidence).collect())
    }
}

/// Reconstruction rule applied to received indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Design-law centroids, ignoring both the channel and the true law.
    StandardSeparation,
    /// True-law centroids, treating the received index as correct.
    HardGenerative,
    /// Posterior-weighted true-law centroids.
    SoftGenerative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyDecoder<T> {
    pub strategy: Strategy,
    /// Reconstruction for each received index.
    pub table: Codebook<T>,
}

impl<T: Real> NoisyDecoder<T> {
    pub fn build(strategy: Strategy, quantizer: &Quantizer<T>, truth: &Distribution<T>, channel: &Channel<T>) -> Result<Self> {
        let table = match strategy {
            Strategy::StandardSeparation => quantizer.design_codebook().clone(),
            Strategy::HardGenerative => generative_codebook_with_fallback(quantizer, truth)?.codebook,
            Strategy::SoftGenerative => soft_codebook(quantizer.partition(), truth, channel)?,
        };
        Ok(Self { strategy, table })
    }
}

fn check_sizes<T: Real>(partition: &Partition<T>, channel: &Channel<T>) -> Result<()> {
    if channel.size() != partition.bin_count() {
        return Err(Error::LengthMismatch { expected: partition.bin_count(), actual: channel.size() });
    }
    Ok(())
}

/// MMSE table `E_t[X | received j]`. A received index with zero probability
/// gets the unconditional true mean.
pub fn soft_codebook<T: Real>(partition: &Partition<T>, truth: &Distribution<T>, channel: &Channel<T>) -> Result<Codebook<T>> {
    check_sizes(partition, channel)?;
    let table = bin_table(partition, truth);
    let priors: Vec<T> = table.iter().map(|s| s.map_or(T::zero(), |s| s.mass)).collect();
    let means: Vec<T> = table.iter().map(|s| s.map_or(T::zero(), |s| s.mean)).collect();
    let total: T = priors.iter().copied().sum();
    let fallback = priors.iter().zip(&means).map(|(&p, &m)| p * m).sum::<T>() / total;
    let values = (0..channel.size())
        .map(|j| match channel.index_posterior(&priors, j) {
            Ok(post) => Ok(post.iter().zip(&means).map(|(&w, &m)| w * m).sum()),
            Err(Error::ZeroEvidence { .. }) => Ok(fallback),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<T>>>()?;
    Codebook::new(values)
}

fn noisy_table_distortion<T: Real>(table: &[Option<BinStats<T>>], channel: &Channel<T>, codebook: &Codebook<T>) -> T {
    table
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s)))
        .map(|(i, s)| {
            let inner: T = channel
                .row(i)
                .iter()
                .zip(codebook.values())
                .map(|(&p, &a)| p * (s.variance + (s.mean - a) * (s.mean - a)))
                .sum();
            s.mass * inner
        })
        .sum()
}

/// `E_t[(X - table[received])^2]`, exact through the bin moments.
pub fn noisy_distortion<T: Real>(
    partition: &Partition<T>,
    channel: &Channel<T>,
    decoder: &NoisyDecoder<T>,
    truth: &Distribution<T>,
) -> Result<T> {
    check_sizes(partition, channel)?;
    decoder.table.check_len(partition.bin_count())?;
    Ok(noisy_table_distortion(&bin_table(partition, truth), channel, &decoder.table))
}

/// Closed-form 1-bit strategies for design `N(0, sigma0^2)`, truth `N(0, sigma1^2)`
/// and a BSC with crossover `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyReport<T> {
    pub d_std: T,
    pub d_hard: T,
    pub d_opt: T,
    /// `d_std - d_hard`.
    pub source_bias_gap: T,
    /// `d_hard - d_opt`.
    pub separation_gap: T,
}

pub fn strategy_report<T: Real>(sigma0: T, sigma1: T, epsilon: T) -> Result<StrategyReport<T>> {
    if !(sigma0 > T::zero() && sigma1 > T::zero()) {
        return invalid("strategy report needs positive deviations");
    }
    if !(epsilon >= T::zero() && epsilon <= lit(0.5)) {
        return invalid(format!("crossover probability {epsilon} outside [0, 0.5]"));
    }
    let c = (lit::<T>(2.0) / T::PI()).sqrt();
    let shrink = T::one() - lit::<T>(2.0) * epsilon;
    // +-A decoded on a sign bit flipped with probability epsilon
    let d = |a: T| sigma1 * sigma1 - lit::<T>(2.0) * a * sigma1 * c * shrink + a * a;
    let d_std = d(sigma0 * c);
    let d_hard = d(sigma1 * c);
    let d_opt = d(sigma1 * c * shrink);
    Ok(StrategyReport { d_std, d_hard, d_opt, source_bias_gap: d_std - d_hard, separation_gap: d_hard - d_opt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::{lloyd_max_design, LloydConfig};
    use std::f64::consts::PI;

    #[test]
    fn bsc_entries() {
        let ch = Channel::bsc(1, 0.1).unwrap();
        assert_eq!(ch.row(0), &[0.9, 0.1]);
        let ch2 = Channel::<f64>::bsc(2, 0.1).unwrap();
        assert!((ch2.prob(0b00, 0b11) - 0.01).abs() < 1e-17);
        assert_eq!(Channel::bsc(3, 0.0).unwrap(), Channel::identity(8).unwrap());
        assert!(Channel::bsc(1, 0.7).is_err());
    }

    #[test]
    fn posterior_examples() {
        let ch = Channel::<f64>::bsc(1, 0.1).unwrap();
        let post = ch.index_posterior(&[0.5, 0.5], 1).unwrap();
        assert!((post[0] - 0.1).abs() < 1e-15 && (post[1] - 0.9).abs() < 1e-15);
        let skew = ch.index_posterior(&[0.9, 0.1], 1).unwrap();
        assert!((skew[0] - 0.5).abs() < 1e-15 && (skew[1] - 0.5).abs() < 1e-15);
        let one_hot = Channel::bsc(1, 0.0).unwrap().index_posterior(&[0.3, 0.7], 0).unwrap();
        assert_eq!(one_hot, vec![1.0, 0.0]);
        assert_eq!(
            Channel::identity(2).unwrap().index_posterior(&[1.0, 0.0], 1),
            Err(Error::ZeroEvidence { received: 1 })
        );
    }

    #[test]
    fn rows_must_be_stochastic() {
        assert!(Channel::new(vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(Channel::new(vec![vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn one_bit_strategies_match_partition_evaluation() {
        let (s0, s1, eps) = (1.0_f64, 2.0, 0.1);
        let q = lloyd_max_design(&Distribution::gaussian(0.0, s0).unwrap(), 1, &LloydConfig::default()).unwrap();
        let truth = Distribution::gaussian(0.0, s1).unwrap();
        let ch = Channel::bsc(1, eps).unwrap();
        let d = |s| {
            let dec = NoisyDecoder::build(s, &q, &truth, &ch).unwrap();
            noisy_distortion(q.partition(), &ch, &dec, &truth).unwrap()
        };
        let r = strategy_report(s0, s1, eps).unwrap();
        assert!((d(Strategy::StandardSeparation) - r.d_std).abs() < 1e-12);
        assert!((d(Strategy::HardGenerative) - r.d_hard).abs() < 1e-12);
        assert!((d(Strategy::SoftGenerative) - r.d_opt).abs() < 1e-12);
        assert!((r.separation_gap - 4.0 * eps * eps * s1 * s1 * 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn soft_codebook_shrinks_and_collapses() {
        let q = lloyd_max_design(&Distribution::<f64>::standard_normal(), 1, &LloydConfig::default()).unwrap();
        let truth = Distribution::gaussian(0.0, 2.0).unwrap();
        let c = 2.0 * (2.0 / PI).sqrt();
        for eps in [0.0, 0.05, 0.2, 0.5] {
            let soft = soft_codebook(q.partition(), &truth, &Channel::bsc(1, eps).unwrap()).unwrap();
            assert!((soft.get(1) - (1.0 - 2.0 * eps) * c).abs() < 1e-12);
            assert!((soft.get(0) + (1.0 - 2.0 * eps) * c).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_outputs_get_the_true_mean() {
        let p = Partition::new(vec![0.0]).unwrap();
        let truth = Distribution::<f64>::gaussian(0.5, 1.0).unwrap();
        let ch = Channel::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let soft = soft_codebook(&p, &truth, &ch).unwrap();
        assert!((soft.get(1) - 0.5).abs() < 1e-12);
    }
}
