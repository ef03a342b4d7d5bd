//! Decoder-side correction of a fixed encoder under a mismatched source law.

use serde::{Deserialize, Serialize};

use crate::distributions::{BinStats, Distribution};
use crate::error::{invalid, Error, Result};
use crate::montecarlo::{mc_distortions, McConfig};
use crate::quantizer::{centroid_codebook, lloyd_max_design, Codebook, LloydConfig, LloydInit, Partition, Quantizer};
use crate::real::{lit, Real};
use crate::special::{inverse_mills, std_cdf, std_sf};

/// How the exact numbers of a report were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Quadrature => "quadrature",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

/// Distortions of the fixed, generative and redesigned decoders under the true law.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport<T> {
    pub bits: u32,
    pub d_fix: T,
    pub d_gen: T,
    pub d_ideal: Option<T>,
    pub excess: T,
    pub relative_gain_pct: T,
    pub ideal_gain_pct: Option<T>,
    pub method: Method,
    pub mc_d_fix: Option<T>,
    pub mc_d_gen: Option<T>,
    /// Largest standard error among the Monte Carlo columns.
    pub mc_stderr: Option<T>,
    /// Bins with no true mass whose generative value fell back to the design centroid.
    pub fallback_bins: Vec<usize>,
}

/// True-law conditional means on the design partition.
pub fn generative_codebook<T: Real>(partition: &Partition<T>, true_law: &Distribution<T>) -> Result<Codebook<T>> {
    centroid_codebook(partition, true_law)
}

/// Generative codebook that keeps the design value on bins without true mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeCodebook<T> {
    pub codebook: Codebook<T>,
    pub fallback_bins: Vec<usize>,
}

pub fn generative_codebook_with_fallback<T: Real>(
    quantizer: &Quantizer<T>,
    true_law: &Distribution<T>,
) -> Result<GenerativeCodebook<T>> {
    let mut fallback_bins = Vec::new();
    let values = quantizer
        .partition()
        .intervals()
        .enumerate()
        .map(|(bin, iv)| match true_law.bin_stats(&iv) {
            Ok(s) => s.mean,
            Err(_) => {
                fallback_bins.push(bin);
                quantizer.decode(bin)
            }
        })
        .collect();
    Ok(GenerativeCodebook { codebook: Codebook::new(values)?, fallback_bins })
}

/// Per-bin mass, conditional mean and variance; `None` for empty bins.
pub(crate) fn bin_table<T: Real>(partition: &Partition<T>, law: &Distribution<T>) -> Vec<Option<BinStats<T>>> {
    partition.intervals().map(|iv| law.bin_stats(&iv).ok()).collect()
}

pub(crate) fn table_distortion<T: Real>(table: &[Option<BinStats<T>>], codebook: &[T]) -> T {
    table
        .iter()
        .zip(codebook)
        .filter_map(|(s, &a)| s.map(|s| s.mass * (s.variance + (s.mean - a) * (s.mean - a))))
        .sum()
}

/// `E[(X - a_I)^2]` under `law`, summed bin by bin as mass times (variance + bias^2).
pub fn expected_distortion<T: Real>(partition: &Partition<T>, codebook: &Codebook<T>, law: &Distribution<T>) -> Result<T> {
    codebook.check_len(partition.bin_count())?;
    Ok(table_distortion(&bin_table(partition, law), codebook.values()))
}

/// Distortion of a quantizer redesigned for the true law.
pub fn ideal_distortion<T: Real>(true_law: &Distribution<T>, bits: u32, cfg: &LloydConfig<T>) -> Result<T> {
    lloyd_max_design(true_law, bits, cfg)?.distortion(true_law)
}

/// Relative gain in percent of `better` over `baseline`.
pub fn gain_pct<T: Real>(baseline: T, better: T) -> T {
    if baseline > T::zero() {
        (T::one() - better / baseline) * lit(100.0)
    } else {
        T::zero()
    }
}

/// Designs a quantizer for `design_law`, then evaluates every decoder under `true_law`.
pub fn report<T: Real>(
    design_law: &Distribution<T>,
    true_law: &Distribution<T>,
    bits: u32,
    cfg: &LloydConfig<T>,
) -> Result<DistortionReport<T>> {
    let q = lloyd_max_design(design_law, bits, cfg)?;
    report_for(&q, true_law, cfg, None)
}

/// Report for an existing quantizer; `mc` adds Monte Carlo columns.
///
/// When a fresh redesign lands in a worse local optimum than the generative
/// decoder, the redesign is restarted from the generative codebook.
pub fn report_for<T: Real>(
    quantizer: &Quantizer<T>,
    true_law: &Distribution<T>,
    cfg: &LloydConfig<T>,
    mc: Option<&McConfig>,
) -> Result<DistortionReport<T>> {
    let partition = quantizer.partition();
    let table = bin_table(partition, true_law);
    let gen = generative_codebook_with_fallback(quantizer, true_law)?;
    let d_fix = table_distortion(&table, quantizer.design_codebook().values());
    let d_gen = table_distortion(&table, gen.codebook.values());

    let fresh = ideal_distortion(true_law, quantizer.bits(), cfg)?;
    let d_ideal = if fresh > d_gen && gen.codebook.is_sorted() {
        let warm = cfg.clone().with_init(LloydInit::Codebook(gen.codebook.values().to_vec()));
        ideal_distortion(true_law, quantizer.bits(), &warm).map_or(fresh, |w| w.min(fresh))
    } else {
        fresh
    };

    let (mc_d_fix, mc_d_gen, mc_stderr) = match mc {
        Some(mc) => {
            let est = mc_distortions(partition, &[quantizer.design_codebook(), &gen.codebook], true_law, mc)?;
            let stderr = est.iter().map(|e| e.stderr).fold(T::zero(), T::max);
            (Some(est[0].mean), Some(est[1].mean), Some(stderr))
        }
        None => (None, None, None),
    };

    Ok(DistortionReport {
        bits: quantizer.bits(),
        d_fix,
        d_gen,
        d_ideal: Some(d_ideal),
        excess: (d_fix - d_gen).max(T::zero()),
        relative_gain_pct: gain_pct(d_fix, d_gen),
        ideal_gain_pct: Some(gain_pct(d_fix, d_ideal)),
        method: Method::ClosedForm,
        mc_d_fix,
        mc_d_gen,
        mc_stderr,
        fallback_bins: gen.fallback_bins,
    })
}

/// Closed-form 1-bit analysis of a Gaussian design `N(mu0, sigma0^2)` against
/// a Gaussian truth `N(mu1, sigma1^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneBitGaussianReport<T> {
    /// Normalized threshold `(mu0 - mu1) / sigma1`.
    pub alpha: T,
    pub lambda_l: T,
    pub lambda_r: T,
    pub d_fix: T,
    pub d_min: T,
    pub gain_pct: T,
}

pub fn one_bit_gaussian_report<T: Real>(mu0: T, sigma0: T, mu1: T, sigma1: T) -> Result<OneBitGaussianReport<T>> {
    if !(sigma0 > T::zero() && sigma1 > T::zero()) || !mu0.is_finite() || !mu1.is_finite() {
        return invalid("one-bit report needs finite means and positive deviations");
    }
    let alpha = (mu0 - mu1) / sigma1;
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("normalized threshold {alpha} is not finite")));
    }
    let (lambda_l, lambda_r) = inverse_mills(alpha);
    let (p_lo, p_hi) = (std_cdf(alpha), std_sf(alpha));
    let var_lo = T::one() - alpha * lambda_l - lambda_l * lambda_l;
    let var_hi = T::one() + alpha * lambda_r - lambda_r * lambda_r;
    let s2 = sigma1 * sigma1;
    let d_min = s2 * (p_lo * var_lo + p_hi * var_hi);

    let c = (lit::<T>(2.0) / T::PI()).sqrt();
    let bias_lo = (mu1 - sigma1 * lambda_l) - (mu0 - sigma0 * c);
    let bias_hi = (mu1 + sigma1 * lambda_r) - (mu0 + sigma0 * c);
    let d_fix = d_min + p_lo * bias_lo * bias_lo + p_hi * bias_hi * bias_hi;
    Ok(OneBitGaussianReport { alpha, lambda_l, lambda_r, d_fix, d_min, gain_pct: gain_pct(d_fix, d_min) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one_bit_design() -> Quantizer<f64> {
        lloyd_max_design(&Distribution::standard_normal(), 1, &LloydConfig::default()).unwrap()
    }

    #[test]
    fn one_bit_variance_mismatch_values() {
        let q = one_bit_design();
        let truth = Distribution::gaussian(0.0, 2.0).unwrap();
        let d_fix = q.distortion(&truth).unwrap();
        assert!((d_fix - (4.0 - 6.0 / PI)).abs() < 1e-12);
        let gen = generative_codebook(q.partition(), &truth).unwrap();
        assert!((gen.get(1) - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-12);
        let d_gen = expected_distortion(q.partition(), &gen, &truth).unwrap();
        assert!((d_gen - 4.0 * (1.0 - 2.0 / PI)).abs() < 1e-12);
    }

    #[test]
    fn matched_distortion_is_one_minus_two_over_pi() {
        let q = one_bit_design();
        assert!((q.distortion(&Distribution::standard_normal()).unwrap() - (1.0 - 2.0 / PI)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_report_matches_partition_evaluation() {
        let q = one_bit_design();
        for (mu1, s1) in [(2.0, 1.0), (-0.7, 0.4), (0.3, 3.0), (0.0, 1.0)] {
            let cf = one_bit_gaussian_report(0.0_f64, 1.0, mu1, s1).unwrap();
            let truth = Distribution::gaussian(mu1, s1).unwrap();
            let r = report_for(&q, &truth, &LloydConfig::default(), None).unwrap();
            assert!((cf.d_fix - r.d_fix).abs() < 1e-10, "{mu1} {s1}");
            assert!((cf.d_min - r.d_gen).abs() < 1e-10, "{mu1} {s1}");
        }
        let matched = one_bit_gaussian_report(0.0_f64, 1.0, 0.0, 1.0).unwrap();
        assert!(matched.gain_pct.abs() < 1e-12);
        assert_eq!(matched.alpha, 0.0);
    }

    #[test]
    fn matched_report_has_no_gain() {
        let law = Distribution::<f64>::unit_laplace();
        let r = report(&law, &law, 3, &LloydConfig::default()).unwrap();
        assert!(r.relative_gain_pct.abs() < 1e-9 && r.excess < 1e-12);
        assert!(r.fallback_bins.is_empty());
    }

    #[test]
    fn two_bit_ideal_distortion() {
        let d = ideal_distortion(&Distribution::<f64>::standard_normal(), 2, &LloydConfig::default()).unwrap();
        assert!((d - 0.117_48).abs() < 5e-5);
    }

    #[test]
    fn empty_true_bins_fall_back_to_design_values() {
        let q = lloyd_max_design(&Distribution::standard_normal(), 3, &LloydConfig::default()).unwrap();
        let truth = Distribution::gaussian(60.0, 0.1).unwrap();
        let gen = generative_codebook_with_fallback(&q, &truth).unwrap();
        assert_eq!(gen.fallback_bins, (0..7).collect::<Vec<_>>());
        assert_eq!(gen.codebook.get(0), q.decode(0));
        assert!(matches!(generative_codebook(q.partition(), &truth), Err(Error::ZeroMassBin { bin: 0 })));
    }

    #[test]
    fn length_mismatch_is_reported() {
        let q = one_bit_design();
        let c = Codebook::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(
            expected_distortion(q.partition(), &c, &Distribution::standard_normal()),
            Err(Error::LengthMismatch { expected: 2, actual: 3 })
        );
    }
}
