//! High-rate analysis: Bennett integral, Panter-Dite distortion, the
//! mismatch penalty factor and rate-recovery sweeps.
//!
//! Density powers are evaluated as `exp(p * ln_pdf)` so ratios such as
//! `f_t / f_d^(2/3)` stay finite in the far tails.

use rayon::prelude::*;

use crate::distributions::{Distribution, Interval};
use crate::error::{invalid, Error, Result};
use crate::mismatch::{bin_table, generative_codebook_with_fallback, table_distortion};
use crate::quadrature::{integrate_with_breaks, QuadConfig};
use crate::quantizer::{lloyd_max_design, Codebook, LloydConfig, Partition, Quantizer};
use crate::real::{count, lit, Real};

fn integral<T: Real>(f: impl Fn(T) -> T, iv: &Interval<T>, marks: &[T]) -> Result<T> {
    let breaks: Vec<T> = marks.iter().copied().filter(|&m| m > iv.lo() && m < iv.hi()).collect();
    integrate_with_breaks(f, iv.lo(), iv.hi(), &breaks, &QuadConfig::default()).map(|q| q.value)
}

fn marks_of<T: Real>(laws: &[&Distribution<T>]) -> Vec<T> {
    let mut marks: Vec<T> = laws.iter().flat_map(|d| d.landmarks()).collect();
    marks.sort_by(|a, b| a.partial_cmp(b).expect("finite landmarks"));
    marks.dedup();
    marks
}

/// `int_iv f^p`.
fn power_integral<T: Real>(law: &Distribution<T>, p: T, iv: &Interval<T>) -> Result<T> {
    integral(|x| (law.ln_pdf(x) * p).exp(), iv, &law.landmarks())
}

/// `int_iv f_t f_d^(-2/3)`.
fn cross_integral<T: Real>(design: &Distribution<T>, truth: &Distribution<T>, iv: &Interval<T>) -> Result<T> {
    let two_thirds = lit::<T>(2.0 / 3.0);
    let marks = marks_of(&[design, truth]);
    integral(|x| (truth.ln_pdf(x) - two_thirds * design.ln_pdf(x)).exp(), iv, &marks)
}

/// Granular distortion `(1/(12 N^2)) int_S f_t / lambda_d^2` for the point
/// density `lambda_d ~ f_d^(1/3)` normalized over the support `S`.
pub fn bennett_granular<T: Real>(
    design: &Distribution<T>,
    truth: &Distribution<T>,
    support: &Interval<T>,
    bins: usize,
) -> Result<T> {
    if bins < 2 {
        return invalid("Bennett integral needs at least two bins");
    }
    let norm = power_integral(design, lit(1.0 / 3.0), support)?;
    let cross = cross_integral(design, truth, support)?;
    Ok(norm * norm * cross / (lit::<T>(12.0) * count::<T>(bins) * count::<T>(bins)))
}

/// Bennett integral over the span `[tau_1, tau_{N-1}]` of a designed quantizer.
/// With two bins the span is a single point and the granular part is zero.
pub fn bennett_granular_for<T: Real>(quantizer: &Quantizer<T>, truth: &Distribution<T>) -> Result<T> {
    let b = quantizer.partition().boundaries();
    let (lo, hi) = (b[0], b[b.len() - 1]);
    if !(lo < hi) {
        return Ok(T::zero());
    }
    bennett_granular(quantizer.design_law(), truth, &Interval::new(lo, hi)?, quantizer.partition().bin_count())
}

/// Panter-Dite distortion `||f||_{1/3} / (12 N^2)`.
pub fn panter_dite<T: Real>(law: &Distribution<T>, bins: usize) -> Result<T> {
    if bins < 1 {
        return invalid("Panter-Dite needs at least one bin");
    }
    let z = power_integral(law, lit(1.0 / 3.0), &Interval::real_line())?;
    Ok(z * z * z / (lit::<T>(12.0) * count::<T>(bins) * count::<T>(bins)))
}

/// High-rate ratio of generative to ideal distortion,
/// `(int f_d^(1/3))^2 int f_t f_d^(-2/3) / (int f_t^(1/3))^3`.
///
/// Fails with `DivergentIntegral` when the truth is too heavy-tailed for the design.
pub fn penalty_factor<T: Real>(design: &Distribution<T>, truth: &Distribution<T>) -> Result<T> {
    let line = Interval::real_line();
    let third = lit(1.0 / 3.0);
    let a = power_integral(design, third, &line)?;
    let b = cross_integral(design, truth, &line)?;
    let c = power_integral(truth, third, &line)?;
    let value = a * a * b / (c * c * c);
    if !value.is_finite() {
        let f = |x: T| x.to_f64().unwrap_or(f64::INFINITY);
        return Err(Error::DivergentIntegral { estimate: f(b), error: f64::INFINITY });
    }
    Ok(value)
}

/// Variance and squared-bias contributions of the two outer bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverloadSplit<T> {
    pub variance_part: T,
    pub bias_part: T,
}

pub fn overload_split<T: Real>(partition: &Partition<T>, codebook: &Codebook<T>, truth: &Distribution<T>) -> Result<OverloadSplit<T>> {
    codebook.check_len(partition.bin_count())?;
    let last = partition.bin_count() - 1;
    let mut split = OverloadSplit { variance_part: T::zero(), bias_part: T::zero() };
    for bin in [0, last] {
        if let Ok(s) = truth.bin_stats(&partition.interval(bin)) {
            let bias = s.mean - codebook.get(bin);
            split.variance_part = split.variance_part + s.mass * s.variance;
            split.bias_part = split.bias_part + s.mass * bias * bias;
        }
    }
    Ok(split)
}

/// Exact and asymptotic distortions at one bit depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighRateReport<T> {
    pub bits: u32,
    /// Bennett approximation of the granular distortion.
    pub d_granular: T,
    pub d_overload_fix: T,
    pub d_overload_gen: T,
    pub d_total_fix: T,
    pub d_total_gen: T,
    /// Panter-Dite distortion of a quantizer matched to the truth.
    pub d_ideal_pd: T,
    /// Infinite when the penalty integral diverges.
    pub penalty_factor: T,
    /// Outer-bin squared bias of the design codebook.
    pub bias_part: T,
}

/// A bit-depth sweep with least-squares `log2` slopes over its last four points.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRecovery<T> {
    pub reports: Vec<HighRateReport<T>>,
    pub slope_gen: Option<T>,
    pub slope_fix: Option<T>,
}

pub fn high_rate_report<T: Real>(
    design: &Distribution<T>,
    truth: &Distribution<T>,
    bits: u32,
    cfg: &LloydConfig<T>,
    penalty: T,
) -> Result<HighRateReport<T>> {
    let q = lloyd_max_design(design, bits, cfg)?;
    let p = q.partition();
    let table = bin_table(p, truth);
    let gen = generative_codebook_with_fallback(&q, truth)?.codebook;
    let fix = overload_split(p, q.design_codebook(), truth)?;
    let gen_split = overload_split(p, &gen, truth)?;
    Ok(HighRateReport {
        bits,
        d_granular: bennett_granular_for(&q, truth)?,
        d_overload_fix: fix.variance_part + fix.bias_part,
        d_overload_gen: gen_split.variance_part + gen_split.bias_part,
        d_total_fix: table_distortion(&table, q.design_codebook().values()),
        d_total_gen: table_distortion(&table, gen.values()),
        d_ideal_pd: panter_dite(truth, p.bin_count())?,
        penalty_factor: penalty,
        bias_part: fix.bias_part,
    })
}

/// Exact fixed and generative distortions across `bits_list`, in list order.
pub fn rate_recovery_sweep<T: Real>(
    design: &Distribution<T>,
    truth: &Distribution<T>,
    bits_list: &[u32],
    cfg: &LloydConfig<T>,
) -> Result<RateRecovery<T>> {
    if bits_list.is_empty() {
        return invalid("bits list is empty");
    }
    let penalty = match penalty_factor(design, truth) {
        Ok(v) => v,
        Err(Error::DivergentIntegral { .. }) => T::infinity(),
        Err(e) => return Err(e),
    };
    let reports = bits_list
        .par_iter()
        .map(|&b| high_rate_report(design, truth, b, cfg, penalty))
        .collect::<Result<Vec<_>>>()?;
    let slope = |f: fn(&HighRateReport<T>) -> T| {
        let values: Vec<T> = reports.iter().map(f).collect();
        log2_slope(bits_list, &values)
    };
    let slope_gen = slope(|r| r.d_total_gen);
    let slope_fix = slope(|r| r.d_total_fix);
    Ok(RateRecovery { reports, slope_gen, slope_fix })
}

/// Least-squares slope of `log2(values)` against bits over the last four points.
pub fn log2_slope<T: Real>(bits: &[u32], values: &[T]) -> Option<T> {
    let n = bits.len().min(values.len());
    let start = n.saturating_sub(4);
    let pts: Vec<(f64, f64)> = (start..n)
        .map(|i| (f64::from(bits[i]), values[i].to_f64().unwrap_or(f64::NAN).log2()))
        .collect();
    if pts.len() < 2 || pts.iter().any(|p| !p.1.is_finite()) {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| lit(sxy / sxx))
}
