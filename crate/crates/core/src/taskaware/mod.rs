//! Reconstruction under task losses other than squared error.

mod rician;
mod semantic;

use std::fmt;
use std::sync::Arc;

pub use rician::{calibrate, eta, phi, rician_moment, Calibration, Rician, RicianConvention, CALIBRATION_TARGETS};
pub use semantic::{accuracy, classification_report, map_labels, ClassificationReport, LabeledClass, LabeledSource};

use crate::distributions::{Distribution, Interval};
use crate::error::{Error, Result};
use crate::optimize::minimize_in_bracket;
use crate::quadrature::{integrate_with_breaks, QuadConfig};
use crate::quantizer::{Codebook, Partition};
use crate::real::{lit, Real};

/// Per-sample loss `d(x, a)` of reconstructing `x` as `a`.
#[derive(Clone)]
pub enum TaskLoss<T> {
    SquaredError,
    /// `x^2 (x - a)^2`: errors on strong coefficients cost more.
    WeightedMseCsi,
    Custom(Arc<dyn Fn(T, T) -> T + Send + Sync>),
}

impl<T: Real> TaskLoss<T> {
    pub fn custom(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: T, a: T) -> T {
        match self {
            Self::SquaredError => (x - a) * (x - a),
            Self::WeightedMseCsi => x * x * (x - a) * (x - a),
            Self::Custom(f) => f(x, a),
        }
    }

    /// `E[d(X, a) | X in bin]` under `law`.
    pub fn conditional_risk(&self, law: &Distribution<T>, bin: &Interval<T>, a: T, quad: &QuadConfig<T>) -> Result<T> {
        match self {
            Self::SquaredError => {
                let s = law.bin_stats(bin)?;
                Ok(s.variance + (s.mean - a) * (s.mean - a))
            }
            Self::WeightedMseCsi => {
                let (_, m) = law.raw_moments(bin)?;
                Ok(m[4] - lit::<T>(2.0) * a * m[3] + a * a * m[2])
            }
            Self::Custom(f) => {
                let mass = law.mass(bin);
                if !(mass > T::zero()) {
                    return Err(Error::ZeroMass);
                }
                let breaks: Vec<T> = law.landmarks().into_iter().filter(|&m| bin.contains(m) && m > bin.lo()).collect();
                let q = integrate_with_breaks(|x| f(x, a) * law.pdf(x), bin.lo(), bin.hi(), &breaks, quad)?;
                Ok(q.value / mass)
            }
        }
    }
}

impl<T> fmt::Debug for TaskLoss<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SquaredError => f.write_str("SquaredError"),
            Self::WeightedMseCsi => f.write_str("WeightedMseCsi"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskConfig<T> {
    /// Golden-section bracket width at which the search hands over to Newton polishing.
    pub tol: T,
    /// Half-width of the search bracket in conditional standard deviations.
    pub bracket_sds: T,
    pub quad: QuadConfig<T>,
}

impl<T: Real> Default for TaskConfig<T> {
    fn default() -> Self {
        Self { tol: lit(T::SOLVER_TOL), bracket_sds: lit(5.0), quad: QuadConfig::default() }
    }
}

/// Per-bin minimizers of the conditional task risk under the true law.
pub fn task_codebook<T: Real>(
    partition: &Partition<T>,
    truth: &Distribution<T>,
    loss: &TaskLoss<T>,
    cfg: &TaskConfig<T>,
) -> Result<Codebook<T>> {
    let values = partition
        .intervals()
        .enumerate()
        .map(|(bin, iv)| {
            let stats = truth.bin_stats(&iv).map_err(|_| Error::ZeroMassBin { bin })?;
            let spread = stats.variance.sqrt().max(lit::<T>(1e-8) * (T::one() + stats.mean.abs()));
            let half = cfg.bracket_sds * spread;
            let h = (spread * lit(1e-3)).max(lit::<T>(1e-6) * (T::one() + stats.mean.abs()));
            let risk = |a: T| loss.conditional_risk(truth, &iv, a, &cfg.quad).unwrap_or(T::infinity());
            minimize_in_bracket(risk, stats.mean - half, stats.mean + half, cfg.tol, h)
                .map(|m| m.x)
                .ok_or(Error::NoBracket { bin })
        })
        .collect::<Result<Vec<_>>>()?;
    Codebook::new(values)
}
