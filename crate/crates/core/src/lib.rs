//! Scalar quantizers designed under one source law and decoded under another.
//!
//! The encoder is a Lloyd-Max quantizer fitted to a design law. The decoder
//! may know the true law and replace the reconstruction table with true-law
//! conditional means, posterior-weighted means over a noisy index channel, or
//! minimizers of a task loss. Every distortion is computed exactly from
//! truncated moments, and Monte Carlo estimates are available as a check.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases name the concrete types.
//!
//! ```
//! use mismatch_quant::{report, Distribution64, LloydConfig};
//!
//! let design = Distribution64::standard_normal();
//! let truth = Distribution64::unit_laplace();
//! let r = report(&design, &truth, 2, &LloydConfig::default()).unwrap();
//! assert!(r.d_gen < r.d_fix);
//! ```

// NaN must fail validation, so `!(x > 0)` is intended throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod channel;
pub mod distributions;
pub mod error;
pub mod mismatch;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod quantizer;
pub mod real;
pub mod special;
pub mod taskaware;

pub use asymptotics::{
    bennett_granular, bennett_granular_for, log2_slope, overload_split, panter_dite, penalty_factor,
    rate_recovery_sweep, HighRateReport, OverloadSplit, RateRecovery,
};
pub use channel::{noisy_distortion, soft_codebook, strategy_report, Channel, NoisyDecoder, Strategy, StrategyReport};
pub use distributions::{BinStats, ComponentConfig, Distribution, DistributionConfig, Interval};
pub use error::{Error, Result};
pub use mismatch::{
    expected_distortion, gain_pct, generative_codebook, generative_codebook_with_fallback, ideal_distortion,
    one_bit_gaussian_report, report, report_for, DistortionReport, GenerativeCodebook, Method, OneBitGaussianReport,
};
pub use montecarlo::{mc_distortions, mc_means, mc_noisy_distortions, McConfig, McEstimate};
pub use quantizer::{
    centroid_codebook, lloyd_max_design, lloyd_max_trace, Codebook, LloydConfig, LloydInit, LloydTrace, Partition,
    Quantizer, QuantizerRecord,
};
pub use real::Real;
pub use special::inverse_mills;
pub use taskaware::{
    calibrate, classification_report, eta, map_labels, phi, rician_moment, task_codebook, Calibration,
    ClassificationReport, LabeledSource, Rician, RicianConvention, TaskConfig, TaskLoss, CALIBRATION_TARGETS,
};

pub type Distribution64 = Distribution<f64>;
pub type Distribution32 = Distribution<f32>;
pub type Interval64 = Interval<f64>;
pub type Partition64 = Partition<f64>;
pub type Partition32 = Partition<f32>;
pub type Codebook64 = Codebook<f64>;
pub type Codebook32 = Codebook<f32>;
pub type Quantizer64 = Quantizer<f64>;
pub type Quantizer32 = Quantizer<f32>;
pub type Channel64 = Channel<f64>;
pub type Channel32 = Channel<f32>;
pub type DistortionReport64 = DistortionReport<f64>;
pub type DistortionReport32 = DistortionReport<f32>;
pub type LabeledSource64 = LabeledSource<f64>;
