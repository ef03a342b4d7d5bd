//! Source laws with exact truncated moments.
//!
//! Every distortion the library reports reduces to the mass and the first
//! few conditional moments of a law on an interval. Gaussian and Laplace laws
//! have closed forms; mixtures weight-combine their components.

mod gaussian;
mod laplace;
mod mixture;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use gaussian::Gaussian;
pub use laplace::Laplace;
pub use mixture::{Component, Mixture};

use crate::error::{invalid, Error, Result};
use crate::real::{lit, Real};
use crate::special::Conditional;

/// Masses below this are treated as empty bins.
pub const ZERO_MASS: f64 = 1e-300;

/// A (possibly semi-infinite) interval `[lo, hi)`; one quantization bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || !(lo < hi) {
            return invalid(format!("interval requires lo < hi, got [{lo}, {hi})"));
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Half-open membership; the left edge belongs to the bin.
    pub fn contains(&self, x: T) -> bool {
        x >= self.lo && x < self.hi
    }
}

/// Mass and the first two conditional moments of a law on one bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinStats<T> {
    pub mass: T,
    pub mean: T,
    pub variance: T,
}

/// A univariate source law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionConfig", into = "DistributionConfig", bound = "T: Real")]
pub enum Distribution<T> {
    Gaussian(Gaussian<T>),
    Laplace(Laplace<T>),
    Mixture(Mixture<T>),
}

impl<T: Real> Distribution<T> {
    pub fn gaussian(mean: T, std: T) -> Result<Self> {
        Gaussian::new(mean, std).map(Self::Gaussian)
    }

    pub fn laplace(location: T, scale: T) -> Result<Self> {
        Laplace::new(location, scale).map(Self::Laplace)
    }

    /// Zero-mean Laplace law with unit variance (`scale = 1/sqrt(2)`).
    pub fn unit_laplace() -> Self {
        Self::Laplace(Laplace::new(T::zero(), T::FRAC_1_SQRT_2()).expect("valid scale"))
    }

    pub fn standard_normal() -> Self {
        Self::Gaussian(Gaussian::standard())
    }

    /// `(weight, mean, std)` triples; weights must sum to one.
    pub fn mixture(components: &[(T, T, T)]) -> Result<Self> {
        Mixture::new(components).map(Self::Mixture)
    }

    pub fn pdf(&self, x: T) -> T {
        match self {
            Self::Gaussian(g) => g.pdf(x),
            Self::Laplace(l) => l.pdf(x),
            Self::Mixture(m) => m.pdf(x),
        }
    }

    /// Natural log of the density; finite far into the tails where `pdf` underflows.
    pub fn ln_pdf(&self, x: T) -> T {
        match self {
            Self::Gaussian(g) => g.ln_pdf(x),
            Self::Laplace(l) => l.ln_pdf(x),
            Self::Mixture(m) => m.ln_pdf(x),
        }
    }

    pub fn cdf(&self, x: T) -> T {
        match self {
            Self::Gaussian(g) => g.cdf(x),
            Self::Laplace(l) => l.cdf(x),
            Self::Mixture(m) => m.cdf(x),
        }
    }

    pub fn mean(&self) -> T {
        match self {
            Self::Gaussian(g) => g.mean(),
            Self::Laplace(l) => l.location(),
            Self::Mixture(m) => m.mean(),
        }
    }

    pub fn variance(&self) -> T {
        match self {
            Self::Gaussian(g) => g.std() * g.std(),
            Self::Laplace(l) => lit::<T>(2.0) * l.scale() * l.scale(),
            Self::Mixture(m) => m.variance(),
        }
    }

    pub fn std_dev(&self) -> T {
        self.variance().sqrt()
    }

    pub(crate) fn conditional(&self, iv: &Interval<T>) -> Option<Conditional<T>> {
        let c = match self {
            Self::Gaussian(g) => g.conditional(iv),
            Self::Laplace(l) => l.conditional(iv),
            Self::Mixture(m) => m.conditional(iv),
        }?;
        (c.mass >= lit(ZERO_MASS)).then_some(c)
    }

    /// Probability of the interval.
    pub fn mass(&self, iv: &Interval<T>) -> T {
        self.conditional(iv).map_or(T::zero(), |c| c.mass.min(T::one()))
    }

    /// `E[X^n | X in iv]` for `n` in `1..=4`.
    pub fn truncated_moment(&self, n: u32, iv: &Interval<T>) -> Result<T> {
        if !(1..=4).contains(&n) {
            return invalid(format!("truncated moment order {n} outside 1..=4"));
        }
        let c = self.conditional(iv).ok_or(Error::ZeroMass)?;
        Ok(c.repivot(T::zero()).about[n as usize])
    }

    /// Mass, conditional mean and conditional variance on an interval.
    pub fn bin_stats(&self, iv: &Interval<T>) -> Result<BinStats<T>> {
        let c = self.conditional(iv).ok_or(Error::ZeroMass)?;
        Ok(BinStats { mass: c.mass.min(T::one()), mean: c.mean(), variance: c.variance() })
    }

    /// Raw conditional moments `[1, E[X|iv], .., E[X^4|iv]]` together with the mass.
    pub fn raw_moments(&self, iv: &Interval<T>) -> Result<(T, [T; 5])> {
        let c = self.conditional(iv).ok_or(Error::ZeroMass)?;
        Ok((c.mass, c.repivot(T::zero()).about))
    }

    /// Inverse CDF by bisection; exact to the last few ulps for every kind.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p < T::one()) {
            return invalid(format!("quantile level {p} outside (0, 1)"));
        }
        let center = self.mean();
        let spread = self.std_dev();
        let mut lo = center - spread;
        let mut hi = center + spread;
        let mut step = spread;
        while self.cdf(lo) > p {
            step = step * lit(2.0);
            lo = center - step;
        }
        step = spread;
        while self.cdf(hi) < p {
            step = step * lit(2.0);
            hi = center + step;
        }
        for _ in 0..400 {
            let mid = (lo + hi) / lit(2.0);
            if !(mid > lo && mid < hi) {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) / lit(2.0))
    }

    /// The law whose density is proportional to `pdf^(1/3)`, when it stays in the family.
    pub fn cube_root_law(&self) -> Option<Self> {
        match self {
            Self::Gaussian(g) => Gaussian::new(g.mean(), g.std() * lit::<T>(3.0).sqrt()).ok().map(Self::Gaussian),
            Self::Laplace(l) => Laplace::new(l.location(), l.scale() * lit(3.0)).ok().map(Self::Laplace),
            Self::Mixture(_) => None,
        }
    }

    /// Interior points where the density has structure; used to seed quadrature.
    pub fn landmarks(&self) -> Vec<T> {
        let around = |m: T, s: T| [-8.0, -3.0, 0.0, 3.0, 8.0].map(|k| m + lit::<T>(k) * s);
        match self {
            Self::Gaussian(g) => around(g.mean(), g.std()).to_vec(),
            Self::Laplace(l) => around(l.location(), l.scale()).to_vec(),
            Self::Mixture(m) => m.components().iter().flat_map(|c| around(c.mean, c.std)).collect(),
        }
    }

    /// One draw from the law.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            Self::Gaussian(g) => g.draw(rng),
            Self::Laplace(l) => l.draw(rng),
            Self::Mixture(m) => m.draw(rng),
        }
    }

    /// `n` i.i.d. draws; the stream is a pure function of `(law, seed, n)`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }
}

impl<T: Real> fmt::Display for Distribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian(g) => write!(f, "gaussian(mean={},std={})", g.mean(), g.std()),
            Self::Laplace(l) => write!(f, "laplace(location={},scale={})", l.location(), l.scale()),
            Self::Mixture(m) => {
                write!(f, "mixture(")?;
                for (i, c) in m.components().iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{}:{}:{}", c.weight, c.mean, c.std)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Serialized form of a law: `{"kind": "gaussian", "mean": 0.0, "std": 1.0}` and friends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionConfig {
    Gaussian {
        mean: f64,
        std: f64,
    },
    Laplace {
        #[serde(alias = "mean")]
        location: f64,
        scale: f64,
    },
    Mixture {
        components: Vec<ComponentConfig>,
    },
    /// Complex Rician dominant-beam coefficient with unit average power.
    Rician {
        k: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

impl<T: Real> TryFrom<DistributionConfig> for Distribution<T> {
    type Error = Error;

    fn try_from(cfg: DistributionConfig) -> Result<Self> {
        match cfg {
            DistributionConfig::Gaussian { mean, std } => Self::gaussian(lit(mean), lit(std)),
            DistributionConfig::Laplace { location, scale } => Self::laplace(lit(location), lit(scale)),
            DistributionConfig::Mixture { components } => {
                let triples: Vec<_> = components.iter().map(|c| (lit(c.weight), lit(c.mean), lit(c.std))).collect();
                Self::mixture(&triples)
            }
            DistributionConfig::Rician { .. } => {
                invalid("a rician law has no scalar density; use it through the CSI moment operations")
            }
        }
    }
}

impl<T: Real> From<Distribution<T>> for DistributionConfig {
    fn from(d: Distribution<T>) -> Self {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        match d {
            Distribution::Gaussian(g) => Self::Gaussian { mean: f(g.mean()), std: f(g.std()) },
            Distribution::Laplace(l) => Self::Laplace { location: f(l.location()), scale: f(l.scale()) },
            Distribution::Mixture(m) => Self::Mixture {
                components: m
                    .components()
                    .iter()
                    .map(|c| ComponentConfig { weight: f(c.weight), mean: f(c.mean), std: f(c.std) })
                    .collect(),
            },
        }
    }
}
