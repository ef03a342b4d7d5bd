use rand::Rng;
use rand_distr::StandardNormal;

use super::Interval;
use crate::error::{invalid, Result};
use crate::real::{lit, Real};
use crate::special::{std_cdf, std_normal_conditional, std_pdf, std_sf, Conditional};

/// Normal law `N(mean, std^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian<T> {
    mean: T,
    std: T,
}

impl<T: Real> Gaussian<T> {
    pub fn new(mean: T, std: T) -> Result<Self> {
        if !mean.is_finite() || !(std > T::zero()) || !std.is_finite() {
            return invalid(format!("gaussian needs finite mean and std > 0, got ({mean}, {std})"));
        }
        Ok(Self { mean, std })
    }

    pub fn standard() -> Self {
        Self { mean: T::zero(), std: T::one() }
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn std(&self) -> T {
        self.std
    }

    fn z(&self, x: T) -> T {
        (x - self.mean) / self.std
    }

    pub fn pdf(&self, x: T) -> T {
        std_pdf(self.z(x)) / self.std
    }

    pub fn ln_pdf(&self, x: T) -> T {
        let z = self.z(x);
        -z * z / lit(2.0) - self.std.ln() - lit::<T>(0.5) * (lit::<T>(2.0) * T::PI()).ln()
    }

    pub fn cdf(&self, x: T) -> T {
        std_cdf(self.z(x))
    }

    pub fn sf(&self, x: T) -> T {
        std_sf(self.z(x))
    }

    pub(crate) fn conditional(&self, iv: &Interval<T>) -> Option<Conditional<T>> {
        std_normal_conditional(self.z(iv.lo()), self.z(iv.hi())).map(|c| c.affine(self.mean, self.std))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.std * lit(z)
    }
}
