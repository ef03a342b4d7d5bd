use rand::Rng;

use super::{Gaussian, Interval};
use crate::error::{invalid, Result};
use crate::real::{lit, Real};
use crate::special::Conditional;

/// One weighted Gaussian component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component<T> {
    pub weight: T,
    pub mean: T,
    pub std: T,
}

/// Finite Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture<T> {
    components: Vec<Component<T>>,
}

impl<T: Real> Mixture<T> {
    pub fn new(components: &[(T, T, T)]) -> Result<Self> {
        if components.is_empty() {
            return invalid("mixture needs at least one component");
        }
        let mut total = T::zero();
        let mut out = Vec::with_capacity(components.len());
        for &(weight, mean, std) in components {
            if !(weight > T::zero()) || !weight.is_finite() {
                return invalid(format!("mixture weight {weight} must be positive"));
            }
            Gaussian::new(mean, std)?;
            total = total + weight;
            out.push(Component { weight, mean, std });
        }
        if (total - T::one()).abs() > lit(1e-9_f64.max(T::epsilon().to_f64().unwrap_or(0.0) * 16.0)) {
            return invalid(format!("mixture weights sum to {total}, not 1"));
        }
        Ok(Self { components: out })
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }

    fn gaussians(&self) -> impl Iterator<Item = (T, Gaussian<T>)> + '_ {
        self.components.iter().map(|c| (c.weight, Gaussian::new(c.mean, c.std).expect("validated component")))
    }

    pub fn pdf(&self, x: T) -> T {
        self.gaussians().map(|(w, g)| w * g.pdf(x)).sum()
    }

    pub fn ln_pdf(&self, x: T) -> T {
        let logs: Vec<T> = self.gaussians().map(|(w, g)| w.ln() + g.ln_pdf(x)).collect();
        let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
        if !top.is_finite() {
            return top;
        }
        top + logs.iter().map(|&l| (l - top).exp()).sum::<T>().ln()
    }

    pub fn cdf(&self, x: T) -> T {
        self.gaussians().map(|(w, g)| w * g.cdf(x)).sum::<T>().min(T::one())
    }

    pub fn mean(&self) -> T {
        self.components.iter().map(|c| c.weight * c.mean).sum()
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.components
            .iter()
            .map(|c| c.weight * (c.std * c.std + (c.mean - m) * (c.mean - m)))
            .sum()
    }

    pub(crate) fn conditional(&self, iv: &Interval<T>) -> Option<Conditional<T>> {
        let parts: Vec<Conditional<T>> = self
            .gaussians()
            .filter_map(|(w, g)| g.conditional(iv).map(|c| Conditional { mass: w * c.mass, ..c }))
            .collect();
        let guess = if iv.lo().is_finite() {
            iv.lo()
        } else if iv.hi().is_finite() {
            iv.hi()
        } else {
            self.mean()
        };
        let first = Conditional::combine(&parts, guess)?;
        Conditional::combine(&parts, first.mean())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight.to_f64().unwrap_or(0.0);
            if u < acc {
                chosen = i;
                break;
            }
        }
        let c = self.components[chosen];
        Gaussian::new(c.mean, c.std).expect("validated component").draw(rng)
    }
}
