use rand::Rng;

use super::Interval;
use crate::error::{invalid, Result};
use crate::real::{lit, Real};
use crate::special::{narrow_moments, Conditional};

/// Laplace law with density `exp(-|x - location| / scale) / (2 scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Laplace<T> {
    location: T,
    scale: T,
}

impl<T: Real> Laplace<T> {
    pub fn new(location: T, scale: T) -> Result<Self> {
        if !location.is_finite() || !(scale > T::zero()) || !scale.is_finite() {
            return invalid(format!("laplace needs finite location and scale > 0, got ({location}, {scale})"));
        }
        Ok(Self { location, scale })
    }

    pub fn location(&self) -> T {
        self.location
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn pdf(&self, x: T) -> T {
        self.ln_pdf(x).exp()
    }

    pub fn ln_pdf(&self, x: T) -> T {
        -((x - self.location) / self.scale).abs() - (lit::<T>(2.0) * self.scale).ln()
    }

    pub fn cdf(&self, x: T) -> T {
        let u = (x - self.location) / self.scale;
        let half = lit::<T>(0.5);
        if u < T::zero() {
            half * u.exp()
        } else {
            T::one() - half * (-u).exp()
        }
    }

    pub(crate) fn conditional(&self, iv: &Interval<T>) -> Option<Conditional<T>> {
        let a = (iv.lo() - self.location) / self.scale;
        let b = (iv.hi() - self.location) / self.scale;
        std_laplace_conditional(a, b).map(|c| c.affine(self.location, self.scale))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        loop {
            let u: f64 = rng.random::<f64>() - 0.5;
            if u > -0.5 {
                let x = -u.signum() * (1.0 - 2.0 * u.abs()).ln();
                return self.location + self.scale * lit(x);
            }
        }
    }
}

/// Standard Laplace (`density exp(-|u|)/2`) conditioned on `(a, b)`.
fn std_laplace_conditional<T: Real>(a: T, b: T) -> Option<Conditional<T>> {
    if b <= T::zero() {
        return std_laplace_conditional(-b, -a).map(|c| c.reflect());
    }
    if a >= T::zero() {
        return exponential_piece(a, b - a);
    }
    let right = exponential_piece(T::zero(), b)?;
    let left = exponential_piece(T::zero(), -a)?.reflect();
    Conditional::combine(&[left, right], T::zero())
}

/// The law on `[a, a + d)` with `a >= 0`, where the density is `exp(-u)/2`.
fn exponential_piece<T: Real>(a: T, d: T) -> Option<Conditional<T>> {
    let lead = lit::<T>(0.5) * (-a).exp();
    let mut about = [T::one(); 5];
    let mass = if d <= T::one() {
        let (i0, g) = narrow_moments(|s: T| d * s);
        let mut dk = T::one();
        for k in 1..5 {
            dk = dk * d;
            about[k] = dk * g[k];
        }
        lead * d * i0
    } else {
        // E[v^k | v < d] = k! (1 - sum_{j=1..k} (d^j / j!) / (e^d - 1))
        let denom = d.exp_m1();
        let mut factorial = T::one();
        let mut term = T::one();
        let mut partial = T::zero();
        for (k, slot) in about.iter_mut().enumerate().skip(1) {
            let kf = lit::<T>(k as f64);
            factorial = factorial * kf;
            term = term * d / kf;
            if denom.is_finite() {
                partial = partial + term / denom;
            }
            *slot = factorial * (T::one() - partial);
        }
        lead * -(-d).exp_m1()
    };
    (mass > T::zero()).then_some(Conditional { mass, pivot: a, about })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_line_is_exponential() {
        let l = Laplace::new(0.0, 1.0).unwrap();
        let c = l.conditional(&Interval::new(0.0, f64::INFINITY).unwrap()).unwrap();
        assert!((c.mass - 0.5).abs() < 1e-16);
        assert!((c.repivot(0.0).about[2] - 2.0).abs() < 1e-14);
        assert!((c.repivot(0.0).about[4] - 24.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_and_wide_pieces_agree() {
        let narrow = exponential_piece(0.3_f64, 1.0).unwrap();
        let wide = exponential_piece(0.3_f64, 1.0 + 1e-12).unwrap();
        assert!((narrow.mass - wide.mass).abs() < 1e-12);
        for k in 1..5 {
            assert!((narrow.about[k] - wide.about[k]).abs() < 1e-11, "k={k}");
        }
    }

    #[test]
    fn straddling_bin_is_symmetric() {
        let l = Laplace::new(0.0_f64, 0.7).unwrap();
        let c = l.conditional(&Interval::new(-1.0, 1.0).unwrap()).unwrap();
        assert!(c.mean().abs() < 1e-15);
        assert!((c.mass - (1.0 - (-1.0f64 / 0.7).exp())).abs() < 1e-15);
    }
}
