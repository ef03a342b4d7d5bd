//! Conditional moments of a unit-power Rician beam coefficient and the
//! weighted-MSE reconstruction built on them.

use std::sync::OnceLock;

use crate::distributions::{Distribution, Interval};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::real::{lit, Real};

/// Moment convention for `M_n(K) = E[X^n | Re X > 0]` of `X ~ CN(nu, 1/(K+1))`,
/// `nu = sqrt(K/(K+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicianConvention {
    /// `E[|X|^n | Re X > 0]` over the complex law.
    ComplexModulus,
    /// `E[(Re X)^n | Re X > 0]`.
    RealPart,
    /// `E[|Y|^n]` for a real Gaussian `Y ~ N(nu, 1/(K+1))` carrying the full unit power.
    FoldedProxy,
    /// `E[Y^n | Y > 0]` for the same `Y`.
    RealProxy,
}

impl RicianConvention {
    pub const ALL: [Self; 4] = [Self::ComplexModulus, Self::RealPart, Self::FoldedProxy, Self::RealProxy];
}

/// Rician K-factor with unit average power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rician<T> {
    k: T,
}

impl<T: Real> Rician<T> {
    pub fn new(k: T) -> Result<Self> {
        if !(k >= T::zero()) || !k.is_finite() {
            return invalid(format!("K-factor {k} must be finite and nonnegative"));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> T {
        self.k
    }

    /// Line-of-sight amplitude `nu`.
    pub fn los(&self) -> T {
        (self.k / (self.k + T::one())).sqrt()
    }

    /// Scattered power `1 / (K + 1)`; `los^2 + scatter = 1`.
    pub fn scatter(&self) -> T {
        (self.k + T::one()).recip()
    }

    /// `M_n` for `n` in `2..=4` under `convention`.
    pub fn moment(&self, n: u32, convention: RicianConvention) -> Result<T> {
        if !(2..=4).contains(&n) {
            return invalid(format!("Rician moment order {n} outside 2..=4"));
        }
        let half_line = Interval::new(T::zero(), T::infinity())?;
        match convention {
            RicianConvention::FoldedProxy => {
                let y = Distribution::gaussian(self.los(), self.scatter().sqrt())?;
                let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
                let half = |iv: Interval<T>, sign: T| match y.raw_moments(&iv) {
                    Ok((mass, m)) => Ok(mass * sign * m[n as usize]),
                    Err(Error::ZeroMass) => Ok(T::zero()),
                    Err(e) => Err(e),
                };
                Ok(half(half_line, T::one())? + half(Interval::new(T::neg_infinity(), T::zero())?, sign)?)
            }
            RicianConvention::RealProxy => {
                Distribution::gaussian(self.los(), self.scatter().sqrt())?.truncated_moment(n, &half_line)
            }
            RicianConvention::RealPart => {
                let axis = (self.scatter() / lit(2.0)).sqrt();
                Distribution::gaussian(self.los(), axis)?.truncated_moment(n, &half_line)
            }
            RicianConvention::ComplexModulus => self.modulus_moment(n),
        }
    }

    /// Nested quadrature over `Re X > 0` and the full imaginary axis.
    fn modulus_moment(&self, n: u32) -> Result<T> {
        let axis = (self.scatter() / lit(2.0)).sqrt();
        let re = Distribution::gaussian(self.los(), axis)?;
        let im = Distribution::gaussian(T::zero(), axis)?;
        let cfg = QuadConfig::default().with_rel_tol(lit(1e-12));
        let half = lit::<T>(f64::from(n) / 2.0);
        let inner = |u: T| -> T {
            let weighted = |v: T| match im.pdf(v) {
                w if w > T::zero() => (u * u + v * v).powf(half) * w,
                _ => T::zero(),
            };
            integrate(weighted, T::neg_infinity(), T::infinity(), &cfg)
                .map_or(T::nan(), |q| q.value)
        };
        let outer = |u: T| match re.pdf(u) {
            w if w > T::zero() => inner(u) * w,
            _ => T::zero(),
        };
        let numerator = integrate(outer, T::zero(), T::infinity(), &cfg)
            .map_err(|e| Error::QuadratureFailure(e.to_string()))?
            .value;
        if !numerator.is_finite() {
            return Err(Error::QuadratureFailure("non-finite modulus moment".into()));
        }
        Ok(numerator / re.mass(&Interval::new(T::zero(), T::infinity())?))
    }
}

/// The convention that reproduces the target moments at `K = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub convention: RicianConvention,
    /// `[M_2(0), M_3(0), M_4(0)]` under that convention.
    pub moments: [f64; 3],
}

/// Target moments at `K = 0`: `M_2 = 1`, `M_3 = 2 sqrt(2/pi)`, `M_4 = 3`.
pub const CALIBRATION_TARGETS: [f64; 3] = [1.0, 1.595_769_121_605_730_7, 3.0];

/// Picks the first convention matching every target within `1e-6`.
pub fn calibrate() -> Result<Calibration> {
    let rayleigh = Rician::new(0.0_f64)?;
    for convention in RicianConvention::ALL {
        let moments = [2, 3, 4].map(|n| rayleigh.moment(n, convention).unwrap_or(f64::NAN));
        if moments.iter().zip(CALIBRATION_TARGETS).all(|(m, t)| (m - t).abs() < 1e-6) {
            return Ok(Calibration { convention, moments });
        }
    }
    Err(Error::QuadratureFailure("no moment convention reproduces the K = 0 targets".into()))
}

fn calibrated() -> Result<RicianConvention> {
    static CONVENTION: OnceLock<Result<RicianConvention>> = OnceLock::new();
    CONVENTION.get_or_init(|| calibrate().map(|c| c.convention)).clone()
}

/// `M_n(K)` under the calibrated convention.
pub fn rician_moment<T: Real>(k: T, n: u32) -> Result<T> {
    Rician::new(k)?.moment(n, calibrated()?)
}

/// Weighted-MSE optimal 1-bit reconstruction `M_3(K) / M_2(K)`.
pub fn phi<T: Real>(k: T) -> Result<T> {
    Ok(rician_moment(k, 3)? / rician_moment(k, 2)?)
}

/// Percent reduction in weighted MSE under `K_t` from using `phi(K_t)` instead of `phi(K_d)`.
pub fn eta<T: Real>(k_true: T, k_design: T) -> Result<T> {
    let m = [2, 3, 4].map(|n| rician_moment(k_true, n));
    let [m2, m3, m4] = [m[0].clone()?, m[1].clone()?, m[2].clone()?];
    let risk = |a: T| m4 - lit::<T>(2.0) * a * m3 + a * a * m2;
    let ideal = risk(phi(k_true)?);
    let mismatched = risk(phi(k_design)?);
    Ok((T::one() - ideal / mismatched) * lit(100.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_average_power() {
        for k in [0.0_f64, 0.5, 3.0, 100.0] {
            let r = Rician::new(k).unwrap();
            assert!((r.los().powi(2) + r.scatter() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn calibration_selects_the_folded_proxy() {
        let c = calibrate().unwrap();
        assert_eq!(c.convention, RicianConvention::FoldedProxy);
        for (m, t) in c.moments.iter().zip(CALIBRATION_TARGETS) {
            assert!((m - t).abs() < 1e-12);
        }
    }

    #[test]
    fn rejected_conventions_at_k_zero() {
        let r = Rician::new(0.0_f64).unwrap();
        let modulus = [2, 3, 4].map(|n| r.moment(n, RicianConvention::ComplexModulus).unwrap());
        assert!((modulus[0] - 1.0).abs() < 1e-8);
        assert!((modulus[1] - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-8);
        assert!((modulus[2] - 2.0).abs() < 1e-8);
        assert!((r.moment(2, RicianConvention::RealPart).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn modulus_moments_match_closed_form_at_positive_k() {
        let r = Rician::new(3.0_f64).unwrap();
        let (nu, s2) = (r.los(), r.scatter() / 2.0);
        let re = Distribution::gaussian(nu, s2.sqrt()).unwrap();
        let half = Interval::new(0.0, f64::INFINITY).unwrap();
        let (m1, m2) = (re.truncated_moment(1, &half).unwrap(), re.truncated_moment(2, &half).unwrap());
        let m4 = re.truncated_moment(4, &half).unwrap();
        // E[u^2 + v^2] and E[(u^2 + v^2)^2] with v independent of u
        assert!((r.moment(2, RicianConvention::ComplexModulus).unwrap() - (m2 + s2)).abs() < 1e-9);
        let expect4 = m4 + 2.0 * m2 * s2 + 3.0 * s2 * s2;
        assert!((r.moment(4, RicianConvention::ComplexModulus).unwrap() - expect4).abs() < 1e-9);
        assert!(m1 > 0.0);
    }

    #[test]
    fn phi_values_and_limits() {
        assert!((phi(0.0_f64).unwrap() - CALIBRATION_TARGETS[1]).abs() < 1e-12);
        assert!((phi(3.0_f64).unwrap() - 1.3).abs() < 0.01);
        assert!((phi(1e8_f64).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn folded_proxy_keeps_unit_power() {
        for k in [0.0_f64, 0.3, 3.0, 40.0, 1e4] {
            let m2 = Rician::new(k).unwrap().moment(2, RicianConvention::FoldedProxy).unwrap();
            assert!((m2 - 1.0).abs() < 1e-12, "{k}: {m2}");
        }
    }

    #[test]
    fn truncated_proxy_is_not_monotone_near_zero() {
        let at = |k: f64| {
            let r = Rician::new(k).unwrap();
            r.moment(3, RicianConvention::RealProxy).unwrap() / r.moment(2, RicianConvention::RealProxy).unwrap()
        };
        assert!(at(0.1) > at(0.0));
    }

    #[test]
    fn eta_regimes() {
        let low = eta(0.0_f64, 3.0).unwrap();
        let high = eta(6.0_f64, 3.0).unwrap();
        assert!((15.0..=21.0).contains(&low), "{low}");
        assert!((5.0..=11.0).contains(&high), "{high}");
        assert!(eta(3.0_f64, 3.0).unwrap().abs() < 1e-12);
    }
}
