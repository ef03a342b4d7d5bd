//! Standard-normal special functions and truncated-normal moments.
//!
//! Everything here works on the standardized variable `Z ~ N(0, 1)`. The
//! truncated moments come in three numerically distinct regimes: intervals
//! straddling zero (direct CDF differences), one-sided intervals (scaled by
//! the Mills ratio so that deep-tail bins keep full relative precision) and
//! narrow intervals (Gauss-Legendre about the left edge, which avoids the
//! cancellation in `E[Z^2] - E[Z]^2` for fine partitions).

use std::sync::OnceLock;

use crate::real::{lit, Real};

/// `1 / sqrt(2 pi)`
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn std_pdf<T: Real>(x: T) -> T {
    (-(x * x) / lit(2.0)).exp() * lit(FRAC_1_SQRT_2PI)
}

/// Standard normal CDF `Phi(x)`, via `erfc` so the lower tail keeps relative precision.
pub fn std_cdf<T: Real>(x: T) -> T {
    if x == T::neg_infinity() {
        return T::zero();
    }
    if x == T::infinity() {
        return T::one();
    }
    (-x * T::FRAC_1_SQRT_2()).erfc() / lit(2.0)
}

/// Standard normal survival function `1 - Phi(x)`.
pub fn std_sf<T: Real>(x: T) -> T {
    std_cdf(-x)
}

/// Mills ratio `(1 - Phi(x)) / phi(x)` for `x >= 0`.
pub fn mills_ratio<T: Real>(x: T) -> T {
    debug_assert!(x >= T::zero());
    if x == T::infinity() {
        return T::zero();
    }
    if x > lit(T::MILLS_CUTOFF) {
        // 1/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - 945/x^10)
        let r = (x * x).recip();
        let series = T::one()
            - r * (T::one()
                - r * (lit::<T>(3.0) - r * (lit::<T>(15.0) - r * (lit::<T>(105.0) - r * lit(945.0)))));
        return series / x;
    }
    std_sf(x) / std_pdf(x)
}

/// Inverse Mills ratios `(lambda_L, lambda_R) = (phi(a)/Phi(a), phi(a)/(1 - Phi(a)))`.
///
/// These are the conditional-mean corrections of a standard normal truncated
/// to `(-inf, a)` and `[a, inf)`: `E[Z | Z < a] = -lambda_L`, `E[Z | Z >= a] = lambda_R`.
pub fn inverse_mills<T: Real>(alpha: T) -> (T, T) {
    (upper_inverse_mills(-alpha), upper_inverse_mills(alpha))
}

fn upper_inverse_mills<T: Real>(a: T) -> T {
    if a >= T::zero() {
        mills_ratio(a).recip()
    } else {
        std_pdf(a) / std_sf(a)
    }
}

/// Conditional law of a standardized variable on an interval, expressed as
/// moments about a pivot point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Conditional<T> {
    pub mass: T,
    pub pivot: T,
    /// `about[k] = E[(Z - pivot)^k | Z in interval]`, `k = 0..=4`.
    pub about: [T; 5],
}

impl<T: Real> Conditional<T> {
    pub fn mean(&self) -> T {
        self.pivot + self.about[1]
    }

    pub fn variance(&self) -> T {
        (self.about[2] - self.about[1] * self.about[1]).max(T::zero())
    }

    /// Moments about a new pivot, by binomial expansion.
    pub fn repivot(&self, pivot: T) -> Self {
        let shift = self.pivot - pivot;
        let mut about = [T::zero(); 5];
        for (k, slot) in about.iter_mut().enumerate() {
            let mut acc = T::zero();
            for j in 0..=k {
                acc = acc + lit::<T>(binomial(k, j)) * shift.powi((k - j) as i32) * self.about[j];
            }
            *slot = acc;
        }
        Self { mass: self.mass, pivot, about }
    }

    /// Image under `x -> location + scale * x` (`scale > 0`).
    pub fn affine(&self, location: T, scale: T) -> Self {
        let mut about = self.about;
        let mut s = T::one();
        for slot in about.iter_mut() {
            *slot = *slot * s;
            s = s * scale;
        }
        Self { mass: self.mass, pivot: location + scale * self.pivot, about }
    }

    /// Mirror image under `x -> -x`.
    pub fn reflect(&self) -> Self {
        let mut about = self.about;
        about[1] = -about[1];
        about[3] = -about[3];
        Self { mass: self.mass, pivot: -self.pivot, about }
    }

    /// Mass-weighted mixture of conditionals sharing no common pivot.
    pub fn combine(parts: &[Self], pivot: T) -> Option<Self> {
        let mass: T = parts.iter().map(|p| p.mass).sum();
        if !(mass > T::zero()) {
            return None;
        }
        let mut about = [T::zero(); 5];
        for p in parts.iter().filter(|p| p.mass > T::zero()) {
            let q = p.repivot(pivot);
            let w = p.mass / mass;
            for (slot, v) in about.iter_mut().zip(q.about) {
                *slot = *slot + w * v;
            }
        }
        Some(Self { mass, pivot, about })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    const ROWS: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    ROWS[n][k]
}

/// Standard normal conditioned on `(a, b)`; `None` when the interval carries no
/// representable mass.
pub(crate) fn std_normal_conditional<T: Real>(a: T, b: T) -> Option<Conditional<T>> {
    debug_assert!(a < b);
    if b <= T::zero() {
        return std_normal_conditional(-b, -a).map(|c| c.reflect());
    }
    let width = b - a;
    if width.is_finite() && width <= T::one() && width * a.abs().max(b.abs()) <= T::one() {
        // exponent of phi(a + w s) / phi(a) is -(a w s + w^2 s^2 / 2)
        let (i0, g) = narrow_moments(|s: T| a * width * s + width * width * s * s / lit(2.0));
        let mass = std_pdf(a) * width * i0;
        if !(mass > T::zero()) {
            return None;
        }
        let mut about = [T::one(); 5];
        let mut wk = T::one();
        for k in 1..5 {
            wk = wk * width;
            about[k] = wk * g[k];
        }
        return Some(Conditional { mass, pivot: a, about });
    }

    let (mass, psi_a, psi_b) = if a >= T::zero() {
        let ra = mills_ratio(a);
        let (e, rb) = if b.is_finite() {
            ((-(b - a) * (b + a) / lit(2.0)).exp(), mills_ratio(b))
        } else {
            (T::zero(), T::zero())
        };
        let denom = ra - e * rb;
        let mass = std_pdf(a) * denom;
        if !(mass > T::zero()) || !(denom > T::zero()) {
            return None;
        }
        (mass, denom.recip(), e / denom)
    } else {
        let mass = T::one() - std_cdf(a) - std_sf(b);
        if !(mass > T::zero()) {
            return None;
        }
        (mass, std_pdf(a) / mass, std_pdf(b) / mass)
    };

    // M_k = (k-1) M_{k-2} + a^{k-1} psi_a - b^{k-1} psi_b, with x^j phi(x) -> 0 at infinity.
    let edge = |x: T, psi: T, j: i32| if x.is_finite() { x.powi(j) * psi } else { T::zero() };
    let mut m = [T::one(), T::zero(), T::zero(), T::zero(), T::zero()];
    m[1] = edge(a, psi_a, 0) - edge(b, psi_b, 0);
    for k in 2..5 {
        m[k] = lit::<T>((k - 1) as f64) * m[k - 2] + edge(a, psi_a, k as i32 - 1) - edge(b, psi_b, k as i32 - 1);
    }
    Some(Conditional { mass, pivot: T::zero(), about: m })
}

/// Gauss-Legendre evaluation of `I_k = int_0^1 s^k exp(-h(s)) ds`, returning
/// `I_0` and the normalized ratios `I_k / I_0` for `k = 0..=4`.
pub(crate) fn narrow_moments<T: Real>(h: impl Fn(T) -> T) -> (T, [T; 5]) {
    let mut acc = [T::zero(); 5];
    for &(node, weight) in gauss_legendre_unit() {
        let s = lit::<T>(node);
        let w = lit::<T>(weight) * (-h(s)).exp();
        let mut sk = T::one();
        for slot in acc.iter_mut() {
            *slot = *slot + w * sk;
            sk = sk * s;
        }
    }
    let i0 = acc[0];
    let mut g = [T::one(); 5];
    for k in 1..5 {
        g[k] = acc[k] / i0;
    }
    (i0, g)
}

const GL_POINTS: usize = 16;

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub(crate) fn gauss_legendre_unit() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_POINTS;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push(((x + 1.0) / 2.0, w / 2.0));
        }
        out
    })
}
