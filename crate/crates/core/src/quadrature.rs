//! Globally adaptive Gauss-Kronrod (G7/K15) quadrature.
//!
//! Infinite ranges are mapped onto finite ones (`x = a + t/(1-t)` and its
//! mirror) before subdivision. Breakpoints split the domain up front so that
//! narrow peaks are not missed by the first coarse rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::real::{lit, Real};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self { abs_tol: lit(T::QUAD_TOL), rel_tol: T::zero(), max_subdivisions: 10_000 }
    }
}

impl<T: Real> QuadConfig<T> {
    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub subdivisions: usize,
}

#[derive(Clone, Copy)]
enum Map<T> {
    Finite,
    /// `[a, inf)`: `x = a + t / (1 - t)`, `t in [0, 1)`
    Upper(T),
    /// `(-inf, b]`: `x = b - (1 - t) / t`, `t in (0, 1]`
    Lower(T),
}

impl<T: Real> Map<T> {
    fn eval(&self, f: &impl Fn(T) -> T, t: T) -> T {
        match *self {
            Map::Finite => f(t),
            Map::Upper(a) => {
                let u = T::one() - t;
                let y = f(a + t / u);
                if y == T::zero() { y } else { y / (u * u) }
            }
            Map::Lower(b) => {
                let y = f(b - (T::one() - t) / t);
                if y == T::zero() { y } else { y / (t * t) }
            }
        }
    }
}

struct Piece<T> {
    map: usize,
    lo: T,
    hi: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Piece<T> {}
impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod<T: Real>(f: &impl Fn(T) -> T, map: &Map<T>, lo: T, hi: T) -> (T, T, T) {
    let half = (hi - lo) / lit(2.0);
    let center = (hi + lo) / lit(2.0);
    let fc = map.eval(f, center);
    let mut res_k = fc * lit(WGK[7]);
    let mut res_g = fc * lit(WG[3]);
    let mut res_abs = res_k.abs();
    let mut fv = [(T::zero(), T::zero()); 7];
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let f1 = map.eval(f, center - dx);
        let f2 = map.eval(f, center + dx);
        fv[j] = (f1, f2);
        res_k = res_k + lit::<T>(WGK[j]) * (f1 + f2);
        res_abs = res_abs + lit::<T>(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + lit::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k / lit(2.0);
    let mut res_asc = lit::<T>(WGK[7]) * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        res_asc = res_asc + lit::<T>(WGK[j]) * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != T::zero() && err != T::zero() {
        err = res_asc * T::one().min((lit::<T>(200.0) * err / res_asc).powf(lit(1.5)));
    }
    let floor = lit::<T>(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (lit::<T>(50.0) * T::epsilon()) {
        err = err.max(floor);
    }
    (value, err, res_abs)
}

/// Integrates `f` over `[lo, hi]` (either end may be infinite).
pub fn integrate<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, cfg: &QuadConfig<T>) -> Result<Quadrature<T>> {
    integrate_with_breaks(f, lo, hi, &[], cfg)
}

/// Integrates `f` over `[lo, hi]`, splitting first at the given interior points.
pub fn integrate_with_breaks<T: Real>(
    f: impl Fn(T) -> T,
    lo: T,
    hi: T,
    breaks: &[T],
    cfg: &QuadConfig<T>,
) -> Result<Quadrature<T>> {
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidParameter("NaN integration limit".into()));
    }
    if lo == hi {
        return Ok(Quadrature { value: T::zero(), error: T::zero(), subdivisions: 0 });
    }
    if lo > hi {
        let q = integrate_with_breaks(f, hi, lo, breaks, cfg)?;
        return Ok(Quadrature { value: -q.value, ..q });
    }
    let mut points: Vec<T> = vec![lo];
    let mut inner: Vec<T> = breaks.iter().copied().filter(|&b| b > lo && b < hi && b.is_finite()).collect();
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    inner.dedup();
    if inner.is_empty() && !lo.is_finite() && !hi.is_finite() {
        inner.push(T::zero());
    }
    points.extend(inner);
    points.push(hi);

    let mut maps = Vec::new();
    let mut pieces = BinaryHeap::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (map, tlo, thi) = if a.is_finite() && b.is_finite() {
            (Map::Finite, a, b)
        } else if a.is_finite() {
            (Map::Upper(a), T::zero(), T::one())
        } else {
            (Map::Lower(b), T::zero(), T::one())
        };
        maps.push(map);
        let (value, error, _) = kronrod(&f, &map, tlo, thi);
        pieces.push(Piece { map: maps.len() - 1, lo: tlo, hi: thi, value, error });
    }

    let mut subdivisions = 0;
    let mut total: T = pieces.iter().map(|p| p.value).sum();
    let mut err: T = pieces.iter().map(|p| p.error).sum();
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(divergent(total, err));
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= target {
            // running sums drift; confirm with exact ones
            total = pieces.iter().map(|p| p.value).sum();
            err = pieces.iter().map(|p| p.error).sum();
            if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
                return Ok(Quadrature { value: total, error: err, subdivisions });
            }
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(divergent(total, err));
        }
        let worst = pieces.pop().expect("at least one piece");
        let mid = (worst.lo + worst.hi) / lit(2.0);
        if !(mid > worst.lo && mid < worst.hi) {
            // interval can no longer be split in this precision
            return Err(divergent(total, err));
        }
        total = total - worst.value;
        err = err - worst.error;
        let map = maps[worst.map];
        for (a, b) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, error, _) = kronrod(&f, &map, a, b);
            total = total + value;
            err = err + error;
            pieces.push(Piece { map: worst.map, lo: a, hi: b, value, error });
        }
        if err < T::zero() {
            err = pieces.iter().map(|p| p.error).sum();
        }
        subdivisions += 1;
    }
}

fn divergent<T: Real>(total: T, err: T) -> Error {
    Error::DivergentIntegral {
        estimate: total.to_f64().unwrap_or(f64::NAN),
        error: err.to_f64().unwrap_or(f64::NAN),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integrates_to_one_over_the_line() {
        let f = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let q = integrate(f, f64::NEG_INFINITY, f64::INFINITY, &QuadConfig::default()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12, "{:?}", q);
    }

    #[test]
    fn half_lines_and_reversed_limits() {
        let f = |x: f64| (-x).exp();
        let cfg = QuadConfig::default();
        assert!((integrate(f, 0.0, f64::INFINITY, &cfg).unwrap().value - 1.0).abs() < 1e-12);
        let g = |x: f64| x.exp();
        assert!((integrate(g, f64::NEG_INFINITY, 0.0, &cfg).unwrap().value - 1.0).abs() < 1e-12);
        assert!((integrate(|x: f64| x * x, 1.0, 0.0, &cfg).unwrap().value + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn narrow_peak_found_with_breakpoints() {
        let s = 1e-3;
        let f = |x: f64| (-(x - 5.0) * (x - 5.0) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let q = integrate_with_breaks(f, 0.0, f64::INFINITY, &[5.0 - 10.0 * s, 5.0 + 10.0 * s], &QuadConfig::default())
            .unwrap();
        assert!((q.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn growing_integrand_reports_divergence() {
        let f = |x: f64| (0.1 * x * x).exp();
        let err = integrate(f, f64::NEG_INFINITY, f64::INFINITY, &QuadConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DivergentIntegral { .. }));
        let g = |x: f64| 1.0 / x;
        assert!(integrate(g, 0.0, 1.0, &QuadConfig::default()).is_err());
    }

    #[test]
    fn single_precision_works_at_its_own_tolerance() {
        let q = integrate(|x: f32| x.cos(), 0.0, std::f32::consts::FRAC_PI_2, &QuadConfig::default()).unwrap();
        assert!((q.value - 1.0).abs() < 1e-5);
    }
}
