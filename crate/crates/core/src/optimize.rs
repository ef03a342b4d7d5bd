//! Bracketed scalar minimization.

use crate::real::{lit, Real};

/// Location and value of a scalar minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
    pub evaluations: usize,
}

/// Golden-section search on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn golden_section<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> Minimum<T> {
    let inv_phi = lit::<T>((5.0_f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut evaluations = 2;
    while (b - a).abs() > tol && evaluations < 400 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    if fc <= fd {
        Minimum { x: c, value: fc, evaluations }
    } else {
        Minimum { x: d, value: fd, evaluations }
    }
}

/// Newton steps on central differences with spacing `h`. Steps longer than
/// `h` are accepted only while they do not increase `f`. Golden section alone stalls near `sqrt(eps)`.
pub fn newton_polish<T: Real>(f: impl Fn(T) -> T, start: Minimum<T>, h: T, max_steps: usize) -> Minimum<T> {
    let mut best = start;
    for _ in 0..max_steps {
        let x = best.x;
        let (fm, fp) = (f(x - h), f(x + h));
        best.evaluations += 2;
        let curvature = (fp - lit::<T>(2.0) * best.value + fm) / (h * h);
        if !(curvature > T::zero()) {
            break;
        }
        let step = (fp - fm) / (lit::<T>(2.0) * h) / curvature;
        let candidate = x - step;
        let value = f(candidate);
        best.evaluations += 1;
        // inside the difference stencil the quadratic model beats function noise
        if candidate == x || !(value <= best.value || step.abs() <= h) {
            break;
        }
        best = Minimum { x: candidate, value, evaluations: best.evaluations };
        if step.abs() <= T::epsilon() * (T::one() + x.abs()) {
            break;
        }
    }
    best
}

/// Minimizes on `[lo, hi]` and polishes; `None` when the minimum sits on an edge.
pub fn minimize_in_bracket<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T, h: T) -> Option<Minimum<T>> {
    let coarse = golden_section(&f, lo, hi, tol);
    let edge = tol * lit(4.0);
    if coarse.x - lo <= edge || hi - coarse.x <= edge {
        return None;
    }
    let fine = newton_polish(&f, coarse, h, 8);
    (fine.x > lo && fine.x < hi).then_some(fine)
}
