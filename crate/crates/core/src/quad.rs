//! Globally adaptive Gauss–Kronrod (7/15) integration.
//!
//! Used for the closed-form checks and the truncation constants of the Lévy
//! kernel. Two helpers wrap the basic rule: a change of variables for
//! semi-infinite ranges and the `x = u²` substitution that removes an
//! `x^{-1/2}` singularity at the origin.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed Kronrod abscissae XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Tolerance { rel, abs: 1e-300 }
    }

    pub const fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// Endpoints are never evaluated, so integrable endpoint singularities are
/// tolerated (though convergence is faster once they are transformed away).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain {
            what: "finite integration bound",
            value: if a.is_finite() { b } else { a },
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let first = kronrod(&f, lo, hi);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::with_capacity(64);
    heap.push(first);

    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(worst);
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
            });
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the incremental updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Integral {
        value: sign * value,
        error,
    })
}

/// Integrates `f` over `[a, ∞)` through the map `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Integral> {
    integrate(
        |t| {
            let one_minus = 1.0 - t;
            let x = a + t / one_minus;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integrates `f` over `(0, b]` after substituting `x = u²`, which turns an
/// `x^{-1/2}` singularity at the origin into a smooth integrand.
pub fn integrate_sqrt_singular<F: Fn(f64) -> f64>(f: F, b: f64, tol: Tolerance) -> Result<Integral> {
    if b < 0.0 {
        return Err(Error::Domain {
            what: "upper bound of singular integral",
            value: b,
        });
    }
    integrate(|u| 2.0 * u * f(u * u), 0.0, b.sqrt(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerance = Tolerance::relative(1e-12);

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, TOL).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let fwd = integrate(f64::sin, 0.0, 1.0, TOL).unwrap().value;
        let rev = integrate(f64::sin, 1.0, 0.0, TOL).unwrap().value;
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x| (-2.0 * x).exp(), 1.0, TOL).unwrap();
        let exact = (-2.0f64).exp() / 2.0;
        assert!((r.value / exact - 1.0).abs() < 1e-11);
    }

    #[test]
    fn inverse_sqrt_singularity() {
        // ∫_0^4 x^{-1/2} dx = 4
        let r = integrate_sqrt_singular(|x| x.powf(-0.5), 4.0, TOL).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate_to_infinity(|x| (-0.5 * x * x).exp(), 0.0, TOL).unwrap();
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!((r.value / exact - 1.0).abs() < 1e-11);
    }

    #[test]
    fn non_finite_bound_rejected() {
        assert!(integrate(|x| x, 0.0, f64::INFINITY, TOL).is_err());
    }
}
