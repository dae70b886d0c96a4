//! Lévy measure of the IG-OU subordinator `H_{λt}` and the constants derived
//! from it.
//!
//! The density splits into two pieces that are simulated separately:
//!
//! ```text
//! f(x)  = c x^{-3/2} (1 + b² x) e^{-b² x / 2},   c = aλ / (2√(2π))
//! f1(x) = c x^{-3/2} e^{-b² x / 2}               (infinite activity)
//! f2(x) = c b² x^{-1/2} e^{-b² x / 2}            (total mass aλb/2)
//! ```
//!
//! Jumps of `f1` above the truncation threshold are simulated band by band
//! on a dyadic ladder anchored at [`BAND_ANCHOR`]. Thresholds that lie on the
//! ladder share every band above them, so runs at `ε` and `ε/2` see the same
//! large jumps.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Default jump-size truncation threshold.
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Reference point of the dyadic band ladder: band `k` is `(A·2^k, A·2^{k+1}]`.
pub const BAND_ANCHOR: f64 = 1e-8;

const QUAD_TOL: Tolerance = Tolerance::new(1e-10, 1e-300);

/// `C¹ρ = ∫ g = ρλa / √(b² − 2ρ)`.
pub fn c_rho_1_closed_form(a: f64, b: f64, lambda: f64, rho: f64) -> f64 {
    rho * lambda * a / (b * b - 2.0 * rho).sqrt()
}

/// `C²ρ = ∫ (e^{ρx} − 1)² f = 2ρλa (1/√(b² − 4ρ) − 1/√(b² − 2ρ))`.
pub fn c_rho_2_closed_form(a: f64, b: f64, lambda: f64, rho: f64) -> f64 {
    let b2 = b * b;
    2.0 * rho * lambda * a * (1.0 / (b2 - 4.0 * rho).sqrt() - 1.0 / (b2 - 2.0 * rho).sqrt())
}

/// One slice `(lower, upper]` of the `f1` jump component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JumpBand {
    /// Ladder index; used to key random streams.
    pub index: i32,
    pub lower: f64,
    /// `f64::INFINITY` for the tail band.
    pub upper: f64,
    /// Arrival rate `∫_lower^upper f1`, per unit time.
    pub rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationQuantities {
    /// `∫_0^ε x f(x) dx`
    pub mu_eps: f64,
    /// `∫_0^ε (e^{ρx} − 1) f(x) dx`
    pub gamma_eps: f64,
    /// `∫_ε^∞ f1(x) dx`
    pub rate_cp1_eps: f64,
}

#[derive(Clone, Debug)]
pub struct LevyKernel {
    a: f64,
    b: f64,
    lambda: f64,
    rho: f64,
    scale: f64,
    c1: f64,
    c2: f64,
    epsilon: f64,
    truncation: TruncationQuantities,
    rate_cp2: f64,
    bands: Vec<JumpBand>,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

impl LevyKernel {
    pub fn new(a: f64, b: f64, lambda: f64, rho: f64, epsilon: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        positive("lambda", lambda)?;
        positive("epsilon", epsilon)?;
        if !(rho <= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be non-positive, got {rho}"),
            });
        }
        if b * b <= 4.0 * rho.abs() {
            return Err(Error::Assumption(format!(
                "b^2 = {} must exceed 4|rho| = {}",
                b * b,
                4.0 * rho.abs()
            )));
        }

        let mut kernel = LevyKernel {
            a,
            b,
            lambda,
            rho,
            scale: a * lambda / (2.0 * (2.0 * PI).sqrt()),
            c1: c_rho_1_closed_form(a, b, lambda, rho),
            c2: c_rho_2_closed_form(a, b, lambda, rho),
            epsilon,
            truncation: TruncationQuantities {
                mu_eps: 0.0,
                gamma_eps: 0.0,
                rate_cp1_eps: 0.0,
            },
            rate_cp2: a * lambda * b / 2.0,
            bands: Vec::new(),
        };
        kernel.bands = kernel.jump_bands(epsilon)?;
        let rate_cp1_eps = kernel.bands.iter().rev().map(|band| band.rate).sum();
        let (mu_eps, gamma_eps) = kernel.small_jump_integrals(epsilon)?;
        kernel.truncation = TruncationQuantities {
            mu_eps,
            gamma_eps,
            rate_cp1_eps,
        };
        Ok(kernel)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn c_rho_1(&self) -> f64 {
        self.c1
    }

    pub fn c_rho_2(&self) -> f64 {
        self.c2
    }

    pub fn mu_eps(&self) -> f64 {
        self.truncation.mu_eps
    }

    pub fn gamma_eps(&self) -> f64 {
        self.truncation.gamma_eps
    }

    pub fn rate_cp1_eps(&self) -> f64 {
        self.truncation.rate_cp1_eps
    }

    /// Arrival rate `aλb/2` of the `f2` component.
    pub fn rate_cp2(&self) -> f64 {
        self.rate_cp2
    }

    pub fn truncation(&self) -> TruncationQuantities {
        self.truncation
    }

    /// Bands of `f1` above the kernel's threshold, lowest first.
    pub fn bands(&self) -> &[JumpBand] {
        &self.bands
    }

    fn check_x(x: f64) -> Result<()> {
        if x > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "jump size",
                value: x,
            })
        }
    }

    // Unchecked evaluations, valid for x > 0.
    #[inline]
    pub(crate) fn f(&self, x: f64) -> f64 {
        let b2 = self.b * self.b;
        self.scale * x.powf(-1.5) * (1.0 + b2 * x) * (-0.5 * b2 * x).exp()
    }

    #[inline]
    pub(crate) fn g(&self, x: f64) -> f64 {
        (self.rho * x).exp_m1() * self.f(x)
    }

    #[inline]
    pub(crate) fn f1(&self, x: f64) -> f64 {
        self.scale * x.powf(-1.5) * (-0.5 * self.b * self.b * x).exp()
    }

    #[inline]
    pub(crate) fn f2(&self, x: f64) -> f64 {
        let b2 = self.b * self.b;
        self.scale * b2 * x.powf(-0.5) * (-0.5 * b2 * x).exp()
    }

    /// Lévy density `f_ν(x)`.
    pub fn levy_density(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        Ok(self.f(x))
    }

    /// Leverage-weighted density `g_ν(x) = (e^{ρx} − 1) f_ν(x)`; never positive.
    pub fn g_density(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        Ok(self.g(x))
    }

    pub fn ig_component_density(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        Ok(self.f1(x))
    }

    pub fn gamma_component_density(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        Ok(self.f2(x))
    }

    /// `∫_0^ε x f`, `∫_0^ε (e^{ρx}−1) f` and `∫_ε^∞ f1` for an arbitrary threshold.
    pub fn truncation_quantities(&self, epsilon: f64) -> Result<TruncationQuantities> {
        if !(epsilon > 0.0) {
            return Err(Error::Domain {
                what: "truncation threshold",
                value: epsilon,
            });
        }
        if epsilon == self.epsilon {
            return Ok(self.truncation);
        }
        let (mu_eps, gamma_eps) = self.small_jump_integrals(epsilon)?;
        let rate_cp1_eps = self.jump_bands(epsilon)?.iter().rev().map(|b| b.rate).sum();
        Ok(TruncationQuantities {
            mu_eps,
            gamma_eps,
            rate_cp1_eps,
        })
    }

    fn small_jump_integrals(&self, epsilon: f64) -> Result<(f64, f64)> {
        let mu = quad::integrate_sqrt_singular(|x| x * self.f(x), epsilon, QUAD_TOL)?;
        let gamma = quad::integrate_sqrt_singular(|x| self.g(x), epsilon, QUAD_TOL)?;
        Ok((mu.value, gamma.value))
    }

    /// Lower edge of the tail band: the first ladder point at or above `2/b²`,
    /// where the exponential factor starts to dominate the power law.
    fn tail_start_index(&self) -> i32 {
        let target = 2.0 / (self.b * self.b);
        let mut k = (target / BAND_ANCHOR).log2().ceil() as i32;
        while ladder(k - 1) >= target {
            k -= 1;
        }
        while ladder(k) < target {
            k += 1;
        }
        k
    }

    /// Band decomposition of `(ε, ∞)` for the `f1` component.
    pub fn jump_bands(&self, epsilon: f64) -> Result<Vec<JumpBand>> {
        let top = self.tail_start_index();
        let mut k = (epsilon / BAND_ANCHOR).log2().floor() as i32;
        while ladder(k) > epsilon {
            k -= 1;
        }
        while ladder(k + 1) <= epsilon {
            k += 1;
        }

        let mut bands = Vec::new();
        let mut lower = epsilon;
        while k < top {
            let upper = ladder(k + 1);
            let rate = quad::integrate(|x| self.f1(x), lower, upper, QUAD_TOL)?.value;
            bands.push(JumpBand {
                index: k,
                lower,
                upper,
                rate,
            });
            lower = upper;
            k += 1;
        }
        let tail = quad::integrate_to_infinity(|x| self.f1(x), lower, QUAD_TOL)?.value;
        bands.push(JumpBand {
            index: k,
            lower,
            upper: f64::INFINITY,
            rate: tail,
        });
        Ok(bands)
    }
}

#[inline]
fn ladder(k: i32) -> f64 {
    BAND_ANCHOR * 2f64.powi(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nv() -> LevyKernel {
        LevyKernel::new(0.0872, 11.98, 2.4958, -4.7039, DEFAULT_EPSILON).unwrap()
    }

    fn scho() -> LevyKernel {
        LevyKernel::new(6.2410, 4.7995, 0.0636, -0.1926, DEFAULT_EPSILON).unwrap()
    }

    #[test]
    fn density_matches_direct_formula() {
        let k = nv();
        let (a, b, l) = (0.0872f64, 11.98f64, 2.4958f64);
        let x = 0.01f64;
        let direct = a * l / (2.0 * (2.0 * PI).sqrt()) * x.powf(-1.5) * (1.0 + b * b * x) * (-b * b * x / 2.0).exp();
        let v = k.levy_density(x).unwrap();
        assert!((v / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_decays_at_infinity() {
        let k = nv();
        assert_eq!(k.levy_density(1e3).unwrap(), 0.0);
        assert!(k.levy_density(1.0).unwrap() < 1e-25);
    }

    #[test]
    fn non_positive_argument_is_domain_error() {
        let k = nv();
        assert!(matches!(k.levy_density(0.0), Err(Error::Domain { .. })));
        assert!(matches!(k.g_density(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(k.truncation_quantities(0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn component_split_is_pointwise_exact() {
        for k in [nv(), scho()] {
            let mut x = 1e-10;
            while x <= 10.0 {
                let sum = k.f1(x) + k.f2(x);
                let f = k.f(x);
                if f > 0.0 {
                    assert!((sum / f - 1.0).abs() < 1e-12, "x={x}");
                }
                x *= 1.3;
            }
        }
    }

    #[test]
    fn gamma_component_total_mass() {
        for k in [nv(), scho()] {
            let mass = quad::integrate_sqrt_singular(|x| k.f2(x), 1.0, QUAD_TOL).unwrap().value
                + quad::integrate_to_infinity(|x| k.f2(x), 1.0, QUAD_TOL).unwrap().value;
            assert!((mass / k.rate_cp2() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn g_is_leverage_times_f() {
        let k = scho();
        for x in [1e-9, 1e-4, 0.3, 2.0, 7.5] {
            let g = k.g_density(x).unwrap();
            assert_eq!(g, (k.rho() * x).exp_m1() * k.levy_density(x).unwrap());
            assert!(g <= 0.0);
        }
    }

    #[test]
    fn g_ratio_tends_to_minus_one() {
        let k = scho();
        let x = 200.0;
        let ratio = (k.rho() * x).exp_m1();
        assert!((ratio + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_leverage_kills_c1_c2_and_g() {
        let k = LevyKernel::new(0.0872, 11.98, 2.4958, 0.0, DEFAULT_EPSILON).unwrap();
        assert_eq!(k.c_rho_1(), 0.0);
        assert_eq!(k.c_rho_2(), 0.0);
        assert_eq!(k.gamma_eps(), 0.0);
        assert_eq!(k.g_density(0.3).unwrap(), 0.0);
    }

    #[test]
    fn c2_requires_assumption_on_b() {
        let err = LevyKernel::new(6.2410, 0.7995, 0.0636, -0.1926, DEFAULT_EPSILON).unwrap_err();
        assert!(matches!(err, Error::Assumption(_)));
    }

    #[test]
    fn bands_tile_the_range() {
        let k = nv();
        let bands = k.bands();
        assert_eq!(bands[0].lower, DEFAULT_EPSILON);
        for w in bands.windows(2) {
            assert_eq!(w[0].upper, w[1].lower);
            assert_eq!(w[0].index + 1, w[1].index);
        }
        assert!(bands.last().unwrap().upper.is_infinite());
        assert!(bands.last().unwrap().lower >= 2.0 / (11.98 * 11.98));
    }

    #[test]
    fn halving_threshold_adds_one_band_below() {
        let k = nv();
        let coarse = k.jump_bands(1e-8).unwrap();
        let fine = k.jump_bands(5e-9).unwrap();
        assert_eq!(fine.len(), coarse.len() + 1);
        assert_eq!(&fine[1..], &coarse[..]);
    }

    #[test]
    fn off_ladder_threshold_gets_partial_band() {
        let k = nv();
        let bands = k.jump_bands(3e-8).unwrap();
        assert_eq!(bands[0].lower, 3e-8);
        assert_eq!(bands[0].upper, 4e-8);
        assert_eq!(bands[0].index, 1);
    }

    #[test]
    fn truncation_quantities_monotone_in_epsilon() {
        let k = nv();
        let mut prev: Option<TruncationQuantities> = None;
        for eps in [1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10] {
            let q = k.truncation_quantities(eps).unwrap();
            if let Some(p) = prev {
                assert!(q.mu_eps < p.mu_eps);
                assert!(q.gamma_eps > p.gamma_eps);
                assert!(q.rate_cp1_eps > p.rate_cp1_eps);
            }
            assert!(q.mu_eps >= 0.0 && q.gamma_eps <= 0.0);
            prev = Some(q);
        }
        let tiny = k.truncation_quantities(1e-14).unwrap();
        assert!(tiny.mu_eps < 1e-8);
        let leading = 0.0872 * 2.4958 / (2.0 * PI).sqrt() / 1e-7;
        assert!((tiny.rate_cp1_eps / leading - 1.0).abs() < 1e-3);
    }

    #[test]
    fn small_jump_mass_leading_order() {
        let k = nv();
        let q = k.truncation_quantities(1e-8).unwrap();
        let leading = 0.0872 * 2.4958 / (2.0 * PI).sqrt() * 1e-4;
        assert!((q.mu_eps / leading - 1.0).abs() < 0.01);
        assert!(q.mu_eps < 1e-5);
    }
}
