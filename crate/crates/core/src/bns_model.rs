//! Model parameters, the positivity conditions on the minimal martingale
//! measure, and the coefficient functions of its density.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_kernel::{c_rho_2_closed_form, LevyKernel};

/// Parameters of an IG-OU BNS model together with the evaluation state
/// `(S_t, σ²_t) = (s_bar, sigma_bar_sq)` at time `eval_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub rho: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub s_bar: f64,
    pub sigma_bar_sq: f64,
    pub horizon: f64,
    #[serde(default)]
    pub eval_t: f64,
}

impl ModelParams {
    pub fn nv() -> Self {
        ModelParams {
            alpha: 0.007,
            rho: -4.7039,
            lambda: 2.4958,
            a: 0.0872,
            b: 11.98,
            s_bar: 468.40,
            sigma_bar_sq: 0.0041,
            horizon: 1.0,
            eval_t: 0.0,
        }
    }

    pub fn scho() -> Self {
        ModelParams {
            alpha: 0.1,
            rho: -0.1926,
            lambda: 0.0636,
            a: 6.2410,
            b: 4.7995,
            s_bar: 1124.47,
            sigma_bar_sq: 0.0156,
            horizon: 1.0,
            eval_t: 0.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "nv" => Some(Self::nv()),
            "scho" => Some(Self::scho()),
            _ => None,
        }
    }

    pub fn at_time(&self, t: f64) -> Self {
        ModelParams {
            eval_t: t,
            ..self.clone()
        }
    }

    /// Length of the hedging window `T − t`.
    pub fn remaining(&self) -> f64 {
        self.horizon - self.eval_t
    }

    /// Sign and range constraints on the raw parameters.
    pub fn validate_signs(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 7] = [
            ("alpha", self.alpha, self.alpha.is_finite()),
            ("rho", self.rho, self.rho <= 0.0 && self.rho.is_finite()),
            ("lambda", self.lambda, self.lambda > 0.0 && self.lambda.is_finite()),
            ("a", self.a, self.a > 0.0 && self.a.is_finite()),
            ("b", self.b, self.b > 0.0 && self.b.is_finite()),
            ("S0", self.s_bar, self.s_bar > 0.0 && self.s_bar.is_finite()),
            (
                "sigma0_sq",
                self.sigma_bar_sq,
                self.sigma_bar_sq > 0.0 && self.sigma_bar_sq.is_finite(),
            ),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("value {value} violates its sign constraint"),
                });
            }
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "T",
                reason: format!("must be positive, got {}", self.horizon),
            });
        }
        if !(self.eval_t >= 0.0 && self.eval_t < self.horizon) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("must lie in [0, T) = [0, {}), got {}", self.horizon, self.eval_t),
            });
        }
        Ok(())
    }
}

/// Both sides of the two inequalities that keep the MMM density positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `b²/2`
    pub jump_lhs: f64,
    /// `2·max((1 − e^{−λT})/λ, |ρ|)`
    pub jump_rhs: f64,
    /// `α / (e^{−λ(T−t)} σ̄² + C²ρ)`
    pub drift_lhs: f64,
    pub drift_rhs: f64,
}

impl AssumptionReport {
    pub fn jump_condition(&self) -> bool {
        self.jump_lhs > self.jump_rhs
    }

    pub fn drift_condition(&self) -> bool {
        self.drift_lhs > self.drift_rhs
    }

    pub fn holds(&self) -> bool {
        self.jump_condition() && self.drift_condition()
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "ok" } else { "VIOLATED" };
        writeln!(
            f,
            "  b^2/2 = {:.6} > 2*max((1-e^(-lambda T))/lambda, |rho|) = {:.6}  [{}]",
            self.jump_lhs,
            self.jump_rhs,
            verdict(self.jump_condition())
        )?;
        write!(
            f,
            "  alpha/(e^(-lambda(T-t)) sigma0^2 + C2) = {:.6} > {:.1}  [{}]",
            self.drift_lhs,
            self.drift_rhs,
            verdict(self.drift_condition())
        )
    }
}

/// Evaluates the positivity conditions. `σ₀²` is the squared volatility at
/// the start of the simulated window `[t, T]`; shifted starts `σ̄² + z` only
/// enlarge the denominator, so the unshifted check covers them.
pub fn check_assumption(params: &ModelParams) -> AssumptionReport {
    let ModelParams {
        alpha,
        rho,
        lambda,
        a,
        b,
        sigma_bar_sq,
        horizon,
        ..
    } = *params;
    let decay_window = -(-lambda * horizon).exp_m1() / lambda;
    let c2 = c_rho_2_closed_form(a, b, lambda, rho);
    let floor = (-lambda * params.remaining()).exp() * sigma_bar_sq;
    AssumptionReport {
        jump_lhs: b * b / 2.0,
        jump_rhs: 2.0 * decay_window.max(rho.abs()),
        drift_lhs: alpha / (floor + c2),
        drift_rhs: -1.0,
    }
}

/// Coefficients `u(σ²)` and `θ(σ², x)` of the MMM density process.
///
/// The z-shifted measure uses the same functions evaluated along the
/// shifted volatility path.
#[derive(Clone, Copy, Debug)]
pub struct MmmCoefficients {
    pub alpha: f64,
    pub rho: f64,
    pub c2: f64,
}

impl MmmCoefficients {
    pub fn new(alpha: f64, kernel: &LevyKernel) -> Self {
        MmmCoefficients {
            alpha,
            rho: kernel.rho(),
            c2: kernel.c_rho_2(),
        }
    }

    /// `u(σ²) = α σ / (σ² + C²ρ)`.
    pub fn mmm_u(&self, sigma_sq: f64) -> Result<f64> {
        if !(sigma_sq > 0.0) {
            return Err(Error::Domain {
                what: "squared volatility",
                value: sigma_sq,
            });
        }
        Ok(self.alpha * sigma_sq.sqrt() / (sigma_sq + self.c2))
    }

    /// `θ(σ², x) = α (e^{ρx} − 1) / (σ² + C²ρ)`, rejected when `1 − θ ≤ 0`.
    pub fn mmm_theta(&self, sigma_sq: f64, x: f64) -> Result<f64> {
        if !(sigma_sq > 0.0) {
            return Err(Error::Domain {
                what: "squared volatility",
                value: sigma_sq,
            });
        }
        if !(x > 0.0) {
            return Err(Error::Domain {
                what: "jump size",
                value: x,
            });
        }
        let theta = self.alpha * (self.rho * x).exp_m1() / (sigma_sq + self.c2);
        if 1.0 - theta <= 0.0 {
            return Err(Error::InvalidState(format!(
                "1 - theta = {} at sigma^2 = {sigma_sq}, x = {x}",
                1.0 - theta
            )));
        }
        Ok(theta)
    }
}
