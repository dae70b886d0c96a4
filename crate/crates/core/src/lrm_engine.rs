//! Assembly of the put hedge ratio
//!
//! ```text
//! ξ_put = [ σ̄² E_Q[−1{S_T<K} S_T] + ∫ F_t(S̄e^{ρz}, σ̄²+z) g_ν(z) dz − C¹ρ F_t(S̄, σ̄²) ]
//!         / ( S̄ (σ̄² + C²ρ) )
//! ```
//!
//! and `ξ_call = 1 + ξ_put`.
//!
//! For each evaluation time one ensemble of path noise is drawn and replayed
//! from the unshifted start and from every quadrature node. The three terms
//! are therefore evaluated path by path, and the standard error of `ξ` is the
//! sample standard error of the per-path combination, which accounts for the
//! correlation that common random numbers induce between nodes and terms.

use serde::Serialize;

use crate::bns_model::ModelParams;
use crate::error::{Error, Result};
use crate::mc_pricer::{digital_payoff, map_paths, put_payoff, McEstimate, WeightDiagnostics};
use crate::path_engine::{McConfig, PathEngine, Terminal};
use crate::quadrature::QuadratureGrid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LrmResult {
    pub t: f64,
    pub strike: f64,
    pub xi_put: f64,
    pub xi_call: f64,
    /// Standard error of `ξ` (shared by put and call).
    pub std_error: f64,
    /// `E_Q[−1{S_T<K} S_T]`
    pub term_digital: McEstimate,
    /// `∫ F_t(S̄e^{ρz}, σ̄²+z) g_ν(z) dz`, including the head piece; zero
    /// when `ρ = 0`.
    pub term_integral: McEstimate,
    /// `F_t(S̄, σ̄²)`; zero when `ρ = 0`, where it carries no weight.
    pub term_head: McEstimate,
    pub c1_error: f64,
}

/// Weight summary of the unshifted ensemble at one evaluation time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeDiagnostics {
    pub t: f64,
    pub weights: WeightDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    /// Ordered by time, then strike.
    pub rows: Vec<LrmResult>,
    pub diagnostics: Vec<TimeDiagnostics>,
}

impl Sweep {
    pub fn rows_at(&self, t: f64) -> impl Iterator<Item = &LrmResult> {
        self.rows.iter().filter(move |r| r.t == t)
    }
}

/// Per-path summands `(digital, integral, head)` for one strike.
type Summands = [f64; 3];

fn path_summands(grid: &QuadratureGrid, base: &Terminal, shifted: &[Terminal], strike: f64, leverage: bool) -> Summands {
    let digital = base.weight * digital_payoff(strike, base.s_t);
    if !leverage {
        return [digital, 0.0, 0.0];
    }
    let head = base.weight * put_payoff(strike, base.s_t);
    let body: f64 = grid
        .coefficients()
        .iter()
        .zip(shifted)
        .map(|(q, term)| q * term.weight * put_payoff(strike, term.s_t))
        .sum();
    [digital, grid.head_integral() * head + body, head]
}

fn validate_inputs(params: &ModelParams, strikes: &[f64], times: &[f64]) -> Result<()> {
    if strikes.is_empty() || times.is_empty() {
        return Err(Error::Config("at least one strike and one time are required".into()));
    }
    if let Some(k) = strikes.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
        return Err(Error::Domain {
            what: "strike",
            value: *k,
        });
    }
    if strikes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("strikes must be sorted in ascending order".into()));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && **t < params.horizon)) {
        return Err(Error::Domain {
            what: "evaluation time",
            value: *t,
        });
    }
    Ok(())
}

/// Hedge ratios for every `(t, K)` pair, sharing one path ensemble per time
/// across all strikes and quadrature nodes.
pub fn strike_sweep(
    params: &ModelParams,
    config: &McConfig,
    grid: &QuadratureGrid,
    strikes: &[f64],
    times: &[f64],
) -> Result<Sweep> {
    validate_inputs(params, strikes, times)?;
    let mut sweep = Sweep {
        rows: Vec::with_capacity(strikes.len() * times.len()),
        diagnostics: Vec::with_capacity(times.len()),
    };

    for &t in times {
        let engine = PathEngine::new(&params.at_time(t), config)?;
        let c1 = engine.kernel().c_rho_1();
        let c2 = engine.kernel().c_rho_2();
        let sigma_sq = params.sigma_bar_sq;
        let denom = params.s_bar * (sigma_sq + c2);
        let leverage = params.rho != 0.0;

        let per_path = map_paths(&engine, |_, noise| {
            let base = engine.terminal(noise, 0.0)?;
            let shifted = if leverage {
                grid.nodes()
                    .iter()
                    .map(|&z| engine.terminal(noise, z))
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            let summands: Vec<Summands> = strikes
                .iter()
                .map(|&k| path_summands(grid, &base, &shifted, k, leverage))
                .collect();
            Ok((base.weight, summands))
        })?;

        let n = per_path.len();
        let weights: Vec<f64> = per_path.iter().map(|(w, _)| *w).collect();
        sweep.diagnostics.push(TimeDiagnostics {
            t,
            weights: WeightDiagnostics::from_weights(&weights),
        });

        for (j, &strike) in strikes.iter().enumerate() {
            let column = |c: usize| per_path.iter().map(move |(_, s)| s[j][c]);
            let term_digital = McEstimate::from_iter(column(0), n);
            let term_integral = McEstimate::from_iter(column(1), n);
            let term_head = McEstimate::from_iter(column(2), n);
            let xi_paths = per_path.iter().map(|(_, s)| {
                let [d, i, h] = s[j];
                (sigma_sq * d + i - c1 * h) / denom
            });
            let xi_put = (sigma_sq * term_digital.mean + term_integral.mean - c1 * term_head.mean) / denom;
            sweep.rows.push(LrmResult {
                t,
                strike,
                xi_put,
                xi_call: 1.0 + xi_put,
                std_error: McEstimate::from_iter(xi_paths, n).std_error,
                term_digital,
                term_integral,
                term_head,
                c1_error: grid.c1_error(),
            });
        }
    }
    Ok(sweep)
}

/// Put hedge ratio at `params.eval_t` for a single strike.
pub fn lrm_put(params: &ModelParams, config: &McConfig, grid: &QuadratureGrid, strike: f64) -> Result<LrmResult> {
    let sweep = strike_sweep(params, config, grid, &[strike], &[params.eval_t])?;
    Ok(sweep.rows[0])
}

/// Call hedge ratio; the same result as [`lrm_put`], read through `xi_call`.
pub fn lrm_call(params: &ModelParams, config: &McConfig, grid: &QuadratureGrid, strike: f64) -> Result<LrmResult> {
    lrm_put(params, config, grid, strike)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_kernel::LevyKernel;
    use crate::mc_pricer::{price_put, simulate_terminals, weighted_estimate};
    use crate::path_engine::Weighting;
    use crate::quadrature::{GridSpec, DESK_C1_TOLERANCE};

    fn config(paths: usize) -> McConfig {
        McConfig {
            n_paths: paths,
            step_h: 0.05,
            ..McConfig::default()
        }
    }

    fn grid_for(params: &ModelParams, spec: &GridSpec, tol: f64) -> QuadratureGrid {
        let k = LevyKernel::new(params.a, params.b, params.lambda, params.rho, 1e-8).unwrap();
        QuadratureGrid::build(spec, &k, tol).unwrap()
    }

    fn small_grid() -> GridSpec {
        GridSpec::Geometric {
            first: 3e-3,
            last: 0.3,
            count: 12,
        }
    }

    #[test]
    fn call_is_one_plus_put() {
        let p = ModelParams::nv().at_time(0.5);
        let g = grid_for(&p, &small_grid(), 1.0);
        let sweep = strike_sweep(&p, &config(200), &g, &[300.0, 468.4, 600.0], &[0.5]).unwrap();
        for r in &sweep.rows {
            assert_eq!(r.xi_call, 1.0 + r.xi_put);
        }
    }

    #[test]
    fn assembly_is_exact() {
        let p = ModelParams::nv().at_time(0.5);
        let g = grid_for(&p, &small_grid(), 1.0);
        let k = LevyKernel::new(p.a, p.b, p.lambda, p.rho, 1e-8).unwrap();
        let sweep = strike_sweep(&p, &config(200), &g, &[400.0, 500.0], &[0.5]).unwrap();
        for r in &sweep.rows {
            let lhs = r.xi_put * p.s_bar * (p.sigma_bar_sq + k.c_rho_2());
            let rhs = p.sigma_bar_sq * r.term_digital.mean + r.term_integral.mean - k.c_rho_1() * r.term_head.mean;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn integral_term_equals_quadrature_of_node_prices() {
        let p = ModelParams::nv().at_time(0.5);
        let cfg = config(300);
        let g = grid_for(&p, &small_grid(), 1.0);
        let strike = 480.0;
        let row = lrm_put(&p, &cfg, &g, strike).unwrap();
        let engine = PathEngine::new(&p, &cfg).unwrap();
        let node_prices: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&z| price_put(&engine, strike, z).unwrap().mean)
            .collect();
        let head = price_put(&engine, strike, 0.0).unwrap().mean;
        assert_eq!(head, row.term_head.mean);
        let quadrature = g.integrate_against_g(&node_prices, head).unwrap();
        assert!((quadrature - row.term_integral.mean).abs() <= 1e-12 * quadrature.abs());
    }

    #[test]
    fn single_strike_matches_sweep_row() {
        let p = ModelParams::nv().at_time(0.5);
        let cfg = config(150);
        let g = grid_for(&p, &small_grid(), 1.0);
        let sweep = strike_sweep(&p, &cfg, &g, &[400.0, 450.0, 500.0], &[0.5]).unwrap();
        let single = lrm_call(&p, &cfg, &g, 450.0).unwrap();
        assert_eq!(sweep.rows[1], single);
    }

    #[test]
    fn zero_leverage_reduces_to_digital_term() {
        let p = ModelParams {
            rho: 0.0,
            ..ModelParams::nv().at_time(0.5)
        };
        let g = grid_for(&p, &small_grid(), 1.0);
        let sweep = strike_sweep(&p, &config(200), &g, &[400.0, 470.0, 550.0], &[0.5]).unwrap();
        for r in &sweep.rows {
            assert_eq!(r.term_integral.mean, 0.0);
            assert_eq!(r.term_head.mean, 0.0);
            assert!((r.xi_put - r.term_digital.mean / p.s_bar).abs() < 1e-14);
        }
    }

    #[test]
    fn weighting_toggle_is_inert_without_drift() {
        let p = ModelParams {
            alpha: 0.0,
            ..ModelParams::nv().at_time(0.5)
        };
        let g = grid_for(&p, &small_grid(), 1.0);
        let on = strike_sweep(&p, &config(100), &g, &[420.0, 520.0], &[0.5]).unwrap();
        let off_cfg = McConfig {
            weighting: Weighting::Disabled,
            ..config(100)
        };
        let off = strike_sweep(&p, &off_cfg, &g, &[420.0, 520.0], &[0.5]).unwrap();
        for (a, b) in on.rows.iter().zip(&off.rows) {
            assert!((a.xi_put - b.xi_put).abs() <= 1e-12);
        }
        assert_eq!(on.diagnostics[0].weights.max_weight, 1.0);
    }

    #[test]
    fn tiny_strike_limit() {
        let p = ModelParams::nv().at_time(0.5);
        let g = grid_for(&p, &small_grid(), 1.0);
        let r = lrm_put(&p, &config(100), &g, 1e-9).unwrap();
        assert_eq!(r.xi_put, 0.0);
        assert_eq!(r.xi_call, 1.0);
    }

    #[test]
    fn huge_strike_without_leverage() {
        let p = ModelParams {
            rho: 0.0,
            ..ModelParams::nv().at_time(0.5)
        };
        let cfg = config(2000);
        let g = grid_for(&p, &small_grid(), 1.0);
        let r = lrm_call(&p, &cfg, &g, 1e9).unwrap();
        assert!(r.xi_call.abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn desk_grid_shape() {
        let p = ModelParams::nv().at_time(0.1);
        let g = grid_for(&p, &GridSpec::Desk, DESK_C1_TOLERANCE);
        let cfg = McConfig {
            n_paths: 400,
            ..McConfig::default()
        };
        let sweep = strike_sweep(&p, &cfg, &g, &[0.5 * p.s_bar, p.s_bar, 1.5 * p.s_bar], &[0.1]).unwrap();
        let xi: Vec<f64> = sweep.rows.iter().map(|r| r.xi_call).collect();
        assert!(xi[0] > 0.85 && xi[0] < 1.1, "{xi:?}");
        assert!(xi[2] > -0.1 && xi[2] < 0.15, "{xi:?}");
        assert!(xi[0] > xi[1] && xi[1] > xi[2]);
    }

    #[test]
    fn input_validation() {
        let p = ModelParams::nv();
        let g = grid_for(&p, &small_grid(), 1.0);
        let cfg = config(10);
        assert!(strike_sweep(&p, &cfg, &g, &[2.0, 1.0], &[0.5]).is_err());
        assert!(strike_sweep(&p, &cfg, &g, &[-1.0], &[0.5]).is_err());
        assert!(strike_sweep(&p, &cfg, &g, &[1.0], &[1.0]).is_err());
        assert!(strike_sweep(&p, &cfg, &g, &[], &[0.5]).is_err());
    }

    #[test]
    fn weighted_mass_is_one_on_average() {
        let p = ModelParams::scho().at_time(0.5);
        let e = PathEngine::new(&p, &config(2000)).unwrap();
        let terms = simulate_terminals(&e, 0.0).unwrap();
        let w = weighted_estimate(&terms, |_| 1.0);
        assert!((w.mean - 1.0).abs() < 3.0 * w.std_error);
    }
}
