//! Weighted Monte Carlo estimates of option prices under the (possibly
//! z-shifted) minimal martingale measure.
//!
//! Every estimator is a plain average `(1/L) Σ w_i · payoff_i` of weighted
//! summands, so its standard error is the sample standard deviation of those
//! summands over `√L`. Ensembles are generated in parallel and collected in
//! path order, which keeps every reported number independent of the worker
//! count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::path_engine::{PathEngine, PathNoise, Terminal};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        Self::from_iter(samples.iter().copied(), samples.len())
    }

    /// Two-pass mean and standard error over `n` values, in iteration order.
    pub fn from_iter<I: Iterator<Item = f64> + Clone>(values: I, n: usize) -> Self {
        assert!(n >= 2, "standard error needs at least two samples");
        let mean = values.clone().sum::<f64>() / n as f64;
        let ss: f64 = values.map(|x| (x - mean) * (x - mean)).sum();
        McEstimate {
            mean,
            std_error: (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt(),
            n,
        }
    }
}

/// Summary of the density weights of an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightDiagnostics {
    pub mean: McEstimate,
    pub max_weight: f64,
    /// Kish effective sample size `(Σw)² / Σw²`.
    pub effective_sample_size: f64,
}

impl WeightDiagnostics {
    pub fn from_weights(weights: &[f64]) -> Self {
        let sum: f64 = weights.iter().sum();
        let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
        WeightDiagnostics {
            mean: McEstimate::from_samples(weights),
            max_weight: weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            effective_sample_size: sum * sum / sum_sq,
        }
    }
}

/// Applies `f` to the noise of every path in parallel; results come back in
/// path order.
pub fn map_paths<T, F>(engine: &PathEngine, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &PathNoise) -> Result<T> + Sync,
{
    (0..engine.config().n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let noise = engine.path_noise(i)?;
            f(i, &noise)
        })
        .collect()
}

/// Terminal prices and weights of the ensemble started from shift `z`.
pub fn simulate_terminals(engine: &PathEngine, z_shift: f64) -> Result<Vec<Terminal>> {
    map_paths(engine, |_, noise| engine.terminal(noise, z_shift))
}

pub fn put_payoff(strike: f64, s_t: f64) -> f64 {
    (strike - s_t).max(0.0)
}

pub fn call_payoff(strike: f64, s_t: f64) -> f64 {
    (s_t - strike).max(0.0)
}

/// `−S_T 1{S_T < K}`
pub fn digital_payoff(strike: f64, s_t: f64) -> f64 {
    if s_t < strike {
        -s_t
    } else {
        0.0
    }
}

pub fn weighted_estimate(terminals: &[Terminal], payoff: impl Fn(f64) -> f64) -> McEstimate {
    McEstimate::from_iter(terminals.iter().map(|t| t.weight * payoff(t.s_t)), terminals.len())
}

/// `F_t(S̄e^{ρz}, σ̄² + z) = E_{Q^{t,z}}[(K − S_T)^+]`.
pub fn price_put(engine: &PathEngine, strike: f64, z_shift: f64) -> Result<McEstimate> {
    let terminals = simulate_terminals(engine, z_shift)?;
    Ok(weighted_estimate(&terminals, |s| put_payoff(strike, s)))
}

pub fn price_call(engine: &PathEngine, strike: f64, z_shift: f64) -> Result<McEstimate> {
    let terminals = simulate_terminals(engine, z_shift)?;
    Ok(weighted_estimate(&terminals, |s| call_payoff(strike, s)))
}

/// `E_Q[−1{S_T < K} S_T]` from the unshifted state.
pub fn digital_term(engine: &PathEngine, strike: f64) -> Result<McEstimate> {
    let terminals = simulate_terminals(engine, 0.0)?;
    Ok(weighted_estimate(&terminals, |s| digital_payoff(strike, s)))
}

/// Put prices for several strikes on one shared ensemble.
pub fn put_prices(terminals: &[Terminal], strikes: &[f64]) -> Vec<McEstimate> {
    strikes
        .iter()
        .map(|&k| weighted_estimate(terminals, |s| put_payoff(k, s)))
        .collect()
}
