//! Path simulation of `(σ², log S)` on `[t, T]` under the physical measure,
//! with the log density of the minimal martingale measure accumulated along
//! each path.
//!
//! Jumps larger than the truncation threshold are enumerated; the mass below
//! it enters `σ²` and `log S` as a deterministic drift. Between jumps `σ²`
//! follows its exact exponential relaxation, and the two Brownian integrals
//! `∫σ dW` and `∫u dW` of a step are drawn from their exact joint Gaussian
//! law given that deterministic volatility path.
//!
//! The noise of a path depends only on `(master_seed, path_index)`, never on
//! the starting state. Shifted starts `(S̄e^{ρz}, σ̄² + z)` therefore reuse
//! the same noise, which is what couples the Monte Carlo estimates across
//! quadrature nodes.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bns_model::{check_assumption, MmmCoefficients, ModelParams};
use crate::error::{Error, Result};
use crate::levy_kernel::{JumpBand, LevyKernel, DEFAULT_EPSILON};
use crate::rng::{self, Purpose, StreamRng};

pub const DEFAULT_STEP: f64 = 0.01;
pub const DEFAULT_PATHS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 20_250_101;

const REJECTION_CAP: usize = 1_000_000;

// 5-point Gauss–Legendre rule on [-1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Whether the MMM density is accumulated. With `Disabled` every weight is 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Mmm,
    Disabled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub step_h: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub epsilon: f64,
    #[serde(default)]
    pub weighting: Weighting,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            step_h: DEFAULT_STEP,
            n_paths: DEFAULT_PATHS,
            master_seed: DEFAULT_SEED,
            epsilon: DEFAULT_EPSILON,
            weighting: Weighting::Mmm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub size: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub sigma_sq: f64,
    pub log_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepIncrement {
    pub state: State,
    pub log_weight: f64,
}

/// One simulated trajectory on the time grid `t = t_0 < … < t_M = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub sigma_sq: Vec<f64>,
    pub log_s: Vec<f64>,
    /// Enumerated jumps of each step, sorted by time.
    pub jumps: Vec<Vec<JumpRecord>>,
    /// `log(Z_T / Z_t)` of the (possibly shifted) minimal martingale measure.
    pub log_weight: f64,
}

/// Terminal asset price and density weight of one path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Terminal {
    pub s_t: f64,
    pub weight: f64,
}

/// Inter-jump piece of a step with its exponential factors precomputed.
#[derive(Clone, Copy, Debug)]
struct Piece {
    dt: f64,
    decay: f64,
    integral_decay: f64,
    gl_decay: [f64; 5],
    gl_weight: [f64; 5],
    /// Jump applied at the end of the piece; 0 for the closing piece.
    jump: f64,
}

impl Piece {
    fn new(lambda: f64, dt: f64, jump: f64) -> Self {
        let mut gl_decay = [0.0; 5];
        let mut gl_weight = [0.0; 5];
        for k in 0..5 {
            gl_decay[k] = (-lambda * 0.5 * dt * (1.0 + GL_NODES[k])).exp();
            gl_weight[k] = 0.5 * dt * GL_WEIGHTS[k];
        }
        Piece {
            dt,
            decay: (-lambda * dt).exp(),
            integral_decay: -(-lambda * dt).exp_m1() / lambda,
            gl_decay,
            gl_weight,
            jump,
        }
    }
}

/// All random inputs of one path, independent of the starting state.
#[derive(Clone, Debug)]
pub struct PathNoise {
    normals: Vec<[f64; 2]>,
    pieces: Vec<Piece>,
    step_ends: Vec<usize>,
    jumps: Vec<Vec<JumpRecord>>,
}

impl PathNoise {
    pub fn jumps(&self) -> &[Vec<JumpRecord>] {
        &self.jumps
    }

    pub fn n_steps(&self) -> usize {
        self.normals.len()
    }

    fn step_pieces(&self, step: usize) -> &[Piece] {
        let start = if step == 0 { 0 } else { self.step_ends[step - 1] };
        &self.pieces[start..self.step_ends[step]]
    }
}

#[derive(Clone, Debug)]
struct JumpLaw {
    gamma_count: Option<Poisson<f64>>,
    // Parallel to `LevyKernel::bands`.
    band_counts: Vec<Option<Poisson<f64>>>,
}

fn poisson(mean: f64) -> Option<Poisson<f64>> {
    if mean > 0.0 && mean.is_finite() {
        Poisson::new(mean).ok()
    } else {
        None
    }
}

/// Simulator for one model, evaluation time and Monte Carlo configuration.
#[derive(Clone, Debug)]
pub struct PathEngine {
    params: ModelParams,
    config: McConfig,
    kernel: LevyKernel,
    coeffs: MmmCoefficients,
    n_steps: usize,
    step: f64,
    drift: f64,
    relaxation_level: f64,
    law: JumpLaw,
}

impl PathEngine {
    /// Validates parameters, the positivity conditions and the time grid.
    pub fn new(params: &ModelParams, config: &McConfig) -> Result<Self> {
        params.validate_signs()?;
        let report = check_assumption(params);
        if !report.holds() {
            return Err(Error::Assumption(report.to_string()));
        }
        if !(config.step_h > 0.0 && config.step_h.is_finite()) {
            return Err(Error::Config(format!("step must be positive, got {}", config.step_h)));
        }
        if config.n_paths < 2 {
            return Err(Error::Config(format!(
                "at least 2 paths are required, got {}",
                config.n_paths
            )));
        }
        let window = params.remaining();
        let ratio = window / config.step_h;
        let n_steps = ratio.round();
        if n_steps < 1.0 || (n_steps - ratio).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "step {} does not divide the window T - t = {window}",
                config.step_h
            )));
        }
        let n_steps = n_steps as usize;
        let step = window / n_steps as f64;

        let kernel = LevyKernel::new(params.a, params.b, params.lambda, params.rho, config.epsilon)?;
        let coeffs = MmmCoefficients::new(params.alpha, &kernel);
        let law = Self::jump_law(&kernel, step);
        Ok(PathEngine {
            params: params.clone(),
            config: config.clone(),
            drift: params.alpha - kernel.c_rho_1(),
            relaxation_level: kernel.mu_eps() / params.lambda,
            coeffs,
            kernel,
            n_steps,
            step,
            law,
        })
    }

    fn jump_law(kernel: &LevyKernel, h: f64) -> JumpLaw {
        JumpLaw {
            gamma_count: poisson(kernel.rate_cp2() * h),
            band_counts: kernel.bands().iter().map(|b| poisson(b.rate * h)).collect(),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &McConfig {
        &self.config
    }

    pub fn kernel(&self) -> &LevyKernel {
        &self.kernel
    }

    pub fn coefficients(&self) -> &MmmCoefficients {
        &self.coeffs
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Drift `μ = α − C¹ρ` of `log S` before the Itô correction.
    pub fn mu(&self) -> f64 {
        self.drift
    }

    fn weighted(&self) -> bool {
        self.config.weighting == Weighting::Mmm
    }

    /// Jumps above the threshold in a window `(s, s + h]`.
    pub fn simulate_jumps_in_step(&self, s: f64, h: f64, rng: &mut StreamRng) -> Result<Vec<JumpRecord>> {
        let law = if h == self.step {
            None
        } else {
            Some(Self::jump_law(&self.kernel, h))
        };
        let law = law.as_ref().unwrap_or(&self.law);
        let mut out = self.sample_offsets(law, h, rng)?;
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(out
            .into_iter()
            .map(|(offset, size)| JumpRecord {
                time: s + offset,
                size,
            })
            .collect())
    }

    /// Draws `(offset within step, size)` pairs. Consumption order is fixed:
    /// the Gamma(1/2) component, then the bands from the tail downwards, so
    /// lowering the threshold only appends draws for the new bottom bands.
    fn sample_offsets(&self, law: &JumpLaw, h: f64, rng: &mut StreamRng) -> Result<Vec<(f64, f64)>> {
        let eps = self.kernel.epsilon();
        let b2 = self.kernel.b() * self.kernel.b();
        let mut out = Vec::new();

        if let Some(count) = &law.gamma_count {
            let n = count.sample(rng) as usize;
            for _ in 0..n {
                let v: f64 = StandardNormal.sample(rng);
                let size = v * v / b2;
                let offset = h * (1.0 - rng.random::<f64>());
                // Sub-threshold mass is already in the drift.
                if size > eps {
                    out.push((offset, size));
                }
            }
        }

        for (band, count) in self.kernel.bands().iter().zip(&law.band_counts).rev() {
            let Some(count) = count else { continue };
            let n = count.sample(rng) as usize;
            for _ in 0..n {
                let size = sample_band(band, 0.5 * b2, rng)?;
                let offset = h * (1.0 - rng.random::<f64>());
                out.push((offset, size));
            }
        }
        Ok(out)
    }

    fn step_normals(&self, path_index: u64, step_index: usize) -> [f64; 2] {
        let mut rng = rng::stream(self.config.master_seed, path_index, step_index as u64, Purpose::Diffusion);
        [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)]
    }

    fn pieces_from_offsets(&self, h: f64, jumps: &[(f64, f64)], out: &mut Vec<Piece>) {
        let lambda = self.params.lambda;
        let mut prev = 0.0;
        for &(offset, size) in jumps {
            let offset = offset.clamp(prev, h);
            out.push(Piece::new(lambda, offset - prev, size));
            prev = offset;
        }
        out.push(Piece::new(lambda, h - prev, 0.0));
    }

    /// Draws every random input of path `path_index`.
    pub fn path_noise(&self, path_index: u64) -> Result<PathNoise> {
        let mut noise = PathNoise {
            normals: Vec::with_capacity(self.n_steps),
            pieces: Vec::new(),
            step_ends: Vec::with_capacity(self.n_steps),
            jumps: Vec::with_capacity(self.n_steps),
        };
        for j in 0..self.n_steps {
            noise.normals.push(self.step_normals(path_index, j));
            let mut rng = rng::stream(self.config.master_seed, path_index, j as u64, Purpose::Jumps);
            let mut offsets = self.sample_offsets(&self.law, self.step, &mut rng)?;
            offsets.sort_by(|x, y| x.0.total_cmp(&y.0));
            self.pieces_from_offsets(self.step, &offsets, &mut noise.pieces);
            noise.step_ends.push(noise.pieces.len());
            let s = self.grid_time(j);
            noise.jumps.push(
                offsets
                    .iter()
                    .map(|&(offset, size)| JumpRecord {
                        time: s + offset,
                        size,
                    })
                    .collect(),
            );
        }
        Ok(noise)
    }

    pub fn grid_time(&self, j: usize) -> f64 {
        if j == self.n_steps {
            self.params.horizon
        } else {
            self.params.eval_t + j as f64 * self.step
        }
    }

    /// Advances the state over `(s, s + h]` given the step's jumps (sorted by
    /// time) and two independent standard normals.
    pub fn advance_step(
        &self,
        state: State,
        s: f64,
        h: f64,
        jumps: &[JumpRecord],
        normals: [f64; 2],
    ) -> Result<StepIncrement> {
        let offsets: Vec<(f64, f64)> = jumps.iter().map(|j| (j.time - s, j.size)).collect();
        let mut pieces = Vec::with_capacity(offsets.len() + 1);
        self.pieces_from_offsets(h, &offsets, &mut pieces);
        self.apply_pieces(state, h, &pieces, normals)
    }

    fn apply_pieces(&self, state: State, h: f64, pieces: &[Piece], normals: [f64; 2]) -> Result<StepIncrement> {
        let MmmCoefficients { alpha, rho, c2 } = self.coeffs;
        let level = self.relaxation_level;
        let weighted = self.weighted();

        let mut v = state.sigma_sq;
        let mut var_integral = 0.0;
        let mut cross = 0.0;
        let mut u_sq = 0.0;
        let mut inverse = 0.0;
        let mut jump_sum = 0.0;
        let mut jump_log = 0.0;

        for p in pieces {
            let dev = v - level;
            var_integral += level * p.dt + dev * p.integral_decay;
            if weighted {
                for k in 0..5 {
                    let s2 = level + dev * p.gl_decay[k];
                    let inv = 1.0 / (s2 + c2);
                    let w = p.gl_weight[k];
                    cross += w * s2 * inv;
                    u_sq += w * s2 * inv * inv;
                    inverse += w * inv;
                }
            }
            v = level + dev * p.decay;
            if p.jump > 0.0 {
                if weighted {
                    let theta = alpha * (rho * p.jump).exp_m1() / (v + c2);
                    if !(1.0 - theta > 0.0) {
                        return Err(Error::InvalidState(format!(
                            "1 - theta = {} for jump {} at sigma^2 = {v}",
                            1.0 - theta,
                            p.jump
                        )));
                    }
                    jump_log += (-theta).ln_1p();
                }
                v += p.jump;
                jump_sum += p.jump;
            }
        }

        let root = var_integral.sqrt();
        let sigma_dw = root * normals[0];
        let log_s = state.log_s + self.drift * h - 0.5 * var_integral
            + sigma_dw
            + rho * (jump_sum + self.kernel.mu_eps() * h);

        let log_weight = if weighted {
            // Second moments of (∫σ dW, ∫u dW) given the volatility path.
            let cov = alpha * cross;
            let var_u = alpha * alpha * u_sq;
            let residual = (var_u - cov * cov / var_integral).max(0.0);
            let u_dw = (cov / root) * normals[0] + residual.sqrt() * normals[1];
            let compensator = alpha * (self.kernel.c_rho_1() - self.kernel.gamma_eps()) * inverse;
            -u_dw - 0.5 * var_u + compensator + jump_log
        } else {
            0.0
        };

        Ok(StepIncrement {
            state: State { sigma_sq: v, log_s },
            log_weight,
        })
    }

    /// Initial state `(S̄e^{ρz}, σ̄² + z)` of the z-shifted problem.
    pub fn initial_state(&self, z_shift: f64) -> Result<State> {
        if !(z_shift >= 0.0 && z_shift.is_finite()) {
            return Err(Error::Domain {
                what: "z shift",
                value: z_shift,
            });
        }
        Ok(State {
            sigma_sq: self.params.sigma_bar_sq + z_shift,
            log_s: self.params.s_bar.ln() + self.params.rho * z_shift,
        })
    }

    /// Terminal price and weight of a path started from the z-shifted state.
    pub fn terminal(&self, noise: &PathNoise, z_shift: f64) -> Result<Terminal> {
        let mut state = self.initial_state(z_shift)?;
        let mut log_w = 0.0;
        for j in 0..noise.n_steps() {
            let inc = self.apply_pieces(state, self.step, noise.step_pieces(j), noise.normals[j])?;
            state = inc.state;
            log_w += inc.log_weight;
        }
        Ok(Terminal {
            s_t: state.log_s.exp(),
            weight: log_w.exp(),
        })
    }

    /// Full trajectory of path `path_index` from the z-shifted start.
    pub fn simulate_path(&self, path_index: u64, z_shift: f64) -> Result<PathSample> {
        let noise = self.path_noise(path_index)?;
        self.simulate_path_with(&noise, z_shift)
    }

    pub fn simulate_path_with(&self, noise: &PathNoise, z_shift: f64) -> Result<PathSample> {
        let mut state = self.initial_state(z_shift)?;
        let m = noise.n_steps();
        let mut sample = PathSample {
            times: (0..=m).map(|j| self.grid_time(j)).collect(),
            sigma_sq: Vec::with_capacity(m + 1),
            log_s: Vec::with_capacity(m + 1),
            jumps: noise.jumps.clone(),
            log_weight: 0.0,
        };
        sample.sigma_sq.push(state.sigma_sq);
        sample.log_s.push(state.log_s);
        for j in 0..m {
            let inc = self.apply_pieces(state, self.step, noise.step_pieces(j), noise.normals[j])?;
            state = inc.state;
            sample.log_weight += inc.log_weight;
            sample.sigma_sq.push(state.sigma_sq);
            sample.log_s.push(state.log_s);
        }
        Ok(sample)
    }

    /// `σ²` alone after `horizon` time units from `σ̄²`, using this engine's
    /// step and jump streams. Used to check the invariant law.
    pub fn variance_after(&self, path_index: u64, horizon: f64) -> Result<f64> {
        let n = (horizon / self.step).ceil().max(1.0) as usize;
        let h = horizon / n as f64;
        let law = Self::jump_law(&self.kernel, h);
        let level = self.relaxation_level;
        let lambda = self.params.lambda;
        let mut v = self.params.sigma_bar_sq;
        for j in 0..n {
            let mut rng = rng::stream(self.config.master_seed, path_index, j as u64, Purpose::Jumps);
            let mut jumps = self.sample_offsets(&law, h, &mut rng)?;
            jumps.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut prev = 0.0;
            for (offset, size) in jumps {
                v = level + (v - level) * (-lambda * (offset - prev)).exp() + size;
                prev = offset;
            }
            v = level + (v - level) * (-lambda * (h - prev)).exp();
        }
        Ok(v)
    }
}

/// Size of one jump of the `f1` component restricted to `band`, by rejection.
///
/// Narrow low bands use the power-law proposal `∝ x^{-3/2}` accepted with
/// `e^{-b²(x − lo)/2}`; bands where the exponential dominates use an
/// exponential proposal accepted with `(lo/x)^{3/2}`. Both acceptance rates
/// are bounded below on a dyadic band.
fn sample_band(band: &JumpBand, half_b2: f64, rng: &mut StreamRng) -> Result<f64> {
    let lo = band.lower;
    let hi = band.upper;
    if hi.is_finite() && lo * half_b2 <= 1.0 {
        let p = lo.powf(-0.5);
        let q = hi.powf(-0.5);
        for _ in 0..REJECTION_CAP {
            let u: f64 = rng.random();
            let x = (p - u * (p - q)).powi(-2);
            if rng.random::<f64>() < (-half_b2 * (x - lo)).exp() {
                return Ok(x.clamp(lo, hi));
            }
        }
    } else {
        let mass = if hi.is_finite() {
            -(-half_b2 * (hi - lo)).exp_m1()
        } else {
            1.0
        };
        for _ in 0..REJECTION_CAP {
            let x = if hi.is_finite() {
                let u: f64 = rng.random();
                (lo - (-u * mass).ln_1p() / half_b2).min(hi)
            } else {
                let e: f64 = Exp1.sample(rng);
                lo + e / half_b2
            };
            if rng.random::<f64>() < (lo / x).powf(1.5) {
                return Ok(x);
            }
        }
    }
    Err(Error::RejectionCap(REJECTION_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(paths: usize) -> McConfig {
        McConfig {
            n_paths: paths,
            ..McConfig::default()
        }
    }

    fn nv_engine() -> PathEngine {
        PathEngine::new(&ModelParams::nv().at_time(0.1), &small_config(100)).unwrap()
    }

    #[test]
    fn grid_is_integral() {
        let e = nv_engine();
        assert_eq!(e.n_steps(), 90);
        assert_eq!(e.grid_time(90), 1.0);
        let bad = McConfig {
            step_h: 0.007,
            ..small_config(10)
        };
        assert!(matches!(
            PathEngine::new(&ModelParams::nv().at_time(0.1), &bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn assumption_violation_is_rejected() {
        let p = ModelParams {
            b: 0.7995,
            ..ModelParams::scho()
        };
        assert!(matches!(PathEngine::new(&p, &small_config(10)), Err(Error::Assumption(_))));
    }

    #[test]
    fn paths_are_deterministic() {
        let e = nv_engine();
        let a = e.simulate_path(17, 0.01).unwrap();
        let b = e.simulate_path(17, 0.01).unwrap();
        assert_eq!(a, b);
        let c = e.simulate_path(18, 0.01).unwrap();
        assert_ne!(a.log_s, c.log_s);
    }

    #[test]
    fn shift_only_changes_initial_state() {
        let e = nv_engine();
        let plain = e.simulate_path(3, 0.0).unwrap();
        let shifted = e.simulate_path(3, 0.02).unwrap();
        assert_eq!(plain.jumps, shifted.jumps);
        assert_eq!(shifted.sigma_sq[0], 0.0041 + 0.02);
        assert!((shifted.log_s[0] - (468.40f64.ln() - 4.7039 * 0.02)).abs() < 1e-15);

        let p = ModelParams {
            rho: 0.0,
            ..ModelParams::nv().at_time(0.1)
        };
        let e0 = PathEngine::new(&p, &small_config(10)).unwrap();
        let s = e0.simulate_path(3, 0.5).unwrap();
        assert_eq!(s.log_s[0], 468.40f64.ln());
        assert_eq!(s.sigma_sq[0], 0.5041);
    }

    #[test]
    fn variance_never_drops_below_decayed_start() {
        let e = nv_engine();
        for i in 0..20 {
            let s = e.simulate_path(i, 0.0).unwrap();
            for (t, v) in s.times.iter().zip(&s.sigma_sq) {
                let floor = 0.0041 * (-2.4958 * (t - 0.1)).exp();
                assert!(*v >= floor * (1.0 - 1e-12));
            }
            assert!(s.log_weight.is_finite());
        }
    }

    #[test]
    fn pure_decay_without_jumps_or_drift() {
        // No jumps and no small-jump drift: σ² relaxes to zero exactly.
        let mut e = nv_engine();
        e.relaxation_level = 0.0;
        let inc = e
            .advance_step(
                State {
                    sigma_sq: 0.04,
                    log_s: 0.0,
                },
                0.1,
                0.01,
                &[],
                [0.3, -1.2],
            )
            .unwrap();
        assert!((inc.state.sigma_sq - 0.04 * (-2.4958f64 * 0.01).exp()).abs() < 1e-18);
    }

    #[test]
    fn zero_drift_gives_unit_weights() {
        let p = ModelParams {
            alpha: 0.0,
            ..ModelParams::nv().at_time(0.1)
        };
        let e = PathEngine::new(&p, &small_config(10)).unwrap();
        for i in 0..10 {
            let s = e.simulate_path(i, 0.003).unwrap();
            assert_eq!(s.log_weight, 0.0);
        }
        let inc = e
            .advance_step(
                State {
                    sigma_sq: 0.01,
                    log_s: 1.0,
                },
                0.1,
                0.01,
                &[JumpRecord {
                    time: 0.105,
                    size: 0.02,
                }],
                [1.0, 2.0],
            )
            .unwrap();
        assert_eq!(inc.log_weight, 0.0);
    }

    #[test]
    fn jump_sizes_respect_bands() {
        let e = nv_engine();
        let eps = e.kernel().epsilon();
        for i in 0..50 {
            let mut rng = rng::stream(1, i, 0, Purpose::Jumps);
            let jumps = e.simulate_jumps_in_step(0.5, 0.01, &mut rng).unwrap();
            for w in jumps.windows(2) {
                assert!(w[0].time <= w[1].time);
            }
            for j in &jumps {
                assert!(j.size > eps);
                assert!(j.time > 0.5 && j.time <= 0.51 + 1e-15);
            }
        }
    }

    #[test]
    fn no_activity_means_no_jumps() {
        // Rates scale with a; as a → 0 the counts vanish.
        let p = ModelParams {
            a: 1e-300,
            ..ModelParams::nv().at_time(0.1)
        };
        let e = PathEngine::new(&p, &small_config(10)).unwrap();
        let mut rng = rng::stream(1, 0, 0, Purpose::Jumps);
        assert!(e.simulate_jumps_in_step(0.1, 0.01, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn band_sampler_stays_inside_band() {
        let band = JumpBand {
            index: 0,
            lower: 0.5,
            upper: 1.0,
            rate: 1.0,
        };
        let mut rng = rng::stream(9, 9, 9, Purpose::Jumps);
        for _ in 0..1000 {
            let x = sample_band(&band, 50.0, &mut rng).unwrap();
            assert!(x > 0.5 && x <= 1.0);
        }
        let tail = JumpBand {
            upper: f64::INFINITY,
            ..band
        };
        for _ in 0..1000 {
            assert!(sample_band(&tail, 50.0, &mut rng).unwrap() > 0.5);
        }
    }

    #[test]
    fn negative_shift_rejected() {
        assert!(nv_engine().initial_state(-1e-3).is_err());
    }
}
