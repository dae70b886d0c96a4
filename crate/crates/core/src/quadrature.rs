//! Trapezoidal integration against `g_ν` on a positive z-grid.
//!
//! The integral `∫_0^∞ φ(z) g_ν(z) dz` is split into a head `[0, z₁]`, where
//! `g_ν` blows up like `z^{-1/2}` and `φ` is frozen at its limit value, and a
//! composite trapezoid over the nodes. A grid is only accepted when the same
//! rule applied to `φ ≡ 1` reproduces `C¹ρ` to within a tolerance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_kernel::LevyKernel;
use crate::quad::{self, Tolerance};

/// Default acceptance tolerance on `|c1_approx − C¹ρ|`.
pub const DEFAULT_C1_TOLERANCE: f64 = 1e-5;

/// Acceptance tolerance of the reduced 60-node grid.
pub const DESK_C1_TOLERANCE: f64 = 1e-4;

const HEAD_TOL: Tolerance = Tolerance::new(1e-12, 1e-300);

/// Run of equally spaced nodes continuing from the previous node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub count: usize,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSpec {
    /// 400 nodes: 200 × 1e-5, 100 × 1e-4, 100 × 1e-3.
    Nv,
    /// 2000 nodes: 100 × 1e-5, 1000 × 1e-4, 900 × 1e-2.
    Scho,
    /// 60 geometrically spaced nodes on `[3e-3, 0.3]`.
    Desk,
    Segments(Vec<Segment>),
    Geometric { first: f64, last: f64, count: usize },
    Nodes(Vec<f64>),
}

impl GridSpec {
    pub fn segments_nv() -> Vec<Segment> {
        vec![
            Segment { count: 200, step: 1e-5 },
            Segment { count: 100, step: 1e-4 },
            Segment { count: 100, step: 1e-3 },
        ]
    }

    pub fn segments_scho() -> Vec<Segment> {
        vec![
            Segment { count: 100, step: 1e-5 },
            Segment { count: 1000, step: 1e-4 },
            Segment { count: 900, step: 1e-2 },
        ]
    }

    pub fn desk() -> Self {
        GridSpec::Geometric {
            first: 3e-3,
            last: 0.3,
            count: 60,
        }
    }

    /// Default acceptance tolerance for this kind of grid.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            GridSpec::Desk => DESK_C1_TOLERANCE,
            _ => DEFAULT_C1_TOLERANCE,
        }
    }

    pub fn nodes(&self) -> Result<Vec<f64>> {
        let nodes = match self {
            GridSpec::Nv => segment_nodes(&Self::segments_nv()),
            GridSpec::Scho => segment_nodes(&Self::segments_scho()),
            GridSpec::Desk => return Self::desk().nodes(),
            GridSpec::Segments(segs) => {
                if segs.iter().any(|s| s.count == 0 || !(s.step > 0.0)) {
                    return Err(Error::InvalidGrid("segments need positive counts and steps".into()));
                }
                segment_nodes(segs)
            }
            &GridSpec::Geometric { first, last, count } => {
                if !(first > 0.0 && last > first && count >= 2) {
                    return Err(Error::InvalidGrid(format!(
                        "geometric grid needs 0 < first < last and count >= 2, got {first}, {last}, {count}"
                    )));
                }
                let ratio = (last / first).powf(1.0 / (count - 1) as f64);
                let mut nodes: Vec<f64> = (0..count).map(|k| first * ratio.powi(k as i32)).collect();
                nodes[count - 1] = last;
                nodes
            }
            GridSpec::Nodes(nodes) => nodes.clone(),
        };
        if nodes.is_empty() {
            return Err(Error::InvalidGrid("no nodes".into()));
        }
        if !(nodes[0] > 0.0) {
            return Err(Error::InvalidGrid(format!("first node must be positive, got {}", nodes[0])));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "nodes must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(nodes)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Nv => write!(f, "nv"),
            GridSpec::Scho => write!(f, "scho"),
            GridSpec::Desk => write!(f, "desk"),
            GridSpec::Segments(s) => write!(f, "segments({})", s.len()),
            GridSpec::Geometric { first, last, count } => write!(f, "geometric({first}, {last}, {count})"),
            GridSpec::Nodes(n) => write!(f, "nodes({})", n.len()),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nv" => Ok(GridSpec::Nv),
            "scho" => Ok(GridSpec::Scho),
            "desk" => Ok(GridSpec::Desk),
            other => Err(Error::Config(format!("unknown grid preset `{other}`"))),
        }
    }
}

// Node n of a segment is its origin plus n steps, never a running sum.
fn segment_nodes(segments: &[Segment]) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(segments.iter().map(|s| s.count).sum());
    let mut origin = 0.0;
    for seg in segments {
        for n in 1..=seg.count {
            nodes.push(origin + n as f64 * seg.step);
        }
        origin = *nodes.last().unwrap_or(&origin);
    }
    nodes
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    g_values: Vec<f64>,
    /// Trapezoid weight of each node times `g_ν` at the node.
    coefficients: Vec<f64>,
    head_integral: f64,
    c1_approx: f64,
    c1_error: f64,
    tolerance: f64,
}

impl QuadratureGrid {
    pub fn build(spec: &GridSpec, kernel: &LevyKernel, tolerance: f64) -> Result<Self> {
        let grid = Self::build_unchecked(spec, kernel, tolerance)?;
        if !(grid.c1_error <= tolerance) {
            return Err(Error::GridRejected {
                c1_error: grid.c1_error,
                tolerance,
            });
        }
        Ok(grid)
    }

    /// Builds the grid and reports its `C¹ρ` error without enforcing the tolerance.
    pub fn build_unchecked(spec: &GridSpec, kernel: &LevyKernel, tolerance: f64) -> Result<Self> {
        let nodes = spec.nodes()?;
        let n = nodes.len();
        let g_values: Vec<f64> = nodes.iter().map(|&z| kernel.g(z)).collect();
        let mut coefficients = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            let half = 0.5 * (nodes[i + 1] - nodes[i]);
            coefficients[i] += half * g_values[i];
            coefficients[i + 1] += half * g_values[i + 1];
        }
        let head_integral = quad::integrate_sqrt_singular(|z| kernel.g(z), nodes[0], HEAD_TOL)?.value;
        let mut grid = QuadratureGrid {
            nodes,
            g_values,
            coefficients,
            head_integral,
            c1_approx: 0.0,
            c1_error: 0.0,
            tolerance,
        };
        let ones = vec![1.0; n];
        grid.c1_approx = grid.integrate_against_g(&ones, 1.0)?;
        grid.c1_error = (grid.c1_approx - kernel.c_rho_1()).abs();
        Ok(grid)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g_values
    }

    /// Per-node weights `q_n` with `∫φ g ≈ φ(0⁺)·head + Σ q_n φ(z_n)`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `∫_0^{z₁} g_ν(z) dz`
    pub fn head_integral(&self) -> f64 {
        self.head_integral
    }

    pub fn c1_approx(&self) -> f64 {
        self.c1_approx
    }

    pub fn c1_error(&self) -> f64 {
        self.c1_error
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `φ(0⁺)·∫_0^{z₁} g + ½ Σ (z_{n+1} − z_n)[φ(z_n) g(z_n) + φ(z_{n+1}) g(z_{n+1})]`.
    pub fn integrate_against_g(&self, phi: &[f64], phi_at_zero: f64) -> Result<f64> {
        if phi.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: self.nodes.len(),
                got: phi.len(),
            });
        }
        let body: f64 = self.coefficients.iter().zip(phi).map(|(q, p)| q * p).sum();
        Ok(phi_at_zero * self.head_integral + body)
    }
}
