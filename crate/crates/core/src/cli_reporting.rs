//! Run configuration, dry-run validation, and the artifacts of a strike sweep:
//! a CSV table, an SVG plot of `ξ_call` against `K`, and a JSON manifest.
//!
//! Floats are written in shortest round-trip decimal form, so parsing the CSV
//! back reproduces every value bit for bit and reruns of one manifest give
//! identical bytes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bns_model::{check_assumption, ModelParams};
use crate::error::{Error, Result};
use crate::levy_kernel::LevyKernel;
use crate::lrm_engine::{strike_sweep, Sweep, TimeDiagnostics};
use crate::path_engine::McConfig;
use crate::quadrature::{GridSpec, QuadratureGrid, Segment};

pub const DEFAULT_TIMES: [f64; 3] = [0.1, 0.5, 0.9];

/// Strike range given as fractions of `S̄`, e.g. `0.5:1.5:0.01`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrikeSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for StrikeSpec {
    fn default() -> Self {
        StrikeSpec {
            lo: 0.5,
            hi: 1.5,
            step: 0.01,
        }
    }
}

impl StrikeSpec {
    pub fn count(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn strikes(&self, s_bar: f64) -> Vec<f64> {
        (0..self.count())
            .map(|j| s_bar * (self.lo + j as f64 * self.step))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi >= self.lo && self.step > 0.0 && self.hi.is_finite()) {
            return Err(Error::Config(format!(
                "strike range needs 0 < LO <= HI and STEP > 0, got {self}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for StrikeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

impl FromStr for StrikeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("strikes must look like LO:HI:STEP, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        let spec = StrikeSpec {
            lo: num(parts[0])?,
            hi: num(parts[1])?,
            step: num(parts[2])?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a comma-separated list of evaluation times.
pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad time `{p}` in `{s}`")))
        })
        .collect()
}

/// Sets one parameter by its configuration-file key.
pub fn set_param(params: &mut ModelParams, key: &str, value: f64) -> Result<()> {
    let slot = match key {
        "alpha" => &mut params.alpha,
        "rho" => &mut params.rho,
        "lambda" => &mut params.lambda,
        "a" => &mut params.a,
        "b" => &mut params.b,
        "S0" => &mut params.s_bar,
        "sigma0_sq" => &mut params.sigma_bar_sq,
        "T" => &mut params.horizon,
        other => return Err(Error::Config(format!("unknown parameter key `{other}`"))),
    };
    *slot = value;
    Ok(())
}

/// Parses `KEY=VALUE` as used by `--set`.
pub fn parse_assignment(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{s}`")))?;
    let value = v
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("bad value in `{s}`")))?;
    Ok((k.trim().to_string(), value))
}

const PARAM_KEYS: [&str; 8] = ["alpha", "rho", "lambda", "a", "b", "S0", "sigma0_sq", "T"];

/// Reads a parameter file of `key = value` lines (`#` starts a comment).
///
/// Keys missing from the file keep their value from `base`; without a base
/// all eight keys are required.
pub fn parse_params(text: &str, base: Option<&ModelParams>) -> Result<ModelParams> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(format!("parameter file: {}", e.message())))?;
    let mut params = base.cloned().unwrap_or(ModelParams {
        alpha: f64::NAN,
        rho: f64::NAN,
        lambda: f64::NAN,
        a: f64::NAN,
        b: f64::NAN,
        s_bar: f64::NAN,
        sigma_bar_sq: f64::NAN,
        horizon: f64::NAN,
        eval_t: 0.0,
    });
    for (key, value) in &table {
        let v = match value {
            toml::Value::Float(x) => *x,
            toml::Value::Integer(n) => *n as f64,
            _ => return Err(Error::Config(format!("parameter `{key}` must be a number"))),
        };
        set_param(&mut params, key, v)?;
    }
    if base.is_none() {
        if let Some(missing) = PARAM_KEYS.iter().find(|k| !table.contains_key(**k)) {
            return Err(Error::Config(format!("parameter file lacks `{missing}`")));
        }
    }
    Ok(params)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    tolerance: Option<f64>,
    segments: Option<Vec<Segment>>,
    geometric: Option<GeometricFile>,
    nodes: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometricFile {
    first: f64,
    last: f64,
    count: usize,
}

/// Reads a grid file holding exactly one of `segments`, `[geometric]` or
/// `nodes`, plus an optional `tolerance`.
pub fn parse_grid(text: &str) -> Result<(GridSpec, Option<f64>)> {
    let file: GridFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("grid file: {}", e.message())))?;
    let mut specs = Vec::new();
    if let Some(s) = file.segments {
        specs.push(GridSpec::Segments(s));
    }
    if let Some(g) = file.geometric {
        specs.push(GridSpec::Geometric {
            first: g.first,
            last: g.last,
            count: g.count,
        });
    }
    if let Some(n) = file.nodes {
        specs.push(GridSpec::Nodes(n));
    }
    if specs.len() != 1 {
        return Err(Error::Config(
            "grid file must define exactly one of `segments`, `geometric`, `nodes`".into(),
        ));
    }
    specs[0].nodes()?;
    Ok((specs.remove(0), file.tolerance))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_params(path: &Path, base: Option<&ModelParams>) -> Result<ModelParams> {
    parse_params(&read_file(path)?, base)
}

pub fn load_grid(path: &Path) -> Result<(GridSpec, Option<f64>)> {
    parse_grid(&read_file(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Label used in file names and the `preset` column.
    pub preset: String,
    pub params: ModelParams,
    pub times: Vec<f64>,
    pub strikes: StrikeSpec,
    pub grid: GridSpec,
    pub grid_tolerance: f64,
    pub mc: McConfig,
    pub out_dir: PathBuf,
    pub plot: bool,
}

impl RunConfig {
    /// Defaults for a named preset: its own grid, the standard sweep and
    /// Monte Carlo settings.
    pub fn preset(name: &str) -> Result<Self> {
        let label = name.to_ascii_lowercase();
        let params =
            ModelParams::preset(&label).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
        let grid = GridSpec::from_str(&label)?;
        Ok(Self::with_params(&label, params, grid))
    }

    pub fn with_params(label: &str, params: ModelParams, grid: GridSpec) -> Self {
        RunConfig {
            preset: label.to_string(),
            params,
            times: DEFAULT_TIMES.to_vec(),
            strikes: StrikeSpec::default(),
            grid_tolerance: grid.default_tolerance(),
            grid,
            mc: McConfig::default(),
            out_dir: PathBuf::from("."),
            plot: true,
        }
    }

    pub fn strike_values(&self) -> Vec<f64> {
        self.strikes.strikes(self.params.s_bar)
    }

    pub fn csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("lrm_{}.csv", self.preset))
    }

    pub fn plot_path(&self) -> PathBuf {
        self.out_dir.join(format!("lrm_{}.svg", self.preset))
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.out_dir.join(format!("manifest_{}.json", self.preset))
    }

    fn kernel(&self) -> Result<LevyKernel> {
        let p = &self.params;
        LevyKernel::new(p.a, p.b, p.lambda, p.rho, self.mc.epsilon)
    }

    /// Every check that must pass before simulation, in the order reported
    /// by [`validate`].
    fn prepare(&self) -> Result<QuadratureGrid> {
        self.params.validate_signs()?;
        self.strikes.validate()?;
        if self.times.is_empty() {
            return Err(Error::Config("no evaluation times".into()));
        }
        for &t in &self.times {
            let p = self.params.at_time(t);
            p.validate_signs()?;
            let report = check_assumption(&p);
            if !report.holds() {
                return Err(Error::Assumption(format!("at t = {t}\n{report}")));
            }
        }
        if self.mc.n_paths < 2 {
            return Err(Error::Config("at least two paths are required".into()));
        }
        let kernel = self.kernel()?;
        QuadratureGrid::build(&self.grid, &kernel, self.grid_tolerance)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of a dry run.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}", if c.pass { "PASS" } else { "FAIL" }, c.name)?;
            for line in c.detail.lines() {
                writeln!(f, "       {line}")?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Dry run: parameter, assumption and grid checks, derived constants and a
/// work estimate. Nothing is simulated.
pub fn validate(config: &RunConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let p = &config.params;

    match p.validate_signs() {
        Ok(()) => report.push("parameters", true, ""),
        Err(e) => report.push("parameters", false, e.to_string()),
    }
    match config.strikes.validate() {
        Ok(()) => report.push(
            "strikes",
            true,
            format!("{} strikes, {} x S0", config.strikes.count(), config.strikes),
        ),
        Err(e) => report.push("strikes", false, e.to_string()),
    }
    if config.times.is_empty() {
        report.push("times", false, "no evaluation times");
    }
    for &t in &config.times {
        let pt = p.at_time(t);
        let name = format!("assumption at t = {t}");
        match pt.validate_signs() {
            Err(e) => report.push(name, false, e.to_string()),
            Ok(()) => {
                let a = check_assumption(&pt);
                report.push(name, a.holds(), a.to_string());
            }
        }
    }

    let kernel = match config.kernel() {
        Ok(k) => k,
        Err(e) => {
            report.push("levy kernel", false, e.to_string());
            return report;
        }
    };
    match QuadratureGrid::build_unchecked(&config.grid, &kernel, config.grid_tolerance) {
        Ok(grid) => {
            let ok = grid.c1_error() <= config.grid_tolerance;
            report.push(
                format!("grid {}", config.grid),
                ok,
                format!(
                    "{} nodes, c1_error = {:.2e} (tolerance {:.1e})",
                    grid.len(),
                    grid.c1_error(),
                    config.grid_tolerance
                ),
            );
            let steps = (p.horizon / config.mc.step_h).round() as u64;
            let node_paths = (grid.len() as u64 + 1) * config.mc.n_paths as u64;
            let total: f64 = config
                .times
                .iter()
                .map(|t| node_paths as f64 * ((p.horizon - t) / config.mc.step_h).round())
                .sum();
            report.notes.push(format!(
                "work: ({} nodes + 1) x {} paths x up to {} steps per time; {:.3e} path-steps in total",
                grid.len(),
                config.mc.n_paths,
                steps,
                total
            ));
        }
        Err(e) => report.push(format!("grid {}", config.grid), false, e.to_string()),
    }
    report.notes.push(format!(
        "C1 = {:.10e}, C2 = {:.10e}, mu = {:.10e}",
        kernel.c_rho_1(),
        kernel.c_rho_2(),
        p.alpha - kernel.c_rho_1()
    ));
    report.notes.push(format!(
        "jump rates above epsilon = {:e}: {:.6e} (small-jump part) + {:.6e} (gamma part)",
        kernel.epsilon(),
        kernel.rate_cp1_eps(),
        kernel.rate_cp2()
    ));
    if p.rho == 0.0 {
        report
            .notes
            .push("rho = 0: all jump-leverage terms vanish; xi_call = 1 + term_digital / S0".into());
    }
    report
}

/// One line of the output table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub preset: String,
    pub t: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub xi_put: f64,
    pub xi_call: f64,
    pub se: f64,
    pub term_digital: f64,
    pub term_integral: f64,
    pub term_head: f64,
    pub c1_error: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub h: f64,
    pub seed: u64,
}

pub fn csv_rows(preset: &str, sweep: &Sweep, mc: &McConfig) -> Vec<CsvRow> {
    sweep
        .rows
        .iter()
        .map(|r| CsvRow {
            preset: preset.to_string(),
            t: r.t,
            k: r.strike,
            xi_put: r.xi_put,
            xi_call: r.xi_call,
            se: r.std_error,
            term_digital: r.term_digital.mean,
            term_integral: r.term_integral.mean,
            term_head: r.term_head.mean,
            c1_error: r.c1_error,
            l: mc.n_paths,
            h: mc.step_h,
            seed: mc.master_seed,
        })
        .collect()
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

const CURVE_COLORS: [RGBColor; 6] = [BLACK, RED, BLUE, GREEN, MAGENTA, CYAN];

/// `ξ_call` against `K`, one curve per evaluation time, in order of first
/// appearance in `rows`.
pub fn plot_rows(path: &Path, rows: &[CsvRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Plot("nothing to plot".into()));
    }
    let mut times: Vec<f64> = Vec::new();
    for r in rows {
        if !times.contains(&r.t) {
            times.push(r.t);
        }
    }
    let (k_min, k_max) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.k), hi.max(r.k)));
    let (y_min, y_max) = rows.iter().fold((0.0f64, 1.0f64), |(lo, hi), r| {
        (lo.min(r.xi_call), hi.max(r.xi_call))
    });
    let k_pad = if k_max > k_min { 0.0 } else { 1.0 };
    let y_pad = 0.05 * (y_max - y_min);
    let plot_err = |e: &dyn fmt::Display| Error::Plot(e.to_string());

    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("LRM call hedge ratio ({})", rows[0].preset), ("sans-serif", 22))
        .margin(14)
        .x_label_area_size(44)
        .y_label_area_size(56)
        .build_cartesian_2d(k_min - k_pad..k_max + k_pad, y_min - y_pad..y_max + y_pad)
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc("K")
        .y_desc("xi_call")
        .draw()
        .map_err(|e| plot_err(&e))?;
    for (i, &t) in times.iter().enumerate() {
        let color = CURVE_COLORS[i % CURVE_COLORS.len()];
        let points = rows.iter().filter(|r| r.t == t).map(|r| (r.k, r.xi_call));
        chart
            .draw_series(LineSeries::new(points, color.stroke_width(2)))
            .map_err(|e| plot_err(&e))?
            .label(format!("t = {t}"))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(&e))?;
    root.present().map_err(|e| plot_err(&e))
}

/// Regenerates the plot of an existing CSV next to it.
pub fn plot_from_csv(csv: &Path) -> Result<PathBuf> {
    let rows = read_csv(csv)?;
    let out = csv.with_extension("svg");
    plot_rows(&out, &rows)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub c1: f64,
    pub c2: f64,
    pub mu: f64,
    pub c1_approx: f64,
    pub c1_error: f64,
    pub grid_nodes: usize,
    pub n_strikes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub version: &'static str,
    pub config: RunConfig,
    pub derived: DerivedConstants,
    pub weights: Vec<TimeDiagnostics>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub csv: PathBuf,
    pub plot: Option<PathBuf>,
    pub manifest: PathBuf,
    pub rows: Vec<CsvRow>,
}

/// Validates, simulates the sweep, and writes the artifacts.
pub fn run(config: &RunConfig) -> Result<RunArtifacts> {
    let grid = config.prepare()?;
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let strikes = config.strike_values();
    let sweep = strike_sweep(&config.params, &config.mc, &grid, &strikes, &config.times)?;
    let rows = csv_rows(&config.preset, &sweep, &config.mc);

    let csv = config.csv_path();
    write_csv(&csv, &rows)?;

    let kernel = config.kernel()?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        derived: DerivedConstants {
            c1: kernel.c_rho_1(),
            c2: kernel.c_rho_2(),
            mu: config.params.alpha - kernel.c_rho_1(),
            c1_approx: grid.c1_approx(),
            c1_error: grid.c1_error(),
            grid_nodes: grid.len(),
            n_strikes: strikes.len(),
        },
        weights: sweep.diagnostics.clone(),
    };
    let manifest_path = config.manifest_path();
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;

    let plot = if config.plot {
        let path = config.plot_path();
        plot_rows(&path, &rows)?;
        Some(path)
    } else {
        None
    };
    Ok(RunArtifacts {
        csv,
        plot,
        manifest: manifest_path,
        rows,
    })
}
