use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use bns_lrm::cli_reporting::{
    load_grid, load_params, parse_assignment, parse_times, plot_from_csv, run, set_param, validate, RunConfig,
    StrikeSpec,
};
use bns_lrm::{Error, GridSpec, Result};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Toggle {
    On,
    Off,
}

/// Locally risk-minimizing hedge ratios of European options under IG-OU BNS
/// models, computed by weighted Monte Carlo.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Built-in parameter set: nv or scho.
    #[arg(long, conflicts_with = "params")]
    preset: Option<String>,

    /// Parameter file of `key = value` lines (alpha, rho, lambda, a, b, S0, sigma0_sq, T).
    #[arg(long)]
    params: Option<PathBuf>,

    /// Override one parameter, e.g. `--set b=0.7995`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Comma-separated evaluation times.
    #[arg(long = "t", value_name = "LIST")]
    times: Option<String>,

    /// Maturity.
    #[arg(long = "T", value_name = "REAL")]
    maturity: Option<f64>,

    /// Strike range as fractions of S0.
    #[arg(long, value_name = "LO:HI:STEP")]
    strikes: Option<StrikeSpec>,

    /// Quadrature grid: nv, scho, desk, or a grid file.
    #[arg(long)]
    grid: Option<String>,

    /// Number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,

    /// Time step.
    #[arg(long)]
    step: Option<f64>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Jump truncation level.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    #[arg(long, value_enum, default_value = "on")]
    plot: Toggle,

    /// Dry run: checks, derived constants and work estimate only.
    #[arg(long)]
    validate: bool,

    /// Worker threads (results do not depend on this).
    #[arg(long)]
    threads: Option<usize>,

    /// Regenerate the plot of an existing CSV and exit.
    #[arg(long, value_name = "CSV")]
    plot_from: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match (&cli.preset, &cli.params) {
        (_, Some(path)) => {
            let params = load_params(path, None)?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "custom".into());
            RunConfig::with_params(&label, params, GridSpec::Desk)
        }
        (Some(name), None) => RunConfig::preset(name)?,
        (None, None) => RunConfig::preset("nv")?,
    };
    for o in &cli.overrides {
        let (key, value) = parse_assignment(o)?;
        set_param(&mut config.params, &key, value)?;
    }
    if let Some(t) = cli.maturity {
        config.params.horizon = t;
    }
    if let Some(times) = &cli.times {
        config.times = parse_times(times)?;
    }
    if let Some(s) = cli.strikes {
        config.strikes = s;
    }
    if let Some(g) = &cli.grid {
        match g.parse::<GridSpec>() {
            Ok(spec) => {
                config.grid_tolerance = spec.default_tolerance();
                config.grid = spec;
            }
            Err(_) => {
                let (spec, tol) = load_grid(g.as_ref())?;
                config.grid_tolerance = tol.unwrap_or_else(|| spec.default_tolerance());
                config.grid = spec;
            }
        }
    }
    if let Some(n) = cli.paths {
        config.mc.n_paths = n;
    }
    if let Some(h) = cli.step {
        config.mc.step_h = h;
    }
    if let Some(s) = cli.seed {
        config.mc.master_seed = s;
    }
    if let Some(e) = cli.epsilon {
        config.mc.epsilon = e;
    }
    config.out_dir = cli.out.clone();
    config.plot = matches!(cli.plot, Toggle::On);
    Ok(config)
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    if let Some(csv) = &cli.plot_from {
        let out = plot_from_csv(csv)?;
        println!("wrote {}", out.display());
        return Ok(ExitCode::SUCCESS);
    }
    let config = build_config(cli)?;
    if cli.validate {
        let report = validate(&config);
        println!("{report}");
        return Ok(if report.passed() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        });
    }
    let artifacts = run(&config)?;
    println!("wrote {} ({} rows)", artifacts.csv.display(), artifacts.rows.len());
    if let Some(p) = &artifacts.plot {
        println!("wrote {}", p.display());
    }
    println!("wrote {}", artifacts.manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
