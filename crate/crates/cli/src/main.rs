// SPDX-License-Identifier: MIT OR Apache-2.0

//! `qbnf`: normal forms, wave invariants and their oracles from the command line.
//!
//! Exit status is 0 when every check passes, 1 when a tolerance or the
//! computation fails, and 2 on malformed input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qbnf::pipeline::{run, Command, GermSource, Report, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "qbnf", version, about = "Quantum Birkhoff normal forms near elliptic closed geodesics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Normal form, Birkhoff coefficients and wave invariants of a germ.
    Compute(Options),
    /// Germ diagnostics and Jacobi frame checks.
    Validate(Options),
    /// Eigenvalue ladders of a surface of revolution against the engine.
    OracleSpectral(Options),
    /// Classical, quantum and flow twists.
    OracleDynamics(Options),
    /// Seeded randomized property suites.
    Suite(Options),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Args, Debug)]
struct Options {
    /// Germ JSON file (full jet schema or curvature shorthand).
    #[arg(long, conflicts_with = "preset")]
    germ: Option<PathBuf>,
    /// Surface-of-revolution preset: paraboloid, quartic, asymmetric, sphere.
    #[arg(long)]
    preset: Option<String>,
    /// Normal form order K.
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = qbnf::symbol::DEFAULT_BANDWIDTH)]
    fourier_bandwidth: usize,
    #[arg(long, default_value_t = qbnf::symbol::DEFAULT_RESONANCE_TOL)]
    resonance_tol: f64,
    /// Directory for the report; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn default_preset(command: Command) -> &'static str {
    match command {
        Command::OracleSpectral => "quartic",
        _ => "paraboloid",
    }
}

fn config(command: Command, o: &Options) -> Result<RunConfig, String> {
    let germ = match (&o.germ, &o.preset) {
        (Some(path), _) => {
            let contents = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            GermSource::File {
                path: path.display().to_string(),
                contents,
            }
        }
        (None, Some(name)) => GermSource::Preset(name.clone()),
        (None, None) => GermSource::Preset(default_preset(command).to_string()),
    };
    if !(o.resonance_tol.is_finite() && o.resonance_tol > 0.0) {
        return Err(format!("--resonance-tol must be positive, got {}", o.resonance_tol));
    }
    if o.fourier_bandwidth < 2 {
        return Err("--fourier-bandwidth must be at least 2".to_string());
    }
    let mut cfg = RunConfig::new(command, germ);
    cfg.order = o.k;
    cfg.fourier_bandwidth = o.fourier_bandwidth;
    cfg.resonance_tol = o.resonance_tol;
    cfg.seed = o.seed;
    Ok(cfg)
}

fn emit(report: &Report, o: &Options) -> std::io::Result<()> {
    let (text, ext) = match o.format {
        Format::Json => (report.to_json_string(), "json"),
        Format::Md => (report.to_markdown(), "md"),
    };
    match &o.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.{ext}", report.config.command.name()));
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, options) = match &cli.command {
        Sub::Compute(o) => (Command::Compute, o),
        Sub::Validate(o) => (Command::Validate, o),
        Sub::OracleSpectral(o) => (Command::OracleSpectral, o),
        Sub::OracleDynamics(o) => (Command::OracleDynamics, o),
        Sub::Suite(o) => (Command::Suite, o),
    };
    let cfg = match config(command, options) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&report, options) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    let failing = report.failing();
    if failing.is_empty() {
        return ExitCode::SUCCESS;
    }
    for c in failing {
        match &c.detail {
            Some(d) => eprintln!("FAIL {}: {d}", c.name),
            None => eprintln!("FAIL {}: {:.3e} > {:.1e}", c.name, c.value, c.tolerance),
        }
    }
    ExitCode::from(1)
}
