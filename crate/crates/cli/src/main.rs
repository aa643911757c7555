//! Batch front-end: parse a graph-spec document, dispatch one analysis, and
//! emit a CSV or JSON report.
//!
//! Exit codes: 0 on success, 1 on a domain error (the message names the
//! failing case), 2 on an input or parse error.

use clap::{Parser, Subcommand};
use flatband_core::exec::ExecMode;
use flatband_core::extremal::{extremal_search, symmetric_extremal_search, verify_obstruction};
use flatband_core::flatband::{
    flat_band_energies, flat_band_scan_sampled, genericity_probe, UniformRationalSampler,
};
use flatband_core::floquet::{band_sample, build_fiber, uniform_grid};
use flatband_core::io;
use flatband_core::loops::{
    default_epsilon_list, resummed_table, series_vs_eigenvalue_check, LoopLimits,
};
use flatband_core::scalar::Ring;
use flatband_core::{validate_spec, Gaussian, ValidatedGraph};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "flatband", version, about = "Floquet analysis of Z^d-periodic graph operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a graph-spec document and summarize the quotient data.
    Validate {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide Γ-connectivity and multi-connectedness, with certificates.
    Connectivity {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample band functions over a uniform θ grid and emit CSV.
    Bands {
        input: PathBuf,
        /// Grid side length per axis (odd values avoid degenerate points).
        #[arg(long, default_value_t = 11)]
        grid: usize,
        /// Hopping scale ε (converted exactly from its binary value).
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide flat-band existence.
    Flatband {
        input: PathBuf,
        /// Exact decision over the Gaussian rationals (default).
        #[arg(long, conflicts_with = "sampled")]
        exact: bool,
        /// Numeric scan: grid spectra plus sampled determinant test.
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the resummed loop table at a base vertex and order.
    Loops {
        input: PathBuf,
        /// Base vertex (1-based).
        #[arg(long)]
        base: usize,
        #[arg(long)]
        order: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extremal and symmetric-extremal loop search.
    Extremal {
        input: PathBuf,
        /// Base vertex (1-based); all vertices when omitted.
        #[arg(long)]
        base: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Flat-band obstruction certificates for every base vertex.
    Certify {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare the truncated perturbation series against the tracked
    /// eigenvalue branch.
    SeriesCheck {
        input: PathBuf,
        /// Base vertex (1-based).
        #[arg(long)]
        base: usize,
        /// Truncation order K.
        #[arg(long)]
        order: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample random potentials and count flat-band hits.
    Probe {
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum CliError {
    /// Input/parse problems -> exit 2.
    Input(String),
    /// Domain errors -> exit 1, message names the case.
    Domain(String),
}

impl From<io::ParseError> for CliError {
    fn from(e: io::ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

macro_rules! domain_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Domain(e.to_string())
            }
        }
    )*};
}

domain_from!(
    flatband_core::graph::GraphError,
    flatband_core::floquet::FloquetError,
    flatband_core::flatband::FlatBandError,
    flatband_core::loops::LoopError,
    flatband_core::extremal::ExtremalError,
    flatband_core::io::ReportError
);

fn load(input: &PathBuf) -> Result<ValidatedGraph, CliError> {
    let spec = io::load_spec_path(input)?;
    Ok(validate_spec(&spec)?)
}

fn base_index(base: usize, n: usize) -> Result<usize, CliError> {
    if base == 0 || base > n {
        return Err(CliError::Input(format!("base vertex {base} outside 1..{n}")));
    }
    Ok(base - 1)
}

/// Deterministic z for the series check: fixed moduli and phases inside the
/// required polyannulus.
fn series_z(d: usize) -> Vec<Complex64> {
    (0..d)
        .map(|k| Complex64::from_polar(0.9 + 0.08 * k as f64, 2.3 + 0.7 * k as f64))
        .collect()
}

fn emit(text: String, output: Option<PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn emit_json(value: serde_json::Value, output: Option<PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&value).expect("report serialization");
    text.push('\n');
    emit(text, output)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let limits = LoopLimits::default();
    match cli.command {
        Command::Validate { input, output } => {
            let g = load(&input)?;
            emit_json(io::validate_json(&g), output)
        }
        Command::Connectivity { input, output } => {
            let g = load(&input)?;
            emit_json(io::connectivity_json(&g), output)
        }
        Command::Bands { input, grid, epsilon, output } => {
            let g = load(&input)?;
            if grid == 0 {
                return Err(CliError::Input("grid side must be positive".into()));
            }
            let eps = Gaussian::from_f64_pair(epsilon, 0.0)
                .ok_or_else(|| CliError::Input("epsilon must be finite".into()))?;
            let fiber = build_fiber(&g, g.potential(), &eps)?;
            let sample = band_sample(&fiber, &uniform_grid(g.d(), grid), ExecMode::default())?;
            emit(io::band_csv(&sample)?, output)
        }
        Command::Flatband { input, exact: _, sampled, seed, output } => {
            let g = load(&input)?;
            let fiber = build_fiber(&g, g.potential(), &Gaussian::one())?;
            let report = if sampled {
                flat_band_scan_sampled(&fiber, 5, seed)?
            } else {
                flat_band_energies(&fiber)?
            };
            emit_json(io::flatband_report_json(&report, sampled.then_some(seed)), output)
        }
        Command::Loops { input, base, order, output } => {
            let g = load(&input)?;
            let j = base_index(base, g.n())?;
            if order == 0 {
                return Err(CliError::Input("order must be positive".into()));
            }
            let table = resummed_table(&g, j, order, &limits, ExecMode::default())?;
            emit_json(io::table_json(&table), output)
        }
        Command::Extremal { input, base, output } => {
            let g = load(&input)?;
            let bases: Vec<usize> = match base {
                Some(b) => vec![base_index(b, g.n())?],
                None => (0..g.n()).collect(),
            };
            let mut reports = Vec::new();
            for j in bases {
                let search = extremal_search(&g, j, &limits)?;
                let symmetric = symmetric_extremal_search(&g, j, &limits)?;
                reports.push(io::extremal_json(&search, symmetric.as_ref()));
            }
            emit_json(serde_json::Value::Array(reports), output)
        }
        Command::Certify { input, output } => {
            let g = load(&input)?;
            let mut certs = Vec::new();
            for j in 0..g.n() {
                let cert = verify_obstruction(&g, j, &limits)?;
                certs.push(io::certificate_json(&cert));
            }
            emit_json(serde_json::Value::Array(certs), output)
        }
        Command::SeriesCheck { input, base, order, output } => {
            let g = load(&input)?;
            let j = base_index(base, g.n())?;
            if order == 0 {
                return Err(CliError::Input("order must be positive".into()));
            }
            let z = series_z(g.d());
            let eps = default_epsilon_list(&g, g.potential());
            let check =
                series_vs_eigenvalue_check(&g, g.potential(), j, order, &eps, &z, &limits)?;
            emit_json(io::series_json(&check, j, order, &z, &eps), output)
        }
        Command::Probe { input, trials, seed, output } => {
            let g = load(&input)?;
            let sampler = UniformRationalSampler::default();
            let summary = genericity_probe(&g, &sampler, trials, seed, ExecMode::default())?;
            emit_json(io::probe_json(&summary), output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
