//! `bofem`: run, study and check the Benjamin-Ono solver.
//!
//! Exit codes: 0 success, 1 solver or I/O failure, 2 bad flags or config,
//! 3 diagnostic violation.

mod args;
mod run;
mod studies;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use run::{PartialRunConfig, Problem};
use studies::Preset;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(bofem::Error),
    Diagnostic(String),
}

impl From<bofem::Error> for CliError {
    fn from(e: bofem::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Solver(e.into())
    }
}

#[derive(Parser)]
#[command(name = "bofem", version, about = "Crank-Nicolson Galerkin solver for the Benjamin-Ono equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Evolve one problem and write snapshots.
    ///
    /// Settings come from the flags, then from --config (a JSON object with
    /// the keys of effective_config.json), then from the problem's defaults.
    Run {
        #[arg(long, value_enum)]
        problem: Option<Problem>,
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Comma-separated snapshot times.
        #[arg(long, value_parser = args::parse_times)]
        snapshots: Option<std::vec::Vec<f64>>,
        /// unit, linear:A,B (phi = A + B x) or cutoff:R.
        #[arg(long, value_parser = run::canonical_weight)]
        weight: Option<String>,
        /// periodic (dt = 0.5 dx), full-line (dt = 0.5 dx / max|u0|) or theory:LAMBDA (dt = LAMBDA dx^2).
        #[arg(long, value_parser = run::canonical_dt_mode)]
        dt_mode: Option<String>,
        /// periodic or free.
        #[arg(long, value_parser = run::canonical_boundary)]
        boundary: Option<String>,
        /// LEFT,RIGHT
        #[arg(long, value_parser = args::parse_domain, allow_hyphen_values = true)]
        domain: Option<[f64; 2]>,
        #[arg(long)]
        stop_factor: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// CSV with columns x,u; required for custom-initial.
        #[arg(long)]
        initial_csv: Option<PathBuf>,
        /// Snapshot samples per element (1 = mesh nodes).
        #[arg(long)]
        samples_per_element: Option<usize>,
        /// Also write the mass and Hilbert stiffness matrices.
        #[arg(long)]
        dump_matrices: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Grid-refinement study for a preset experiment.
    Converge {
        #[arg(long, value_enum)]
        preset: Preset,
        /// Comma-separated, doubling element counts.
        #[arg(long, value_parser = args::parse_sizes)]
        n_list: Option<std::vec::Vec<usize>>,
        #[arg(long)]
        stop_factor: Option<f64>,
        /// Permit element counts above the preset's default cap.
        #[arg(long)]
        allow_large: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// L2 and H1 projection errors of sin(k pi x / L) under refinement.
    ProjectTest {
        #[arg(long, value_parser = args::parse_sizes)]
        n_list: Option<std::vec::Vec<usize>>,
        #[arg(long, default_value_t = 15.0)]
        half_period: f64,
        #[arg(long, default_value_t = 1)]
        wavenumber: u32,
    },
    /// Skew symmetry, multiplier rates and conservation; exit 3 on violation.
    CheckOperators {
        #[arg(long, default_value_t = 64)]
        elements: usize,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            problem,
            elements,
            t_end,
            snapshots,
            weight,
            dt_mode,
            boundary,
            domain,
            stop_factor,
            max_iters,
            initial_csv,
            samples_per_element,
            dump_matrices,
            config,
            out,
        } => {
            let flags = PartialRunConfig {
                problem,
                elements,
                t_end,
                snapshots,
                weight,
                dt_mode,
                boundary,
                domain,
                stop_factor,
                max_iters,
                initial_csv,
                samples_per_element,
                dump_matrices: dump_matrices.then_some(true),
                ..PartialRunConfig::default()
            };
            let file = match config {
                Some(path) => PartialRunConfig::from_file(&path)?,
                None => PartialRunConfig::default(),
            };
            let cfg = flags.over(file).resolve()?;
            run::execute(&cfg, &out)
        }
        Command::Converge { preset, n_list, stop_factor, allow_large, out } => {
            studies::converge(preset, n_list, stop_factor, allow_large, &out)
        }
        Command::ProjectTest { n_list, half_period, wavenumber } => {
            studies::project_test(n_list, half_period, wavenumber)
        }
        Command::CheckOperators { elements } => studies::check(elements),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Diagnostic(m)) => {
            eprintln!("diagnostics failed: {m}");
            ExitCode::from(3)
        }
    }
}
