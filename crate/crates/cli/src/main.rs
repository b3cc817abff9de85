//! `wentzell`: root tables, resolvent sweeps, simulations, Hautus probes and Bessel
//! point evaluation for the boundary-damped wave equation on the unit disk.
//!
//! Exit status is 0 on success, 2 for invalid input and 3 for numerical failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "wentzell", version, about = "Spectral toolkit for the Wentzell-damped wave equation on the disk")]
struct Cli {
    /// Output directory (falls back to WENTZELL_OUT, then the working directory).
    #[arg(long, global = true, env = "WENTZELL_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified table of characteristic roots for one angular mode; writes roots.csv.
    Roots(RootsArgs),
    /// Resolvent norm sweep with refinement around the predicted resonances; writes resolvent.csv.
    Resolvent(ResolventArgs),
    /// Time-domain run of a mode packet; writes energy.csv and fit.json.
    Simulate(SimulateArgs),
    /// Random probes of the boundary observability ratio; writes hautus.csv.
    Hautus(HautusArgs),
    /// Point evaluation of J_n (or J_n') on stdout.
    Bessel(BesselArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RootsArgs {
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 60)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ResolventArgs {
    #[arg(long, default_value_t = 10.0)]
    pub lmin: f64,
    #[arg(long, default_value_t = 200.0)]
    pub lmax: f64,
    /// Uniform samples on [lmin, lmax], before refinement.
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    #[arg(long, default_value_t = 4000)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub n_max: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Newmark time stepping on the grid.
    Newmark,
    /// Exact modal synthesis evaluated through Gram matrices.
    Modal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseArg {
    Aligned,
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 200.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 2.6)]
    pub packet_s: f64,
    #[arg(long, default_value_t = 1)]
    pub packet_kmin: usize,
    #[arg(long, default_value_t = 10)]
    pub packet_kmax: usize,
    #[arg(long, value_enum, default_value_t = PhaseArg::Aligned)]
    pub phase: PhaseArg,
    /// Seed for random packet phases.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Newmark)]
    pub method: Method,
    /// Steps between energy samples (default: about 2000 samples per run).
    #[arg(long)]
    pub stride: Option<usize>,
    /// Fit window start.
    #[arg(long, default_value_t = 10.0)]
    pub fit_lo: f64,
    /// Fit window end (default: min(1000, t_max)).
    #[arg(long)]
    pub fit_hi: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HautusArgs {
    #[arg(long, default_value_t = 5.0)]
    pub lmin: f64,
    #[arg(long, default_value_t = 100.0)]
    pub lmax: f64,
    /// Random probes per frequency.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Log-spaced frequencies on [lmin, lmax].
    #[arg(long, default_value_t = 12)]
    pub frequencies: usize,
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BesselArgs {
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    /// Real part of the argument.
    #[arg(long, allow_negative_numbers = true)]
    pub z: f64,
    /// Imaginary part of the argument.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub z_im: f64,
    /// Evaluate J_n' instead of J_n.
    #[arg(long)]
    pub derivative: bool,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<wentzell::Error> for Failure {
    fn from(e: wentzell::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Invalid(format!("thread pool: {e}")))?;
    }
    let out = cli.out.unwrap_or_else(|| PathBuf::from("."));
    match cli.command {
        Command::Roots(a) => commands::roots(&a, out),
        Command::Resolvent(a) => commands::resolvent(&a, out),
        Command::Simulate(a) => commands::simulate(&a, out),
        Command::Hautus(a) => commands::hautus(&a, out),
        Command::Bessel(a) => commands::bessel(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(m) => eprintln!("error: invalid input: {m}"),
                Failure::Numerical(m) => eprintln!("error: numerical failure: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wentzell::Error;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(Failure::from(Error::InvalidArgument("x".into())).code(), 2);
        assert_eq!(Failure::from(Error::Domain("x".into())).code(), 2);
        assert_eq!(Failure::from(Error::NumericalFailure("x".into())).code(), 3);
        assert_eq!(Failure::from(Error::SpuriousRoot { modulus: 0.1 }).code(), 3);
        assert_eq!(Failure::from(Error::BoundaryTooClose { min_modulus: 1e-9 }).code(), 3);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
