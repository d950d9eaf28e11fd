//! `semidecay`: every analysis of the library as a subcommand.
//!
//! Exit codes: 0 when the analysis ran and its report was written, 2 when the
//! supplied data violate a mathematical hypothesis of the analysis (a report
//! describing the failure is still written), 1 on usage errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "semidecay", version, about = "Decay rates of discrete operator semigroups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// ‖S₁TⁿS‖ over a logarithmic schedule with a fitted exponent.
    Powers,
    /// sup_θ ‖S₁R(re^{iθ},T)ᵏS‖ for radii decreasing to 1.
    ResolventSweep,
    /// Contour-integral reconstruction of Tⁿ against direct powering.
    Reconstruct,
    /// Both sides of the operator Parseval identity.
    Parseval,
    /// Kreiss and strong Kreiss constants.
    Kreiss,
    /// Ritt constant sup |λ−1|‖R(λ,T)‖, plus the power-resolvent form with --k.
    Ritt,
    /// (α,β)-RK boundedness.
    Rk,
    /// Containment of the spectrum in a δ-Stolz domain.
    Stolz,
    /// Gomilko–Shi–Feng integral condition.
    Gsf,
    /// Integral characterization of f(n)‖TⁿS‖ boundedness.
    IntegralEquiv,
    /// Decay versus resolvent-growth equivalence.
    Equiv,
    /// n(log n)^α decay versus log-weighted resolvent growth.
    Nlogn,
    /// Robustness of decay under a perturbation D.
    Perturb,
    /// Weighted summability of the orbit norms, and its converse with --g.
    Summability,
    /// Multiplication-operator summability equivalence.
    MultOp,
    /// Bounded regular variation checks for a function spec.
    RvCheck,
    /// One-step operator of a sampled-data feedback loop and its powers.
    SampledData,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Powers => "powers",
            Command::ResolventSweep => "resolvent-sweep",
            Command::Reconstruct => "reconstruct",
            Command::Parseval => "parseval",
            Command::Kreiss => "kreiss",
            Command::Ritt => "ritt",
            Command::Rk => "rk",
            Command::Stolz => "stolz",
            Command::Gsf => "gsf",
            Command::IntegralEquiv => "integral-equiv",
            Command::Equiv => "equiv",
            Command::Nlogn => "nlogn",
            Command::Perturb => "perturb",
            Command::Summability => "summability",
            Command::MultOp => "mult-op",
            Command::RvCheck => "rv-check",
            Command::SampledData => "sampled-data",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Operator spec (JSON); for sampled-data a JSON object with A, B, F, tau.
    #[arg(long, global = true)]
    pub op: Option<PathBuf>,
    /// Right factor S (JSON spec); defaults to the identity.
    #[arg(long, global = true)]
    pub s: Option<PathBuf>,
    /// Left factor S₁ (JSON spec).
    #[arg(long = "s-left", global = true)]
    pub s_left: Option<PathBuf>,
    /// Perturbation D (JSON spec).
    #[arg(long, global = true)]
    pub d: Option<PathBuf>,
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Weight function, e.g. `pow:1/2`, `pow_log:1/2,1`, `log`, `const`.
    #[arg(long, global = true)]
    pub f: Option<String>,
    /// Second weight for the converse summability check.
    #[arg(long, global = true)]
    pub g: Option<String>,
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<u64>,
    /// Power index for reconstruct.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// `jmin:jmax:ntheta`, radii 1 + 2^{-j}.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long = "n-theta", global = true)]
    pub n_theta: Option<usize>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub probes: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value = "semidecay-out")]
    pub out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Hypothesis(String),
}

impl From<semidecay::Error> for Failure {
    fn from(e: semidecay::Error) -> Self {
        if e.is_hypothesis_failure() {
            Failure::Hypothesis(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(w) = cli.config.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: cannot start {w} workers: {e}");
            return ExitCode::from(1);
        }
    }
    let name = cli.command.name();
    match commands::run(cli.command, &cli.config) {
        Ok(outcome) => match output::write(name, &cli.config, &outcome) {
            Ok(path) => {
                println!("{name}: {} ({})", outcome.verdict, path.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: writing artifacts: {e:#}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Hypothesis(msg)) => {
            eprintln!("{name}: hypothesis not met: {msg}");
            if let Err(e) = output::write_failure(name, &cli.config, &msg) {
                eprintln!("error: writing artifacts: {e:#}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: semidecay <COMMAND> --op PATH [options]; see `semidecay --help`");
            ExitCode::from(1)
        }
    }
}
