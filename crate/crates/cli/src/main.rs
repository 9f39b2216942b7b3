//! `subh`: subharmonic orbits from the command line.

mod commands;
mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "subh", version, about = "Subharmonic orbits of weakly forced, weakly damped oscillators")]
struct Cli {
    /// Worker threads for the parallel parts.
    #[arg(long, global = true, env = "SUBH_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML file describing the system.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "p", default_value_t = 1, allow_negative_numbers = true)]
    pub p: i64,
    #[arg(long = "q", default_value_t = 1)]
    pub q: i64,
    /// Starting guess for the resonant action; a scan is used otherwise.
    #[arg(long, allow_negative_numbers = true)]
    pub a0: Option<f64>,
    /// Use the `[mechanical]` table of the config.
    #[arg(long)]
    pub mechanical: bool,
    /// Energy bracket `lo:hi` for the mechanical orbit search.
    #[arg(long, default_value = "1e-3:1e3")]
    pub energy_bracket: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesModeArg {
    C,
    Fixed,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Root curve C₀(t₀) and D(t₀) of the Melnikov function (CSV: t0, C0, D).
    Melnikov {
        #[command(flatten)]
        common: Common,
        /// Number of phases in [0, 2π).
        #[arg(long, default_value_t = 64)]
        t0_grid: usize,
    },
    /// Fourier coefficients of the subharmonic solution at one phase (JSON).
    Series {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, value_enum, default_value_t = SeriesModeArg::C)]
        mode: SeriesModeArg,
        /// Frozen dissipation for `--mode fixed`; `--t0` is then refined to a zero of M.
        #[arg(long, allow_negative_numbers = true)]
        c_fixed: Option<f64>,
    },
    /// Bifurcation curves γ₁(ε), γ₂(ε) (CSV: eps, gamma1, gamma2, tau1, tau2).
    Curves {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// `log:a:b:n`, `lin:a:b:n` or a list.
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        /// Mirror the grid to negative ε.
        #[arg(long)]
        two_sided: bool,
        /// Override the phase grid size.
        #[arg(long)]
        t0_grid: Option<usize>,
        /// Relative tolerance for "constant in t₀" in the degeneracy report.
        #[arg(long)]
        constant_tol: Option<f64>,
    },
    /// Number of subharmonic solutions at (ε, γ); JSON detail goes to --out.
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long)]
        t0_grid: Option<usize>,
    },
    /// Tree expansion of the coefficients; with --check, compared to the recursion.
    Trees {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long)]
        check: bool,
    },
    /// Shoot for one periodic orbit at (ε, C) (JSON).
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long = "C", allow_negative_numbers = true)]
        c: f64,
        /// Seed from the series at this phase only.
        #[arg(long, allow_negative_numbers = true)]
        t0: Option<f64>,
    },
    /// Empirical existence interval in C per ε (CSV: eps, C_max_hat, C_min_hat).
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long)]
        two_sided: bool,
        /// C bracket `lo:hi`; derived from the Melnikov curve when omitted.
        #[arg(long, allow_hyphen_values = true)]
        bracket: Option<String>,
    },
}

pub const EXIT_HYPOTHESIS: u8 = 2;
pub const EXIT_ORACLE: u8 = 3;
pub const EXIT_USAGE: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<subharmonic::Error>()) {
        Some(e) if e.is_hypothesis_violation() => EXIT_HYPOTHESIS,
        Some(e) if e.is_oracle_failure() => EXIT_ORACLE,
        _ => EXIT_USAGE,
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Melnikov { common, t0_grid } => commands::melnikov(&common, t0_grid),
        Command::Series { common, order, t0, mode, c_fixed } => commands::series(&common, order, t0, mode, c_fixed),
        Command::Curves { common, order, eps, two_sided, t0_grid, constant_tol } => {
            commands::curves(&common, order, &eps, two_sided, t0_grid, constant_tol)
        }
        Command::Count { common, order, eps, gamma, t0_grid } => commands::count(&common, order, eps, gamma, t0_grid),
        Command::Trees { common, order, t0, check } => commands::trees(&common, order, t0, check),
        Command::Verify { common, order, eps, c, t0 } => commands::verify(&common, order, eps, c, t0),
        Command::Scan { common, order, eps, two_sided, bracket } => {
            commands::scan(&common, order, &eps, two_sided, bracket.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
