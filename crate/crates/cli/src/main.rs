use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use cvtele_cli::commands::{self, AnalyzeOptions, BoundsOptions, SwapOptions, VerifyOptions};
use cvtele_cli::CliError;

#[derive(Parser)]
#[command(name = "cvtele", version, about = "Gaussian teleportation fidelity: bounds and optimal local maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a covariance matrix document and print a JSON report.
    Analyze {
        input: String,
        /// Cross-check the optimum with the brute-force oracle.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Symmetry tolerance for the input matrix.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Oracle multistart count.
        #[arg(long, default_value_t = 32)]
        starts: usize,
    },
    /// Upper and lower fidelity bounds on a grid of ν.
    Bounds {
        #[arg(long, default_value_t = 0.001, allow_negative_numbers = true)]
        nu_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        nu_max: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Randomized self-check over seeded entangled states.
    Verify {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Oracle starts per state (0 disables the oracle check).
        #[arg(long, default_value_t = 32)]
        oracle_budget: usize,
    },
    /// Smallest partial-transpose eigenvalue after entanglement swapping, versus squeezing.
    SwapDemo {
        #[arg(long, allow_negative_numbers = true)]
        n_opt: f64,
        #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
        r_max: f64,
        #[arg(long, default_value_t = 151)]
        steps: usize,
    },
}

fn run(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Analyze { input, oracle, seed, tol, starts } => {
            commands::analyze(&input, &AnalyzeOptions { oracle, seed, tol, starts })
        }
        Command::Bounds { nu_min, nu_max, steps, format: Format::Csv } => {
            commands::bounds(&BoundsOptions { nu_min, nu_max, steps })
        }
        Command::Verify { count, seed, oracle_budget } => {
            commands::verify(&VerifyOptions { count, seed, oracle_budget })
        }
        Command::SwapDemo { n_opt, r_max, steps } => commands::swap_demo(&SwapOptions { n_opt, r_max, steps }),
    }
}

fn write_stdout(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).context("writing to stdout")?;
    out.flush().context("flushing stdout")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let is_analyze = matches!(cli.command, Command::Analyze { .. });
    match run(cli.command) {
        Ok(text) => match write_stdout(&text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Err(err) => {
            if is_analyze {
                let _ = write_stdout(&commands::analyze_error_body(&err));
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
