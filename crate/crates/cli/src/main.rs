//! `sheffer`: sequences, triangles, Dobiński sums and moment checks for
//! composed Stirling-type generators.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input, 3 order cap
//! exceeded, 4 convergence or precision failure.

mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sheffer_core::exact::DEFAULT_ORDER_CAP;
use sheffer_core::DEFAULT_PRECISION;

#[derive(Parser, Debug)]
#[command(name = "sheffer", version, about = "Composed Stirling/Bell/Lah sequences, Dobinski sums and moment checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Working precision for floating-point evaluation.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    pub precision_bits: usize,
    /// Largest accepted `n` or triangle order.
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER_CAP)]
    pub order_cap: usize,
    /// Absolute tolerance for `dobinski`, relative tolerance for `verify`.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub eps: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Human-readable columns.
    Plain,
    /// One JSON object per line.
    Jsonl,
    /// OEIS b-file: `n value` per line.
    Bfile,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print B_spec(n) or B_spec(n, y) for n = 1..N.
    Seq {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        n: usize,
        /// Rational parameter, e.g. `2`, `1/3` or `0.25`.
        #[arg(long)]
        y: Option<String>,
    },
    /// Print the rows of the Stirling triangle.
    Triangle {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        order: usize,
    },
    /// Evaluate the Dobinski-type series and compare with the exact value.
    Dobinski {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        y: Option<String>,
    },
    /// Check moments 0..=N of a weight against the exact polynomials.
    Verify {
        /// One of W1, W2, W3, BB, LL, BL, LB.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        y: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Seq { spec, n, y } => commands::seq(&cli.global, spec, *n, y.as_deref(), &mut out),
        Command::Triangle { spec, order } => commands::triangle(&cli.global, spec, *order, &mut out),
        Command::Dobinski { spec, n, y } => commands::dobinski(&cli.global, spec, *n, y.as_deref(), &mut out),
        Command::Verify { spec, n_max, y } => commands::verify(&cli.global, spec, *n_max, y.as_deref(), &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("sheffer: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
