//! `ncdbr`: batch experiments over row contractions stored as JSON tuples.
//!
//! Exit codes: 0 when every verdict passes, 1 when some verdict fails, 2 on
//! unusable input.

mod commands;
mod report;
mod tuple_file;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::{InputError, Settings};

#[derive(Parser)]
#[command(
    name = "ncdbr",
    version,
    about = "Characteristic functions and de Branges-Rovnyak models of row contractions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Tuple file (`{"d", "n", "matrices"}` with `[re, im]` entries).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Number of sample points.
    #[arg(long, global = true, default_value_t = 10)]
    points: usize,
    /// Row norm of the sample points, in (0, 1).
    #[arg(long, global = true, default_value_t = 0.7)]
    radius: f64,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Word-length truncation for model-verify.
    #[arg(long, global = true)]
    max_len: Option<usize>,
    /// Verdict threshold.
    #[arg(long, global = true, env = "NCDBR_TOL", default_value_t = 1e-8)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall time in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension of the subspace generated by the defect range.
    CncCheck,
    /// Evaluate the characteristic function at sample points.
    Charfn,
    /// Weak-coincidence fit against Popescu's characteristic function.
    ComparePopescu,
    /// Choi-matrix positivity of the de Branges-Rovnyak kernel.
    KernelPsd,
    /// Frostman shifts of the characteristic function.
    Frostman,
    /// Defect-point round trip for a row partial isometry.
    Roundtrip,
    /// Truncated Fock-space model residuals.
    ModelVerify,
    /// Parse and evaluate a free polynomial.
    PolyEval {
        #[arg(long)]
        poly: String,
    },
}

fn run(cli: &Cli) -> Result<report::Report, InputError> {
    let c = &cli.common;
    let settings = Settings {
        input: c.input.clone(),
        points: c.points,
        radius: c.radius,
        seed: c.seed,
        max_len: c.max_len,
        tol: c.tol,
    };
    settings.validate()?;
    match &cli.command {
        Command::CncCheck => commands::cnc_check(&settings),
        Command::Charfn => commands::charfn(&settings),
        Command::ComparePopescu => commands::compare_popescu(&settings),
        Command::KernelPsd => commands::kernel_psd(&settings),
        Command::Frostman => commands::frostman(&settings),
        Command::Roundtrip => commands::roundtrip(&settings),
        Command::ModelVerify => commands::model(&settings),
        Command::PolyEval { poly } => commands::poly_eval(&settings, poly),
    }
}

fn emit(cli: &Cli, report: &report::Report) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    match &cli.common.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match run(&cli) {
        Ok(r) => r,
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    if cli.common.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
