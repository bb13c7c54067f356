use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orlicz_mce::request::{
    norm_report, read_json, run_analysis, run_classify, run_witness, young_info, Overrides, Report,
};

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "orlicz-mce", version, about = "Orlicz-space analysis of MCE operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Truncation N for parametric atom families.
    #[arg(long, global = true)]
    truncation: Option<usize>,
    /// Inequality tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for all sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run boundedness checks from an analysis request.
    Analyze { request: PathBuf },
    /// Young-function diagnostics.
    Young {
        #[command(subcommand)]
        command: YoungCommand,
    },
    /// Build and certify an unboundedness witness.
    Witness { request: PathBuf },
    /// Zero / finite-rank / closed-range classification.
    Classify { request: PathBuf },
    /// Luxemburg norm of a function.
    Norm { space: PathBuf, function: PathBuf, phi: PathBuf },
}

#[derive(Subcommand)]
enum YoungCommand {
    /// a_Φ, b_Φ, growth conditions and complementary samples.
    Info { spec: PathBuf },
}

fn run(cli: &Cli) -> orlicz_mce::Result<Report> {
    let ov = Overrides {
        truncation: cli.flags.truncation,
        tol: cli.flags.tol,
        seed: cli.flags.seed,
    };
    match &cli.command {
        Command::Analyze { request } => run_analysis(&read_json(request)?, &ov),
        Command::Young {
            command: YoungCommand::Info { spec },
        } => young_info(&read_json(spec)?, &ov),
        Command::Witness { request } => run_witness(&read_json(request)?, &ov),
        Command::Classify { request } => run_classify(&read_json(request)?, &ov),
        Command::Norm { space, function, phi } => {
            norm_report(&read_json(space)?, &read_json(function)?, &read_json(phi)?, &ov)
        }
    }
}

fn emit(report: &Report, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, report.to_json())?;
            print!("{}", report.summary_table());
        }
        None => {
            eprint!("{}", report.summary_table());
            print!("{}", report.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&report, cli.flags.report.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(report.exit_code() as u8)
}
