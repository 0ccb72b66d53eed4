use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use velopol::chain::{self, RunOptions, RunOutcome, Scenario};
use velopol::verify::{self, VerifyReport};

#[derive(Parser)]
#[command(
    name = "velopol",
    version,
    about = "Polarization addition laws and scattering chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its CSV trace.
    Run {
        scenario: PathBuf,
        /// Also write an SVG chart next to the CSV.
        #[arg(long)]
        svg: bool,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the property suite.
    Verify {
        /// Restrict to one module.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Print the JSON schema of scenario files.
    PrintSchema,
}

fn report(r: &VerifyReport) -> ExitCode {
    for line in r.lines() {
        println!("{line}");
    }
    if r.passed() {
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "verify: {} properties failed",
            r.results.iter().filter(|p| !p.passed).count()
        );
        ExitCode::from(2)
    }
}

fn run(path: &Path, opts: RunOptions) -> ExitCode {
    let base = path.parent().unwrap_or(Path::new("."));
    let outcome = Scenario::load(path).and_then(|s| chain::run(&s, base, &opts));
    match outcome {
        Ok(RunOutcome::Trace { rows, csv, svg }) => {
            eprintln!("wrote {rows} rows to {}", csv.display());
            if let Some(svg) = svg {
                eprintln!("wrote chart to {}", svg.display());
            }
            ExitCode::SUCCESS
        }
        Ok(RunOutcome::Verify(r)) => report(&r),
        Err(e) => {
            eprintln!("velopol: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            svg,
            workers,
        } => run(&scenario, RunOptions { workers, svg }),
        Command::Verify { filter } => match verify::run(filter.as_deref()) {
            Ok(r) => report(&r),
            Err(e) => {
                eprintln!("velopol: {e}");
                ExitCode::from(1)
            }
        },
        Command::PrintSchema => {
            println!("{}", chain::schema_json());
            ExitCode::SUCCESS
        }
    }
}
