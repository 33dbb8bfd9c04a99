//! `hybeam`: run hybrid beamforming experiments from spec files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybeam::harness::{self, ExperimentResult, ExperimentSpec};
use hybeam::Error;

#[derive(Parser)]
#[command(name = "hybeam", version = harness::VERSION, about = "Hybrid beamforming Monte-Carlo simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the base configuration of a spec (any sweep section is ignored).
    Run(RunArgs),
    /// Evaluate every value of the spec's sweep variable.
    Sweep(RunArgs),
    /// Join result files on (sweep, snr) and report mean-SE deltas.
    Compare {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        /// Write the comparison table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    spec: PathBuf,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Result CSV path; a `.json` sidecar is written next to it. Stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Report 0 ms wall time so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

fn load(args: &RunArgs) -> Result<ExperimentSpec, Error> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| Error::Io(format!("{}: {e}", args.spec.display())))?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(out) = &args.out {
        spec.output.path = Some(out.clone());
    }
    if args.no_timing {
        spec.output.timing = false;
    }
    spec.validate()?;
    Ok(spec)
}

fn emit(spec: &ExperimentSpec, result: &ExperimentResult) -> Result<(), Error> {
    match &spec.output.path {
        Some(path) => {
            harness::write_result(path, result, spec)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
        }
        None => print!("{}", result.to_csv()),
    }
    Ok(())
}

fn read(path: &Path) -> Result<(String, ExperimentResult), Error> {
    let result = harness::read_result(path).map_err(|e| match e {
        Error::Io(m) => Error::Io(format!("{}: {m}", path.display())),
        Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((path.display().to_string(), result))
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let spec = load(&args)?;
            emit(&spec, &harness::run(&spec, args.threads)?)
        }
        Command::Sweep(args) => {
            let spec = load(&args)?;
            emit(&spec, &harness::sweep(&spec, args.threads)?)
        }
        Command::Compare { files, out } => {
            let inputs = files.iter().map(|f| read(f)).collect::<Result<Vec<_>, _>>()?;
            let table = harness::compare(&inputs)?;
            match out {
                Some(path) => std::fs::write(&path, table.to_csv())?,
                None => print!("{}", table.to_csv()),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.tag());
            ExitCode::FAILURE
        }
    }
}
