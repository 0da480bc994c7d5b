use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use avgop_cli::{parse_document, run, to_csv, to_json, CliError, CliResult, Command, Params, Real};
use clap::Parser;

/// Analyze averaged nonexpansive operators described by a JSON document.
#[derive(Parser, Debug)]
#[command(name = "avgop", version)]
struct Args {
    command: Command,
    /// Operator document (`"schema": 1`).
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Local-search steps on the best sampled pair (100 when given without a value).
    #[arg(long, num_args = 0..=1, default_value_t = 0, default_missing_value = "100")]
    refine: usize,
    /// Emit a flat CSV table instead of JSON.
    #[arg(long)]
    csv: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(args: &Args) -> CliResult<()> {
    let path = args.spec.display().to_string();
    let text = fs::read_to_string(&args.spec).map_err(|e| CliError::Io {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let document = parse_document(&text)?;
    let params = Params {
        seed: args.seed,
        samples: args.samples,
        tol: Real(args.tol),
        max_iter: args.max_iter,
        refine: args.refine,
    };
    let report = run(&document, args.command, &params)?;
    let rendered = if args.csv { to_csv(&report) } else { to_json(&report) };
    match &args.out {
        Some(out) => fs::write(out, rendered).map_err(|e| CliError::Io {
            path: out.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
