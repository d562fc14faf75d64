use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use floquet_tubes::run::{self, RunConfig};

/// Band structures and certificates from a JSON run configuration.
#[derive(Parser, Debug)]
#[command(name = "floquet-lab", version)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Recorded in the manifest; no computation is randomized.
    #[arg(long)]
    seed: Option<u64>,
}

fn fail(e: floquet_tubes::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(run::exit_code(&e) as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { run::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let config = match RunConfig::from_path(&args.config).and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if matches!(args.workers, Some(0)) {
        return fail(floquet_tubes::Error::Config("--workers must be at least 1".into()));
    }
    let Some(out_dir) = args.out.clone().or_else(|| config.output.clone()) else {
        return fail(floquet_tubes::Error::Config("no output directory (--out)".into()));
    };
    let output = match run::execute_with_workers(&config, args.workers, args.seed) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    if let Err(e) = output.write(&out_dir) {
        return fail(e);
    }
    for c in &output.certificates {
        println!("{}", c.line());
    }
    if output.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(run::EXIT_CERTIFICATE as u8)
    }
}
