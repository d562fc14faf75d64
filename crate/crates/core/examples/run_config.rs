//! Executes a JSON run configuration in-process and prints the certificate lines.
//!
//! `cargo run --release --example run_config -- configs/straight-line.json /tmp/out`

use std::path::Path;

use floquet_tubes::run::{execute_with_workers, RunConfig};

fn main() -> floquet_tubes::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().unwrap_or_else(|| "configs/straight-line.json".into());
    let out = args.next().unwrap_or_else(|| "target/run-config-example".into());
    let config = RunConfig::from_path(Path::new(&config))?;
    config.validate()?;
    let output = execute_with_workers(&config, None, None)?;
    let manifest = output.write(Path::new(&out))?;
    for (stem, table) in &output.tables {
        println!("{stem}: {} bands over {} quasimomenta", table.band_count(), table.grid.len());
    }
    for c in &output.certificates {
        println!("{}", c.line());
    }
    println!("manifest: {}", manifest.display());
    Ok(())
}
