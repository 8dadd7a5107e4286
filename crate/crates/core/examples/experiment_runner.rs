//! Both experiments from a config file into one directory, then a plot script.
//! Same as the `semnoma` binary, driven from library calls.
//!
//!     cargo run --release --example experiment_runner -- configs/small.json out/small

use std::path::PathBuf;

use semnoma::experiment::{plot_from_dir, run_opportunistic, run_rate_region, ExperimentConfig};

fn main() -> semnoma::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from);
    let out = args.next().unwrap_or_else(|| "out/example".into());
    let overrides = vec![format!("output_dir={out}")];
    let cfg = match config {
        Some(path) => ExperimentConfig::load(&path, &overrides)?,
        None => ExperimentConfig::load_str(r#"{"uplink": {"ensemble_size": 300}}"#, &overrides)?,
    };
    for run in [run_rate_region(&cfg)?, run_opportunistic(&cfg)?] {
        println!(
            "{} in {:.2} s",
            run.manifest.experiment, run.manifest.wall_clock_seconds
        );
        for rec in &run.manifest.outputs {
            println!("  {} sha256={}", rec.file, &rec.sha256[..16]);
        }
    }
    println!("plot script: {}", plot_from_dir(&cfg.output_dir)?.display());
    Ok(())
}
