//! Parse an experiment file and run it, as the binary does.
//!
//! `cargo run --release --example run_config -- configs/nonuniqueness.toml`

use std::path::PathBuf;

use levy_mckean::cli::{parse_config, run};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/nonuniqueness.toml")));
    let cfg = parse_config(&path)?;
    let dir = std::env::temp_dir().join(format!("levy-mckean-{}", cfg.label));
    let outcome = run(&cfg, &dir)?;
    for c in &outcome.checks {
        println!("{:<16} {:<5} {}", c.name, c.passed, c.detail);
    }
    for f in &outcome.files {
        println!("{:<20} {:>8} bytes  sha256 {}", f.path, f.bytes, &f.sha256[..16]);
    }
    println!("exit status {} ({:?}), artifacts in {}", outcome.status.code(), outcome.status, dir.display());
    Ok(())
}
