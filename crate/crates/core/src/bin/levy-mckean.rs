use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use levy_mckean::cli::{parse_config, resolve_output_dir, run, ExitStatus, Preset};

#[derive(Parser)]
#[command(version, about = "Lévy-driven McKean-Vlasov experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (overrides LEVY_MCKEAN_OUT and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Quick,
    Full,
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        threads,
        out,
        preset,
    } = Args::parse().command;
    let cfg = match parse_config(&config) {
        Ok(c) => c,
        Err(errs) => {
            eprint!("invalid config {}:\n{errs}", config.display());
            return ExitCode::from(ExitStatus::Validation.code() as u8);
        }
    };
    let preset = match preset {
        Some(PresetArg::Quick) => Preset::Quick,
        Some(PresetArg::Full) => Preset::Full,
        None => cfg.preset,
    };
    let mut cfg = cfg.with_preset(preset);
    if let Some(t) = threads {
        cfg.threads = t;
    }
    let dir = resolve_output_dir(out.as_deref(), &cfg);
    match run(&cfg, &dir) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(e) = &outcome.error {
                eprintln!("error: {e}");
            }
            println!("artifacts in {}", dir.display());
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::for_error(&e).code() as u8)
        }
    }
}
