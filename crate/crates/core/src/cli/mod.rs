//! Configuration-driven entry point behind the `levy-mckean` binary.

mod config;
mod run;

pub use config::{parse_config, parse_config_str, ConfigErrors, Experiment, Preset, RunConfig};
pub use run::{resolve_output_dir, run, ArtifactEntry, Check, ExitStatus, RunOutcome, BUILD_ID, OUT_DIR_ENV};
