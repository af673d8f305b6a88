//! Command-line driver for the `hamsim` workspace. Each subcommand has its
//! own module; they share the config loader and the error type.

pub mod analyze;
pub mod config;
pub mod error;
pub mod hamgen;
pub mod sweep;

pub use analyze::{analyze, run_analysis, AnalyzeOptions, AnalyzeOutcome};
pub use config::{load_config, LoadedConfig, RunConfig};
pub use error::{CliError, CliResult};
pub use hamgen::{hamgen, HamgenOutcome};
pub use sweep::{parse_axis, sweep, GridAxis, SweepOutcome};
