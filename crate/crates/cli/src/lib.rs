//! Command-line front end: presets, CSV tables with a replayable manifest,
//! and the mapping from errors to exit codes.

mod app;
pub mod csvio;
pub mod error;
pub mod presets;

pub use app::{analytic_table, parse_snr, run_cli, simulate_presets, SnrGrid};
pub use error::{CliError, CliResult};
