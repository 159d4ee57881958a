//! Command-line experiment runner for the relay-selection simulator.

pub mod config;
pub mod error;
pub mod sweep;

pub use config::{load_config, parse_config, Mode, SweepSpec};
pub use error::CliError;
pub use sweep::run_sweep;
