//! Configuration, file formats and subcommands of the `landau` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod series;
pub mod store;

pub use config::{parse_config, parse_config_str, Overrides};
pub use error::{CliError, CliResult};
pub use series::{read_series, write_series};
