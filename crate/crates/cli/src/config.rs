//! Flat JSON configuration with command-line overrides.
//!
//! Precedence, lowest first: built-in defaults, the config file, flags.
//! The cache directory comes from `LANDAU_CACHE_DIR` when set, else
//! `--cache-dir`, else `.landau-cache`.

use std::path::{Path, PathBuf};

use clap::Args;
use landau_core::integrator::InitialConditionSpec;
use landau_core::SimulationConfig;

use crate::error::{CliError, CliResult};

pub const CACHE_ENV: &str = "LANDAU_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".landau-cache";

/// Flags shared by the subcommands that build a configuration.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    /// Flat JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "L")]
    pub half_width: Option<f64>,
    #[arg(long = "T")]
    pub final_time: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Preset name or inline JSON object.
    #[arg(long)]
    pub ic: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub cadence: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

fn parse_ic(text: &str) -> CliResult<InitialConditionSpec> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("ic: {e}")))
    } else {
        Ok(InitialConditionSpec::Preset(text.to_string()))
    }
}

/// Parses a flat JSON configuration; unknown keys are rejected.
pub fn parse_config_str(text: &str) -> CliResult<SimulationConfig> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_config_file(path: &Path) -> CliResult<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> CliResult<SimulationConfig> {
    let config = load_config_file(path)?;
    config.validate()?;
    Ok(config)
}

impl Overrides {
    /// Defaults, then the config file, then flags; validated.
    pub fn resolve(&self) -> CliResult<SimulationConfig> {
        let mut c = match &self.config {
            Some(path) => load_config_file(path)?,
            None => SimulationConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field.clone() { c.$target = v; })*
            };
        }
        set!(gamma => gamma, epsilon => epsilon, p => p, s => s, n => n,
             half_width => half_width, final_time => final_time, sigma => sigma, cadence => cadence);
        if let Some(ic) = &self.ic {
            c.ic = parse_ic(ic)?;
        }
        if let Some(out) = &self.out {
            c.out = Some(out.clone());
        }
        c.validate()?;
        Ok(c)
    }

    pub fn cache_dir(&self) -> PathBuf {
        cache_dir_from(std::env::var_os(CACHE_ENV).map(PathBuf::from), self.cache_dir.clone())
    }
}

/// The environment wins over the flag.
pub fn cache_dir_from(env: Option<PathBuf>, flag: Option<PathBuf>) -> PathBuf {
    env.filter(|p| !p.as_os_str().is_empty())
        .or(flag)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

/// Human-readable echo of the derived exponents.
pub fn echo(config: &SimulationConfig) -> String {
    format!(
        "gamma = {}, epsilon = {}, p = {}, s = {}, alpha = {}, q = {}, n = {}, L = {}, T = {}",
        config.gamma,
        config.epsilon,
        config.p,
        config.s,
        config.alpha(),
        config.q(),
        config.n,
        config.half_width,
        config.final_time
    )
}
