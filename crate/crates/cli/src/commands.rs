//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use landau_core::collision::collision_operator;
use landau_core::convolution::DensitySpectrum;
use landau_core::diagnostics::{
    coercivity_constant, conserved_quantities, entropy, entropy_production, entropy_production_spectral,
};
use landau_core::grid::{integrate, weighted_moment};
use landau_core::harness::{default_matrix, evaluate, Experiment, Report};
use landau_core::integrator::run_with_tables;
use landau_core::{Gamma, KernelTables, ScalarField, SimulationConfig};
use serde::Serialize;

use crate::config::{echo, Overrides};
use crate::error::{CliError, CliResult};
use crate::series::write_series;
use crate::store::{load_or_build_tables, read_checkpoint, write_checkpoint};

pub const DEFAULT_OUT: &str = "landau-out";

fn out_dir(config: &SimulationConfig) -> PathBuf {
    PathBuf::from(config.out.as_deref().unwrap_or(DEFAULT_OUT))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e.to_string()))?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Configures the global thread pool once.
pub fn set_threads(threads: Option<usize>) {
    if let Some(k) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    config: &'a SimulationConfig,
    alpha: f64,
    q: f64,
    lp_exponents: Vec<f64>,
}

fn write_config_echo(config: &SimulationConfig, path: &Path) -> CliResult<()> {
    write_json(
        &ConfigEcho {
            config,
            alpha: config.alpha(),
            q: config.q(),
            lp_exponents: config.lp_exponents(),
        },
        path,
    )
}

/// `run`: simulate, write the series, the config echo and checkpoints.
pub fn run(ov: &Overrides) -> CliResult<()> {
    let config = ov.resolve()?;
    set_threads(ov.threads);
    println!("{}", echo(&config));
    let dir = out_dir(&config);
    create_dir(&dir)?;
    let tables = load_or_build_tables(&ov.cache_dir(), config.grid()?, config.gamma()?)?;
    let started = Instant::now();
    let traj = run_with_tables(&config, &tables)?;
    write_series(&traj.records, &dir.join("series.csv"))?;
    write_config_echo(&config, &dir.join("config.json"))?;
    for (t, f) in &traj.checkpoints {
        write_checkpoint(f, *t, &config, &dir.join(format!("checkpoint_t{t:.6}.bin")))?;
    }
    if let Some(f) = &traj.final_field {
        write_checkpoint(f, traj.final_time(), &config, &dir.join("final.bin"))?;
    }
    let last = traj.records.last().expect("at least one record");
    println!(
        "{} steps in {:.2?}; t = {}, mass drift {:.3e}, max clipped per step {:.3e}, H = {:.8}",
        traj.step_sizes.len(),
        started.elapsed(),
        last.t,
        traj.max_mass_drift,
        traj.max_step_clipped,
        last.entropy
    );
    println!("output in {}", dir.display());
    Ok(())
}

/// Outcome of one invariant check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

fn check(name: &str, value: f64, pass: bool) -> Check {
    Check {
        name: name.into(),
        value,
        pass: pass && value.is_finite(),
    }
}

/// Invariants that must hold for any admissible density.
pub fn verify_field(f: &ScalarField, tables: &KernelTables, q: f64) -> CliResult<Vec<Check>> {
    let spectrum = DensitySpectrum::new(f, tables)?;
    let abar = spectrum.abar();
    let (cbar, _) = spectrum.cbar_and_power();
    let (m, _, e) = conserved_quantities(f);
    let d = if f.grid().n() <= 16 {
        entropy_production(f, tables)?
    } else {
        entropy_production_spectral(f, tables)?
    };
    let qf = collision_operator(f, tables)?;
    let scale = f.values().iter().fold(0.0_f64, |a, x| a.max(x.abs())) * f.grid().half_width().powi(3);
    let sum_q = integrate(&qf);
    let h = entropy(f);
    Ok(vec![
        check("min f ≥ 0", f.min(), f.min() >= 0.0),
        check("mass > 0", m, m > 0.0),
        check("energy ≥ 0", e, e >= 0.0),
        check("entropy finite", h, true),
        check("M_q finite", weighted_moment(f, q)?, true),
        check("D ≥ 0", d, d >= 0.0),
        check("C_coer ≥ 0", coercivity_constant(&abar, tables.gamma()), coercivity_constant(&abar, tables.gamma()) >= 0.0),
        check("max c̄ ≤ 0", cbar.max(), cbar.max() <= 0.0),
        check("|∫Q| ≤ 1e-12 scale", sum_q.abs(), sum_q.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)),
        check("min eig ā ≥ -1e-12 max eig", abar.min_eigenvalue(), abar.min_eigenvalue() >= -1e-12 * abar.max_eigenvalue()),
    ])
}

/// `verify`: invariant suite on a checkpoint. Returns whether all passed.
pub fn verify(checkpoint: &Path, ov: &Overrides) -> CliResult<bool> {
    set_threads(ov.threads);
    let (f, t, meta) = read_checkpoint(checkpoint)?;
    let mut config = match meta {
        Some(m) => m.config,
        None => SimulationConfig {
            n: f.grid().n(),
            half_width: f.grid().half_width(),
            ..SimulationConfig::default()
        },
    };
    if let Some(g) = ov.gamma {
        config.gamma = g;
    }
    let gamma = Gamma::new(config.gamma)?;
    let tables = load_or_build_tables(&ov.cache_dir(), *f.grid(), gamma)?;
    let checks = verify_field(&f, &tables, config.q())?;
    println!("checkpoint {} at t = {t}", checkpoint.display());
    for c in &checks {
        println!("{} {:<28} {:.6e}", if c.pass { "pass" } else { "FAIL" }, c.name, c.value);
    }
    Ok(checks.iter().all(|c| c.pass))
}

/// `experiment`: the theorem matrix, or the experiments listed in a JSON file.
pub fn experiment(ov: &Overrides, matrix: Option<&Path>) -> CliResult<Report> {
    let base = ov.resolve()?;
    set_threads(ov.threads);
    let experiments: Vec<Experiment> = match matrix {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => default_matrix(&base),
    };
    for e in &experiments {
        e.config.validate().map_err(|err| CliError::Config(format!("{}: {err}", e.name)))?;
    }
    let dir = out_dir(&base);
    create_dir(&dir)?;
    let cache = ov.cache_dir();
    let mut report = Report::default();
    for e in &experiments {
        let tables = load_or_build_tables(&cache, e.config.grid()?, e.config.gamma()?)?;
        let traj = run_with_tables(&e.config, &tables)?;
        write_series(&traj.records, &dir.join(format!("{}.csv", e.name)))?;
        report.rows.extend(evaluate(&e.name, &e.config, &traj)?);
        println!("{}: {} records", e.name, traj.records.len());
    }
    write_report(&report, &dir)?;
    Ok(report)
}

pub fn write_report(report: &Report, dir: &Path) -> CliResult<()> {
    create_dir(dir)?;
    write_json(report, &dir.join("report.json"))?;
    let md = dir.join("report.md");
    std::fs::write(&md, report.to_markdown()).map_err(|e| CliError::io(&md, e))
}

/// `tables`: build or load the kernel tables for the configured grid.
pub fn tables(ov: &Overrides) -> CliResult<PathBuf> {
    let config = ov.resolve()?;
    set_threads(ov.threads);
    let grid = config.grid()?;
    let gamma = config.gamma()?;
    let dir = ov.cache_dir();
    let started = Instant::now();
    load_or_build_tables(&dir, grid, gamma)?;
    let path = crate::store::kernel_cache_path(&dir, &grid, gamma);
    println!("tables for n = {}, L = {}, gamma = {} ready in {:.2?}: {}", grid.n(), grid.half_width(), gamma, started.elapsed(), path.display());
    Ok(path)
}
