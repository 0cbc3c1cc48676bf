//! Explicit SSP-RK2 time stepping of `∂_t f = Q(f, f)` under a parabolic
//! CFL restriction, with diagnostics recorded along the way.

use serde::{Deserialize, Serialize};

use crate::collision::{collision_from_coefficients, CrossStencil, DriftForm, FluxScheme};
use crate::convolution::DensitySpectrum;
use crate::diagnostics::{DiagnosticsPlan, DiagnosticsRecord, ProductionMode};
use crate::error::{check_range, LandauError, Result};
use crate::grid::{integrate, MatrixField, ScalarField, VectorField, VelocityGrid};
use crate::initial::InitialCondition;
use crate::kernel::{Gamma, KernelTables};
use crate::reduce::tree_sum;

/// Initial condition given either by preset name or in full.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialConditionSpec {
    Preset(String),
    Custom(InitialCondition),
}

impl InitialConditionSpec {
    pub fn resolve(&self) -> Result<InitialCondition> {
        match self {
            InitialConditionSpec::Preset(name) => InitialCondition::preset(name).ok_or_else(|| {
                LandauError::InvalidInitialCondition(format!(
                    "unknown preset '{name}' (expected one of {})",
                    InitialCondition::PRESETS.join(", ")
                ))
            }),
            InitialConditionSpec::Custom(ic) => Ok(ic.clone()),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub p: f64,
    pub s: f64,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "T")]
    pub final_time: f64,
    pub sigma: f64,
    /// Record diagnostics every `cadence` steps (and always at `t = 0` and `t = T`).
    pub cadence: usize,
    pub ic: InitialConditionSpec,
    pub out: Option<String>,
    /// Time step used when `ā ≡ 0`.
    pub fallback_dt: f64,
    pub moment_orders: Vec<f64>,
    pub entropy_production: ProductionMode,
    /// Keep `f_t` at the first record with `t ≥` each listed time.
    pub checkpoint_times: Vec<f64>,
    /// Keep `f_t` at every record.
    pub checkpoint_all: bool,
    pub drift: DriftForm,
    pub cross_stencil: CrossStencil,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            gamma: -2.0,
            epsilon: 0.5,
            p: 2.0,
            s: 1.0,
            n: 16,
            half_width: 5.0,
            final_time: 1.0,
            sigma: 0.5,
            cadence: 1,
            ic: InitialConditionSpec::Preset("maxwellian".into()),
            out: None,
            fallback_dt: 1e-3,
            moment_orders: vec![0.0, 1.0, 2.0, 4.0],
            entropy_production: ProductionMode::Auto,
            checkpoint_times: Vec::new(),
            checkpoint_all: false,
            drift: DriftForm::default(),
            cross_stencil: CrossStencil::default(),
        }
    }
}

impl SimulationConfig {
    /// Checks every range; errors name the field and its admissible interval.
    pub fn validate(&self) -> Result<()> {
        Gamma::new(self.gamma)?;
        check_range("epsilon", self.epsilon, "(0, 1)", self.epsilon > 0.0 && self.epsilon < 1.0)?;
        check_range("p", self.p, "(1, ∞)", self.p > 1.0)?;
        check_range("s", self.s, "(0, ∞)", self.s > 0.0)?;
        check_range("sigma", self.sigma, "(0, 1]", self.sigma > 0.0 && self.sigma <= 1.0)?;
        check_range("T", self.final_time, "[0, ∞)", self.final_time >= 0.0)?;
        check_range("fallback_dt", self.fallback_dt, "(0, ∞)", self.fallback_dt > 0.0)?;
        if self.cadence == 0 {
            return Err(LandauError::OutOfRange {
                field: "cadence",
                value: 0.0,
                interval: "{1, 2, ...}",
            });
        }
        for &s in &self.moment_orders {
            check_range("moment order", s, "[0, ∞)", s >= 0.0)?;
        }
        let ic = self.ic.resolve()?;
        ic.validate(&self.grid()?)
    }

    pub fn grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.n, self.half_width)
    }

    pub fn gamma(&self) -> Result<Gamma> {
        Gamma::new(self.gamma)
    }

    /// `α = 2(3−ε)/(3(2−ε))`.
    pub fn alpha(&self) -> f64 {
        2.0 * (3.0 - self.epsilon) / (3.0 * (2.0 - self.epsilon))
    }

    /// `q = −3(γ−s)(2−ε)/ε`.
    pub fn q(&self) -> f64 {
        -3.0 * (self.gamma - self.s) * (2.0 - self.epsilon) / self.epsilon
    }

    /// `{2, 3−ε, p}` without repeats.
    pub fn lp_exponents(&self) -> Vec<f64> {
        let mut out = vec![2.0];
        for p in [3.0 - self.epsilon, self.p] {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    pub fn scheme(&self) -> FluxScheme {
        FluxScheme {
            drift: self.drift,
            cross: self.cross_stencil,
        }
    }

    pub fn diagnostics_plan(&self) -> Result<DiagnosticsPlan> {
        Ok(DiagnosticsPlan {
            gamma: self.gamma()?,
            moment_orders: self.moment_orders.clone(),
            lp_exponents: self.lp_exponents(),
            q: self.q(),
            production: self.entropy_production,
        })
    }
}

/// `σ dv² / (6 λ_max)` with `λ_max` the largest eigenvalue of `ā` over the grid.
pub fn cfl_dt(abar: &MatrixField, sigma: f64, fallback: f64) -> f64 {
    let lambda = abar.max_eigenvalue();
    if lambda > 0.0 && lambda.is_finite() {
        let dv = abar.grid().dv();
        sigma * dv * dv / (6.0 * lambda)
    } else {
        fallback
    }
}

/// Result of one time step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub f: ScalarField,
    /// Mass added by zeroing negative values.
    pub clipped_mass: f64,
    /// Mass of the update before clipping.
    pub mass_before_clip: f64,
}

fn euler_stage(
    f: &ScalarField,
    abar: &MatrixField,
    bbar: Option<&VectorField>,
    dt: f64,
    cross: CrossStencil,
) -> (ScalarField, bool) {
    let q = collision_from_coefficients(f, abar, bbar, cross);
    let finite = q.is_finite();
    (f.combine(1.0, &q, dt), finite)
}

/// SSP-RK2 step whose first stage reuses coefficients of `f` already at hand.
#[allow(clippy::too_many_arguments)]
pub fn step_with_coefficients(
    f: &ScalarField,
    abar: &MatrixField,
    bbar: Option<&VectorField>,
    dt: f64,
    tables: &KernelTables,
    scheme: FluxScheme,
    step_index: usize,
    t: f64,
) -> Result<StepOutcome> {
    if dt == 0.0 {
        return Ok(StepOutcome {
            f: f.clone(),
            clipped_mass: 0.0,
            mass_before_clip: integrate(f),
        });
    }
    let (stage, ok) = euler_stage(f, abar, bbar, dt, scheme.cross);
    if !ok {
        return Err(LandauError::NonFinite { step: step_index, t });
    }
    let (a2, b2) = scheme.drift.coefficients(&DensitySpectrum::new(&stage, tables)?);
    let (second, ok) = euler_stage(&stage, &a2, b2.as_ref(), dt, scheme.cross);
    if !ok {
        return Err(LandauError::NonFinite { step: step_index, t });
    }
    let mut next: Vec<f64> = f
        .values()
        .iter()
        .zip(second.values())
        .map(|(x, y)| 0.5 * x + 0.5 * y)
        .collect();
    let w = f.grid().cell_volume();
    let mass_before_clip = tree_sum(0..next.len(), &|i| next[i]) * w;
    let clipped_mass = -tree_sum(0..next.len(), &|i| next[i].min(0.0)) * w;
    for x in next.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok(StepOutcome {
        f: ScalarField::from_values(*f.grid(), next)?,
        clipped_mass,
        mass_before_clip,
    })
}

/// `f_next = ½ f + ½ (f* + dt Q(f*))`, `f* = f + dt Q(f)`, then negatives set to 0.
pub fn step(f: &ScalarField, dt: f64, tables: &KernelTables, scheme: FluxScheme) -> Result<ScalarField> {
    if dt == 0.0 {
        return Ok(f.clone());
    }
    let (abar, bbar) = scheme.drift.coefficients(&DensitySpectrum::new(f, tables)?);
    Ok(step_with_coefficients(f, &abar, bbar.as_ref(), dt, tables, scheme, 0, 0.0)?.f)
}

/// Recorded output of a run.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    /// `(t, f_t)` snapshots.
    pub checkpoints: Vec<(f64, ScalarField)>,
    /// Size of every step taken.
    pub step_sizes: Vec<f64>,
    /// `max_k |m(f_k) before clipping − (m_0 + clipped so far)| / m_0`.
    pub max_mass_drift: f64,
    /// Largest mass clipped in a single step, relative to `m_0`.
    pub max_step_clipped: f64,
    /// Density at the final time.
    pub final_field: Option<ScalarField>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    /// Records with `t` in `[from, to]`.
    pub fn window(&self, from: f64, to: f64) -> Trajectory {
        Trajectory {
            records: self.records.iter().filter(|r| r.t >= from && r.t <= to).cloned().collect(),
            ..Trajectory::default()
        }
    }
}

/// Advances the configured initial condition to `T`.
pub fn run(config: &SimulationConfig) -> Result<Trajectory> {
    config.validate()?;
    let tables = KernelTables::build(config.grid()?, config.gamma()?)?;
    run_with_tables(config, &tables)
}

/// As [`run`] with prebuilt tables.
pub fn run_with_tables(config: &SimulationConfig, tables: &KernelTables) -> Result<Trajectory> {
    config.validate()?;
    let f0 = config.ic.resolve()?.sample(&config.grid()?)?;
    run_from(config, tables, f0)
}

/// Advances an arbitrary initial density to `T`.
pub fn run_from(config: &SimulationConfig, tables: &KernelTables, f0: ScalarField) -> Result<Trajectory> {
    let grid = config.grid()?;
    if !tables.matches(&grid) || f0.grid() != &grid || tables.gamma() != config.gamma()? {
        return Err(LandauError::GridMismatch);
    }
    let plan = config.diagnostics_plan()?;
    let m0 = integrate(&f0);
    let mut traj = Trajectory::default();
    let mut pending: Vec<f64> = config.checkpoint_times.clone();
    pending.sort_by(f64::total_cmp);
    let mut pending = pending.into_iter().peekable();

    let mut f = f0;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut clipped_total = 0.0;
    loop {
        let spectrum = DensitySpectrum::new(&f, tables)?;
        let (abar, bbar) = config.drift.coefficients(&spectrum);
        let done = t >= config.final_time;
        if steps.is_multiple_of(config.cadence) || done {
            traj.records
                .push(plan.evaluate(t, &f, &spectrum, &abar, tables, clipped_total)?);
            let mut keep = config.checkpoint_all;
            while pending.peek().is_some_and(|&c| c <= t) {
                pending.next();
                keep = true;
            }
            if keep {
                traj.checkpoints.push((t, f.clone()));
            }
        }
        if done {
            break;
        }
        let dt = cfl_dt(&abar, config.sigma, config.fallback_dt);
        let (dt, t_next) = if t + dt >= config.final_time {
            (config.final_time - t, config.final_time)
        } else {
            (dt, t + dt)
        };
        let out = step_with_coefficients(&f, &abar, bbar.as_ref(), dt, tables, config.scheme(), steps, t)?;
        if m0 > 0.0 {
            let drift = (out.mass_before_clip - (m0 + clipped_total)).abs() / m0;
            traj.max_mass_drift = traj.max_mass_drift.max(drift);
            traj.max_step_clipped = traj.max_step_clipped.max(out.clipped_mass / m0);
        }
        clipped_total += out.clipped_mass;
        traj.step_sizes.push(dt);
        f = out.f;
        t = t_next;
        steps += 1;
        if steps.is_multiple_of(200) {
            log::info!("step {steps}, t = {t:.4}, dt = {dt:.3e}");
        }
    }
    traj.final_field = Some(f);
    Ok(traj)
}
