//! Theorem-level quantities along trajectories, growth fits against the
//! analytic envelopes, and the experiment report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{centered_derivative, DiagnosticsRecord};
use crate::error::{check_range, LandauError, Result};
use crate::integrator::{run, SimulationConfig, Trajectory};
use crate::kernel::Gamma;

/// Version of the report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Slack on the stepwise moment inequality.
pub const MOMENT_STEP_SLACK: f64 = 0.10;

/// `α = 2(3−ε)/(3(2−ε))`.
pub fn alpha(epsilon: f64) -> f64 {
    2.0 * (3.0 - epsilon) / (3.0 * (2.0 - epsilon))
}

fn check_times(records: &[DiagnosticsRecord]) -> Result<()> {
    match records.windows(2).position(|w| !(w[1].t > w[0].t)) {
        Some(k) => Err(LandauError::NonMonotoneTime(k + 1)),
        None => Ok(()),
    }
}

fn lp_series(records: &[DiagnosticsRecord], p: f64) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            r.lp_norm(p).ok_or(LandauError::OutOfRange {
                field: "p",
                value: p,
                interval: "the recorded L^p exponents",
            })
        })
        .collect()
}

/// Running trapezoid integral of `‖f_t‖^α_{L^{3−ε}}`, one value per record.
pub fn thm1_cumulative(traj: &Trajectory, epsilon: f64) -> Result<Vec<(f64, f64)>> {
    check_range("epsilon", epsilon, "(0, 1)", epsilon > 0.0 && epsilon < 1.0)?;
    let records = &traj.records;
    if records.is_empty() {
        return Err(LandauError::InsufficientRecords { needed: 1, got: 0 });
    }
    check_times(records)?;
    let a = alpha(epsilon);
    let vals: Vec<f64> = lp_series(records, 3.0 - epsilon)?.iter().map(|x| x.powf(a)).collect();
    let mut acc = 0.0;
    let mut out = vec![(records[0].t, 0.0)];
    for k in 1..records.len() {
        acc += 0.5 * (vals[k] + vals[k - 1]) * (records[k].t - records[k - 1].t);
        out.push((records[k].t, acc));
    }
    Ok(out)
}

/// `∫₀^T ‖f_t‖^α_{L^{3−ε}} dt` by the trapezoid rule; zero for a single record.
pub fn thm1_quantity(traj: &Trajectory, epsilon: f64) -> Result<f64> {
    Ok(thm1_cumulative(traj, epsilon)?.last().map_or(0.0, |x| x.1))
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Log-log slope of `∫₀^T ‖f_t‖^α dt` against `1 + T` over the second half of the run.
pub fn thm1_growth_slope(traj: &Trajectory, epsilon: f64) -> Result<f64> {
    let cum = thm1_cumulative(traj, epsilon)?;
    let t_end = cum.last().map_or(0.0, |x| x.0);
    let tail: Vec<&(f64, f64)> = cum.iter().filter(|(t, q)| *t >= 0.5 * t_end && *q > 0.0).collect();
    if tail.len() < 2 {
        return Err(LandauError::InsufficientRecords { needed: 2, got: tail.len() });
    }
    let x: Vec<f64> = tail.iter().map(|(t, _)| (1.0 + t).ln()).collect();
    let y: Vec<f64> = tail.iter().map(|(_, q)| q.ln()).collect();
    Ok(ls_slope(&x, &y))
}

/// Growth envelope of the time-integrated norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum EnvelopeForm {
    /// `(1+T)^exponent`.
    Polynomial { exponent: f64 },
    /// `exp(C T^z)`.
    StretchedExponential { z: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub form: EnvelopeForm,
    /// Set when `ε` violates `0 < ε < 3(2+γ)/(3+γ)`.
    pub warning: Option<String>,
}

impl Envelope {
    /// Envelope value at `T` with unit constants.
    pub fn value(&self, t: f64) -> f64 {
        match self.form {
            EnvelopeForm::Polynomial { exponent } => (1.0 + t).powf(exponent),
            EnvelopeForm::StretchedExponential { z } => t.powf(z).exp(),
        }
    }
}

/// Envelope of `∫₀^T ‖f_t‖^α_{L^{3−ε}} dt` for the given parameters.
pub fn thm1_envelope(gamma: f64, epsilon: f64, s: f64) -> Result<Envelope> {
    let gamma = Gamma::new(gamma)?.value();
    check_range("epsilon", epsilon, "(0, 1)", epsilon > 0.0 && epsilon < 1.0)?;
    check_range("s", s, "(0, ∞)", s > 0.0)?;
    if gamma == -2.0 {
        let z = (3.0 - epsilon) * (3.0 * (2.0 + s) * (2.0 - epsilon) - 2.0 * epsilon) / (3.0 * (1.0 - epsilon));
        return Ok(Envelope {
            form: EnvelopeForm::StretchedExponential { z },
            warning: None,
        });
    }
    let exponent = 1.0 + 2.0 * epsilon * (3.0 + epsilon) / (3.0 * (2.0 - epsilon) * (2.0 + gamma));
    let limit = 3.0 * (2.0 + gamma) / (3.0 + gamma);
    let warning = (epsilon >= limit).then(|| {
        let msg = format!("epsilon = {epsilon} is not below 3(2+γ)/(3+γ) = {limit} for γ = {gamma}");
        log::warn!("{msg}");
        msg
    });
    Ok(Envelope {
        form: EnvelopeForm::Polynomial { exponent },
        warning,
    })
}

/// Exponential growth fit of `‖f_t‖^p_{L^p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Slope of the log running maximum against `t`.
    pub rate: f64,
    /// All recorded norms finite.
    pub bounded: bool,
    pub max_norm: f64,
}

pub fn thm2_tracking(traj: &Trajectory, p: f64) -> Result<GrowthFit> {
    check_range("p", p, "(1, ∞)", p > 1.0)?;
    let records = &traj.records;
    if records.len() < 2 {
        return Err(LandauError::InsufficientRecords { needed: 2, got: records.len() });
    }
    check_times(records)?;
    let norms: Vec<f64> = lp_series(records, p)?.iter().map(|x| x.powf(p)).collect();
    let bounded = norms.iter().all(|x| x.is_finite());
    let mut running = f64::NEG_INFINITY;
    let logs: Vec<f64> = norms
        .iter()
        .map(|&x| {
            running = running.max(x);
            running.ln()
        })
        .collect();
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    Ok(GrowthFit {
        rate: ls_slope(&t, &logs),
        bounded,
        max_norm: running,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentFit {
    pub s: f64,
    /// Log-log slope of `M_s` against `1 + t` over the second half of the run.
    pub exponent: f64,
    /// Largest `ΔM_s / (s(s−2) M₁ M_{s−3} Δt)` over steps with `ΔM_s > 0`;
    /// present at `γ = −2` when `M₁` and `M_{s−3}` were recorded.
    pub worst_step_ratio: Option<f64>,
}

impl MomentFit {
    pub fn stepwise_holds(&self) -> Option<bool> {
        self.worst_step_ratio.map(|r| r <= 1.0 + MOMENT_STEP_SLACK)
    }
}

pub fn moment_growth_fit(traj: &Trajectory, s: f64, gamma: f64) -> Result<MomentFit> {
    check_range("s", s, "(2, ∞)", s > 2.0)?;
    let gamma = Gamma::new(gamma)?;
    let records = &traj.records;
    if records.len() < 2 {
        return Err(LandauError::InsufficientRecords { needed: 2, got: records.len() });
    }
    check_times(records)?;
    let ms: Vec<f64> = records
        .iter()
        .map(|r| {
            r.moment(s).ok_or(LandauError::OutOfRange {
                field: "s",
                value: s,
                interval: "the recorded moment orders",
            })
        })
        .collect::<Result<_>>()?;
    let t_end = records.last().map_or(0.0, |r| r.t);
    let (x, y): (Vec<f64>, Vec<f64>) = records
        .iter()
        .zip(&ms)
        .filter(|(r, _)| r.t >= 0.5 * t_end)
        .map(|(r, m)| ((1.0 + r.t).ln(), m.ln()))
        .unzip();
    let exponent = if x.len() >= 2 { ls_slope(&x, &y) } else { 0.0 };
    let worst_step_ratio = if gamma.is_critical() {
        let lower: Option<Vec<(f64, f64)>> = records
            .iter()
            .map(|r| Some((r.moment(1.0)?, r.moment(s - 3.0)?)))
            .collect();
        lower.map(|lower| {
            (1..records.len())
                .filter(|&k| ms[k] > ms[k - 1])
                .map(|k| {
                    let dt = records[k].t - records[k - 1].t;
                    let (m1, m3) = lower[k - 1];
                    (ms[k] - ms[k - 1]) / (s * (s - 2.0) * m1 * m3 * dt)
                })
                .fold(0.0, f64::max)
        })
    } else {
        None
    };
    Ok(MomentFit {
        s,
        exponent,
        worst_step_ratio,
    })
}

/// Largest `|dH/dt + D| / max(|dH/dt|, D)` over interior records, with
/// `dH/dt` from centred differences of consecutive records.
pub fn entropy_identity_error(records: &[DiagnosticsRecord]) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for w in records.windows(3) {
        let d = w[1].entropy_production?;
        let dh = centered_derivative([w[0].t, w[1].t, w[2].t], [w[0].entropy, w[1].entropy, w[2].entropy]);
        let scale = dh.abs().max(d);
        if scale > 0.0 {
            let e = (dh + d).abs() / scale;
            worst = Some(worst.map_or(e, |m: f64| m.max(e)));
        }
    }
    worst
}

/// Largest entropy increase between consecutive records (zero if none).
pub fn max_entropy_increase(records: &[DiagnosticsRecord]) -> f64 {
    records
        .windows(2)
        .map(|w| w[1].entropy - w[0].entropy)
        .fold(0.0, f64::max)
}

/// One line of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Statement being checked.
    pub statement: String,
    /// Experiment the row belongs to.
    pub run: String,
    pub quantity: String,
    pub measured: f64,
    /// Bound the measurement is compared against, if any.
    pub bound: Option<f64>,
    /// `None` for rows that are reported without a pass/fail verdict.
    pub pass: Option<bool>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub rows: Vec<ReportRow>,
}

impl Default for Report {
    fn default() -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            rows: Vec::new(),
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "–".into(), |v| format!("{v:.6e}"))
}

impl Report {
    pub fn to_markdown(&self) -> String {
        let mut out = format!("# Landau experiment report\n\nschema version {}\n\n", self.schema_version);
        if self.rows.is_empty() {
            out.push_str("No experiments.\n");
            return out;
        }
        out.push_str("| statement | run | quantity | measured | bound | result | note |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let verdict = match r.pass {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "report",
            };
            out.push_str(&format!(
                "| {} | {} | {} | {:.6e} | {} | {} | {} |\n",
                r.statement,
                r.run,
                r.quantity,
                r.measured,
                fmt_opt(r.bound),
                verdict,
                r.note
            ));
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }
}

/// A named run of the experiment matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub config: SimulationConfig,
}

/// Default matrix: `γ ∈ {−2, −1.5, −1}` against two relaxing initial data.
pub fn default_matrix(base: &SimulationConfig) -> Vec<Experiment> {
    let mut out = Vec::new();
    for gamma in [-2.0, -1.5, -1.0] {
        for ic in ["bimaxwellian", "anisotropic"] {
            out.push(Experiment {
                name: format!("{ic}_g{gamma}"),
                config: SimulationConfig {
                    gamma,
                    ic: crate::integrator::InitialConditionSpec::Preset(ic.into()),
                    ..base.clone()
                },
            });
        }
    }
    out
}

fn row(statement: &str, run: &str, quantity: &str, measured: f64, bound: Option<f64>, pass: Option<bool>, note: &str) -> ReportRow {
    ReportRow {
        statement: statement.into(),
        run: run.into(),
        quantity: quantity.into(),
        measured,
        bound,
        pass,
        note: note.into(),
    }
}

/// Report rows for one finished run.
pub fn evaluate(name: &str, config: &SimulationConfig, traj: &Trajectory) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let records = &traj.records;
    let first = records.first().ok_or(LandauError::InsufficientRecords { needed: 1, got: 0 })?;
    rows.push(row(
        "mass conservation",
        name,
        "max relative mass drift before clipping",
        traj.max_mass_drift,
        Some(1e-12),
        Some(traj.max_mass_drift <= 1e-12),
        "",
    ));
    rows.push(row(
        "positivity",
        name,
        "max clipped mass per step / m0",
        traj.max_step_clipped,
        None,
        None,
        "clipping is reported, never renormalised",
    ));
    let e_drift = records.iter().map(|r| (r.energy - first.energy).abs()).fold(0.0, f64::max);
    rows.push(row("energy conservation", name, "max |e(t) − e(0)|", e_drift, None, None, ""));
    rows.push(row(
        "H-theorem",
        name,
        "max entropy increase between records",
        max_entropy_increase(records),
        None,
        None,
        "tolerance calibrated by refinement",
    ));
    let d_min = records.iter().filter_map(|r| r.entropy_production).fold(f64::INFINITY, f64::min);
    if d_min.is_finite() {
        rows.push(row("D ≥ 0", name, "min D", d_min, Some(0.0), Some(d_min >= 0.0), ""));
    }
    if let Some(err) = entropy_identity_error(records) {
        rows.push(row(
            "entropy identity dH/dt + D = 0",
            name,
            "max relative mismatch",
            err,
            Some(0.05),
            Some(err <= 0.05),
            "",
        ));
    }
    let coer_min = records.iter().map(|r| r.coercivity).fold(f64::INFINITY, f64::min);
    rows.push(row("coercivity", name, "min C_coer", coer_min, Some(0.0), Some(coer_min > 0.0), ""));
    if records.len() >= 2 {
        if records.iter().all(|r| r.moment(4.0).is_some()) {
            let fit = moment_growth_fit(traj, 4.0, config.gamma)?;
            let bound = if config.gamma == -2.0 { 2.0 / 3.0 } else { 1.0 };
            rows.push(row(
                "moment growth",
                name,
                "fitted exponent of M_4 against 1+t",
                fit.exponent,
                Some(bound + 0.15),
                Some(fit.exponent <= bound + 0.15),
                "",
            ));
            if let Some(ratio) = fit.worst_step_ratio {
                rows.push(row(
                    "stepwise moment inequality",
                    name,
                    "max ΔM_4 / (8 M_1 M_1 Δt)",
                    ratio,
                    Some(1.0 + MOMENT_STEP_SLACK),
                    fit.stepwise_holds(),
                    "",
                ));
            }
        }
        let q = thm1_quantity(traj, config.epsilon)?;
        rows.push(row(
            "Theorem 1",
            name,
            "∫ ‖f‖^α_{3−ε} dt",
            q,
            None,
            Some(q.is_finite()),
            "finite",
        ));
        let env = thm1_envelope(config.gamma, config.epsilon, config.s)?;
        match env.form {
            EnvelopeForm::Polynomial { exponent } => {
                if let Ok(slope) = thm1_growth_slope(traj, config.epsilon) {
                    rows.push(row(
                        "Theorem 1 envelope",
                        name,
                        "growth slope against 1+T",
                        slope,
                        Some(exponent + 0.2),
                        Some(slope <= exponent + 0.2),
                        env.warning.as_deref().unwrap_or(""),
                    ));
                }
            }
            EnvelopeForm::StretchedExponential { z } => {
                rows.push(row(
                    "Theorem 1 envelope",
                    name,
                    "stretched-exponential exponent z",
                    z,
                    None,
                    None,
                    "reported only",
                ));
            }
        }
        for p in [2.0, 3.0 - config.epsilon] {
            let fit = thm2_tracking(traj, p)?;
            rows.push(row(
                "Theorem 2",
                name,
                &format!("exponential rate of ‖f‖^p_p, p = {p}"),
                fit.rate,
                Some(0.05),
                Some(fit.bounded && fit.rate <= 0.05),
                "",
            ));
        }
    }
    Ok(rows)
}

/// Runs every experiment (in parallel) and assembles the report.
pub fn run_matrix(experiments: &[Experiment]) -> Result<(Report, Vec<Trajectory>)> {
    let results: Vec<(Vec<ReportRow>, Trajectory)> = experiments
        .par_iter()
        .map(|e| {
            let traj = run(&e.config)?;
            Ok((evaluate(&e.name, &e.config, &traj)?, traj))
        })
        .collect::<Result<_>>()?;
    let mut report = Report::default();
    let mut trajs = Vec::with_capacity(results.len());
    for (rows, traj) in results {
        report.rows.extend(rows);
        trajs.push(traj);
    }
    Ok((report, trajs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, lp: f64, m4: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            lp_norms: vec![(2.0, lp), (2.5, lp)],
            moments: vec![(1.0, 1.0), (4.0, m4)],
            ..DiagnosticsRecord::default()
        }
    }

    fn traj(records: Vec<DiagnosticsRecord>) -> Trajectory {
        Trajectory {
            records,
            ..Trajectory::default()
        }
    }

    #[test]
    fn envelope_examples() {
        let e = thm1_envelope(-1.0, 0.5, 1.0).unwrap();
        match e.form {
            EnvelopeForm::Polynomial { exponent } => assert!((exponent - 1.0 - 7.0 / 9.0).abs() < 1e-12),
            _ => panic!(),
        }
        assert!(e.warning.is_none());
        match thm1_envelope(-2.0, 0.5, 1.0).unwrap().form {
            EnvelopeForm::StretchedExponential { z } => assert!((z - 2.5 * 12.5 / 1.5).abs() < 1e-12),
            _ => panic!(),
        }
        assert!(thm1_envelope(-1.0, 1.0, 1.0).is_err());
        assert!(thm1_envelope(-1.0, 0.0, 1.0).is_err());
        assert!(thm1_envelope(-1.0, 0.5, 0.0).is_err());
        assert!(thm1_envelope(0.5, 0.5, 1.0).is_err());
        assert!(thm1_envelope(-1.9, 0.5, 1.0).unwrap().warning.is_some());
    }

    #[test]
    fn envelope_increasing_in_epsilon() {
        for gamma in [-1.9, -1.5, -1.0, -0.5] {
            let mut last = 0.0;
            for k in 1..100 {
                let eps = k as f64 / 100.0;
                let EnvelopeForm::Polynomial { exponent } = thm1_envelope(gamma, eps, 1.0).unwrap().form else {
                    panic!()
                };
                assert!(exponent > last);
                last = exponent;
            }
        }
    }

    #[test]
    fn thm1_constant_integrand() {
        let tr = traj((0..=20).map(|k| record(0.1 * k as f64, 0.3, 1.0)).collect());
        let q = thm1_quantity(&tr, 0.5).unwrap();
        let want = 2.0 * 0.3_f64.powf(alpha(0.5));
        assert!((q - want).abs() < 1e-12);
        assert_eq!(thm1_quantity(&traj(vec![record(0.0, 0.3, 1.0)]), 0.5).unwrap(), 0.0);
        assert!(thm1_quantity(&traj(vec![]), 0.5).is_err());
    }

    #[test]
    fn thm1_additive() {
        let tr = traj((0..=20).map(|k| record(0.1 * k as f64, 1.0 + (k as f64).sin(), 1.0)).collect());
        let whole = thm1_quantity(&tr, 0.5).unwrap();
        let a = thm1_quantity(&tr.window(0.0, 1.0), 0.5).unwrap();
        let b = thm1_quantity(&tr.window(1.0 - 1e-9, 2.0), 0.5).unwrap();
        assert!((whole - a - b).abs() < 1e-12);
    }

    #[test]
    fn thm2_constant_and_monotonicity() {
        let tr = traj((0..10).map(|k| record(k as f64, 0.5, 1.0)).collect());
        assert!(thm2_tracking(&tr, 2.0).unwrap().rate.abs() < 1e-12);
        let bad = traj(vec![record(0.0, 1.0, 1.0), record(0.0, 1.0, 1.0)]);
        assert_eq!(thm2_tracking(&bad, 2.0), Err(LandauError::NonMonotoneTime(1)));
    }

    #[test]
    fn moment_fit_recovers_power_law() {
        let tr = traj((0..40).map(|k| {
            let t = 0.25 * k as f64;
            record(t, 1.0, 3.0 * (1.0 + t).powf(0.5))
        }).collect());
        let fit = moment_growth_fit(&tr, 4.0, -1.0).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-12);
        assert!(fit.worst_step_ratio.is_none());
        assert!(moment_growth_fit(&tr, 2.0, -1.0).is_err());
    }

    #[test]
    fn empty_report_is_valid() {
        let r = Report::default();
        assert!(r.all_pass());
        assert!(r.to_markdown().contains("No experiments"));
    }
}
