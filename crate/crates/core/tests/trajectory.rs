use landau_core::diagnostics::{interaction_functional, j_gamma, ProductionMode};
use landau_core::harness::{evaluate, thm1_quantity, thm2_tracking};
use landau_core::integrator::{run_from, run_with_tables, InitialConditionSpec};
use landau_core::kernel::kernel_power;
use landau_core::{Gamma, InitialCondition, KernelTables, SimulationConfig, Trajectory, VelocityGrid};

fn short(n: usize, gamma: f64, t: f64, cadence: usize) -> (SimulationConfig, KernelTables, Trajectory) {
    let config = SimulationConfig {
        n,
        half_width: 5.0,
        gamma,
        final_time: t,
        cadence,
        checkpoint_times: vec![0.0, t / 2.0],
        ic: InitialConditionSpec::Preset("bimaxwellian".into()),
        ..SimulationConfig::default()
    };
    let tables = KernelTables::build(config.grid().unwrap(), config.gamma().unwrap()).unwrap();
    let traj = run_with_tables(&config, &tables).unwrap();
    (config, tables, traj)
}

#[test]
fn records_follow_the_cadence_and_end_at_final_time() {
    let (_, _, traj) = short(12, -1.0, 0.3, 3);
    let steps = traj.step_sizes.len();
    let times = traj.times();
    assert_eq!(times[0], 0.0);
    assert_eq!(traj.final_time(), 0.3);
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    let expected = steps / 3 + 1 + usize::from(steps % 3 != 0);
    assert_eq!(traj.records.len(), expected);
    assert!((traj.step_sizes.iter().sum::<f64>() - 0.3).abs() < 1e-12);
    assert_eq!(traj.checkpoints.len(), 2);
    assert_eq!(traj.checkpoints[0].0, 0.0);
    assert!(traj.checkpoints[1].0 >= 0.15);
    assert!(traj.final_field.is_some());
}

#[test]
fn relaxation_conserves_mass_and_dissipates_entropy() {
    let (_, _, traj) = short(12, -2.0, 0.5, 1);
    assert!(traj.max_mass_drift <= 1e-12);
    let r = &traj.records;
    assert!(r.windows(2).all(|w| w[1].entropy <= w[0].entropy));
    assert!(r.iter().all(|x| x.entropy_production.unwrap() >= 0.0 && x.coercivity > 0.0));
    let m0 = r[0].mass;
    for x in r {
        assert!((x.mass - m0 - x.clipped_mass).abs() <= 1e-12 * m0);
        assert!(x.momentum.iter().all(|p| p.abs() < 1e-12));
    }
}

#[test]
fn restarting_from_a_snapshot_continues_the_run() {
    let (config, tables, whole) = short(8, -1.5, 0.2, 1);
    let (t_mid, f_mid) = whole.checkpoints[1].clone();
    let rest = SimulationConfig {
        final_time: 0.2 - t_mid,
        checkpoint_times: vec![],
        ..config
    };
    let tail = run_from(&rest, &tables, f_mid).unwrap();
    let a = whole.final_field.unwrap();
    let b = tail.final_field.unwrap();
    let scale = a.max();
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= 1e-6 * scale));
}

#[test]
fn interaction_matches_a_direct_double_sum() {
    let grid = VelocityGrid::new(8, 3.0).unwrap();
    let gamma = Gamma::new(-1.0).unwrap();
    let tables = KernelTables::build(grid, gamma).unwrap();
    let f = InitialCondition::preset("anisotropic").unwrap().sample(&grid).unwrap();
    let w = grid.cell_volume();
    let fv = f.values();
    let mut direct = 0.0;
    for p in 0..grid.len() {
        for q in 0..grid.len() {
            let k: [i64; 3] = std::array::from_fn(|i| grid.ijk(p)[i] as i64 - grid.ijk(q)[i] as i64);
            direct += fv[p] * fv[q] * tables.at(landau_core::kernel::Component::Power, k) * w * w;
        }
    }
    let got = interaction_functional(&f, &tables).unwrap();
    assert!((got - direct).abs() <= 1e-12 * direct);
    // |z|^-1 is harmonic, so away from the origin its cell average is close to the centre value
    let k = [3, 1, 0];
    let centre = kernel_power(std::array::from_fn(|i| k[i] as f64 * grid.dv()), gamma).unwrap();
    assert!((tables.at(landau_core::kernel::Component::Power, k) - centre).abs() < 1e-3 * centre);
    assert!(j_gamma(&f, &tables).unwrap() > 0.0);
}

#[test]
fn harness_quantities_on_a_short_run() {
    let (config, _, traj) = short(12, -1.5, 0.4, 2);
    let q = thm1_quantity(&traj, 0.5).unwrap();
    assert!(q.is_finite() && q > 0.0);
    let fit = thm2_tracking(&traj, 2.0).unwrap();
    assert!(fit.bounded && fit.max_norm.is_finite());
    let rows = evaluate("short", &config, &traj).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.run == "short" && !r.statement.is_empty()));
}

#[test]
fn production_can_be_switched_off() {
    let config = SimulationConfig {
        n: 8,
        half_width: 4.0,
        final_time: 0.05,
        entropy_production: ProductionMode::Off,
        ..SimulationConfig::default()
    };
    let traj = landau_core::integrator::run(&config).unwrap();
    assert!(traj.records.iter().all(|r| r.entropy_production.is_none()));
}
