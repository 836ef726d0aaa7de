//! Acceptance suite: one test per gate criterion, each printing a pass/fail
//! line (visible with `cargo test -- --nocapture`).

use lagns_cli::config::ExperimentConfig;
use lagns_cli::experiments::{run_decay, run_linear_check, run_stability, run_visco_limit};
use lagns_core::model::{ModelParams, PressureLaw, ViscosityLaw};
use lagns_core::propagator::{propagate_field, LinearParams};
use lagns_core::solver::{
    lyapunov_monitor, picard_sequence, simulate, Scheme, SolverConfig,
};
use lagns_core::transforms::{effective_velocity, to_eulerian, to_lagrangian, EulerianState};
use lagns_core::{bony_decompose, DyadicFilterBank, FluidState, SpectralField};
use std::f64::consts::PI;
use std::time::Instant;

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[test]
fn criterion_1_linear_oracle_equivalence() {
    let start = Instant::now();
    let cfg = ExperimentConfig::from_toml_str(include_str!("../../../configs/linear_check.toml")).unwrap();
    let (report, _) = run_linear_check(&cfg).unwrap();
    let timed = start.elapsed().as_secs_f64();
    let pass = report.samples >= 200
        && report.max_rel_err <= 1e-10
        && report.max_trace_resid <= 1e-12
        && report.max_det_resid <= 1e-12
        && timed < 10.0;
    println!(
        "[{}] criterion 1: linear oracle equivalence ({} samples, rel err {:.2e}, \
         trace {:.2e}, det {:.2e}, {:.2}s)",
        verdict(pass),
        report.samples,
        report.max_rel_err,
        report.max_trace_resid,
        report.max_det_resid,
        timed
    );
    assert!(pass);
}

#[test]
fn criterion_2_nonlinear_solver_degeneration() {
    let start = Instant::now();
    let n = 1024;
    let l = 64.0 * PI;
    let params = ModelParams::normalize(
        PressureLaw::Affine { slope: 1.0 },
        ViscosityLaw::ConstantLagrangian { nu: 1.0 },
        1.0,
    )
    .unwrap();
    let (lo, hi) = DyadicFilterBank::suggest_range(n, l);
    let bank = DyadicFilterBank::build(n, l, lo, hi).unwrap();
    let a0 = SpectralField::from_fn(n, l, |y| {
        0.05 * (2.0 * PI * 3.0 * y / l).sin() + 0.02 * (2.0 * PI * 17.0 * y / l).cos()
    });
    let v0 = SpectralField::from_fn(n, l, |y| 0.04 * (2.0 * PI * 8.0 * y / l).cos());
    let cfg = SolverConfig {
        snapshot_stride: 100,
        ..SolverConfig::new(0.01, 5.0, Scheme::Etd2)
    };
    let traj = simulate(&a0, &v0, &params, &cfg, &bank).unwrap();
    let init = FluidState::new(a0, v0, 0.0);
    let lin = LinearParams::normalized_lagrangian();
    let mut max_diff: f64 = 0.0;
    for st in &traj.states {
        let exact = propagate_field(&init, st.time, &lin).unwrap();
        max_diff = max_diff.max(st.max_abs_diff(&exact));
    }
    let timed = start.elapsed().as_secs_f64();
    let pass = max_diff <= 1e-12 && timed < 30.0;
    println!(
        "[{}] criterion 2: g = 0 solver degenerates to the exact propagator \
         (max diff {max_diff:.2e}, {timed:.2}s)",
        verdict(pass)
    );
    assert!(pass);
}

fn decay_run() -> (lagns_cli::experiments::DecayReport, f64) {
    let cfg = ExperimentConfig::from_toml_str(include_str!("../../../configs/decay.toml")).unwrap();
    let start = Instant::now();
    let (report, _) = run_decay(&cfg).unwrap();
    (report, start.elapsed().as_secs_f64())
}

#[test]
fn criterion_3_heat_rate_decay() {
    let (report, timed) = decay_run();
    let fit = report.l2_fit.as_ref().expect("decay run has signal");
    let heat = report.heat_control_fit.as_ref().expect("control run has signal");
    let pass =
        (fit.exponent + 0.5).abs() <= 0.1 && (heat.exponent + 0.5).abs() <= 0.1 && timed < 600.0;
    println!(
        "[{}] criterion 3: L2 decay slope {:.4} within -0.5 +- 0.1 \
         (heat control {:.4}, D/X20 = {:.3}, {timed:.1}s)",
        verdict(pass),
        fit.exponent,
        heat.exponent,
        report.d_over_x20
    );
    assert!(pass);
}

#[test]
fn criterion_4_high_frequency_decay() {
    let (report, _) = decay_run();
    let fit = report.high_freq_fit.as_ref().expect("decay run has signal");
    let pass = fit.exponent <= -1.4 && report.d_high_a_plateau_ratio <= 1.1;
    println!(
        "[{}] criterion 4: high-frequency slope {:.3} <= -1.4, D^h_a plateau ratio {:.4}",
        verdict(pass),
        fit.exponent,
        report.d_high_a_plateau_ratio
    );
    assert!(pass);
}

#[test]
fn criterion_5_diffusive_limit() {
    let start = Instant::now();
    let cfg = ExperimentConfig::from_toml_str(include_str!("../../../configs/visco_limit.toml")).unwrap();
    let (report, _) = run_visco_limit(&cfg).unwrap();
    let timed = start.elapsed().as_secs_f64();
    let pass = report.error_fit.exponent <= -0.25 && report.gaps_decreasing && timed < 1200.0;
    println!(
        "[{}] criterion 5: diffusive-limit slope {:.3} <= -0.25 (bound {:.2}), \
         flux gap decreasing: {} ({:.1}s)",
        verdict(pass),
        report.error_fit.exponent,
        report.theoretical_exponent,
        report.gaps_decreasing,
        timed
    );
    assert!(pass);
    assert!(report.errors_decreasing, "sup errors must decrease along the sweep");
}

#[test]
fn criterion_6_property_suites() {
    let start = Instant::now();
    let n = 512;
    let l = 32.0 * PI;
    let (lo, hi) = DyadicFilterBank::suggest_range(n, l);
    let bank = DyadicFilterBank::build(n, l, lo, hi).unwrap();

    // partition of unity on the resolved band
    let partition_ok = bank.partition_residual() < 1e-12;

    // Bony reconstruction on a band-limited mean-zero pair
    let f = SpectralField::from_fn(n, l, |y| 0.4 * (0.25 * y).sin() + 0.2 * (2.0 * y).cos());
    let g = SpectralField::from_fn(n, l, |y| 0.3 * (0.5 * y).cos() + 0.1 * (4.0 * y).sin());
    let (tfg, tgf, r) = bony_decompose(&f, &g, &bank);
    let bony_ok = tfg.add(&tgf).add(&r).max_abs_diff(&f.mul_dealiased(&g)) < 1e-10;

    // coordinate-transform round trip (fine grid: the map interpolant is
    // third order, so 1024 points are needed for the 1e-8 target)
    let nt = 1024;
    let state = EulerianState::new(
        SpectralField::from_fn(nt, 2.0 * PI, |x| 1.4 + 0.25 * x.sin() + 0.08 * (3.0 * x).cos()),
        SpectralField::from_fn(nt, 2.0 * PI, |x| 0.1 * (2.0 * x).cos()),
    )
    .unwrap();
    let (eta, v, _) = to_lagrangian(&state, nt).unwrap();
    let (back, _) = to_eulerian(&eta, &v, nt).unwrap();
    let sample_diff = |a: &SpectralField, b: &SpectralField| {
        a.samples()
            .iter()
            .zip(b.samples())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let coord_roundtrip = sample_diff(&back.rho, &state.rho) < 1e-8
        && sample_diff(&back.u, &state.u) < 1e-8;

    // rescaling round trips
    let rs_params = ModelParams::normalize(
        PressureLaw::Affine { slope: 4.0 },
        ViscosityLaw::ConstantLagrangian { nu: 2.0 },
        1.0,
    )
    .unwrap();
    let rs_state = FluidState::new(
        SpectralField::from_fn(n, l, |y| 0.05 * (0.5 * y).sin()),
        SpectralField::from_fn(n, l, |y| 0.03 * (0.25 * y).cos()),
        0.7,
    );
    use lagns_core::transforms::{diffusive_rescale, rescale_normalize, Direction};
    let rs_back = rescale_normalize(
        &rescale_normalize(&rs_state, &rs_params, Direction::Forward),
        &rs_params,
        Direction::Backward,
    );
    let df_back = diffusive_rescale(
        &diffusive_rescale(&rs_state, 8.0, Direction::Forward),
        8.0,
        Direction::Backward,
    );
    let roundtrip_ok = coord_roundtrip
        && rs_back.max_abs_diff(&rs_state) < 1e-12
        && (rs_back.time - rs_state.time).abs() < 1e-12
        && df_back.max_abs_diff(&rs_state) < 1e-12;

    // mean conservation along a nonlinear run
    let params = ModelParams::normalize(
        PressureLaw::gamma_with_ma(1.4, 1.0, 1.0),
        ViscosityLaw::ConstantEulerian { mu_bar: 1.0 },
        1.0,
    )
    .unwrap();
    let a0 = SpectralField::from_fn(n, l, |y| 0.03 * (0.25 * y).sin() + 0.02 * (1.5 * y).cos());
    let v0 = SpectralField::from_fn(n, l, |y| 0.2 + 0.02 * (0.5 * y).cos());
    let cfg = SolverConfig {
        snapshot_stride: 50,
        ..SolverConfig::new(0.02, 2.0, Scheme::Etd2)
    };
    let traj = simulate(&a0, &v0, &params, &cfg, &bank).unwrap();
    let means_ok = traj.terminal().a.mean().abs() < 1e-13
        && (traj.terminal().v.mean() - 0.2).abs() < 1e-13;

    // semigroup property of the exact flow
    let lin = LinearParams::normalized_lagrangian();
    let init = FluidState::new(a0.clone(), v0.clone(), 0.0);
    let one = propagate_field(&init, 1.3, &lin).unwrap();
    let two = propagate_field(&propagate_field(&init, 0.8, &lin).unwrap(), 0.5, &lin).unwrap();
    let semigroup_ok = one.max_abs_diff(&two) < 1e-12;

    // effective velocity: d_y w - d_y v = a exactly on the discrete modes
    let w = effective_velocity(&a0, &v0).unwrap();
    let hf3_ok = w.derivative().sub(&v0.derivative()).sub(&a0).max_abs() < 1e-12;

    // Picard contraction on one small-data instance
    let pic_cfg = SolverConfig::new(0.05, 1.5, Scheme::Etd2);
    let pic = picard_sequence(&a0, &SpectralField::zero(n, l), 5, &params, &pic_cfg, &bank).unwrap();
    let picard_ok = pic
        .differences
        .windows(2)
        .all(|w| w[1] < w[0] || w[0] < 1e-14);

    // stability ratios
    let stab_cfg =
        ExperimentConfig::from_toml_str(include_str!("../../../configs/stability.toml")).unwrap();
    let (stab, _) = run_stability(&stab_cfg).unwrap();

    let timed = start.elapsed().as_secs_f64();
    let pass = partition_ok
        && bony_ok
        && roundtrip_ok
        && means_ok
        && semigroup_ok
        && hf3_ok
        && picard_ok
        && stab.pass
        && timed < 300.0;
    println!(
        "[{}] criterion 6: property suites (partition {}, bony {}, roundtrip {}, means {}, \
         semigroup {}, hf3 {}, picard {}, stability ratios {:?}, {:.1}s)",
        verdict(pass),
        partition_ok,
        bony_ok,
        roundtrip_ok,
        means_ok,
        semigroup_ok,
        hf3_ok,
        picard_ok,
        stab.ratios,
        timed
    );
    assert!(pass);
}

#[test]
fn criterion_7_lyapunov_monitor() {
    let n = 512;
    let l = 32.0 * PI;
    let (lo, hi) = DyadicFilterBank::suggest_range(n, l);
    let bank = DyadicFilterBank::build(n, l, lo, hi).unwrap();
    let params = ModelParams::normalize(
        PressureLaw::Affine { slope: 1.0 },
        ViscosityLaw::ConstantLagrangian { nu: 1.0 },
        1.0,
    )
    .unwrap();
    // modes populating every ring up to j0 = 0
    let a0 = SpectralField::from_fn(n, l, |y| {
        0.02 * (0.125 * y).sin()
            + 0.02 * (0.1875 * y).cos()
            + 0.02 * (0.375 * y).sin()
            + 0.02 * (0.75 * y).cos()
            + 0.02 * (1.5 * y).sin()
    });
    let v0 = SpectralField::from_fn(n, l, |y| 0.02 * (0.25 * y).cos());
    let cfg = SolverConfig {
        snapshot_stride: 10,
        ..SolverConfig::new(0.02, 4.0, Scheme::Etd2)
    };
    let traj = simulate(&a0, &v0, &params, &cfg, &bank).unwrap();

    let j0 = 0;
    let kappa = 0.15;
    let mut pass = true;
    let mut details = Vec::new();
    for j in bank.j_min()..=j0 {
        let rep = lyapunov_monitor(&traj, j, j0, kappa, &bank).unwrap();
        let eq_ok = rep.equivalence_ratios.iter().all(|r| (0.5..=1.5).contains(r));
        pass &= rep.monotone && eq_ok;
        details.push(format!(
            "j={j}: monotone {}, rate {:.3}, equiv in [1/2,3/2]: {}",
            rep.monotone, rep.measured_rate, eq_ok
        ));
    }
    println!(
        "[{}] criterion 7: Lyapunov monitor on g = 0 run ({})",
        verdict(pass),
        details.join("; ")
    );
    assert!(pass);
}
