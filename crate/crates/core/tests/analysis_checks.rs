mod common;

use common::*;
use gaugesplit::analysis::{
    compare_component, phase_integral2, wkb2, wkb3_diagonal, wkb3_diagonal_path, wronskian_abel,
    Component,
};
use gaugesplit::gauges::*;
use gaugesplit::model::{make_ode, Ivp, LinearOde};
use gaugesplit::solve::{solve_companion, solve_split, SolveConfig, Trajectory};
use gaugesplit::transform::{reconstruct, split_initial, SplitState};

#[test]
fn abel_deviation_follows_the_tolerance() {
    let ode = make_ode(2, &["1 + 0.3*sin(t)", "0"], "0").unwrap();
    let ivp = real_ivp(0.0, &[1.0, 0.0], 20.0);
    let devs: Vec<f64> = [1e-6, 1e-8, 1e-10]
        .iter()
        .map(|&tol| {
            let sol = solve_split(
                &ode,
                &GaugeSpec::Riccati(RiccatiCfg::default()),
                &ivp,
                &SolveConfig::with_tolerances(tol, tol * 1e-2),
            )
            .unwrap();
            wronskian_abel(
                &sol.mode_trajectory(0),
                &sol.mode_trajectory(1),
                ode.coeff(1),
                0.0,
            )
            .unwrap()
            .norm_rel
        })
        .collect();
    assert!(
        devs[0] > 10.0 * devs[1] && devs[1] > 10.0 * devs[2],
        "{devs:?}"
    );
}

#[test]
fn abel_tracks_damping() {
    let ode = make_ode(2, &["2 + cos(t)", "0.3 + 0.1*t"], "0").unwrap();
    let ivp = real_ivp(0.0, &[1.0, 0.0], 8.0);
    let sol = solve_split(
        &ode,
        &GaugeSpec::Riccati(RiccatiCfg::default()),
        &ivp,
        &SolveConfig::default(),
    )
    .unwrap();
    let report = wronskian_abel(
        &sol.mode_trajectory(0),
        &sol.mode_trajectory(1),
        ode.coeff(1),
        0.0,
    )
    .unwrap();
    assert!(report.norm_rel < 1e-7, "{:e}", report.norm_rel);
}

fn diagonal_companion(ode: &LinearOde, ivp: &Ivp, cfg: &SolveConfig) -> Trajectory {
    let path = wkb3_diagonal_path(ode, ivp, cfg).unwrap();
    let mut prev = None;
    let states = path
        .times
        .iter()
        .zip(&path.states)
        .map(|(&t, parts)| {
            let roots = characteristic_roots(ode, t, prev.as_ref()).unwrap();
            let v = characteristic_values(&roots);
            prev = Some(roots);
            reconstruct(
                &v,
                &SplitState {
                    t,
                    parts: parts.clone(),
                },
            )
            .derivs
        })
        .collect();
    Trajectory::from_samples(path.times.clone(), states)
}

#[test]
fn diagonal_wkb_is_exact_for_constant_coefficients() {
    let ode = make_ode(3, &["-6", "11", "-6"], "1").unwrap();
    let ivp = real_ivp(0.0, &[1.0, -0.5, 0.25], 2.0);
    // Both sides are integrated; tight tolerances leave only the formula.
    let cfg = SolveConfig::with_tolerances(1e-12, 1e-14);
    let diag = diagonal_companion(&ode, &ivp, &cfg);
    let split = solve_split(&ode, &GaugeSpec::Characteristic, &ivp, &cfg).unwrap();
    let report = compare_component(&diag, &split.companion, 0).unwrap();
    assert!(report.norm_rel <= 1e-9, "{:e}", report.norm_rel);

    let point = wkb3_diagonal(&ode, &ivp, 2.0).unwrap();
    let last = diag.final_state()[0];
    assert!((point.iter().sum::<num_complex::Complex64>() - last).norm() <= 1e-9 * last.norm());
}

#[test]
fn diagonal_wkb_improves_as_coefficients_slow_down() {
    let devs: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&sigma| {
            let ode = make_ode(3, &["1", &format!("4 + sin(t/{sigma})"), "0"], "0").unwrap();
            let ivp = real_ivp(0.0, &[1.0, 0.0, 0.0], 10.0);
            let cfg = SolveConfig::default();
            let diag = diagonal_companion(&ode, &ivp, &cfg);
            let split = solve_split(&ode, &GaugeSpec::Characteristic, &ivp, &cfg).unwrap();
            compare_component(&diag, &split.companion, 0)
                .unwrap()
                .norm_rel
        })
        .collect();
    assert!(
        devs[0] > 1.5 * devs[1] && devs[1] > 1.5 * devs[2],
        "{devs:?}"
    );
}

#[test]
fn phase_integral_with_exact_q_solves_the_ode() {
    let ode = make_ode(2, &["4 + sin(t)", "0.2"], "0").unwrap();
    let ivp = real_ivp(0.0, &[1.0, 0.0], 8.0);
    let spec = GaugeSpec::PhaseIntegral(PhaseIntegralCfg {
        exact: true,
        ..Default::default()
    });
    let cfg = SolveConfig::with_tolerances(1e-11, 1e-13);
    let sol = solve_split(&ode, &spec, &ivp, &cfg).unwrap();
    let q = Component {
        trajectory: &sol.trajectory,
        index: 0,
    };
    let y12 = [sol.parts(0)[0], sol.parts(0)[1]];
    let oracle = solve_companion(&ode, &ivp, &oracle_cfg()).unwrap();
    let scale = oracle
        .states
        .iter()
        .map(|s| s[0].norm())
        .fold(0.0, f64::max);
    for t in [1.0, 3.0, 5.5, 8.0] {
        let y = phase_integral2(&ode, &q, 0.0, y12, t).unwrap();
        let r = oracle.interpolate(t).unwrap()[0];
        assert!((y[0] + y[1] - r).norm() <= 1e-7 * scale, "t = {t}");
    }
}

#[test]
fn phase_integral_reduces_to_wkb_for_leading_q() {
    let ode = make_ode(2, &["9*(1 + 0.1*t)^2", "0"], "0").unwrap();
    let q = default_q(&ode);
    let y12 = [c(0.3, 0.1), c(0.7, -0.2)];
    for t in [0.5, 2.0, 4.0] {
        let a = wkb2(&ode, 0.0, y12, t).unwrap();
        let b = phase_integral2(&ode, &q, 0.0, y12, t).unwrap();
        assert!((a[0] - b[0]).norm() < 1e-12 && (a[1] - b[1]).norm() < 1e-12);
    }
}

/// Sup-norm error of the two-branch WKB sum for `y(0) = 1, y'(0) = 0`.
fn wkb_sup_error(lambda: f64) -> f64 {
    let ode = make_ode(2, &[&format!("{lambda}^2*(1 + 0.1*t)^2"), "0"], "0").unwrap();
    let ivp = real_ivp(0.0, &[1.0, 0.0], 5.0);
    let oracle = solve_companion(
        &ode,
        &ivp,
        &SolveConfig {
            sample_count: 400,
            ..oracle_cfg()
        },
    )
    .unwrap();
    let values = phase_integral_gauge(&ode, None)
        .unwrap()
        .values(0.0)
        .unwrap();
    let y12 = split_initial(&values, &ivp.initial).unwrap().parts;
    oracle
        .times
        .iter()
        .zip(&oracle.states)
        .map(|(&t, s)| {
            let w = wkb2(&ode, 0.0, [y12[0], y12[1]], t).unwrap();
            (w[0] + w[1] - s[0]).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn wkb_sup_error_halves_per_doubling() {
    let errs: Vec<f64> = [4.0, 8.0, 16.0, 32.0]
        .iter()
        .map(|&l| wkb_sup_error(l))
        .collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((r - 2.0).abs() <= 0.5, "{errs:?}");
    }
}
