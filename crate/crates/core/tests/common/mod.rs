//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use gaugesplit::expr::{parse, Expr};
use gaugesplit::model::{make_ode, Ivp, LinearOde};
use gaugesplit::solve::SolveConfig;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const CORPUS_SEED: u64 = 0x5eed_0001;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real_ivp(t1: f64, y0: &[f64], t_end: f64) -> Ivp {
    Ivp::new(t1, y0.iter().map(|&v| c(v, 0.0)).collect(), t_end).unwrap()
}

/// Tight companion settings used as the reference solution.
pub fn oracle_cfg() -> SolveConfig {
    SolveConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..SolveConfig::default()
    }
}

/// The three second-order test problems with their spans.
pub fn second_order_suite() -> Vec<(&'static str, LinearOde, f64, f64)> {
    vec![
        ("y''+y", make_ode(2, &["1", "0"], "0").unwrap(), 0.0, 10.0),
        ("y''+ty", make_ode(2, &["t", "0"], "0").unwrap(), 1.0, 10.0),
        (
            "y''+(1+0.3sin t)y",
            make_ode(2, &["1 + 0.3*sin(t)", "0"], "0").unwrap(),
            0.0,
            20.0,
        ),
    ]
}

fn random_const(rng: &mut StdRng) -> String {
    format!("{:.3}", rng.random_range(0.5..2.0))
}

/// Source text of a random expression in `t` that stays finite and smooth
/// on positive `t`: logarithms, roots and divisions only see arguments
/// bounded away from zero.
pub fn random_source(rng: &mut StdRng, depth: usize) -> String {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.6) {
            "t".into()
        } else {
            random_const(rng)
        };
    }
    let sub = |rng: &mut StdRng| random_source(rng, depth - 1);
    match rng.random_range(0..12) {
        0 => format!("({} + {})", sub(rng), sub(rng)),
        1 => format!("({} - {})", sub(rng), sub(rng)),
        2 => format!("({} * {})", sub(rng), sub(rng)),
        3 => format!("({} / (2 + sin({})))", sub(rng), sub(rng)),
        4 => format!("({} / (1 + ({})^2))", sub(rng), sub(rng)),
        5 => format!("sin({})", sub(rng)),
        6 => format!("cos({})", sub(rng)),
        7 => format!("exp(sin({}))", sub(rng)),
        8 => format!("sqrt(1 + ({})^2)", sub(rng)),
        9 => format!("ln(1 + ({})^2)", sub(rng)),
        10 => format!("({})^2", sub(rng)),
        _ => format!("-({})^3", sub(rng)),
    }
}

fn tame(e: &Expr, probes: &[f64]) -> bool {
    let d1 = e.differentiate();
    let d2 = d1.differentiate();
    probes.iter().all(|&t| {
        [e, &d1, &d2].iter().all(|f| {
            f.eval_real(t)
                .map(|v| v.re.is_finite() && v.im.is_finite() && v.norm() <= 1e4)
                .unwrap_or(false)
        })
    })
}

/// `count` random expressions of depth at most `max_depth`, keeping only
/// those whose value and first two derivatives stay below `1e4` on
/// `probes`, so that a centred difference is meaningful.
pub fn random_corpus(seed: u64, count: usize, max_depth: usize, probes: &[f64]) -> Vec<Expr> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let depth = rng.random_range(1..=max_depth);
        let e = parse(&random_source(&mut rng, depth)).expect("generator emits valid syntax");
        if tame(&e, probes) {
            out.push(e);
        }
    }
    out
}

/// Probe points drawn uniformly from `[0.5, 2]`.
pub fn random_probes(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0.5..2.0)).collect()
}

/// Worst `|e'(t) - FD(t)| / (1 + |e'(t)|)` over the probes with a centred
/// difference of step `h`.
pub fn fd_mismatch(e: &Expr, probes: &[f64], h: f64) -> f64 {
    let d = e.differentiate();
    probes
        .iter()
        .map(|&t| {
            let exact = d.eval_real(t).unwrap();
            let fd = (e.eval_real(t + h).unwrap() - e.eval_real(t - h).unwrap()) / (2.0 * h);
            (exact - fd).norm() / (1.0 + exact.norm())
        })
        .fold(0.0, f64::max)
}
