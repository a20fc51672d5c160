//! Closed-form asymptotics, the Abel check on Wronskians, and trajectory
//! comparison.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gauges::{characteristic_roots, characteristic_values, RootSet};
use crate::model::{Ivp, LinearOde};
use crate::solve::{integrate, quadrature, SolveConfig, Trajectory};
use crate::transform::split_initial;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Absolute target for the phase and amplitude integrals.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Floor of the relative-error denominator.
pub const REL_FLOOR: f64 = 1e-300;

/// A complex function of real `t`, given symbolically or by samples.
pub trait ScalarPath {
    fn value(&self, t: f64) -> Result<Complex64>;
}

impl ScalarPath for Expr {
    fn value(&self, t: f64) -> Result<Complex64> {
        self.eval_real(t)
    }
}

impl<F> ScalarPath for F
where
    F: Fn(f64) -> Result<Complex64>,
{
    fn value(&self, t: f64) -> Result<Complex64> {
        self(t)
    }
}

/// Component `index` of a trajectory, read through its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct Component<'a> {
    pub trajectory: &'a Trajectory,
    pub index: usize,
}

impl ScalarPath for Component<'_> {
    fn value(&self, t: f64) -> Result<Complex64> {
        self.trajectory
            .interpolate(t)
            .map(|s| s[self.index])
            .ok_or(Error::EmptyOverlap)
    }
}

fn integral(path: &dyn ScalarPath, a: f64, b: f64) -> Result<Complex64> {
    quadrature(|s| path.value(s), a, b, QUADRATURE_TOL)
}

/// `amplitude · exp(∫_{t1}^{t} g)`.
pub fn exp_solution(
    g: &dyn ScalarPath,
    t1: f64,
    t: f64,
    amplitude: Complex64,
) -> Result<Complex64> {
    Ok(amplitude * integral(g, t1, t)?.exp())
}

fn require_order(ode: &LinearOde, order: usize, what: &'static str) -> Result<()> {
    if ode.order() != order {
        return Err(Error::UnsupportedOrder {
            what,
            order: ode.order(),
        });
    }
    Ok(())
}

/// Leading-order WKB pair for `y'' + f_0 y = 0`:
/// `y_{1,2}(t1) (f_0(t1)/f_0(t))^{1/4} exp(±i∫√f_0)`.
pub fn wkb2(ode: &LinearOde, t1: f64, y12: [Complex64; 2], t: f64) -> Result<[Complex64; 2]> {
    require_order(ode, 2, "WKB approximation")?;
    if !ode.coeff(1).is_zero() {
        return Err(Error::InvalidArgument(
            "the WKB formula assumes f_1 = 0; use phase_integral2".into(),
        ));
    }
    let f0 = ode.coeff(0);
    let f0_at = |s: f64| -> Result<Complex64> {
        let v = f0.eval_real(s)?;
        if v == ZERO {
            return Err(Error::ZeroCoefficient { t: s });
        }
        Ok(v)
    };
    let ratio = f0_at(t1)? / f0_at(t)?;
    let phase = quadrature(|s| Ok(f0_at(s)?.sqrt()), t1, t, QUADRATURE_TOL)?;
    let amp = ratio.powf(0.25);
    Ok([
        y12[0] * amp * (I * phase).exp(),
        y12[1] * amp * (-I * phase).exp(),
    ])
}

/// Phase-integral pair
/// `y_{1,2}(t1) (q(t1)/q(t))^{1/2} exp(±i∫q - ½∫f_1)`.
pub fn phase_integral2(
    ode: &LinearOde,
    q: &dyn ScalarPath,
    t1: f64,
    y12: [Complex64; 2],
    t: f64,
) -> Result<[Complex64; 2]> {
    require_order(ode, 2, "phase-integral approximation")?;
    let q_at = |s: f64| -> Result<Complex64> {
        let v = q.value(s)?;
        if v == ZERO {
            return Err(Error::ZeroQ { t: s });
        }
        Ok(v)
    };
    let amp = (q_at(t1)? / q_at(t)?).sqrt();
    let phase = quadrature(q_at, t1, t, QUADRATURE_TOL)?;
    let damping = (-0.5 * integral(ode.coeff(1), t1, t)?).exp();
    Ok([
        y12[0] * amp * damping * (I * phase).exp(),
        y12[1] * amp * damping * (-I * phase).exp(),
    ])
}

/// Diagonal coefficient and forcing of part `k` in the three-part system
/// with the characteristic gauge, dropping the couplings between parts:
/// `y_k' = y_k [ρ_k - ρ_k' (1/(ρ_k-ρ_a) + 1/(ρ_k-ρ_b))] - f (ρ_b-ρ_a)/D`.
fn diagonal_terms(roots: &RootSet, f: Complex64) -> [(Complex64, Complex64); 3] {
    let r = &roots.roots;
    let d = (r[2] - r[0]) * (r[2] - r[1]) * (r[1] - r[0]);
    std::array::from_fn(|k| {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let rate = r[k] - roots.derivs[k] * (1.0 / (r[k] - r[a]) + 1.0 / (r[k] - r[b]));
        (rate, -f * (r[b] - r[a]) / d)
    })
}

/// Parts `y_1..y_3` of the WKB-truncated third-order system sampled like
/// any other trajectory. Each part solves its own scalar linear equation;
/// the state carries `φ_k = ∫ rate_k` and `w_k = ∫ forcing_k e^{-φ_k}` so
/// that `y_k = e^{φ_k} (y_k(t1) + w_k)`.
pub fn wkb3_diagonal_path(ode: &LinearOde, ivp: &Ivp, cfg: &SolveConfig) -> Result<Trajectory> {
    require_order(ode, 3, "diagonal WKB system")?;
    ivp.validate(ode)?;
    let t1 = ivp.t1();
    let start = characteristic_roots(ode, t1, None)?;
    let y0 = split_initial(&characteristic_values(&start), &ivp.initial)?.parts;

    let mut prev = start;
    let raw = integrate(
        |t, state, out| {
            let roots = characteristic_roots(ode, t, Some(&prev))?;
            let terms = diagonal_terms(&roots, ode.inhom_value(t)?);
            for (k, (rate, forcing)) in terms.into_iter().enumerate() {
                out[k] = rate;
                out[3 + k] = forcing * (-state[k]).exp();
            }
            prev = roots;
            Ok(())
        },
        (t1, ivp.t_end),
        &[ZERO; 6],
        cfg,
    )?;
    let states = raw
        .states
        .iter()
        .map(|s| (0..3).map(|k| s[k].exp() * (y0[k] + s[3 + k])).collect())
        .collect();
    Ok(Trajectory::from_samples(raw.times.clone(), states))
}

/// The diagonal WKB parts at a single time `t`.
pub fn wkb3_diagonal(ode: &LinearOde, ivp: &Ivp, t: f64) -> Result<[Complex64; 3]> {
    let target = Ivp::new(ivp.t1(), ivp.initial.derivs.clone(), t)?;
    let cfg = SolveConfig {
        sample_count: 2,
        ..SolveConfig::default()
    };
    let path = wkb3_diagonal_path(ode, &target, &cfg)?;
    let y = path.final_state();
    Ok([y[0], y[1], y[2]])
}

/// Deviation at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub t: f64,
    pub abs: f64,
    pub rel: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub max_abs: f64,
    pub max_rel: f64,
    /// Location of `max_abs`.
    pub t_of_max: f64,
    pub t_of_max_rel: f64,
    pub mean_abs: f64,
    pub mean_rel: f64,
    /// `max_abs / max |reference|`, the normwise relative deviation.
    pub norm_rel: f64,
    pub samples: Vec<ErrorSample>,
}

impl ErrorReport {
    pub fn from_samples(samples: Vec<ErrorSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyOverlap);
        }
        let mut r = ErrorReport {
            t_of_max: samples[0].t,
            t_of_max_rel: samples[0].t,
            ..ErrorReport::default()
        };
        let mut ref_max: f64 = 0.0;
        for s in &samples {
            if s.abs > r.max_abs {
                r.max_abs = s.abs;
                r.t_of_max = s.t;
            }
            if s.rel > r.max_rel {
                r.max_rel = s.rel;
                r.t_of_max_rel = s.t;
            }
            r.mean_abs += s.abs;
            r.mean_rel += s.rel;
            ref_max = ref_max.max(s.reference);
        }
        let n = samples.len() as f64;
        r.mean_abs /= n;
        r.mean_rel /= n;
        r.norm_rel = r.max_abs / ref_max.max(REL_FLOOR);
        r.samples = samples;
        Ok(r)
    }
}

fn sample(t: f64, got: Complex64, reference: Complex64) -> ErrorSample {
    let abs = (got - reference).norm();
    ErrorSample {
        t,
        abs,
        rel: abs / reference.norm().max(REL_FLOOR),
        reference: reference.norm(),
    }
}

/// Component `k` of `a` against `b`, with `b` interpolated onto `a`'s
/// samples inside the common span.
pub fn compare_component(a: &Trajectory, b: &Trajectory, k: usize) -> Result<ErrorReport> {
    let samples = a
        .times
        .iter()
        .zip(&a.states)
        .filter_map(|(&t, s)| b.interpolate(t).map(|r| sample(t, s[k], r[k])))
        .collect();
    ErrorReport::from_samples(samples)
}

/// All components at once: per sample, the largest deviation against the
/// largest reference magnitude.
pub fn compare(a: &Trajectory, b: &Trajectory) -> Result<ErrorReport> {
    if a.dim() != b.dim() {
        return Err(Error::LengthMismatch {
            what: "trajectory dimension",
            expected: b.dim(),
            got: a.dim(),
        });
    }
    let samples = a
        .times
        .iter()
        .zip(&a.states)
        .filter_map(|(&t, s)| {
            let r = b.interpolate(t)?;
            let abs = s
                .iter()
                .zip(&r)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            let reference = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
            Some(ErrorSample {
                t,
                abs,
                rel: abs / reference.max(REL_FLOOR),
                reference,
            })
        })
        .collect();
    ErrorReport::from_samples(samples)
}

/// Deviation of `W = y_1 y_2' - y_2 y_1'` from `W(t1) exp(-∫_{t1}^t f_1)`.
///
/// Both trajectories hold `(y, y', ...)` on the same grid.
pub fn wronskian_abel(y1: &Trajectory, y2: &Trajectory, f1: &Expr, t1: f64) -> Result<ErrorReport> {
    if y1.times != y2.times || y1.dim() < 2 || y2.dim() < 2 {
        return Err(Error::GridMismatch);
    }
    let w = |i: usize| {
        let (a, b) = (&y1.states[i], &y2.states[i]);
        a[0] * b[1] - b[0] * a[1]
    };
    let start = y1
        .times
        .iter()
        .position(|&t| t == t1)
        .ok_or(Error::GridMismatch)?;
    let w1 = w(start);
    let mut samples = Vec::with_capacity(y1.len());
    let mut acc = ZERO;
    let mut prev_t = t1;
    // Accumulate ∫f_1 panel by panel, outward from t1 on each side.
    let mut expected = vec![ZERO; y1.len()];
    #[allow(clippy::needless_range_loop)]
    for i in start..y1.len() {
        acc += integral(f1, prev_t, y1.times[i])?;
        prev_t = y1.times[i];
        expected[i] = w1 * (-acc).exp();
    }
    acc = ZERO;
    prev_t = t1;
    for i in (0..start).rev() {
        acc += integral(f1, prev_t, y1.times[i])?;
        prev_t = y1.times[i];
        expected[i] = w1 * (-acc).exp();
    }
    for (i, &t) in y1.times.iter().enumerate() {
        samples.push(sample(t, w(i), expected[i]));
    }
    ErrorReport::from_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::model::make_ode;
    use crate::solve::solve_companion;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wkb_constant_coefficient_is_exact() {
        let ode = make_ode(2, &["4", "0"], "0").unwrap();
        let [y1, y2] = wkb2(
            &ode,
            0.0,
            [c(1.0, 0.0), c(1.0, 0.0)],
            std::f64::consts::FRAC_PI_4,
        )
        .unwrap();
        assert!((y1 - I).norm() < 1e-12 && (y2 + I).norm() < 1e-12);
    }

    #[test]
    fn wkb_airy_amplitude_and_phase() {
        let ode = make_ode(2, &["t", "0"], "0").unwrap();
        let [y1, _] = wkb2(&ode, 1.0, [c(1.0, 0.0), ZERO], 4.0).unwrap();
        assert!((y1.norm() - 0.25f64.powf(0.25)).abs() < 1e-10);
        let phase = y1.arg();
        let want = (14.0f64 / 3.0 + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        assert!((phase - want).abs() < 1e-10);
    }

    #[test]
    fn wkb_turning_point() {
        let ode = make_ode(2, &["t - 1", "0"], "0").unwrap();
        assert!(matches!(
            wkb2(&ode, 0.0, [c(1.0, 0.0), ZERO], 1.0),
            Err(Error::ZeroCoefficient { t }) if t == 1.0
        ));
    }

    #[test]
    fn phase_integral_reduces_to_wkb() {
        let ode = make_ode(2, &["t^2 + 1", "0"], "0").unwrap();
        let q = parse("sqrt(t^2 + 1)").unwrap();
        let y12 = [c(0.3, 0.1), c(-0.2, 0.5)];
        let a = phase_integral2(&ode, &q, 0.5, y12, 3.0).unwrap();
        let b = wkb2(&ode, 0.5, y12, 3.0).unwrap();
        assert!((a[0] - b[0]).norm() < 1e-10 && (a[1] - b[1]).norm() < 1e-10);
    }

    #[test]
    fn phase_integral_damping() {
        let ode = make_ode(2, &["2", "2"], "0").unwrap();
        let q = Expr::one();
        let [y1, y2] = phase_integral2(&ode, &q, 0.0, [c(1.0, 0.0); 2], 1.0).unwrap();
        let e = (-1f64).exp();
        assert!((y1.norm() - e).abs() < 1e-12 && (y2.norm() - e).abs() < 1e-12);
    }

    #[test]
    fn exponentials() {
        let two = Expr::constant(2.0);
        let v = exp_solution(&two, 0.0, 1.0, c(1.0, 0.0)).unwrap();
        assert!((v.re - 2f64.exp()).abs() < 1e-9);
        let g = parse("3/t").unwrap();
        let v = exp_solution(&g, 1.0, 2.0, c(1.0, 0.0)).unwrap();
        assert!((v.re - 8.0).abs() < 1e-9);
    }

    #[test]
    fn wkb3_constant_roots() {
        let ode = make_ode(3, &["-6", "11", "-6"], "0").unwrap();
        // Parts (1, 1, 1) correspond to (y, y', y'') = (3, 6, 14).
        let ivp = Ivp::new(0.0, vec![c(3.0, 0.0), c(6.0, 0.0), c(14.0, 0.0)], 1.0).unwrap();
        let y = wkb3_diagonal(&ode, &ivp, 1.0).unwrap();
        for (k, v) in y.iter().enumerate() {
            let want = ((k + 1) as f64).exp();
            assert!((v.re - want).abs() < 1e-8 * want, "{k}: {v}");
        }
    }

    #[test]
    fn comparisons() {
        let ode = make_ode(2, &["1", "0"], "0").unwrap();
        let ivp = Ivp::new(0.0, vec![c(1.0, 0.0), ZERO], 3.0).unwrap();
        let a = solve_companion(&ode, &ivp, &SolveConfig::default()).unwrap();
        let r = compare(&a, &a).unwrap();
        assert_eq!((r.max_abs, r.max_rel, r.mean_abs), (0.0, 0.0, 0.0));

        let scaled = Trajectory::from_samples(
            a.times.clone(),
            a.states
                .iter()
                .map(|s| s.iter().map(|v| v * (1.0 + 1e-6)).collect())
                .collect(),
        );
        let r = compare_component(&scaled, &a, 0).unwrap();
        assert!((r.max_rel - 1e-6).abs() < 1e-12);

        let far = Trajectory::from_samples(vec![10.0, 11.0], vec![vec![ZERO; 2]; 2]);
        assert!(matches!(compare(&far, &a), Err(Error::EmptyOverlap)));
    }

    #[test]
    fn abel_identity() {
        let cfg = SolveConfig::default();
        let osc = make_ode(2, &["1", "0"], "0").unwrap();
        let cos = solve_companion(
            &osc,
            &Ivp::new(0.0, vec![c(1.0, 0.0), ZERO], 5.0).unwrap(),
            &cfg,
        )
        .unwrap();
        let sin = solve_companion(
            &osc,
            &Ivp::new(0.0, vec![ZERO, c(1.0, 0.0)], 5.0).unwrap(),
            &cfg,
        )
        .unwrap();
        let r = wronskian_abel(&cos, &sin, osc.coeff(1), 0.0).unwrap();
        assert!(r.max_abs < 1e-8, "{}", r.max_abs);

        let damped = make_ode(2, &["1", "1"], "0").unwrap();
        let a = solve_companion(
            &damped,
            &Ivp::new(0.0, vec![c(1.0, 0.0), ZERO], 5.0).unwrap(),
            &cfg,
        )
        .unwrap();
        let b = solve_companion(
            &damped,
            &Ivp::new(0.0, vec![ZERO, c(1.0, 0.0)], 5.0).unwrap(),
            &cfg,
        )
        .unwrap();
        let r = wronskian_abel(&a, &b, damped.coeff(1), 0.0).unwrap();
        assert!(r.max_abs < 1e-8, "{}", r.max_abs);

        let short = Trajectory::from_samples(vec![0.0], vec![vec![ZERO; 2]]);
        assert!(matches!(
            wronskian_abel(&a, &short, damped.coeff(1), 0.0),
            Err(Error::GridMismatch)
        ));
    }
}
