//! Dormand–Prince 5(4) with PI step control and dense output, after the
//! classic DOPRI5 code.

use num_complex::Complex64;

use super::{Segment, SolveConfig, Trajectory};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller parameters.
const BETA: f64 = 0.04;
const SAFE: f64 = 0.9;
const FAC1: f64 = 0.2;
const FAC2: f64 = 10.0;
/// Step reduction after the right-hand side fails at a trial stage.
const RHS_FAILURE_SHRINK: f64 = 0.25;

fn err_norm(err: &[Complex64], y0: &[Complex64], y1: &[Complex64], cfg: &SolveConfig) -> f64 {
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| e.norm() / (cfg.abs_tol + cfg.rel_tol * a.norm().max(b.norm())))
        .fold(0.0, f64::max)
}

fn rms_scaled(v: &[Complex64], y: &[Complex64], cfg: &SolveConfig) -> f64 {
    let sum: f64 = v
        .iter()
        .zip(y)
        .map(|(x, s)| (x.norm() / (cfg.abs_tol + cfg.rel_tol * s.norm())).powi(2))
        .sum();
    (sum / v.len().max(1) as f64).sqrt()
}

/// Starting step from the usual two-evaluation heuristic.
fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    dir: f64,
    y: &[Complex64],
    k1: &[Complex64],
    h_max: f64,
    cfg: &SolveConfig,
) -> f64
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
{
    let d0 = rms_scaled(y, y, cfg);
    let d1 = rms_scaled(k1, y, cfg);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(h_max);
    let y1: Vec<Complex64> = y.iter().zip(k1).map(|(a, k)| a + k * (dir * h0)).collect();
    let mut k2 = vec![ZERO; y.len()];
    if rhs(t + dir * h0, &y1, &mut k2).is_err() {
        return h0.max(cfg.h_min);
    }
    let diff: Vec<Complex64> = k2.iter().zip(k1).map(|(a, b)| (a - b) / h0).collect();
    let d2 = rms_scaled(&diff, y, cfg);
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(0.2)
    };
    (100.0 * h0).min(h1).min(h_max).max(cfg.h_min)
}

/// Integrates `y' = rhs(t, y)` from `t_span.0` to `t_span.1` (either
/// direction) and samples the solution on the configured output grid.
///
/// An error from `rhs` at a trial stage rejects the step and retries with a
/// smaller one; it becomes the result only once the step falls below
/// `h_min`.
pub fn integrate<F>(
    mut rhs: F,
    t_span: (f64, f64),
    y0: &[Complex64],
    cfg: &SolveConfig,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
{
    cfg.validate()?;
    let (t1, t_end) = t_span;
    if !(t1.is_finite() && t_end.is_finite()) || t1 == t_end {
        return Err(Error::InvalidArgument(format!(
            "integration span [{t1}, {t_end}] is empty or not finite"
        )));
    }
    let dim = y0.len();
    let dir = (t_end - t1).signum();
    let span = (t_end - t1).abs();
    let h_max = cfg.h_max.min(span);

    let n_out = cfg.sample_count;
    let out_time = |i: usize| {
        if i + 1 == n_out {
            t_end
        } else {
            t1 + (t_end - t1) * (i as f64 / (n_out - 1) as f64)
        }
    };

    let mut traj = Trajectory::default();
    traj.times.push(t1);
    traj.states.push(y0.to_vec());
    let mut next_out = 1;

    let mut t = t1;
    let mut y = y0.to_vec();
    let mut k = vec![vec![ZERO; dim]; 7];
    rhs(t, &y, &mut k[0])?;
    traj.rhs_evals += 1;

    let mut h = match cfg.h_init {
        Some(h) => h.min(h_max),
        None => {
            traj.rhs_evals += 1;
            initial_step(&mut rhs, t, dir, &y, &k[0], h_max, cfg)
        }
    };
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut ytmp = vec![ZERO; dim];
    let mut ynew = vec![ZERO; dim];
    let mut err = vec![ZERO; dim];
    let mut steps = 0usize;
    let expo1 = 0.2 - BETA * 0.75;

    loop {
        if steps >= cfg.max_steps {
            return Err(Error::MaxSteps { t, steps });
        }
        if h < cfg.h_min {
            return Err(Error::StepUnderflow { t });
        }
        let remaining = (t_end - t).abs();
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        let hs = dir * h;
        steps += 1;

        let stage = |k: &Vec<Vec<Complex64>>, coeffs: &[(usize, f64)], out: &mut Vec<Complex64>| {
            for i in 0..dim {
                let mut acc = y[i];
                for &(j, a) in coeffs {
                    acc += k[j][i] * (a * hs);
                }
                out[i] = acc;
            }
        };

        let attempt = (|| -> Result<()> {
            stage(&k, &[(0, A21)], &mut ytmp);
            rhs(t + C2 * hs, &ytmp, &mut k[1])?;
            stage(&k, &[(0, A31), (1, A32)], &mut ytmp);
            rhs(t + C3 * hs, &ytmp, &mut k[2])?;
            stage(&k, &[(0, A41), (1, A42), (2, A43)], &mut ytmp);
            rhs(t + C4 * hs, &ytmp, &mut k[3])?;
            stage(&k, &[(0, A51), (1, A52), (2, A53), (3, A54)], &mut ytmp);
            rhs(t + C5 * hs, &ytmp, &mut k[4])?;
            stage(
                &k,
                &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)],
                &mut ytmp,
            );
            let t_new = if last { t_end } else { t + hs };
            rhs(t_new, &ytmp, &mut k[5])?;
            stage(
                &k,
                &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)],
                &mut ynew,
            );
            rhs(t_new, &ynew, &mut k[6])?;
            Ok(())
        })();
        traj.rhs_evals += 6;

        if let Err(e) = attempt {
            traj.rejected += 1;
            h *= RHS_FAILURE_SHRINK;
            if h < cfg.h_min {
                return Err(e);
            }
            last_rejected = true;
            continue;
        }

        for i in 0..dim {
            err[i] = (k[0][i] * E1
                + k[2][i] * E3
                + k[3][i] * E4
                + k[4][i] * E5
                + k[5][i] * E6
                + k[6][i] * E7)
                * hs;
        }
        let e = err_norm(&err, &y, &ynew, cfg);
        if !e.is_finite() {
            traj.rejected += 1;
            h *= RHS_FAILURE_SHRINK;
            last_rejected = true;
            continue;
        }
        let fac11 = e.powf(expo1);

        if e <= 1.0 {
            let fac = ((fac11 / facold.powf(BETA)) / SAFE).clamp(1.0 / FAC2, 1.0 / FAC1);
            facold = e.max(1e-4);
            let t_new = if last { t_end } else { t + hs };
            if ynew.iter().any(|v| !(v.norm() <= cfg.blowup_cap)) {
                return Err(Error::BlowUp { t: t_new });
            }

            // Dense-output coefficients, five blocks of `dim`.
            let ydiff = |i: usize| ynew[i] - y[i];
            let bspl = |i: usize| k[0][i] * hs - ydiff(i);
            let mut rc = Vec::with_capacity(5 * dim);
            rc.extend_from_slice(&y);
            rc.extend((0..dim).map(ydiff));
            rc.extend((0..dim).map(bspl));
            rc.extend((0..dim).map(|i| ydiff(i) - k[6][i] * hs - bspl(i)));
            rc.extend((0..dim).map(|i| {
                (k[0][i] * D1
                    + k[2][i] * D3
                    + k[3][i] * D4
                    + k[4][i] * D5
                    + k[5][i] * D6
                    + k[6][i] * D7)
                    * hs
            }));
            let seg = Segment { t0: t, h: hs, rc };

            while next_out < n_out {
                let to = out_time(next_out);
                if to == t_end && !last {
                    break;
                }
                if to != t_end && (to - t_new) * dir > 0.0 {
                    break;
                }
                let state = if to == t_end {
                    ynew.clone()
                } else {
                    let mut s = vec![ZERO; dim];
                    seg.eval(to, dim, &mut s);
                    s
                };
                traj.times.push(to);
                traj.states.push(state);
                next_out += 1;
            }
            if cfg.record_steps && traj.times.last() != Some(&t_new) {
                traj.times.push(t_new);
                traj.states.push(ynew.clone());
            }
            traj.segments.push(seg);
            traj.accepted += 1;

            k.swap(0, 6);
            std::mem::swap(&mut y, &mut ynew);
            t = t_new;
            if last {
                return Ok(traj);
            }

            let mut hnew = h / fac;
            if last_rejected {
                hnew = hnew.min(h);
            }
            h = hnew.min(h_max);
            last_rejected = false;
        } else {
            traj.rejected += 1;
            h /= (fac11 / SAFE).min(1.0 / FAC1);
            last_rejected = true;
        }
    }
}
