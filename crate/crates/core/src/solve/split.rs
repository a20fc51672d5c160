use num_complex::Complex64;

use super::{integrate, SolveConfig, Trajectory};
use crate::error::{Error, Result};
use crate::gauges::GaugeSpec;
use crate::model::{companion_rhs_into, CompanionState, Ivp, LinearOde};
use crate::transform::{
    reconstruct, split_initial, split_rhs_general, GaugeSet, GaugeValues, SplitState,
};

/// A run that dies of blow-up or step underflow while `|D|` has fallen
/// below this fraction of its running maximum is reported as a gauge
/// singularity.
pub const NEAR_SINGULAR_RATIO: f64 = 1e-6;

/// Reference trajectory of `(y, y', ..., y^(N-1))`.
pub fn solve_companion(ode: &LinearOde, ivp: &Ivp, cfg: &SolveConfig) -> Result<Trajectory> {
    ivp.validate(ode)?;
    integrate(
        |t, y, out| companion_rhs_into(ode, t, y, out),
        (ivp.t1(), ivp.t_end),
        &ivp.initial.derivs,
        cfg,
    )
}

/// Result of a split solve.
#[derive(Debug, Clone)]
pub struct SplitSolution {
    pub gauge: GaugeSet,
    /// Number of leading state components that belong to the gauge.
    pub gauge_state_len: usize,
    /// Gauge state followed by the split parts `y_1..y_N`.
    pub trajectory: Trajectory,
    /// `(y, y', ..., y^(N-1))` rebuilt from the parts at each sample.
    pub companion: Trajectory,
    pub gauge_values: Vec<GaugeValues>,
    pub det_abs: Vec<f64>,
}

impl SplitSolution {
    pub fn order(&self) -> usize {
        self.companion.dim()
    }

    pub fn times(&self) -> &[f64] {
        &self.trajectory.times
    }

    /// Split parts at sample `i`.
    pub fn parts(&self, i: usize) -> &[Complex64] {
        &self.trajectory.states[i][self.gauge_state_len..]
    }

    pub fn gauge_state(&self, i: usize) -> &[Complex64] {
        &self.trajectory.states[i][..self.gauge_state_len]
    }

    /// Contribution of part `n` to the companion state: `(y_n, g_{1,n} y_n, ...)`.
    pub fn mode_trajectory(&self, n: usize) -> Trajectory {
        let states = (0..self.trajectory.len())
            .map(|i| {
                let yn = self.parts(i)[n];
                let g = &self.gauge_values[i];
                std::iter::once(yn)
                    .chain((1..g.order()).map(|m| g.value(m, n) * yn))
                    .collect()
            })
            .collect();
        Trajectory::from_samples(self.trajectory.times.clone(), states)
    }

    pub fn min_det_abs(&self) -> f64 {
        self.det_abs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Builds the gauge from `spec` and runs [`solve_split_with`].
pub fn solve_split(
    ode: &LinearOde,
    spec: &GaugeSpec,
    ivp: &Ivp,
    cfg: &SolveConfig,
) -> Result<SplitSolution> {
    let gauge = spec.build(ode, ivp.t1())?;
    solve_split_with(ode, gauge, ivp, cfg)
}

/// Integrates the split system, co-integrating the gauge state when the
/// gauge is dynamic, and reconstructs the companion trajectory.
pub fn solve_split_with(
    ode: &LinearOde,
    gauge: GaugeSet,
    ivp: &Ivp,
    cfg: &SolveConfig,
) -> Result<SplitSolution> {
    ivp.validate(ode)?;
    if gauge.order() != ode.order() {
        return Err(Error::LengthMismatch {
            what: "gauge order",
            expected: ode.order(),
            got: gauge.order(),
        });
    }
    let t1 = ivp.t1();
    let s = gauge.state_len();
    let gauge_state = gauge.initial_state(ode, t1)?;
    let values = gauge.evaluator(ode).values(t1, &gauge_state)?;
    let split = split_initial(&values, &ivp.initial)?;

    let mut y0 = gauge_state;
    y0.extend_from_slice(&split.parts);

    let mut eval = gauge.evaluator(ode);
    let mut max_det: f64 = 0.0;
    let mut last_det = f64::INFINITY;
    let run = integrate(
        |t, y, out| {
            let (gs, parts) = y.split_at(s);
            eval.state_rhs(t, gs, &mut out[..s])?;
            let v = eval.values(t, gs)?;
            let det = v.determinant().norm();
            max_det = max_det.max(det);
            last_det = det;
            let d = split_rhs_general(ode, &v, t, parts)?;
            out[s..].copy_from_slice(&d);
            Ok(())
        },
        (t1, ivp.t_end),
        &y0,
        cfg,
    );
    let trajectory = match run {
        Ok(tr) => tr,
        Err(e @ (Error::BlowUp { t } | Error::StepUnderflow { t })) => {
            if max_det > 0.0 && last_det / max_det < NEAR_SINGULAR_RATIO {
                return Err(Error::SingularGauge {
                    t,
                    det_abs: last_det,
                });
            }
            return Err(e);
        }
        Err(e) => return Err(e),
    };

    let mut eval = gauge.evaluator(ode);
    let mut gauge_values = Vec::with_capacity(trajectory.len());
    let mut det_abs = Vec::with_capacity(trajectory.len());
    let mut companion_states = Vec::with_capacity(trajectory.len());
    for (&t, state) in trajectory.times.iter().zip(&trajectory.states) {
        let (gs, parts) = state.split_at(s);
        let v = eval.values(t, gs)?;
        det_abs.push(v.determinant().norm());
        let c: CompanionState = reconstruct(
            &v,
            &SplitState {
                t,
                parts: parts.to_vec(),
            },
        );
        companion_states.push(c.derivs);
        gauge_values.push(v);
    }
    let companion = Trajectory::from_samples(trajectory.times.clone(), companion_states);
    Ok(SplitSolution {
        gauge,
        gauge_state_len: s,
        trajectory,
        companion,
        gauge_values,
        det_abs,
    })
}
