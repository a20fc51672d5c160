//! Adaptive integration, quadrature, and the gauge/split orchestrator.

mod dopri;
mod quadrature;
mod split;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use dopri::integrate;
pub use quadrature::{quadrature, MAX_DEPTH};
pub use split::{
    solve_companion, solve_split, solve_split_with, SplitSolution, NEAR_SINGULAR_RATIO,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; estimated from the right-hand side when `None`.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Any state component above this magnitude aborts with [`Error::BlowUp`].
    pub blowup_cap: f64,
    /// Number of evenly spaced output times, endpoints included.
    pub sample_count: usize,
    /// Also record every accepted step endpoint.
    pub record_steps: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            h_init: None,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
            blowup_cap: 1e8,
            sample_count: 200,
            record_steps: false,
        }
    }
}

impl SolveConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        SolveConfig {
            rel_tol,
            abs_tol,
            ..SolveConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_max) {
            return bad("step bounds must satisfy 0 < h_min <= h_max");
        }
        if matches!(self.h_init, Some(h) if !(h > 0.0)) {
            return bad("initial step must be positive");
        }
        if self.sample_count < 2 {
            return bad("sample_count must be at least 2");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

/// One accepted step with its Dormand–Prince interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    h: f64,
    /// Five coefficient vectors of length `dim`, stored back to back.
    rc: Vec<Complex64>,
}

impl Segment {
    fn eval(&self, t: f64, dim: usize, out: &mut [Complex64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let rc = |k: usize, i: usize| self.rc[k * dim + i];
        for (i, o) in out.iter_mut().enumerate() {
            *o = rc(0, i)
                + theta * (rc(1, i) + theta1 * (rc(2, i) + theta * (rc(3, i) + theta1 * rc(4, i))));
        }
    }
}

/// Sampled solution of a complex ODE system.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    segments: Vec<Segment>,
}

impl Trajectory {
    /// A trajectory from samples alone; interpolation between samples is linear.
    pub fn from_samples(times: Vec<f64>, states: Vec<Vec<Complex64>>) -> Self {
        Trajectory {
            times,
            states,
            ..Trajectory::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn final_state(&self) -> &[Complex64] {
        &self.states[self.states.len() - 1]
    }

    /// Values of component `k` at the samples.
    pub fn component(&self, k: usize) -> Vec<Complex64> {
        self.states.iter().map(|s| s[k]).collect()
    }

    pub fn has_dense_output(&self) -> bool {
        !self.segments.is_empty()
    }

    /// Whether `t` lies in the covered span (inclusive).
    pub fn contains(&self, t: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let (a, b) = (self.t_start(), self.t_end());
        t >= a.min(b) && t <= a.max(b)
    }

    /// State at `t` from the dense output, or linear between samples when
    /// the trajectory has none.
    pub fn interpolate(&self, t: f64) -> Option<Vec<Complex64>> {
        if !self.contains(t) {
            return None;
        }
        let forward = self.t_end() >= self.t_start();
        let before = |x: f64| if forward { x <= t } else { x >= t };
        let dim = self.dim();
        if !self.segments.is_empty() {
            let idx = self.segments.partition_point(|s| before(s.t0)).max(1) - 1;
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            self.segments[idx].eval(t, dim, &mut out);
            return Some(out);
        }
        let j = self.times.partition_point(|&x| before(x));
        if j == 0 {
            return Some(self.states[0].clone());
        }
        if j == self.times.len() {
            return Some(self.final_state().to_vec());
        }
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        Some(
            self.states[j - 1]
                .iter()
                .zip(&self.states[j])
                .map(|(a, b)| a + (b - a) * w)
                .collect(),
        )
    }
}
