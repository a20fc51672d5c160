//! Gauge splitting of an N-th order linear ODE into a first-order system.
//!
//! The solution is written as `y = y_1 + ... + y_N` together with the
//! constraints `y^(m) = Σ_n g_{m,n} y_n` for `m = 1..N-1`. Differentiating the
//! constraints and substituting into the ODE gives
//!
//! ```text
//! M Y' = F Y + H
//! ```
//!
//! where `M` stacks a row of ones over the gauge rows, `F` holds
//! `g_{1,n}`, then `g_{m+1,n} - g'_{m,n}`, then
//! `L_n = -g'_{N-1,n} - Σ_{k≥1} f_k g_{k,n} - f_0`, and `H = (0, ..., 0, -f)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gauges::{characteristic_roots, characteristic_values, RootSet};
use crate::model::{CompanionState, LinearOde};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative factor of the gauge singularity test.
pub const SINGULARITY_FACTOR: f64 = 1e-12;

/// Values `g_{m,n}` and derivatives `g'_{m,n}` of a gauge at one time.
///
/// `m` runs over `1..N` (the derivative order it constrains) and `n` over
/// `0..N` (the split part).
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeValues {
    order: usize,
    g: Vec<Complex64>,
    dg: Vec<Complex64>,
}

impl GaugeValues {
    pub fn new(order: usize, g: Vec<Complex64>, dg: Vec<Complex64>) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidOrder(order));
        }
        let len = (order - 1) * order;
        if g.len() != len || dg.len() != len {
            return Err(Error::LengthMismatch {
                what: "gauge values",
                expected: len,
                got: g.len().min(dg.len()),
            });
        }
        Ok(GaugeValues { order, g, dg })
    }

    /// Builds from `N-1` rows of `N` values each.
    pub fn from_rows(rows: &[Vec<Complex64>], deriv_rows: &[Vec<Complex64>]) -> Result<Self> {
        let order = rows.len() + 1;
        let flat = |rs: &[Vec<Complex64>]| -> Result<Vec<Complex64>> {
            if rs.len() != order - 1 || rs.iter().any(|r| r.len() != order) {
                return Err(Error::InvalidArgument(format!(
                    "gauge must be a {}x{} array",
                    order - 1,
                    order
                )));
            }
            Ok(rs.concat())
        };
        GaugeValues::new(order, flat(rows)?, flat(deriv_rows)?)
    }

    /// Two-part gauge `(g_1, g_2)` with derivatives.
    pub fn pair(g: [Complex64; 2], dg: [Complex64; 2]) -> Self {
        GaugeValues {
            order: 2,
            g: g.to_vec(),
            dg: dg.to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self, m: usize, n: usize) -> Complex64 {
        debug_assert!(m >= 1 && m < self.order && n < self.order);
        self.g[(m - 1) * self.order + n]
    }

    pub fn deriv(&self, m: usize, n: usize) -> Complex64 {
        debug_assert!(m >= 1 && m < self.order && n < self.order);
        self.dg[(m - 1) * self.order + n]
    }

    pub fn max_abs(&self) -> f64 {
        self.g.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// The matrix `M`: a row of ones over the gauge rows.
    pub fn basis_matrix(&self) -> DMatrix<Complex64> {
        let n = self.order;
        DMatrix::from_fn(n, n, |r, c| if r == 0 { ONE } else { self.value(r, c) })
    }

    pub fn determinant(&self) -> Complex64 {
        self.basis_matrix().determinant()
    }
}

pub fn gauge_determinant(values: &GaugeValues) -> Complex64 {
    values.determinant()
}

fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `|D|` below this value marks the gauge as singular.
pub fn singularity_threshold(m: &DMatrix<Complex64>) -> f64 {
    SINGULARITY_FACTOR * inf_norm(m).powi(m.nrows() as i32).max(1.0)
}

pub fn is_singular(m: &DMatrix<Complex64>, det: Complex64) -> bool {
    !(det.norm() >= singularity_threshold(m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeMatrices {
    pub m: DMatrix<Complex64>,
    pub f: DMatrix<Complex64>,
    pub h: DVector<Complex64>,
    pub det: Complex64,
}

impl GaugeMatrices {
    pub fn check_admissible(&self, t: f64) -> Result<()> {
        if is_singular(&self.m, self.det) {
            return Err(Error::SingularGauge {
                t,
                det_abs: self.det.norm(),
            });
        }
        Ok(())
    }
}

/// Assembles `M`, `F`, `H` and `D = det M` at time `t`.
pub fn gauge_matrices(ode: &LinearOde, values: &GaugeValues, t: f64) -> Result<GaugeMatrices> {
    let n = values.order();
    if ode.order() != n {
        return Err(Error::LengthMismatch {
            what: "gauge order",
            expected: ode.order(),
            got: n,
        });
    }
    let f = ode.coeff_values(t)?;
    let m = values.basis_matrix();
    let mut fm = DMatrix::from_element(n, n, ZERO);
    for col in 0..n {
        fm[(0, col)] = values.value(1, col);
        for row in 1..n - 1 {
            fm[(row, col)] = values.value(row + 1, col) - values.deriv(row, col);
        }
        let mut l = -values.deriv(n - 1, col) - f[0];
        for (k, fk) in f.iter().enumerate().skip(1) {
            l -= fk * values.value(k, col);
        }
        fm[(n - 1, col)] = l;
    }
    let mut h = DVector::from_element(n, ZERO);
    h[n - 1] = -ode.inhom_value(t)?;
    let det = m.determinant();
    Ok(GaugeMatrices { m, f: fm, h, det })
}

/// The split unknowns `y_1..y_N` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub t: f64,
    pub parts: Vec<Complex64>,
}

fn solve_linear(
    m: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
    t: f64,
) -> Result<DVector<Complex64>> {
    let lu = m.clone().lu();
    lu.solve(rhs).ok_or_else(|| {
        let diag = lu.u().diagonal();
        let max = diag.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let min = diag.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        Error::LinearSolve {
            t,
            condition: if min > 0.0 { max / min } else { f64::INFINITY },
        }
    })
}

/// Splits `(y, y', ..., y^(N-1))` into parts by solving `M Y = (y, y', ...)`.
pub fn split_initial(values: &GaugeValues, s: &CompanionState) -> Result<SplitState> {
    let n = values.order();
    if s.derivs.len() != n {
        return Err(Error::LengthMismatch {
            what: "companion state",
            expected: n,
            got: s.derivs.len(),
        });
    }
    let m = values.basis_matrix();
    let det = m.determinant();
    if is_singular(&m, det) {
        return Err(Error::SingularGauge {
            t: s.t,
            det_abs: det.norm(),
        });
    }
    let rhs = DVector::from_column_slice(&s.derivs);
    let parts = solve_linear(&m, &rhs, s.t)?;
    Ok(SplitState {
        t: s.t,
        parts: parts.iter().copied().collect(),
    })
}

/// `y = Σ y_n` and `y^(m) = Σ g_{m,n} y_n`.
pub fn reconstruct(values: &GaugeValues, sp: &SplitState) -> CompanionState {
    let n = values.order();
    let mut derivs = Vec::with_capacity(n);
    derivs.push(sp.parts.iter().sum());
    for m in 1..n {
        derivs.push((0..n).map(|k| values.value(m, k) * sp.parts[k]).sum());
    }
    CompanionState { t: sp.t, derivs }
}

/// `Y'` from `M Y' = F Y + H`.
pub fn split_rhs_general(
    ode: &LinearOde,
    values: &GaugeValues,
    t: f64,
    parts: &[Complex64],
) -> Result<Vec<Complex64>> {
    let mats = gauge_matrices(ode, values, t)?;
    mats.check_admissible(t)?;
    let y = DVector::from_column_slice(parts);
    let rhs = &mats.f * y + &mats.h;
    Ok(solve_linear(&mats.m, &rhs, t)?.iter().copied().collect())
}

/// The split system as `Y' = A Y + b`.
pub fn split_system_matrix(
    ode: &LinearOde,
    values: &GaugeValues,
    t: f64,
) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    let mats = gauge_matrices(ode, values, t)?;
    mats.check_admissible(t)?;
    let lu = mats.m.clone().lu();
    let a = lu.solve(&mats.f).ok_or(Error::LinearSolve {
        t,
        condition: f64::INFINITY,
    })?;
    let b = lu.solve(&mats.h).ok_or(Error::LinearSolve {
        t,
        condition: f64::INFINITY,
    })?;
    Ok((a, b))
}

/// Coupling functions of the split system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingTerms {
    /// `x_n = g_n' + f_1 g_n + f_0 + g_n²`.
    Second([Complex64; 2]),
    /// `x_1..x_3 = g_{2,n} - g'_{1,n}`, `x_4..x_6 = g'_{2,n} + f_2 g_{2,n} + f_1 g_{1,n} + f_0`.
    Third([Complex64; 6]),
}

impl CouplingTerms {
    pub fn values(&self) -> &[Complex64] {
        match self {
            CouplingTerms::Second(x) => x,
            CouplingTerms::Third(x) => x,
        }
    }
}

pub fn coupling_terms(ode: &LinearOde, values: &GaugeValues, t: f64) -> Result<CouplingTerms> {
    let f = ode.coeff_values(t)?;
    match values.order() {
        2 => {
            let x = |n| {
                let g = values.value(1, n);
                values.deriv(1, n) + f[1] * g + f[0] + g * g
            };
            Ok(CouplingTerms::Second([x(0), x(1)]))
        }
        3 => {
            let mut x = [ZERO; 6];
            for n in 0..3 {
                let (g1, g2) = (values.value(1, n), values.value(2, n));
                x[n] = g2 - values.deriv(1, n);
                x[3 + n] = values.deriv(2, n) + f[2] * g2 + f[1] * g1 + f[0];
            }
            Ok(CouplingTerms::Third(x))
        }
        order => Err(Error::UnsupportedOrder {
            what: "coupling terms",
            order,
        }),
    }
}

/// Closed form of the two-part system in terms of `x_1`, `x_2`.
pub fn split_rhs_n2(
    ode: &LinearOde,
    g: [Complex64; 2],
    dg: [Complex64; 2],
    t: f64,
    parts: [Complex64; 2],
) -> Result<[Complex64; 2]> {
    let values = GaugeValues::pair(g, dg);
    let m = values.basis_matrix();
    let diff = g[0] - g[1];
    if is_singular(&m, diff) {
        return Err(Error::SingularGauge {
            t,
            det_abs: diff.norm(),
        });
    }
    let CouplingTerms::Second([x1, x2]) = coupling_terms(ode, &values, t)? else {
        unreachable!()
    };
    let f = ode.inhom_value(t)?;
    let exchange = (parts[0] * x1 + parts[1] * x2 + f) / diff;
    Ok([parts[0] * g[0] - exchange, parts[1] * g[1] + exchange])
}

/// Closed form of the three-part system written in terms of `x_1..x_6`.
pub fn split_rhs_n3(
    ode: &LinearOde,
    values: &GaugeValues,
    t: f64,
    parts: [Complex64; 3],
) -> Result<[Complex64; 3]> {
    if values.order() != 3 {
        return Err(Error::UnsupportedOrder {
            what: "three-part closed form",
            order: values.order(),
        });
    }
    let m = values.basis_matrix();
    let det = m.determinant();
    if is_singular(&m, det) {
        return Err(Error::SingularGauge {
            t,
            det_abs: det.norm(),
        });
    }
    let CouplingTerms::Third(x) = coupling_terms(ode, values, t)? else {
        unreachable!()
    };
    let c = ode.inhom_value(t)?;
    let g1 = |n: usize| values.value(1, n);
    let g2 = |n: usize| values.value(2, n);
    // Each row k uses the cyclic neighbours (k+1, k+2).
    let mut out = [ZERO; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let u = g2(a) - g2(b);
        let v = g1(b) - g1(a);
        let mut acc = g1(k) * det * parts[k] - c * v;
        for n in 0..3 {
            acc += parts[n] * (u * (x[n] - g1(n) * g1(n)) - v * (x[3 + n] + g1(n) * g2(n)));
        }
        *slot = acc / det;
    }
    Ok(out)
}

/// Gauge functions defined by their own ODE system, integrated alongside
/// the split parts.
pub trait GaugeDynamics: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn order(&self) -> usize;
    /// Number of complex state variables carried by the gauge.
    fn state_len(&self) -> usize;
    fn initial_state(&self, ode: &LinearOde, t1: f64) -> Result<Vec<Complex64>>;
    fn state_rhs(
        &self,
        ode: &LinearOde,
        t: f64,
        state: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()>;
    fn values(&self, ode: &LinearOde, t: f64, state: &[Complex64]) -> Result<GaugeValues>;
}

/// Gauge given by explicit expressions `g_{m,n}(t)`.
#[derive(Debug, Clone)]
pub struct AnalyticGauge {
    order: usize,
    g: Vec<Expr>,
    dg: Vec<Expr>,
}

impl AnalyticGauge {
    /// `rows[m-1][n]` is `g_{m,n}`.
    pub fn new(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let order = rows.len() + 1;
        if order < 2 || rows.iter().any(|r| r.len() != order) {
            return Err(Error::InvalidArgument(format!(
                "analytic gauge must be an (N-1)xN array, got {} rows",
                rows.len()
            )));
        }
        let g: Vec<Expr> = rows.into_iter().flatten().collect();
        let dg = g.iter().map(Expr::differentiate).collect();
        Ok(AnalyticGauge { order, g, dg })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self, t: f64) -> Result<GaugeValues> {
        let eval = |es: &[Expr]| {
            es.iter()
                .map(|e| e.eval_real(t))
                .collect::<Result<Vec<_>>>()
        };
        GaugeValues::new(self.order, eval(&self.g)?, eval(&self.dg)?)
    }
}

#[derive(Debug, Clone)]
pub enum GaugeSet {
    Analytic(AnalyticGauge),
    /// Powers of continuity-tracked characteristic roots, `g_{m,n} = ρ_n^m`.
    Characteristic {
        order: usize,
    },
    Dynamic(Arc<dyn GaugeDynamics>),
}

impl GaugeSet {
    pub fn order(&self) -> usize {
        match self {
            GaugeSet::Analytic(a) => a.order(),
            GaugeSet::Characteristic { order } => *order,
            GaugeSet::Dynamic(d) => d.order(),
        }
    }

    pub fn state_len(&self) -> usize {
        match self {
            GaugeSet::Dynamic(d) => d.state_len(),
            _ => 0,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self, GaugeSet::Dynamic(_))
    }

    pub fn initial_state(&self, ode: &LinearOde, t1: f64) -> Result<Vec<Complex64>> {
        match self {
            GaugeSet::Dynamic(d) => d.initial_state(ode, t1),
            _ => Ok(Vec::new()),
        }
    }

    /// Evaluation context; holds the root ordering for characteristic gauges.
    pub fn evaluator<'a>(&'a self, ode: &'a LinearOde) -> GaugeEvaluator<'a> {
        GaugeEvaluator {
            gauge: self,
            ode,
            roots: None,
        }
    }
}

/// Evaluates a gauge along a path. Characteristic roots are matched to the
/// previously evaluated roots, so times should be visited in order.
pub struct GaugeEvaluator<'a> {
    gauge: &'a GaugeSet,
    ode: &'a LinearOde,
    roots: Option<RootSet>,
}

impl GaugeEvaluator<'_> {
    pub fn values(&mut self, t: f64, state: &[Complex64]) -> Result<GaugeValues> {
        match self.gauge {
            GaugeSet::Analytic(a) => a.values(t),
            GaugeSet::Characteristic { .. } => {
                let roots = characteristic_roots(self.ode, t, self.roots.as_ref())?;
                let values = characteristic_values(&roots);
                self.roots = Some(roots);
                Ok(values)
            }
            GaugeSet::Dynamic(d) => d.values(self.ode, t, state),
        }
    }

    pub fn state_rhs(&mut self, t: f64, state: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        match self.gauge {
            GaugeSet::Dynamic(d) => d.state_rhs(self.ode, t, state, out),
            _ => Ok(()),
        }
    }

    pub fn last_roots(&self) -> Option<&RootSet> {
        self.roots.as_ref()
    }

    pub fn reset(&mut self) {
        self.roots = None;
    }
}
