//! Linear ODE problems and the companion-form reference system.
//!
//! The equation is
//!
//! ```text
//! y^(N) + f_{N-1}(t) y^(N-1) + ... + f_1(t) y' + f_0(t) y + f(t) = 0
//! ```
//!
//! and its companion form has state `(y, y', ..., y^(N-1))` with the last
//! derivative given by `-(f_{N-1} y^(N-1) + ... + f_0 y + f)`. Note the minus
//! signs: the matrix printed in some references lists the last row as
//! `(f_0 ... f_{N-1})`, which is inconsistent with the equation above.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{parse_with, Expr};

#[derive(Debug, Clone)]
pub struct LinearOde {
    coeffs: Vec<Expr>,
    coeff_derivs: Vec<Expr>,
    inhom: Expr,
}

impl LinearOde {
    /// Builds an ODE from coefficients `f_0..f_{N-1}` and the inhomogeneity `f`.
    pub fn new(coeffs: Vec<Expr>, inhom: Expr) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidOrder(coeffs.len()));
        }
        let coeff_derivs = coeffs.iter().map(Expr::differentiate).collect();
        Ok(LinearOde {
            coeffs,
            coeff_derivs,
            inhom,
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `f_k` for `k` in `0..N`.
    pub fn coeff(&self, k: usize) -> &Expr {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// `f_k'`.
    pub fn coeff_deriv(&self, k: usize) -> &Expr {
        &self.coeff_derivs[k]
    }

    pub fn inhom(&self) -> &Expr {
        &self.inhom
    }

    pub fn is_homogeneous(&self) -> bool {
        self.inhom.is_zero()
    }

    pub fn coeff_values(&self, t: f64) -> Result<Vec<Complex64>> {
        self.coeffs.iter().map(|c| c.eval_real(t)).collect()
    }

    pub fn coeff_deriv_values(&self, t: f64) -> Result<Vec<Complex64>> {
        self.coeff_derivs.iter().map(|c| c.eval_real(t)).collect()
    }

    pub fn inhom_value(&self, t: f64) -> Result<Complex64> {
        self.inhom.eval_real(t)
    }
}

/// Parses the coefficient sources (`f_0` first) and the inhomogeneity.
pub fn make_ode(order: usize, coeff_sources: &[&str], inhom_source: &str) -> Result<LinearOde> {
    make_ode_with(order, coeff_sources, inhom_source, &BTreeMap::new())
}

/// Like [`make_ode`], with named constants available to the expressions.
pub fn make_ode_with(
    order: usize,
    coeff_sources: &[&str],
    inhom_source: &str,
    bindings: &BTreeMap<String, Complex64>,
) -> Result<LinearOde> {
    if order < 2 {
        return Err(Error::InvalidOrder(order));
    }
    if coeff_sources.len() != order {
        return Err(Error::LengthMismatch {
            what: "coefficients",
            expected: order,
            got: coeff_sources.len(),
        });
    }
    let coeffs = coeff_sources
        .iter()
        .map(|s| parse_with(s, bindings))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let inhom = parse_with(inhom_source, bindings)?;
    LinearOde::new(coeffs, inhom)
}

/// `(y, y', ..., y^(N-1))` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionState {
    pub t: f64,
    pub derivs: Vec<Complex64>,
}

impl CompanionState {
    pub fn new(t: f64, derivs: Vec<Complex64>) -> Self {
        CompanionState { t, derivs }
    }
}

#[derive(Debug, Clone)]
pub struct Ivp {
    pub initial: CompanionState,
    pub t_end: f64,
}

impl Ivp {
    pub fn new(t1: f64, y0: Vec<Complex64>, t_end: f64) -> Result<Self> {
        if t_end == t1 || !t1.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "integration span [{t1}, {t_end}] is empty or not finite"
            )));
        }
        Ok(Ivp {
            initial: CompanionState::new(t1, y0),
            t_end,
        })
    }

    pub fn t1(&self) -> f64 {
        self.initial.t
    }

    /// Checks the initial state against the ODE order.
    pub fn validate(&self, ode: &LinearOde) -> Result<()> {
        if self.initial.derivs.len() != ode.order() {
            return Err(Error::LengthMismatch {
                what: "initial values",
                expected: ode.order(),
                got: self.initial.derivs.len(),
            });
        }
        Ok(())
    }
}

/// Right-hand side of the companion system, written into `out`.
pub fn companion_rhs_into(
    ode: &LinearOde,
    t: f64,
    state: &[Complex64],
    out: &mut [Complex64],
) -> Result<()> {
    let n = ode.order();
    if state.len() != n || out.len() != n {
        return Err(Error::LengthMismatch {
            what: "companion state",
            expected: n,
            got: state.len(),
        });
    }
    out[..n - 1].copy_from_slice(&state[1..]);
    let mut last = -ode.inhom_value(t)?;
    for (k, coeff) in ode.coeffs().iter().enumerate() {
        last -= coeff.eval_real(t)? * state[k];
    }
    out[n - 1] = last;
    Ok(())
}

pub fn companion_rhs(ode: &LinearOde, s: &CompanionState) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); ode.order()];
    companion_rhs_into(ode, s.t, &s.derivs, &mut out)?;
    Ok(out)
}
