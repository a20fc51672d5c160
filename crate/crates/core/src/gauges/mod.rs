//! Gauge families and the characteristic-root machinery they rely on.

mod families;
mod roots;

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::expr::Expr;
use crate::model::LinearOde;
use crate::transform::{AnalyticGauge, GaugeSet};

pub use families::{
    default_q, g_from_q, gen_riccati3_residual, gen_riccati3_rhs, phase_integral_gauge, q_residual,
    riccati_rhs, strong_coupling_rhs, ExactQGauge, GenRiccati3Gauge, RiccatiGauge,
    StrongCouplingGauge, DEFAULT_GAUGE_CAP,
};
pub use roots::{
    characteristic_roots, characteristic_values, polynomial_roots, residual_scale, RootSet,
    COLLISION_FACTOR,
};

/// Gauge built from powers of the continuity-tracked characteristic roots.
pub fn characteristic_gauge(ode: &LinearOde) -> GaugeSet {
    GaugeSet::Characteristic { order: ode.order() }
}

#[derive(Debug, Clone, Default)]
pub struct RiccatiCfg {
    pub initial: Option<[Complex64; 2]>,
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct StrongCouplingCfg {
    pub c: Option<Complex64>,
    pub initial_g1: Option<Complex64>,
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct PhaseIntegralCfg {
    /// `q(t)`; defaults to `sqrt(f_0)`.
    pub q: Option<Expr>,
    /// Integrate the q-equation instead of using `q` as given.
    pub exact: bool,
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct GenRiccati3Cfg {
    pub initial: Option<[(Complex64, Complex64); 3]>,
    pub cap: Option<f64>,
}

/// A gauge family with its options, resolved against an ODE by [`GaugeSpec::build`].
#[derive(Debug, Clone)]
pub enum GaugeSpec {
    Characteristic,
    Riccati(RiccatiCfg),
    StrongCoupling(StrongCouplingCfg),
    PhaseIntegral(PhaseIntegralCfg),
    GenRiccati3(GenRiccati3Cfg),
    Analytic(AnalyticGauge),
}

impl GaugeSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GaugeSpec::Characteristic => "characteristic",
            GaugeSpec::Riccati(_) => "riccati",
            GaugeSpec::StrongCoupling(_) => "strong_coupling",
            GaugeSpec::PhaseIntegral(_) => "phase_integral",
            GaugeSpec::GenRiccati3(_) => "gen_riccati3",
            GaugeSpec::Analytic(_) => "analytic",
        }
    }

    /// Fills in defaults that depend on the ODE at `t1`.
    pub fn build(&self, ode: &LinearOde, t1: f64) -> Result<GaugeSet> {
        let cap = |c: Option<f64>| c.unwrap_or(DEFAULT_GAUGE_CAP);
        Ok(match self {
            GaugeSpec::Characteristic => characteristic_gauge(ode),
            GaugeSpec::Riccati(cfg) => {
                let g = match cfg.initial {
                    Some(init) => RiccatiGauge::new(init, cap(cfg.cap))?,
                    None => RiccatiGauge::from_roots(ode, t1, cap(cfg.cap))?,
                };
                GaugeSet::Dynamic(Arc::new(g))
            }
            GaugeSpec::StrongCoupling(cfg) => GaugeSet::Dynamic(Arc::new(
                StrongCouplingGauge::with_defaults(ode, t1, cfg.c, cfg.initial_g1, cap(cfg.cap))?,
            )),
            GaugeSpec::PhaseIntegral(cfg) if cfg.exact => {
                let g = match &cfg.q {
                    Some(q) => {
                        let q0 = q.eval_real(t1)?;
                        let dq0 = q.differentiate().eval_real(t1)?;
                        ExactQGauge {
                            q0,
                            dq0,
                            cap: cap(cfg.cap),
                        }
                    }
                    None => ExactQGauge::from_leading_order(ode, t1, cap(cfg.cap))?,
                };
                GaugeSet::Dynamic(Arc::new(g))
            }
            GaugeSpec::PhaseIntegral(cfg) => {
                GaugeSet::Analytic(phase_integral_gauge(ode, cfg.q.clone())?)
            }
            GaugeSpec::GenRiccati3(cfg) => {
                let g = match cfg.initial {
                    Some(init) => GenRiccati3Gauge::new(init, cap(cfg.cap))?,
                    None => GenRiccati3Gauge::from_roots(ode, t1, cap(cfg.cap))?,
                };
                GaugeSet::Dynamic(Arc::new(g))
            }
            GaugeSpec::Analytic(a) => GaugeSet::Analytic(a.clone()),
        })
    }
}
