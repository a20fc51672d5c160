//! Experiment configuration in TOML.
//!
//! ```toml
//! mode = "split"            # or "wkb"
//!
//! [params]                  # named constants usable in every expression
//! lambda = 4.0
//!
//! [ode]
//! order = 2
//! coeffs = ["lambda^2*(1 + 0.1*t)^2", "0"]   # f_0 first
//! inhom = "0"
//!
//! [ivp]
//! t1 = 0.0
//! t_end = 5.0
//! y0 = [[1.0, 0.0], [0.0, 0.0]]             # y, y', ... as [re, im]
//!
//! [gauge]
//! family = "riccati"        # characteristic | riccati | strong_coupling |
//!                           # phase_integral | gen_riccati3 | analytic
//! initial = [[0.0, 1.0], [0.0, -1.0]]
//!
//! [solver]
//! rel_tol = 1e-9
//! abs_tol = 1e-11
//!
//! [outputs]
//! sample_count = 200
//! csv_path = "trajectory.csv"
//! compare_against_companion = true
//! ```
//!
//! Family options: `riccati` takes `initial` (two complex values) and `cap`;
//! `strong_coupling` takes `c`, `initial_g1` and `cap`; `phase_integral`
//! takes `q` (an expression), `exact` and `cap`; `gen_riccati3` takes
//! `initial` (three `[g1, g2]` pairs) and `cap`; `analytic` takes `rows`,
//! the `N-1` rows of `N` expressions each.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Deserialize;

use crate::expr::{parse_with, Expr};
use crate::gauges::{GaugeSpec, GenRiccati3Cfg, PhaseIntegralCfg, RiccatiCfg, StrongCouplingCfg};
use crate::model::{make_ode_with, Ivp, LinearOde};
use crate::solve::SolveConfig;
use crate::transform::AnalyticGauge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Split,
    Wkb,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn value(self) -> Complex64 {
        match self {
            Number::Int(v) => Complex64::new(v as f64, 0.0),
            Number::Real(v) => Complex64::new(v, 0.0),
            Number::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSection {
    pub order: usize,
    pub coeffs: Vec<String>,
    #[serde(default = "zero_source")]
    pub inhom: String,
}

fn zero_source() -> String {
    "0".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IvpSection {
    pub t1: f64,
    pub t_end: f64,
    pub y0: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSection {
    pub family: String,
    pub initial: Option<toml::Value>,
    pub cap: Option<f64>,
    pub c: Option<[f64; 2]>,
    pub initial_g1: Option<[f64; 2]>,
    pub q: Option<String>,
    pub exact: Option<bool>,
    pub rows: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub h_init: Option<f64>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub max_steps: Option<usize>,
    pub blowup_cap: Option<f64>,
    pub record_steps: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub sample_count: Option<usize>,
    pub csv_path: Option<String>,
    #[serde(default)]
    pub compare_against_companion: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub params: BTreeMap<String, Number>,
    pub ode: OdeSection,
    pub ivp: IvpSection,
    pub gauge: GaugeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

/// A configuration problem, with the dotted key it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Everything a run needs, with expressions parsed and defaults applied.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub mode: Mode,
    pub ode: LinearOde,
    pub ivp: Ivp,
    pub gauge: GaugeSpec,
    pub solver: SolveConfig,
    pub csv_path: PathBuf,
    pub compare: bool,
}

pub fn parse_table(text: &str) -> Result<toml::Table, ConfigError> {
    text.parse::<toml::Table>()
        .map_err(|e| ConfigError::new("", format!("invalid TOML: {}", e.message())))
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        ExperimentConfig::from_table(parse_table(text)?)
    }
}

impl ExperimentConfig {
    pub fn from_table(table: toml::Table) -> Result<Self, ConfigError> {
        ExperimentConfig::deserialize(table)
            .map_err(|e| ConfigError::new("", e.message().to_string()))
    }

    pub fn resolve(&self) -> Result<Experiment, ConfigError> {
        let bindings: BTreeMap<String, Complex64> = self
            .params
            .iter()
            .map(|(k, v)| (k.clone(), v.value()))
            .collect();
        let ode = self.build_ode(&bindings)?;
        let y0: Vec<Complex64> = self
            .ivp
            .y0
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        if y0.len() != ode.order() {
            return Err(ConfigError::new(
                "ivp.y0",
                format!("expected {} initial values, got {}", ode.order(), y0.len()),
            ));
        }
        let ivp = Ivp::new(self.ivp.t1, y0, self.ivp.t_end)
            .map_err(|e| ConfigError::new("ivp.t_end", e.to_string()))?;
        let gauge = self.build_gauge(&bindings, ode.order())?;
        if self.mode == Mode::Wkb && !(2..=3).contains(&ode.order()) {
            return Err(ConfigError::new("mode", "wkb mode supports orders 2 and 3"));
        }
        if self.mode == Mode::Wkb && ode.order() == 2 && !ode.coeff(1).is_zero() {
            return Err(ConfigError::new(
                "mode",
                "wkb mode for order 2 requires coeffs[1] = 0",
            ));
        }
        let solver = self.build_solver()?;
        Ok(Experiment {
            mode: self.mode,
            ode,
            ivp,
            gauge,
            solver,
            csv_path: PathBuf::from(self.outputs.csv_path.as_deref().unwrap_or("trajectory.csv")),
            compare: self.outputs.compare_against_companion,
        })
    }

    fn build_ode(&self, bindings: &BTreeMap<String, Complex64>) -> Result<LinearOde, ConfigError> {
        let ode = &self.ode;
        if ode.order < 2 {
            return Err(ConfigError::new("ode.order", "order must be at least 2"));
        }
        if ode.coeffs.len() != ode.order {
            return Err(ConfigError::new(
                "ode.coeffs",
                format!(
                    "expected {} coefficients, got {}",
                    ode.order,
                    ode.coeffs.len()
                ),
            ));
        }
        for (k, src) in ode.coeffs.iter().enumerate() {
            parse_with(src, bindings)
                .map_err(|e| ConfigError::new(format!("ode.coeffs[{k}]"), e.to_string()))?;
        }
        parse_with(&ode.inhom, bindings)
            .map_err(|e| ConfigError::new("ode.inhom", e.to_string()))?;
        let sources: Vec<&str> = ode.coeffs.iter().map(String::as_str).collect();
        make_ode_with(ode.order, &sources, &ode.inhom, bindings)
            .map_err(|e| ConfigError::new("ode", e.to_string()))
    }

    fn build_gauge(
        &self,
        bindings: &BTreeMap<String, Complex64>,
        order: usize,
    ) -> Result<GaugeSpec, ConfigError> {
        let g = &self.gauge;
        let allowed: &[&str] = match g.family.as_str() {
            "characteristic" => &[],
            "riccati" => &["initial", "cap"],
            "strong_coupling" => &["c", "initial_g1", "cap"],
            "phase_integral" => &["q", "exact", "cap"],
            "gen_riccati3" => &["initial", "cap"],
            "analytic" => &["rows"],
            other => {
                return Err(ConfigError::new(
                    "gauge.family",
                    format!("unknown family '{other}'"),
                ))
            }
        };
        let present = [
            ("initial", g.initial.is_some()),
            ("cap", g.cap.is_some()),
            ("c", g.c.is_some()),
            ("initial_g1", g.initial_g1.is_some()),
            ("q", g.q.is_some()),
            ("exact", g.exact.is_some()),
            ("rows", g.rows.is_some()),
        ];
        if let Some((key, _)) = present.iter().find(|(k, set)| *set && !allowed.contains(k)) {
            return Err(ConfigError::new(
                format!("gauge.{key}"),
                format!("not an option of family '{}'", g.family),
            ));
        }
        let needs = |n: usize| {
            if order != n {
                Err(ConfigError::new(
                    "gauge.family",
                    format!("family '{}' requires order {n}, got {order}", g.family),
                ))
            } else {
                Ok(())
            }
        };
        if let Some(cap) = g.cap {
            if !(cap > 0.0) {
                return Err(ConfigError::new("gauge.cap", "cap must be positive"));
            }
        }
        let cplx = |[re, im]: [f64; 2]| Complex64::new(re, im);
        let expr = |key: String, src: &str| -> Result<Expr, ConfigError> {
            parse_with(src, bindings).map_err(|e| ConfigError::new(key, e.to_string()))
        };
        Ok(match g.family.as_str() {
            "characteristic" => GaugeSpec::Characteristic,
            "riccati" => {
                needs(2)?;
                let initial = match &g.initial {
                    Some(v) => {
                        let pair: [[f64; 2]; 2] = v.clone().try_into().map_err(|_| {
                            ConfigError::new("gauge.initial", "expected two [re, im] values")
                        })?;
                        if pair[0] == pair[1] {
                            return Err(ConfigError::new(
                                "gauge.initial",
                                "initial values must be distinct",
                            ));
                        }
                        Some([cplx(pair[0]), cplx(pair[1])])
                    }
                    None => None,
                };
                GaugeSpec::Riccati(RiccatiCfg {
                    initial,
                    cap: g.cap,
                })
            }
            "strong_coupling" => {
                needs(2)?;
                if g.c == Some([0.0, 0.0]) {
                    return Err(ConfigError::new("gauge.c", "C must be nonzero"));
                }
                GaugeSpec::StrongCoupling(StrongCouplingCfg {
                    c: g.c.map(cplx),
                    initial_g1: g.initial_g1.map(cplx),
                    cap: g.cap,
                })
            }
            "phase_integral" => {
                needs(2)?;
                let q = match &g.q {
                    Some(src) => Some(expr("gauge.q".into(), src)?),
                    None => None,
                };
                GaugeSpec::PhaseIntegral(PhaseIntegralCfg {
                    q,
                    exact: g.exact.unwrap_or(false),
                    cap: g.cap,
                })
            }
            "gen_riccati3" => {
                needs(3)?;
                let initial = match &g.initial {
                    Some(v) => {
                        let b: [[[f64; 2]; 2]; 3] = v.clone().try_into().map_err(|_| {
                            ConfigError::new(
                                "gauge.initial",
                                "expected three [[re, im], [re, im]] pairs",
                            )
                        })?;
                        let b = b.map(|[g1, g2]| (cplx(g1), cplx(g2)));
                        if b[0].0 == b[1].0 || b[0].0 == b[2].0 || b[1].0 == b[2].0 {
                            return Err(ConfigError::new(
                                "gauge.initial",
                                "g1 values must be pairwise distinct",
                            ));
                        }
                        Some(b)
                    }
                    None => None,
                };
                GaugeSpec::GenRiccati3(GenRiccati3Cfg {
                    initial,
                    cap: g.cap,
                })
            }
            "analytic" => {
                let rows = g.rows.as_ref().ok_or_else(|| {
                    ConfigError::new("gauge.rows", "required for family 'analytic'")
                })?;
                if rows.len() + 1 != order || rows.iter().any(|r| r.len() != order) {
                    return Err(ConfigError::new(
                        "gauge.rows",
                        format!("expected {} rows of {} expressions", order - 1, order),
                    ));
                }
                let parsed = rows
                    .iter()
                    .enumerate()
                    .map(|(m, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(n, src)| expr(format!("gauge.rows[{m}][{n}]"), src))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                GaugeSpec::Analytic(
                    AnalyticGauge::new(parsed)
                        .map_err(|e| ConfigError::new("gauge.rows", e.to_string()))?,
                )
            }
            _ => unreachable!("family validated above"),
        })
    }

    fn build_solver(&self) -> Result<SolveConfig, ConfigError> {
        let s = &self.solver;
        let d = SolveConfig::default();
        let cfg = SolveConfig {
            rel_tol: s.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: s.abs_tol.unwrap_or(d.abs_tol),
            h_init: s.h_init,
            h_min: s.h_min.unwrap_or(d.h_min),
            h_max: s.h_max.unwrap_or(d.h_max),
            max_steps: s.max_steps.unwrap_or(d.max_steps),
            blowup_cap: s.blowup_cap.unwrap_or(d.blowup_cap),
            sample_count: self.outputs.sample_count.unwrap_or(d.sample_count),
            record_steps: s.record_steps.unwrap_or(d.record_steps),
        };
        if cfg.sample_count < 2 {
            return Err(ConfigError::new(
                "outputs.sample_count",
                "must be at least 2",
            ));
        }
        if !(cfg.rel_tol > 0.0) {
            return Err(ConfigError::new("solver.rel_tol", "must be positive"));
        }
        if !(cfg.abs_tol > 0.0) {
            return Err(ConfigError::new("solver.abs_tol", "must be positive"));
        }
        if !(cfg.h_min > 0.0 && cfg.h_min <= cfg.h_max) {
            return Err(ConfigError::new("solver.h_min", "need 0 < h_min <= h_max"));
        }
        if matches!(cfg.h_init, Some(h) if !(h > 0.0)) {
            return Err(ConfigError::new("solver.h_init", "must be positive"));
        }
        if cfg.max_steps == 0 {
            return Err(ConfigError::new("solver.max_steps", "must be positive"));
        }
        if !(cfg.blowup_cap > 0.0) {
            return Err(ConfigError::new("solver.blowup_cap", "must be positive"));
        }
        Ok(cfg)
    }
}

/// Overwrites the numeric value at a dotted key such as `params.lambda`.
pub fn set_numeric(table: &mut toml::Table, key: &str, value: f64) -> Result<(), ConfigError> {
    let not_numeric =
        || ConfigError::new(key, "sweep parameter must address an existing numeric key");
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(not_numeric)?;
    let mut current = table;
    for p in parts {
        current = current
            .get_mut(p)
            .and_then(toml::Value::as_table_mut)
            .ok_or_else(not_numeric)?;
    }
    match current.get_mut(last) {
        Some(slot @ toml::Value::Float(_)) => *slot = toml::Value::Float(value),
        Some(slot @ toml::Value::Integer(_)) => {
            *slot = if value.fract() == 0.0 && value.abs() < 9.0e15 {
                toml::Value::Integer(value as i64)
            } else {
                toml::Value::Float(value)
            }
        }
        _ => return Err(not_numeric()),
    }
    Ok(())
}
