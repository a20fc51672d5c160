//! Gauge-function splitting of N-th order linear ODEs.
//!
//! An equation `y^(N) + f_{N-1} y^(N-1) + ... + f_0 y + f = 0` is rewritten as
//! a first-order system for parts `y_1..y_N` with `y = Σ y_n`, where a choice
//! of gauge functions fixes the structure of that system. The crate provides
//! the expression language for coefficients, the transform itself, the usual
//! gauge families, an adaptive integrator, asymptotic comparisons and a
//! batch CLI.

// `!(x <= cap)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod gauges;
pub mod model;
pub mod solve;
pub mod transform;

pub use error::{Error, Result};
