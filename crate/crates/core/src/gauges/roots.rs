//! Pointwise roots of the characteristic polynomial
//! `ρ^N + f_{N-1} ρ^{N-1} + ... + f_1 ρ + f_0`, ordered by continuity.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::LinearOde;
use crate::transform::GaugeValues;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Roots closer than this (relative to `max(1, |ρ|)`) are a collision.
pub const COLLISION_FACTOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub t: f64,
    pub roots: Vec<Complex64>,
    pub derivs: Vec<Complex64>,
}

/// Monic polynomial with coefficients `c[0] + c[1] ρ + ... + ρ^N`.
fn eval_poly(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = ONE;
    let mut dp = ZERO;
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// `Σ |c_k| |ρ|^k + |ρ|^N`, the natural size of `P(ρ)`.
pub fn residual_scale(coeffs: &[Complex64], x: Complex64) -> f64 {
    let r = x.norm();
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * r.powi(k as i32))
        .sum::<f64>()
        + r.powi(coeffs.len() as i32)
}

fn quadratic(c0: Complex64, c1: Complex64) -> [Complex64; 2] {
    let s = (c1 * c1 - 4.0 * c0).sqrt();
    let s = if (c1.conj() * s).re >= 0.0 { s } else { -s };
    let q = -(c1 + s) / 2.0;
    if q == ZERO {
        [ZERO, ZERO]
    } else {
        [q, c0 / q]
    }
}

fn cubic(c0: Complex64, c1: Complex64, c2: Complex64) -> [Complex64; 3] {
    // ρ = x - c2/3 gives x³ + p x + q = 0.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let a = -q / 2.0 + disc;
    let b = -q / 2.0 - disc;
    let u3 = if a.norm() >= b.norm() { a } else { b };
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    if u3 == ZERO {
        return [-shift; 3];
    }
    let u = u3.powf(1.0 / 3.0);
    let mut out = [ZERO; 3];
    let mut w = ONE;
    for slot in out.iter_mut() {
        let uk = u * w;
        *slot = uk - p / (3.0 * uk) - shift;
        w *= omega;
    }
    out
}

fn companion_eigenvalues(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let m = DMatrix::from_fn(n, n, |r, c| {
        if r == n - 1 {
            -coeffs[c]
        } else if c == r + 1 {
            ONE
        } else {
            ZERO
        }
    });
    match m.clone().schur().eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => durand_kerner(coeffs),
    }
}

/// Simultaneous iteration; only used when the Schur form is unavailable.
fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powi(k as i32) * radius).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let (p, _) = eval_poly(coeffs, z[i]);
            let denom: Complex64 = (0..n).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            if denom != ZERO {
                let step = p / denom;
                z[i] -= step;
                delta = delta.max(step.norm());
            }
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    z
}

fn polish(coeffs: &[Complex64], mut x: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (p, dp) = eval_poly(coeffs, x);
        if p == ZERO || dp == ZERO {
            break;
        }
        let next = x - p / dp;
        if eval_poly(coeffs, next).0.norm() < p.norm() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Unordered roots of the monic polynomial with the given lower coefficients.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let raw = match coeffs.len() {
        0 => return Vec::new(),
        1 => vec![-coeffs[0]],
        2 => quadratic(coeffs[0], coeffs[1]).to_vec(),
        3 => cubic(coeffs[0], coeffs[1], coeffs[2]).to_vec(),
        _ => companion_eigenvalues(coeffs),
    };
    raw.into_iter().map(|x| polish(coeffs, x)).collect()
}

/// Canonical order: ascending real part, then descending imaginary part, so
/// a conjugate pair `±iω` is listed as `(+iω, -iω)`.
fn canonical_order(roots: &mut [Complex64]) {
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let tie = 1e-9 * scale;
    roots.sort_by(|a, b| {
        if (a.re - b.re).abs() > tie {
            a.re.total_cmp(&b.re)
        } else {
            b.im.total_cmp(&a.im)
        }
    });
}

/// Reorders `roots` to minimise the total distance to `prev`.
fn continue_order(roots: &[Complex64], prev: &[Complex64]) -> Vec<Complex64> {
    let n = roots.len();
    let best = (0..n)
        .permutations(n)
        .map(|perm| {
            let cost: f64 = perm
                .iter()
                .zip(prev)
                .map(|(&i, p)| (roots[i] - p).norm())
                .sum();
            (cost, perm)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, perm)| perm)
        .unwrap_or_default();
    best.into_iter().map(|i| roots[i]).collect()
}

/// Characteristic roots at `t` with their derivatives.
///
/// With `prev`, the roots are matched to it by minimal total distance;
/// otherwise they come in canonical order.
pub fn characteristic_roots(ode: &LinearOde, t: f64, prev: Option<&RootSet>) -> Result<RootSet> {
    let f = ode.coeff_values(t)?;
    let df = ode.coeff_deriv_values(t)?;
    let n = f.len();
    let mut roots = polynomial_roots(&f);
    match prev {
        Some(p) if p.roots.len() == n => roots = continue_order(&roots, &p.roots),
        _ => canonical_order(&mut roots),
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() < COLLISION_FACTOR * scale {
                return Err(Error::RootCollision { t, i, j });
            }
        }
    }
    let derivs = roots
        .iter()
        .map(|&r| {
            // ρ' = -(Σ f_k' ρ^k) / P'(ρ)
            let num: Complex64 = df.iter().rev().fold(ZERO, |acc, c| acc * r + c);
            let (_, dp) = eval_poly(&f, r);
            -num / dp
        })
        .collect();
    Ok(RootSet { t, roots, derivs })
}

/// Gauge `g_{m,n} = ρ_n^m` with `g'_{m,n} = m ρ_n^{m-1} ρ_n'`.
pub fn characteristic_values(roots: &RootSet) -> GaugeValues {
    let n = roots.roots.len();
    let mut g = Vec::with_capacity((n - 1) * n);
    let mut dg = Vec::with_capacity((n - 1) * n);
    for m in 1..n {
        for (r, dr) in roots.roots.iter().zip(&roots.derivs) {
            g.push(r.powi(m as i32));
            dg.push(m as f64 * r.powi(m as i32 - 1) * dr);
        }
    }
    GaugeValues::new(n, g, dg).expect("root set has N entries")
}
