use num_complex::Complex64;

use crate::error::{Error, Result};

/// Subdivision depth at which adaptive Simpson gives up.
pub const MAX_DEPTH: usize = 50;

struct Panel {
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
}

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (fa + 4.0 * fm + fb) * ((b - a) / 6.0)
}

fn refine<F>(f: &mut F, p: Panel, tol: f64, depth: usize) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH || m == p.a || m == p.b {
        return Err(Error::MaxDepth { a: p.a, b: p.b });
    }
    let l = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: flm,
        fb: p.fm,
        whole: left,
    };
    let r = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    Ok(refine(f, l, 0.5 * tol, depth + 1)? + refine(f, r, 0.5 * tol, depth + 1)?)
}

/// Adaptive Simpson estimate of `∫_a^b f(t) dt` with absolute error target `tol`.
pub fn quadrature<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !(tol > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs finite limits and a positive tolerance, got [{a}, {b}], tol {tol}"
        )));
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let fm = f(0.5 * (a + b))?;
    let whole = simpson(a, b, fa, fm, fb);
    refine(
        &mut f,
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        tol,
        0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(f: fn(f64) -> f64) -> impl FnMut(f64) -> Result<Complex64> {
        move |t| Ok(Complex64::new(f(t), 0.0))
    }

    #[test]
    fn textbook_integrals() {
        let pi = std::f64::consts::PI;
        assert!((quadrature(real(f64::sin), 0.0, pi, 1e-12).unwrap().re - 2.0).abs() < 1e-10);
        let v = quadrature(real(|t| 0.5 / t.sqrt()), 1.0, 4.0, 1e-12).unwrap();
        assert!((v.re - 1.0).abs() < 1e-10);
        let v = quadrature(real(f64::exp), 0.0, 1.0, 1e-12).unwrap();
        assert!((v.re - (std::f64::consts::E - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn complex_integrand_and_reversed_limits() {
        // ∫_0^{π/2} e^{it} dt = 1 + i
        let f = |t: f64| Ok(Complex64::new(0.0, t).exp());
        let v = quadrature(f, 0.0, std::f64::consts::FRAC_PI_2, 1e-12).unwrap();
        assert!((v - Complex64::new(1.0, 1.0)).norm() < 1e-10);
        let w = quadrature(f, std::f64::consts::FRAC_PI_2, 0.0, 1e-12).unwrap();
        assert!((v + w).norm() < 1e-10);
    }

    #[test]
    fn singular_integrand_fails() {
        let err = quadrature(real(|t| 1.0 / t.abs().max(1e-300)), -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::MaxDepth { .. }));
    }

    #[test]
    fn evaluation_errors_propagate() {
        let f = |t: f64| {
            if t > 0.5 {
                Err(Error::ZeroQ { t })
            } else {
                Ok(Complex64::new(1.0, 0.0))
            }
        };
        assert!(matches!(
            quadrature(f, 0.0, 1.0, 1e-8),
            Err(Error::ZeroQ { .. })
        ));
    }
}
