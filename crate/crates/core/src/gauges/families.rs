use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Expr, Func};
use crate::model::LinearOde;
use crate::transform::{AnalyticGauge, GaugeDynamics, GaugeValues};

use super::roots::characteristic_roots;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default magnitude above which a co-integrated gauge counts as blown up.
pub const DEFAULT_GAUGE_CAP: f64 = 1e8;

fn require_order(ode: &LinearOde, order: usize, what: &'static str) -> Result<()> {
    if ode.order() != order {
        return Err(Error::UnsupportedOrder {
            what,
            order: ode.order(),
        });
    }
    Ok(())
}

fn check_cap(state: &[Complex64], cap: f64, t: f64) -> Result<()> {
    if state.iter().any(|v| !(v.norm() <= cap)) {
        return Err(Error::RiccatiBlowup { t });
    }
    Ok(())
}

/// `g' = -(f_1 g + f_0 + g²)`.
pub fn riccati_rhs(ode: &LinearOde, t: f64, g: Complex64) -> Result<Complex64> {
    require_order(ode, 2, "Riccati gauge")?;
    let f0 = ode.coeff(0).eval_real(t)?;
    let f1 = ode.coeff(1).eval_real(t)?;
    Ok(-(f1 * g + f0 + g * g))
}

/// Two distinct solutions of the Riccati equation, so that the split parts
/// evolve as independent exponentials.
#[derive(Debug, Clone)]
pub struct RiccatiGauge {
    pub initial: [Complex64; 2],
    pub cap: f64,
}

impl RiccatiGauge {
    /// Starts both solutions at the characteristic roots at `t1`.
    pub fn from_roots(ode: &LinearOde, t1: f64, cap: f64) -> Result<Self> {
        require_order(ode, 2, "Riccati gauge")?;
        let roots = characteristic_roots(ode, t1, None)?;
        Ok(RiccatiGauge {
            initial: [roots.roots[0], roots.roots[1]],
            cap,
        })
    }

    pub fn new(initial: [Complex64; 2], cap: f64) -> Result<Self> {
        if initial[0] == initial[1] {
            return Err(Error::InvalidArgument(
                "Riccati initial values must be distinct".into(),
            ));
        }
        Ok(RiccatiGauge { initial, cap })
    }
}

impl GaugeDynamics for RiccatiGauge {
    fn name(&self) -> &'static str {
        "riccati"
    }

    fn order(&self) -> usize {
        2
    }

    fn state_len(&self) -> usize {
        2
    }

    fn initial_state(&self, ode: &LinearOde, _t1: f64) -> Result<Vec<Complex64>> {
        require_order(ode, 2, "Riccati gauge")?;
        Ok(self.initial.to_vec())
    }

    fn state_rhs(
        &self,
        ode: &LinearOde,
        t: f64,
        state: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        check_cap(state, self.cap, t)?;
        out[0] = riccati_rhs(ode, t, state[0])?;
        out[1] = riccati_rhs(ode, t, state[1])?;
        Ok(())
    }

    fn values(&self, ode: &LinearOde, t: f64, state: &[Complex64]) -> Result<GaugeValues> {
        let dg = [
            riccati_rhs(ode, t, state[0])?,
            riccati_rhs(ode, t, state[1])?,
        ];
        Ok(GaugeValues::pair([state[0], state[1]], dg))
    }
}

/// Returns `(g_1', g_2)` for the strong-coupling pair, where
/// `g_1' = -[(f_1 - C e^{-∫f_1}) g_1 + f_0 + g_1²]` and `g_2 = g_1 - C e^{-∫f_1}`.
pub fn strong_coupling_rhs(
    ode: &LinearOde,
    t: f64,
    g1: Complex64,
    c: Complex64,
    int_f1: Complex64,
) -> Result<(Complex64, Complex64)> {
    require_order(ode, 2, "strong-coupling gauge")?;
    let f0 = ode.coeff(0).eval_real(t)?;
    let f1 = ode.coeff(1).eval_real(t)?;
    let gap = c * (-int_f1).exp();
    let dg1 = -((f1 - gap) * g1 + f0 + g1 * g1);
    Ok((dg1, g1 - gap))
}

/// Gauge pair with vanishing diagonal terms: each split part is driven only
/// by the other. State is `(g_1, ∫f_1)`.
#[derive(Debug, Clone)]
pub struct StrongCouplingGauge {
    pub c: Complex64,
    pub initial_g1: Complex64,
    pub cap: f64,
}

impl StrongCouplingGauge {
    pub fn new(c: Complex64, initial_g1: Complex64, cap: f64) -> Result<Self> {
        if c == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument(
                "strong-coupling constant C must be nonzero".into(),
            ));
        }
        Ok(StrongCouplingGauge { c, initial_g1, cap })
    }

    /// `C = ρ_1(t1) - ρ_2(t1)` unless given; `g_1(t1)` defaults to the first
    /// root of `r² + (f_1 - C) r + f_0 = 0`, i.e. a stationary point of the
    /// gauge equation at `t1`.
    pub fn with_defaults(
        ode: &LinearOde,
        t1: f64,
        c: Option<Complex64>,
        initial_g1: Option<Complex64>,
        cap: f64,
    ) -> Result<Self> {
        require_order(ode, 2, "strong-coupling gauge")?;
        let c = match c {
            Some(c) => c,
            None => {
                let r = characteristic_roots(ode, t1, None)?;
                r.roots[0] - r.roots[1]
            }
        };
        let g1 = match initial_g1 {
            Some(g) => g,
            None => {
                let f0 = ode.coeff(0).eval_real(t1)?;
                let f1 = ode.coeff(1).eval_real(t1)?;
                let mut r = super::roots::polynomial_roots(&[f0, f1 - c]);
                r.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));
                r[0]
            }
        };
        StrongCouplingGauge::new(c, g1, cap)
    }
}

impl GaugeDynamics for StrongCouplingGauge {
    fn name(&self) -> &'static str {
        "strong_coupling"
    }

    fn order(&self) -> usize {
        2
    }

    fn state_len(&self) -> usize {
        2
    }

    fn initial_state(&self, ode: &LinearOde, _t1: f64) -> Result<Vec<Complex64>> {
        require_order(ode, 2, "strong-coupling gauge")?;
        Ok(vec![self.initial_g1, Complex64::new(0.0, 0.0)])
    }

    fn state_rhs(
        &self,
        ode: &LinearOde,
        t: f64,
        state: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        check_cap(&state[..1], self.cap, t)?;
        let (dg1, _) = strong_coupling_rhs(ode, t, state[0], self.c, state[1])?;
        out[0] = dg1;
        out[1] = ode.coeff(1).eval_real(t)?;
        Ok(())
    }

    fn values(&self, ode: &LinearOde, t: f64, state: &[Complex64]) -> Result<GaugeValues> {
        let (dg1, g2) = strong_coupling_rhs(ode, t, state[0], self.c, state[1])?;
        let f1 = ode.coeff(1).eval_real(t)?;
        // d/dt (C e^{-∫f_1}) = -f_1 C e^{-∫f_1}
        let dg2 = dg1 + f1 * self.c * (-state[1]).exp();
        Ok(GaugeValues::pair([state[0], g2], [dg1, dg2]))
    }
}

/// `g_{1,2} = ±iq - q'/(2q) - f_1/2`.
pub fn g_from_q(
    q: Complex64,
    dq: Complex64,
    f1: Complex64,
    t: f64,
) -> Result<(Complex64, Complex64)> {
    if q == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroQ { t });
    }
    let common = -dq / (2.0 * q) - f1 / 2.0;
    Ok((I * q + common, -I * q + common))
}

/// The q-equation residual
/// `-q''/(2q) + 3q'²/(4q²) + f_0 - q² - f_1'/2 - f_1²/4`; zero exactly when
/// the q-built gauge solves the Riccati equation.
pub fn q_residual(q: &Expr, ode: &LinearOde, t: f64) -> Result<Complex64> {
    require_order(ode, 2, "q-function")?;
    let qv = q.eval_real(t)?;
    if qv == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroQ { t });
    }
    let dq = q.differentiate();
    let d2q = dq.differentiate().eval_real(t)?;
    let dq = dq.eval_real(t)?;
    q_residual_values(ode, t, qv, dq, d2q)
}

fn q_residual_values(
    ode: &LinearOde,
    t: f64,
    q: Complex64,
    dq: Complex64,
    d2q: Complex64,
) -> Result<Complex64> {
    let f0 = ode.coeff(0).eval_real(t)?;
    let f1 = ode.coeff(1).eval_real(t)?;
    let df1 = ode.coeff_deriv(1).eval_real(t)?;
    Ok(-d2q / (2.0 * q) + 3.0 * dq * dq / (4.0 * q * q) + f0 - q * q - df1 / 2.0 - f1 * f1 / 4.0)
}

/// `q = sqrt(f_0)`, the leading-order choice.
pub fn default_q(ode: &LinearOde) -> Expr {
    Expr::call(Func::Sqrt, ode.coeff(0).clone())
}

/// Analytic gauge `g_{1,2} = ±iq - q'/(2q) - f_1/2` built symbolically from `q`.
pub fn phase_integral_gauge(ode: &LinearOde, q: Option<Expr>) -> Result<AnalyticGauge> {
    require_order(ode, 2, "phase-integral gauge")?;
    let q = q.unwrap_or_else(|| default_q(ode));
    let dq = q.differentiate();
    let common = Expr::sub(
        Expr::neg(Expr::div(dq, Expr::mul(Expr::constant(2.0), q.clone()))),
        Expr::div(ode.coeff(1).clone(), Expr::constant(2.0)),
    );
    let iq = Expr::mul(Expr::constant(I), q);
    AnalyticGauge::new(vec![vec![
        Expr::add(iq.clone(), common.clone()),
        Expr::add(Expr::neg(iq), common),
    ]])
}

/// Phase-integral gauge whose `q` solves the q-equation exactly, carried as
/// the state `(q, q')`.
#[derive(Debug, Clone)]
pub struct ExactQGauge {
    pub q0: Complex64,
    pub dq0: Complex64,
    pub cap: f64,
}

impl ExactQGauge {
    /// Seeds with `q = sqrt(f_0)` and its derivative at `t1`.
    pub fn from_leading_order(ode: &LinearOde, t1: f64, cap: f64) -> Result<Self> {
        require_order(ode, 2, "phase-integral gauge")?;
        let q = default_q(ode);
        let q0 = q.eval_real(t1)?;
        if q0 == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroQ { t: t1 });
        }
        let dq0 = q.differentiate().eval_real(t1)?;
        Ok(ExactQGauge { q0, dq0, cap })
    }

    /// `q''` from the q-equation.
    pub fn second_derivative(
        ode: &LinearOde,
        t: f64,
        q: Complex64,
        dq: Complex64,
    ) -> Result<Complex64> {
        if q == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroQ { t });
        }
        let f0 = ode.coeff(0).eval_real(t)?;
        let f1 = ode.coeff(1).eval_real(t)?;
        let df1 = ode.coeff_deriv(1).eval_real(t)?;
        Ok(2.0 * q * (3.0 * dq * dq / (4.0 * q * q) + f0 - q * q - df1 / 2.0 - f1 * f1 / 4.0))
    }
}

impl GaugeDynamics for ExactQGauge {
    fn name(&self) -> &'static str {
        "phase_integral_exact"
    }

    fn order(&self) -> usize {
        2
    }

    fn state_len(&self) -> usize {
        2
    }

    fn initial_state(&self, ode: &LinearOde, _t1: f64) -> Result<Vec<Complex64>> {
        require_order(ode, 2, "phase-integral gauge")?;
        Ok(vec![self.q0, self.dq0])
    }

    fn state_rhs(
        &self,
        ode: &LinearOde,
        t: f64,
        state: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        check_cap(state, self.cap, t)?;
        out[0] = state[1];
        out[1] = ExactQGauge::second_derivative(ode, t, state[0], state[1])?;
        Ok(())
    }

    fn values(&self, ode: &LinearOde, t: f64, state: &[Complex64]) -> Result<GaugeValues> {
        let (q, dq) = (state[0], state[1]);
        let d2q = ExactQGauge::second_derivative(ode, t, q, dq)?;
        let f1 = ode.coeff(1).eval_real(t)?;
        let df1 = ode.coeff_deriv(1).eval_real(t)?;
        let (g1, g2) = g_from_q(q, dq, f1, t)?;
        let common = -(d2q * q - dq * dq) / (2.0 * q * q) - df1 / 2.0;
        Ok(GaugeValues::pair(
            [g1, g2],
            [I * dq + common, -I * dq + common],
        ))
    }
}

/// One branch of the third-order generalized Riccati system:
/// `g_1' = g_2 - g_1²`, `g_2' = -(f_2 g_2 + f_1 g_1 + f_0 + g_1 g_2)`.
pub fn gen_riccati3_rhs(
    ode: &LinearOde,
    t: f64,
    branch: (Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    require_order(ode, 3, "generalized Riccati gauge")?;
    let f = ode.coeff_values(t)?;
    let (g1, g2) = branch;
    Ok((g2 - g1 * g1, -(f[2] * g2 + f[1] * g1 + f[0] + g1 * g2)))
}

/// `g'' + g'(3g + f_2) + f_1 g + f_0 + f_2 g² + g³` for a symbolic `g`.
pub fn gen_riccati3_residual(g1: &Expr, ode: &LinearOde, t: f64) -> Result<Complex64> {
    require_order(ode, 3, "generalized Riccati residual")?;
    let f = ode.coeff_values(t)?;
    let dg = g1.differentiate();
    let d2g = dg.differentiate().eval_real(t)?;
    let dg = dg.eval_real(t)?;
    let g = g1.eval_real(t)?;
    Ok(d2g + dg * (3.0 * g + f[2]) + f[1] * g + f[0] + f[2] * g * g + g * g * g)
}

/// Three branches of the generalized Riccati system; the split parts then
/// evolve as `y_n' = g_{1,n} y_n` plus forcing.
#[derive(Debug, Clone)]
pub struct GenRiccati3Gauge {
    /// `(g_{1,n}, g_{2,n})` at `t1` for each branch.
    pub initial: [(Complex64, Complex64); 3],
    pub cap: f64,
}

impl GenRiccati3Gauge {
    pub fn new(initial: [(Complex64, Complex64); 3], cap: f64) -> Result<Self> {
        let g = [initial[0].0, initial[1].0, initial[2].0];
        if g[0] == g[1] || g[0] == g[2] || g[1] == g[2] {
            return Err(Error::InvalidArgument(
                "generalized Riccati branches need distinct g_1 values".into(),
            ));
        }
        Ok(GenRiccati3Gauge { initial, cap })
    }

    /// Seeds branch `n` with `(ρ_n, ρ_n²)` at `t1`.
    pub fn from_roots(ode: &LinearOde, t1: f64, cap: f64) -> Result<Self> {
        require_order(ode, 3, "generalized Riccati gauge")?;
        let r = characteristic_roots(ode, t1, None)?.roots;
        GenRiccati3Gauge::new(
            [
                (r[0], r[0] * r[0]),
                (r[1], r[1] * r[1]),
                (r[2], r[2] * r[2]),
            ],
            cap,
        )
    }
}

impl GaugeDynamics for GenRiccati3Gauge {
    fn name(&self) -> &'static str {
        "gen_riccati3"
    }

    fn order(&self) -> usize {
        3
    }

    fn state_len(&self) -> usize {
        6
    }

    /// Layout: `(g_{1,1}, g_{2,1}, g_{1,2}, g_{2,2}, g_{1,3}, g_{2,3})`.
    fn initial_state(&self, ode: &LinearOde, _t1: f64) -> Result<Vec<Complex64>> {
        require_order(ode, 3, "generalized Riccati gauge")?;
        Ok(self.initial.iter().flat_map(|&(a, b)| [a, b]).collect())
    }

    fn state_rhs(
        &self,
        ode: &LinearOde,
        t: f64,
        state: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        check_cap(state, self.cap, t)?;
        for n in 0..3 {
            let (d1, d2) = gen_riccati3_rhs(ode, t, (state[2 * n], state[2 * n + 1]))?;
            out[2 * n] = d1;
            out[2 * n + 1] = d2;
        }
        Ok(())
    }

    fn values(&self, ode: &LinearOde, t: f64, state: &[Complex64]) -> Result<GaugeValues> {
        let mut d = [Complex64::new(0.0, 0.0); 6];
        self.state_rhs(ode, t, state, &mut d)?;
        let g = vec![state[0], state[2], state[4], state[1], state[3], state[5]];
        let dg = vec![d[0], d[2], d[4], d[1], d[3], d[5]];
        GaugeValues::new(3, g, dg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::model::make_ode;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn riccati_values() {
        let osc = make_ode(2, &["1", "0"], "0").unwrap();
        assert!(close(riccati_rhs(&osc, 0.0, I).unwrap(), c(0.0, 0.0)));
        assert!(close(
            riccati_rhs(&osc, 0.0, c(0.0, 0.0)).unwrap(),
            c(-1.0, 0.0)
        ));
        let other = make_ode(2, &["2", "3"], "0").unwrap();
        assert!(close(
            riccati_rhs(&other, 0.0, c(1.0, 0.0)).unwrap(),
            c(-6.0, 0.0)
        ));
        let cubic = make_ode(3, &["1", "0", "0"], "0").unwrap();
        assert!(riccati_rhs(&cubic, 0.0, I).is_err());
    }

    #[test]
    fn strong_coupling_values() {
        let osc = make_ode(2, &["1", "0"], "0").unwrap();
        let (dg1, g2) = strong_coupling_rhs(&osc, 0.0, I, c(0.0, 2.0), c(0.0, 0.0)).unwrap();
        assert!(close(dg1, c(-2.0, 0.0)));
        assert!(close(g2, c(0.0, -1.0)));
        // The pair satisfies both lines of the coupled gauge system.
        let g1 = I;
        assert!(close(dg1 + 1.0 + g1 * g2, c(0.0, 0.0)));
    }

    #[test]
    fn strong_coupling_defaults() {
        let osc = make_ode(2, &["1", "0"], "0").unwrap();
        let g = StrongCouplingGauge::with_defaults(&osc, 0.0, None, None, 1e8).unwrap();
        assert!(close(g.c, c(0.0, 2.0)));
        // Stationary: g_1' = 0 at t1.
        let (dg1, _) = strong_coupling_rhs(&osc, 0.0, g.initial_g1, g.c, c(0.0, 0.0)).unwrap();
        assert!(dg1.norm() < 1e-12);
        assert!(StrongCouplingGauge::new(c(0.0, 0.0), I, 1e8).is_err());
    }

    #[test]
    fn q_to_gauge() {
        let (a, b) = g_from_q(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 0.0).unwrap();
        assert!(close(a, I) && close(b, -I));
        let (a, b) = g_from_q(c(2.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), 0.0).unwrap();
        assert!(close(a, c(-1.0, 2.0)) && close(b, c(-1.0, -2.0)));
        let (a, b) = g_from_q(c(0.3, 0.7), c(1.1, -0.2), c(0.4, 0.0), 0.0).unwrap();
        assert!(close(a - b, 2.0 * I * c(0.3, 0.7)));
        assert!(matches!(
            g_from_q(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), 2.5),
            Err(Error::ZeroQ { t }) if t == 2.5
        ));
    }

    #[test]
    fn q_residual_constant() {
        let ode = make_ode(2, &["9", "0"], "0").unwrap();
        assert!(q_residual(&parse("3").unwrap(), &ode, 1.0).unwrap().norm() < 1e-14);
    }

    #[test]
    fn q_residual_leading_order() {
        // q = sqrt(t): q' = t^{-1/2}/2, q'' = -t^{-3/2}/4, so the residual is
        // t^{-2}/8 + 3 t^{-2}/16 = 5/(16 t²).
        let ode = make_ode(2, &["t", "0"], "0").unwrap();
        let r = q_residual(&parse("sqrt(t)").unwrap(), &ode, 4.0).unwrap();
        assert!(close(r, c(5.0 / 256.0, 0.0)), "{r}");
    }

    #[test]
    fn phase_integral_gauge_matches_g_from_q() {
        let ode = make_ode(2, &["t", "0.5*sin(t)"], "0").unwrap();
        let gauge = phase_integral_gauge(&ode, None).unwrap();
        let v = gauge.values(2.0).unwrap();
        let q = 2f64.sqrt();
        let dq = 0.5 / q;
        let (a, b) = g_from_q(c(q, 0.0), c(dq, 0.0), c(0.5 * 2f64.sin(), 0.0), 2.0).unwrap();
        assert!(close(v.value(1, 0), a) && close(v.value(1, 1), b));
    }

    #[test]
    fn gen_riccati3_values() {
        let free = make_ode(3, &["0", "0", "0"], "0").unwrap();
        let (a, b) = gen_riccati3_rhs(&free, 0.0, (c(1.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!(close(a, c(0.0, 0.0)) && close(b, c(-1.0, 0.0)));

        let cubic = make_ode(3, &["-6", "11", "-6"], "0").unwrap();
        for r in [1.0, 2.0, 3.0] {
            let (a, b) = gen_riccati3_rhs(&cubic, 0.0, (c(r, 0.0), c(r * r, 0.0))).unwrap();
            assert!(a.norm() < 1e-12 && b.norm() < 1e-12);
        }

        // g_1 = 3/t, g_2 = g_1' + g_1² = 6/t² on y''' - 6/t³ y = 0.
        let power = make_ode(3, &["-6/t^3", "0", "0"], "0").unwrap();
        for t in [1.0, 2.0, 3.7] {
            let (a, b) =
                gen_riccati3_rhs(&power, t, (c(3.0 / t, 0.0), c(6.0 / (t * t), 0.0))).unwrap();
            assert!(close(a, c(-3.0 / (t * t), 0.0)), "{a}");
            assert!(close(b, c(-12.0 / (t * t * t), 0.0)), "{b}");
        }
    }

    #[test]
    fn gen_riccati3_residuals() {
        let a = 1.7;
        let ode = make_ode(3, &[&format!("-({a})^3"), "0", "0"], "0").unwrap();
        let g = Expr::constant(a);
        assert!(gen_riccati3_residual(&g, &ode, 0.3).unwrap().norm() < 1e-12);

        let power = make_ode(3, &["-6/t^3", "0", "0"], "0").unwrap();
        let g = parse("3/t").unwrap();
        for t in [1.0, 1.5, 4.0] {
            assert!(gen_riccati3_residual(&g, &power, t).unwrap().norm() < 1e-12);
        }
        // Any other exponent a with a(a-1)(a-2) = 6 works too: a = ±i√2.
        let g = Expr::div(
            Expr::constant(Complex64::new(0.0, 2f64.sqrt())),
            Expr::var(),
        );
        assert!(gen_riccati3_residual(&g, &power, 2.0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn gen_riccati3_layout() {
        let cubic = make_ode(3, &["-6", "11", "-6"], "0").unwrap();
        let gauge = GenRiccati3Gauge::from_roots(&cubic, 0.0, 1e8).unwrap();
        let state = gauge.initial_state(&cubic, 0.0).unwrap();
        let v = gauge.values(&cubic, 0.0, &state).unwrap();
        for (n, r) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            assert!(close(v.value(1, n), c(r, 0.0)));
            assert!(close(v.value(2, n), c(r * r, 0.0)));
            assert!(v.deriv(1, n).norm() < 1e-10 && v.deriv(2, n).norm() < 1e-10);
        }
    }

    #[test]
    fn blowup_detected() {
        let osc = make_ode(2, &["1", "0"], "0").unwrap();
        let g = RiccatiGauge::new([c(0.0, 0.0), c(1.0, 0.0)], 1e3).unwrap();
        let mut out = [c(0.0, 0.0); 2];
        assert!(matches!(
            g.state_rhs(&osc, 1.5, &[c(2e3, 0.0), c(0.0, 0.0)], &mut out),
            Err(Error::RiccatiBlowup { t }) if t == 1.5
        ));
    }
}
