use super::{BinOp, Expr, Func};

impl Expr {
    /// Symbolic derivative with respect to `t`.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var => Expr::one(),
            Expr::Neg(a) => Expr::neg(a.differentiate()),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                match op {
                    BinOp::Add => Expr::add(a.differentiate(), b.differentiate()),
                    BinOp::Sub => Expr::sub(a.differentiate(), b.differentiate()),
                    BinOp::Mul => Expr::add(
                        Expr::mul(a.differentiate(), b.clone()),
                        Expr::mul(a.clone(), b.differentiate()),
                    ),
                    BinOp::Div => {
                        // (a'b - ab') / b^2
                        let num = Expr::sub(
                            Expr::mul(a.differentiate(), b.clone()),
                            Expr::mul(a.clone(), b.differentiate()),
                        );
                        Expr::div(num, Expr::pow(b.clone(), Expr::constant(2.0)))
                    }
                    BinOp::Pow => differentiate_pow(a, b),
                }
            }
            Expr::Call(func, a) => {
                let inner = a.differentiate();
                if inner.is_zero() {
                    return Expr::zero();
                }
                let a = a.as_ref().clone();
                let outer = match func {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Ln => return Expr::div(inner, a),
                    Func::Sqrt => {
                        return Expr::div(
                            inner,
                            Expr::mul(Expr::constant(2.0), Expr::call(Func::Sqrt, a)),
                        )
                    }
                };
                Expr::mul(inner, outer)
            }
        }
    }

    /// The `k`-th derivative.
    pub fn nth_derivative(&self, k: usize) -> Expr {
        (0..k).fold(self.clone(), |e, _| e.differentiate())
    }
}

fn differentiate_pow(base: &Expr, exponent: &Expr) -> Expr {
    let db = base.differentiate();
    if !exponent.depends_on_t() {
        // b * a^(b-1) * a'
        let reduced = match exponent.as_const() {
            Some(c) => Expr::constant(c - 1.0),
            None => Expr::sub(exponent.clone(), Expr::one()),
        };
        let power = Expr::mul(exponent.clone(), Expr::pow(base.clone(), reduced));
        return Expr::mul(power, db);
    }
    // a^b * (b' ln a + b a'/a)
    let de = exponent.differentiate();
    let log_term = Expr::mul(de, Expr::call(Func::Ln, base.clone()));
    let base_term = Expr::div(Expr::mul(exponent.clone(), db), base.clone());
    Expr::mul(
        Expr::pow(base.clone(), exponent.clone()),
        Expr::add(log_term, base_term),
    )
}
