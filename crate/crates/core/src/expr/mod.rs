//! Symbolic scalar functions of `t`.
//!
//! Coefficients and analytic gauges are written as text, parsed into an
//! [`Expr`] tree, evaluated over complex numbers and differentiated exactly.
//!
//! Grammar (function names are lowercase and case-sensitive):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | "+" unary | power ;
//! power   = atom [ "^" unary ] ;            (* right-associative *)
//! atom    = number | "t" | "i" | "pi" | name
//!         | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "exp" | "ln" | "sqrt" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! `name` refers to a caller-supplied constant binding (see [`parse_with`]).
//! `sqrt`, `ln` and non-integer powers use principal branches, so they have a
//! branch cut along the negative real axis: `sqrt(-1) = i`, `ln(-1) = iπ`,
//! and `a^b = exp(b·ln a)`.

mod diff;
mod parse;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, EvalFault, Result};

pub use parse::{parse, parse_with, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

/// Immutable expression tree. Subtrees are shared, so cloning is cheap.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var,
    Neg(Arc<Expr>),
    Binary(BinOp, Arc<Expr>, Arc<Expr>),
    Call(Func, Arc<Expr>),
}

// Named constructors rather than operator overloads, so that building a
// tree never looks like arithmetic on values.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(value: impl Into<Complex64>) -> Expr {
        Expr::Const(value.into())
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// True when the tree is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(Complex64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(Complex64::new(1.0, 0.0))
    }

    /// Whether `t` occurs anywhere in the tree.
    pub fn depends_on_t(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_t(),
            Expr::Binary(_, a, b) => a.depends_on_t() || b.depends_on_t(),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => (*inner).clone(),
            other => Expr::Neg(Arc::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => Expr::Binary(BinOp::Add, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::neg(b),
            _ => Expr::Binary(BinOp::Sub, Arc::new(a), Arc::new(b)),
        }
    }

    /// Product with constant factors moved to the left.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            _ if a.is_zero() || b.is_zero() => Expr::zero(),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            (None, Some(_)) => Expr::Binary(BinOp::Mul, Arc::new(b), Arc::new(a)),
            _ => Expr::Binary(BinOp::Mul, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != Complex64::new(0.0, 0.0) => Expr::Const(x / y),
            _ if b.is_one() => a,
            _ => Expr::Binary(BinOp::Div, Arc::new(a), Arc::new(b)),
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            return a;
        }
        if b.is_zero() {
            return Expr::one();
        }
        Expr::Binary(BinOp::Pow, Arc::new(a), Arc::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Arc::new(a))
    }

    /// Evaluates at a real time.
    pub fn eval_real(&self, t: f64) -> Result<Complex64> {
        self.eval(Complex64::new(t, 0.0))
    }

    /// Evaluates at a complex point using principal branches.
    pub fn eval(&self, t: Complex64) -> Result<Complex64> {
        let fault = |fault| Error::Eval { t, fault };
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Neg(a) => -a.eval(t)?,
            Expr::Binary(op, a, b) => {
                let x = a.eval(t)?;
                let y = b.eval(t)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == Complex64::new(0.0, 0.0) {
                            return Err(fault(EvalFault::DivisionByZero));
                        }
                        x / y
                    }
                    BinOp::Pow => complex_pow(x, y).ok_or_else(|| fault(EvalFault::ZeroPower))?,
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(t)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                    Func::Ln => {
                        if x == Complex64::new(0.0, 0.0) {
                            return Err(fault(EvalFault::LogOfZero));
                        }
                        x.ln()
                    }
                }
            }
        })
    }
}

/// `base^exponent` on the principal branch. Small integer exponents use
/// repeated multiplication, which agrees with `exp(b ln a)` but avoids a
/// spurious imaginary part for negative real bases.
fn complex_pow(base: Complex64, exponent: Complex64) -> Option<Complex64> {
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= 64.0 {
        let n = exponent.re as i32;
        if base == Complex64::new(0.0, 0.0) {
            return match n.cmp(&0) {
                std::cmp::Ordering::Greater => Some(base),
                std::cmp::Ordering::Equal => Some(Complex64::new(1.0, 0.0)),
                std::cmp::Ordering::Less => None,
            };
        }
        return Some(base.powi(n));
    }
    if base == Complex64::new(0.0, 0.0) {
        return if exponent.re > 0.0 { Some(base) } else { None };
    }
    Some((exponent * base.ln()).exp())
}

fn fmt_const(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match (c.re, c.im) {
        (re, 0.0) if !re.is_sign_negative() => write!(f, "{re:?}"),
        (re, 0.0) => write!(f, "({re:?})"),
        (0.0, im) => write!(f, "({im:?}*i)"),
        (re, im) => write!(f, "({re:?}+{im:?}*i)"),
    }
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }

    fn fmt_child(&self, child: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min_prec {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

/// Prints in the grammar accepted by [`parse`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_const(*c, f),
            Expr::Var => f.write_str("t"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                self.fmt_child(a, 4, f)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                let (left_min, right_min) = match op {
                    BinOp::Add | BinOp::Mul => (p, p),
                    BinOp::Sub | BinOp::Div => (p, p + 1),
                    BinOp::Pow => (p + 1, 3),
                };
                self.fmt_child(a, left_min, f)?;
                write!(f, "{}", op.symbol())?;
                self.fmt_child(b, right_min, f)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse(s)
    }
}
