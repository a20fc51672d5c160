use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::{Expr, Func};

/// Syntax error with the byte offset where parsing stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.expected)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(ch) = self.src[self.pos..].chars().next() {
            if !ch.is_whitespace() {
                break;
            }
            self.pos += ch.len_utf8();
        }
    }

    /// Returns the token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(ch) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        let single = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if ch.is_ascii_digit() || ch == '.' {
            return self.number(start);
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let len = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(rest.len());
            self.pos += len;
            return Ok((Tok::Ident(rest[..len].to_string()), start));
        }
        Err(ParseError {
            offset: start,
            expected: format!("unexpected character '{ch}'"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        let digits = |end: &mut usize| {
            let from = *end;
            while *end < bytes.len() && bytes[*end].is_ascii_digit() {
                *end += 1;
            }
            *end > from
        };
        let int_digits = digits(&mut end);
        let mut frac_digits = false;
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            frac_digits = digits(&mut end);
        }
        if !int_digits && !frac_digits {
            return Err(ParseError {
                offset: start,
                expected: "expected digits".into(),
            });
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp_end = end + 1;
            if exp_end < bytes.len() && (bytes[exp_end] == b'+' || bytes[exp_end] == b'-') {
                exp_end += 1;
            }
            if digits(&mut exp_end) {
                end = exp_end;
            }
        }
        let text = &self.src[start..end];
        let value = text.parse::<f64>().map_err(|_| ParseError {
            offset: start,
            expected: format!("invalid number '{text}'"),
        })?;
        self.pos = end;
        Ok((Tok::Num(value), start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    offset: usize,
    bindings: &'a BTreeMap<String, Complex64>,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, offset) = self.lexer.next()?;
        self.tok = tok;
        self.offset = offset;
        Ok(())
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset,
            expected: expected.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.advance()?;
                    lhs = Expr::Binary(super::BinOp::Add, lhs.into(), self.term()?.into());
                }
                Tok::Minus => {
                    self.advance()?;
                    lhs = Expr::Binary(super::BinOp::Sub, lhs.into(), self.term()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.advance()?;
                    lhs = Expr::Binary(super::BinOp::Mul, lhs.into(), self.unary()?.into());
                }
                Tok::Slash => {
                    self.advance()?;
                    lhs = Expr::Binary(super::BinOp::Div, lhs.into(), self.unary()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.tok {
            Tok::Minus => {
                self.advance()?;
                Ok(Expr::Neg(self.unary()?.into()))
            }
            Tok::Plus => {
                self.advance()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(
                super::BinOp::Pow,
                base.into(),
                exponent.into(),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::constant(v))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.error("expected ')'"));
                }
                self.advance()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let name_offset = self.offset;
                self.advance()?;
                if let Some(func) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return Err(self.error(&format!("expected '(' after {name}")));
                    }
                    self.advance()?;
                    let arg = self.expr()?;
                    if self.tok != Tok::RParen {
                        return Err(self.error("expected ')'"));
                    }
                    self.advance()?;
                    return Ok(Expr::call(func, arg));
                }
                match name.as_str() {
                    "t" => Ok(Expr::Var),
                    "i" => Ok(Expr::constant(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::constant(std::f64::consts::PI)),
                    _ => match self.bindings.get(&name) {
                        Some(v) => Ok(Expr::Const(*v)),
                        None => Err(ParseError {
                            offset: name_offset,
                            expected: format!("unknown identifier '{name}'"),
                        }),
                    },
                }
            }
            Tok::End => Err(self.error("expected operand")),
            _ => Err(self.error("expected operand")),
        }
    }
}

/// Parses an expression in `t`.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    parse_with(source, &BTreeMap::new())
}

/// Parses an expression in which the given names stand for constants.
pub fn parse_with(
    source: &str,
    bindings: &BTreeMap<String, Complex64>,
) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        lexer: Lexer {
            src: source,
            pos: 0,
        },
        tok: Tok::End,
        offset: 0,
        bindings,
    };
    parser.advance()?;
    if parser.tok == Tok::End {
        return Err(parser.error("expected expression, found empty input"));
    }
    let e = parser.expr()?;
    if parser.tok != Tok::End {
        return Err(parser.error("expected operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinOp;

    #[test]
    fn missing_operand_offset() {
        let err = parse("t +").unwrap_err();
        assert_eq!(err.offset, 3);
        assert_eq!(err.expected, "expected operand");
    }

    #[test]
    fn sine_of_product() {
        let e = parse("sin(2*t)").unwrap();
        match e {
            Expr::Call(Func::Sin, arg) => {
                assert!(matches!(&*arg, Expr::Binary(BinOp::Mul, ..)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.eval_real(0.0).unwrap().re, 512.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("1 + 2*3^2").unwrap().eval_real(0.0).unwrap().re, 19.0);
        assert_eq!(parse("-t^2").unwrap().eval_real(3.0).unwrap().re, -9.0);
        assert_eq!(parse("8/2/2").unwrap().eval_real(0.0).unwrap().re, 2.0);
        assert_eq!(parse("1-2-3").unwrap().eval_real(0.0).unwrap().re, -4.0);
    }

    #[test]
    fn scientific_notation() {
        let v = parse("1.5e-3*t").unwrap().eval_real(2.0).unwrap();
        assert_eq!(v.re, 3e-3);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse("").unwrap_err().offset, 0);
        assert_eq!(parse("(t+1").unwrap_err().offset, 4);
        assert_eq!(parse("t t").unwrap_err().offset, 2);
        let err = parse("foo(t)").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(err.expected.contains("foo"));
        assert_eq!(parse("Sin(t)").unwrap_err().offset, 0);
        assert_eq!(parse("2 $ 3").unwrap_err().offset, 2);
        assert_eq!(parse("sqrt t").unwrap_err().offset, 5);
    }

    #[test]
    fn bindings_become_constants() {
        let mut env = BTreeMap::new();
        env.insert("lambda".to_string(), Complex64::new(4.0, 0.0));
        let e = parse_with("lambda^2*t", &env).unwrap();
        assert_eq!(e.eval_real(0.5).unwrap().re, 8.0);
        assert!(parse("lambda").is_err());
    }
}
