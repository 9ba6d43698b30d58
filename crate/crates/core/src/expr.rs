//! Closed-form scalar expressions in one variable with exact jets.
//!
//! Data descriptors (initial profiles, boundary signals, forcing factors,
//! cutoffs) are written in a tiny language:
//!
//! ```text
//! exp(-x) * (1 + x^2)      sin(t) - 0.5*cos(2*t)      x^0.3 * eta(x, 0.5, 1.5)
//! ```
//!
//! `x`, `t`, `y` and `tau` all name the single independent variable.
//! `eta(u, a, b)` is the smooth cutoff equal to 1 for `|u| <= a` and 0 for
//! `|u| >= b`; `eta(u)` uses `a = 0.5`, `b = 1.5`.

use std::fmt;
use std::ops;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::series::Series;

pub const ETA_DEFAULT_FLAT: f64 = 0.5;
pub const ETA_DEFAULT_END: f64 = 1.5;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Eta { arg: Box<Expr>, flat: f64, end: f64 },
}

/// Scalar version of the cutoff: 1 on `[0, flat]`, 0 beyond `end`,
/// `psi(end-|u|) / (psi(end-|u|) + psi(|u|-flat))` in between.
pub fn eta(u: f64, flat: f64, end: f64) -> f64 {
    let r = u.abs();
    if r <= flat {
        1.0
    } else if r >= end {
        0.0
    } else {
        let p = (-1.0 / (end - r)).exp();
        let q = (-1.0 / (r - flat)).exp();
        p / (p + q)
    }
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn powf(self, p: f64) -> Expr {
        Expr::Pow(Box::new(self), p)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn eta(self, flat: f64, end: f64) -> Expr {
        Expr::Eta {
            arg: Box::new(self),
            flat,
            end,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src).parse_all()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Var => x,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, p) => {
                let v = a.eval(x);
                if p.fract() == 0.0 {
                    v.powi(*p as i32)
                } else {
                    v.powf(*p)
                }
            }
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Ln(a) => a.eval(x).ln(),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Eta { arg, flat, end } => eta(arg.eval(x), *flat, *end),
        }
    }

    /// Taylor expansion at `x0` truncated at `order`.
    pub fn series(&self, x0: f64, order: usize) -> Series {
        match self {
            Expr::Const(v) => Series::constant(*v, order),
            Expr::Var => Series::variable(x0, order),
            Expr::Add(a, b) => a.series(x0, order).add(&b.series(x0, order)),
            Expr::Sub(a, b) => a.series(x0, order).sub(&b.series(x0, order)),
            Expr::Mul(a, b) => a.series(x0, order).mul(&b.series(x0, order)),
            Expr::Div(a, b) => a.series(x0, order).div(&b.series(x0, order)),
            Expr::Neg(a) => a.series(x0, order).neg(),
            Expr::Pow(a, p) => a.series(x0, order).powf(*p),
            Expr::Exp(a) => a.series(x0, order).exp(),
            Expr::Ln(a) => a.series(x0, order).ln(),
            Expr::Sin(a) => a.series(x0, order).sin_cos().0,
            Expr::Cos(a) => a.series(x0, order).sin_cos().1,
            Expr::Eta { arg, flat, end } => {
                let u = arg.series(x0, order);
                let r = u.value().abs();
                // Every derivative of the transition vanishes at both edges.
                if r <= *flat {
                    Series::constant(1.0, order)
                } else if r >= *end {
                    Series::zero(order)
                } else {
                    let a = u.abs_away_from_zero();
                    let p = Series::constant(*end, order).sub(&a).flat_exp();
                    let q = a.sub(&Series::constant(*flat, order)).flat_exp();
                    p.div(&p.add(&q))
                }
            }
        }
    }

    /// Derivatives `f^(n)(x0)`, `n = 0..=order`, or the first order at which
    /// the jet does not exist.
    pub fn jet(&self, x0: f64, order: usize) -> Result<Vec<f64>> {
        let s = self.series(x0, order);
        if s.valid() < order + 1 {
            return Err(Error::JetUnderflow { order: s.valid() });
        }
        Ok(s.derivatives())
    }

    /// Like [`Expr::jet`] but returns whatever depth exists.
    pub fn partial_jet(&self, x0: f64, order: usize) -> Vec<f64> {
        self.series(x0, order).derivatives()
    }

    /// `d^n/dx^n` at `x`; NaN/inf where it does not exist.
    pub fn derivative(&self, x: f64, n: usize) -> f64 {
        if n == 0 {
            return self.eval(x);
        }
        let s = self.series(x, n);
        if s.valid() <= n {
            return f64::INFINITY;
        }
        s.derivatives()[n]
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $v:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(rhs))
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::$v(Box::new(self), Box::new(Expr::Const(rhs)))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v < 0.0 {
        write!(f, "({v:?})")
    } else {
        write!(f, "{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => fmt_num(*v, f),
            Expr::Var => write!(f, "x"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, p) => {
                write!(f, "({a})^")?;
                fmt_num(*p, f)
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Eta { arg, flat, end } => write!(f, "eta({arg}, {flat:?}, {end:?})"),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Expr, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    err: Option<Error>,
}

impl Parser {
    fn new(src: &str) -> Self {
        let mut toks = Vec::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        let mut err = None;
        while i < bytes.len() {
            let ch = bytes[i] as char;
            if ch.is_whitespace() {
                i += 1;
            } else if ch.is_ascii_digit() || ch == '.' {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                match src[start..i].parse::<f64>() {
                    Ok(v) => toks.push((start, Tok::Num(v))),
                    Err(_) => {
                        err.get_or_insert(Error::Parse {
                            pos: start,
                            msg: format!("bad number '{}'", &src[start..i]),
                        });
                    }
                }
            } else if ch.is_ascii_alphabetic() || ch == '_' {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(src[start..i].to_string())));
            } else if "+-*/^(),".contains(ch) {
                toks.push((i, Tok::Op(ch)));
                i += 1;
            } else {
                err.get_or_insert(Error::Parse {
                    pos: i,
                    msg: format!("unexpected character '{ch}'"),
                });
                i += 1;
            }
        }
        Parser { toks, pos: 0, err }
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(usize::MAX)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn peek_op(&self, c: char) -> bool {
        matches!(self.toks.get(self.pos), Some((_, Tok::Op(o))) if *o == c)
    }

    fn expect_op(&mut self, c: char) -> Result<()> {
        if self.peek_op(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected '{c}'"))
        }
    }

    fn parse_all(mut self) -> Result<Expr> {
        if let Some(e) = self.err.take() {
            return Err(e);
        }
        if self.toks.is_empty() {
            return self.fail("empty expression");
        }
        let e = self.expr()?;
        if self.pos != self.toks.len() {
            return self.fail("trailing input");
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.peek_op('+') {
                self.pos += 1;
                lhs = lhs + self.term()?;
            } else if self.peek_op('-') {
                self.pos += 1;
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.peek_op('*') {
                self.pos += 1;
                lhs = lhs * self.unary()?;
            } else if self.peek_op('/') {
                self.pos += 1;
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op('-') {
            self.pos += 1;
            let e = self.unary()?;
            return Ok(match e {
                Expr::Const(v) => Expr::Const(-v),
                e => -e,
            });
        }
        if self.peek_op('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek_op('^') {
            self.pos += 1;
            let at = self.here();
            let ex = self.unary()?;
            let p = constant_value(&ex).ok_or(Error::Parse {
                pos: at,
                msg: "exponent must be constant".into(),
            })?;
            return Ok(base.powf(p));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect_op('(')?;
        let mut out = vec![self.expr()?];
        while self.peek_op(',') {
            self.pos += 1;
            out.push(self.expr()?);
        }
        self.expect_op(')')?;
        Ok(out)
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some((_, tok)) = self.toks.get(self.pos).cloned() else {
            return self.fail("unexpected end of input");
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.here();
                self.pos += 1;
                match name.as_str() {
                    "x" | "t" | "y" | "tau" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "exp" | "sin" | "cos" | "ln" | "sqrt" => {
                        let mut a = self.args()?;
                        if a.len() != 1 {
                            return Err(Error::Parse {
                                pos: at,
                                msg: format!("{name} takes one argument"),
                            });
                        }
                        let a = a.pop().unwrap();
                        Ok(match name.as_str() {
                            "exp" => a.exp(),
                            "sin" => a.sin(),
                            "cos" => a.cos(),
                            "ln" => Expr::Ln(Box::new(a)),
                            _ => a.powf(0.5),
                        })
                    }
                    "eta" => {
                        let a = self.args()?;
                        let (flat, end) = match a.len() {
                            1 => (ETA_DEFAULT_FLAT, ETA_DEFAULT_END),
                            3 => match (constant_value(&a[1]), constant_value(&a[2])) {
                                (Some(p), Some(q)) if 0.0 < p && p < q => (p, q),
                                _ => {
                                    return Err(Error::Parse {
                                        pos: at,
                                        msg: "eta needs constants 0 < a < b".into(),
                                    })
                                }
                            },
                            _ => {
                                return Err(Error::Parse {
                                    pos: at,
                                    msg: "eta takes 1 or 3 arguments".into(),
                                })
                            }
                        };
                        Ok(a.into_iter().next().unwrap().eta(flat, end))
                    }
                    other => Err(Error::Parse {
                        pos: at,
                        msg: format!("unknown identifier '{other}'"),
                    }),
                }
            }
            Tok::Op(c) => self.fail(format!("unexpected '{c}'")),
        }
    }
}

fn has_var(e: &Expr) -> bool {
    match e {
        Expr::Const(_) => false,
        Expr::Var => true,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            has_var(a) || has_var(b)
        }
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Ln(a) | Expr::Sin(a) | Expr::Cos(a) => {
            has_var(a)
        }
        Expr::Eta { arg, .. } => has_var(arg),
    }
}

fn constant_value(e: &Expr) -> Option<f64> {
    (!has_var(e)).then(|| e.eval(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_derivative(e: &Expr, x: f64, n: usize) -> f64 {
        // Repeated central differences; only used as a loose cross-check.
        let h = 2e-3;
        match n {
            0 => e.eval(x),
            _ => (fd_derivative(e, x + h, n - 1) - fd_derivative(e, x - h, n - 1)) / (2.0 * h),
        }
    }

    #[test]
    fn parse_and_eval() {
        let e = Expr::parse("exp(-x) * (1 + x^2) - 3*sin(2*t)/4").unwrap();
        let x: f64 = 0.7;
        let want = (-x).exp() * (1.0 + x * x) - 3.0 * (2.0 * x).sin() / 4.0;
        assert!((e.eval(x) - want).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_position() {
        match Expr::parse("exp(x) + @") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 9),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("x^x").is_err());
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("eta(x, 2, 1)").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in ["exp(-x)*(1+x^2)", "x^0.3*eta(x, 0.5, 1.5)", "-2.5*cos(t)/(1+t)", "ln(2+x)"] {
            let e = Expr::parse(src).unwrap();
            let back = Expr::parse(&e.to_string()).unwrap();
            for x in [0.1, 0.6, 1.2] {
                assert!((e.eval(x) - back.eval(x)).abs() < 1e-14, "{src}");
            }
        }
    }

    #[test]
    fn jets_agree_with_finite_differences() {
        let e = Expr::parse("exp(-x)*sin(3*x) + eta(x, 0.2, 1.4)*x^2").unwrap();
        for &x0 in &[0.1, 0.5, 0.9] {
            let j = e.jet(x0, 3).unwrap();
            for n in 0..=3 {
                let fd = fd_derivative(&e, x0, n);
                assert!((j[n] - fd).abs() < 5e-3 * (1.0 + fd.abs()), "n={n} x0={x0}: {} vs {}", j[n], fd);
            }
        }
    }

    #[test]
    fn eta_is_flat_at_zero_and_compact() {
        let e = Expr::parse("eta(x)").unwrap();
        assert_eq!(e.jet(0.0, 6).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(e.eval(1.5), 0.0);
        assert_eq!(e.eval(3.0), 0.0);
        assert!(e.eval(1.0) > 0.0 && e.eval(1.0) < 1.0);
        // Even in its argument.
        assert!((e.eval(-1.1) - e.eval(1.1)).abs() < 1e-15);
    }

    #[test]
    fn rough_power_has_short_jet() {
        let e = Expr::parse("x^0.3*eta(x)").unwrap();
        assert_eq!(e.jet(0.0, 0).unwrap(), vec![0.0]);
        assert!(matches!(e.jet(0.0, 1), Err(Error::JetUnderflow { order: 1 })));
        let e = Expr::parse("x^1.3*eta(x)").unwrap();
        assert_eq!(e.jet(0.0, 1).unwrap(), vec![0.0, 0.0]);
        assert!(e.jet(0.0, 2).is_err());
    }
}
