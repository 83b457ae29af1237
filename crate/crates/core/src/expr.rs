//! Rational-function expression trees over `(t, x_1..x_s, y_1..y_s)` and
//! named parameters.
//!
//! One tree can be evaluated in several scalar domains through [`EvalScalar`]:
//! exact rational points, truncated rational series, `f64` points, `f64`
//! series, and dual numbers (for exact first derivatives). Trees are immutable
//! after construction; evaluation is reentrant.
//!
//! The plain-text infix grammar used by the model data files is
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | postfix
//! postfix:= atom ('^' uint)?
//! atom   := uint | ident | '(' expr ')'
//! ```
//!
//! where `ident` is `t`, `x1..x9`, `y1..y9`, or a parameter name. There is no
//! separate fraction literal: `3/2` is division of constants and folds to the
//! exact rational.

use crate::algebra::Rational;
use crate::series::{FloatSeries, RationalSeries, SeriesError};
use std::collections::BTreeMap;
use std::fmt;

/// Variable kinds: the time-like variable and the two coordinate blocks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Var {
    T,
    /// `x_i`, 1-based.
    X(usize),
    /// `y_i`, 1-based.
    Y(usize),
}

/// Expression tree node. Integer powers are explicit; there is no general
/// exponentiation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Const(Rational),
    Param(String),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// Binding of parameter names to exact rational values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamEnv {
    map: BTreeMap<String, Rational>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, name: &str, value: Rational) -> Self {
        self.map.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: Rational) {
        self.map.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Rational> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.map.iter()
    }
}

/// Evaluation failure. `DivisionByZero` signals evaluation on a coordinate
/// hyperplane (a caller's domain violation), `DivisionBySingularSeries` the
/// series analogue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    DivisionByZero,
    DivisionBySingularSeries,
    UnboundParameter(String),
    VariableOutOfRange(Var),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::DivisionByZero => write!(f, "division by zero at evaluation point"),
            EvalError::DivisionBySingularSeries => {
                write!(f, "series division by a series with zero constant term")
            }
            EvalError::UnboundParameter(p) => write!(f, "unbound parameter `{p}`"),
            EvalError::VariableOutOfRange(v) => write!(f, "variable out of range: {v:?}"),
        }
    }
}

impl std::error::Error for EvalError {}

/// Scalar domain an expression can be evaluated in.
pub trait EvalScalar: Clone {
    /// Lifts a rational constant; `proto` fixes shape data (series order).
    fn lift(r: &Rational, proto: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, other: &Self) -> Result<Self, EvalError>;
}

impl EvalScalar for Rational {
    fn lift(r: &Rational, _proto: &Self) -> Self {
        r.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, other: &Self) -> Result<Self, EvalError> {
        if other.is_zero() {
            return Err(EvalError::DivisionByZero);
        }
        Ok(self / other)
    }
}

impl EvalScalar for f64 {
    fn lift(r: &Rational, _proto: &Self) -> Self {
        r.to_f64()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, other: &Self) -> Result<Self, EvalError> {
        if *other == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        Ok(self / other)
    }
}

impl EvalScalar for RationalSeries {
    fn lift(r: &Rational, proto: &Self) -> Self {
        RationalSeries::constant(r.clone(), proto.order())
    }
    fn add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn neg(&self) -> Self {
        RationalSeries::neg(self)
    }
    fn div(&self, other: &Self) -> Result<Self, EvalError> {
        RationalSeries::div(self, other).map_err(|e| match e {
            SeriesError::DivisionBySingularSeries => EvalError::DivisionBySingularSeries,
        })
    }
}

impl EvalScalar for FloatSeries {
    fn lift(r: &Rational, proto: &Self) -> Self {
        FloatSeries::constant(r.to_f64(), proto.order())
    }
    fn add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn neg(&self) -> Self {
        FloatSeries::neg(self)
    }
    fn div(&self, other: &Self) -> Result<Self, EvalError> {
        FloatSeries::div(self, other).map_err(|e| match e {
            SeriesError::DivisionBySingularSeries => EvalError::DivisionBySingularSeries,
        })
    }
}

/// Rational dual number `val + eps·ε` with `ε² = 0`; carries one exact
/// directional derivative through an evaluation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dual {
    pub val: Rational,
    pub eps: Rational,
}

impl Dual {
    pub fn constant(val: Rational) -> Self {
        Dual {
            val,
            eps: Rational::zero(),
        }
    }

    pub fn seed(val: Rational) -> Self {
        Dual {
            val,
            eps: Rational::one(),
        }
    }
}

impl EvalScalar for Dual {
    fn lift(r: &Rational, _proto: &Self) -> Self {
        Dual::constant(r.clone())
    }
    fn add(&self, other: &Self) -> Self {
        Dual {
            val: &self.val + &other.val,
            eps: &self.eps + &other.eps,
        }
    }
    fn mul(&self, other: &Self) -> Self {
        Dual {
            val: &self.val * &other.val,
            eps: &self.val * &other.eps + &self.eps * &other.val,
        }
    }
    fn neg(&self) -> Self {
        Dual {
            val: -&self.val,
            eps: -&self.eps,
        }
    }
    fn div(&self, other: &Self) -> Result<Self, EvalError> {
        if other.val.is_zero() {
            return Err(EvalError::DivisionByZero);
        }
        let val = &self.val / &other.val;
        // (a/b)' = (a' - (a/b) b') / b
        let eps = (&self.eps - &(&val * &other.eps)) / &other.val;
        Ok(Dual { val, eps })
    }
}

impl Expr {
    pub fn cnst(r: Rational) -> Expr {
        Expr::Const(r)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Rational::from_int(n))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn t() -> Expr {
        Expr::Var(Var::T)
    }

    pub fn x(i: usize) -> Expr {
        Expr::Var(Var::X(i))
    }

    pub fn y(i: usize) -> Expr {
        Expr::Var(Var::Y(i))
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    fn is_one_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// Sum with light constant folding (used by the system builders).
    pub fn add(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (a, b) if a.is_zero_const() => b,
            (a, b) if b.is_zero_const() => a,
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        if rhs.is_zero_const() {
            return self;
        }
        self.add(rhs.neg())
    }

    pub fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            e => Expr::Neg(Box::new(e)),
        }
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (a, _) if a.is_zero_const() => Expr::int(0),
            (_, b) if b.is_zero_const() => Expr::int(0),
            (a, b) if a.is_one_const() => b,
            (a, b) if b.is_one_const() => a,
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a * b),
            // Keep negations outermost so sums render as subtractions.
            (Expr::Neg(a), b) => a.mul(b).neg(),
            (a, Expr::Neg(b)) => a.mul(*b).neg(),
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    /// Quotient node. Panics if the denominator is the literal zero expression.
    pub fn div(self, rhs: Expr) -> Expr {
        assert!(!rhs.is_zero_const(), "division by the zero expression");
        if rhs.is_one_const() {
            return self;
        }
        if let (Expr::Const(a), Expr::Const(b)) = (&self, &rhs) {
            return Expr::Const(a / b);
        }
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn pow(self, exp: u32) -> Expr {
        match exp {
            0 => Expr::int(1),
            1 => self,
            _ => Expr::Pow(Box::new(self), exp),
        }
    }

    /// Evaluates in any scalar domain; `t` doubles as the shape prototype for
    /// lifted constants.
    pub fn eval<S: EvalScalar>(&self, env: &ParamEnv, t: &S, x: &[S], y: &[S]) -> Result<S, EvalError> {
        match self {
            Expr::Const(c) => Ok(S::lift(c, t)),
            Expr::Param(name) => match env.get(name) {
                Some(v) => Ok(S::lift(v, t)),
                None => Err(EvalError::UnboundParameter(name.clone())),
            },
            Expr::Var(Var::T) => Ok(t.clone()),
            Expr::Var(v @ Var::X(i)) => x
                .get(i.wrapping_sub(1))
                .cloned()
                .ok_or(EvalError::VariableOutOfRange(*v)),
            Expr::Var(v @ Var::Y(i)) => y
                .get(i.wrapping_sub(1))
                .cloned()
                .ok_or(EvalError::VariableOutOfRange(*v)),
            Expr::Add(a, b) => Ok(a.eval(env, t, x, y)?.add(&b.eval(env, t, x, y)?)),
            Expr::Mul(a, b) => Ok(a.eval(env, t, x, y)?.mul(&b.eval(env, t, x, y)?)),
            Expr::Neg(a) => Ok(a.eval(env, t, x, y)?.neg()),
            Expr::Div(a, b) => a.eval(env, t, x, y)?.div(&b.eval(env, t, x, y)?),
            Expr::Pow(a, e) => {
                // Integer powers by repeated multiplication.
                let base = a.eval(env, t, x, y)?;
                let mut acc = base.clone();
                for _ in 1..*e {
                    acc = acc.mul(&base);
                }
                Ok(acc)
            }
        }
    }

    /// Exact evaluation at a rational point.
    pub fn eval_point(
        &self,
        env: &ParamEnv,
        t: &Rational,
        x: &[Rational],
        y: &[Rational],
    ) -> Result<Rational, EvalError> {
        self.eval(env, t, x, y)
    }

    /// `f64` evaluation (the shooting path).
    pub fn eval_f64(&self, env: &ParamEnv, t: f64, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
        self.eval(env, &t, x, y)
    }

    /// Exact truncated series of the composition. All inputs must share one
    /// truncation order; denominators must have nonzero constant term.
    pub fn eval_series(
        &self,
        env: &ParamEnv,
        t: &RationalSeries,
        x: &[RationalSeries],
        y: &[RationalSeries],
    ) -> Result<RationalSeries, EvalError> {
        self.eval(env, t, x, y)
    }

    /// Structure-preserving variable renaming (used to restrict systems to
    /// invariant subspaces by identifying coordinates).
    pub fn map_vars(&self, f: &impl Fn(Var) -> Var) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => self.clone(),
            Expr::Var(v) => Expr::Var(f(*v)),
            Expr::Add(a, b) => Expr::Add(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.map_vars(f))),
            Expr::Pow(a, e) => Expr::Pow(Box::new(a.map_vars(f)), *e),
        }
    }

    /// Parameter names referenced anywhere in the tree.
    pub fn collect_params(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_params(out),
        }
    }
}

/// Block of variables a Jacobian is taken with respect to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WrtBlock {
    XBlock,
    YBlock,
}

/// Exact Jacobian of `es` with respect to one variable block at a rational
/// point, by forward-mode differentiation with dual numbers.
pub fn jacobian_at(
    es: &[Expr],
    wrt: WrtBlock,
    env: &ParamEnv,
    t: &Rational,
    x: &[Rational],
    y: &[Rational],
) -> Result<crate::algebra::QMatrix, EvalError> {
    let n = match wrt {
        WrtBlock::XBlock => x.len(),
        WrtBlock::YBlock => y.len(),
    };
    let mut jac = crate::algebra::QMatrix::zeros(es.len(), n);
    let td = Dual::constant(t.clone());
    for j in 0..n {
        let xd: Vec<Dual> = x
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if wrt == WrtBlock::XBlock && k == j {
                    Dual::seed(v.clone())
                } else {
                    Dual::constant(v.clone())
                }
            })
            .collect();
        let yd: Vec<Dual> = y
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if wrt == WrtBlock::YBlock && k == j {
                    Dual::seed(v.clone())
                } else {
                    Dual::constant(v.clone())
                }
            })
            .collect();
        for (i, e) in es.iter().enumerate() {
            jac[(i, j)] = e.eval(env, &td, &xd, &yd)?.eps;
        }
    }
    Ok(jac)
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parse failure with a 1-based column into the offending line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            col: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.parse_term()?;
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.bump();
                    acc = Expr::Add(Box::new(acc), Box::new(self.parse_term()?));
                }
                b'-' => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    acc = Expr::Add(Box::new(acc), Box::new(Expr::Neg(Box::new(rhs))));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.parse_unary()?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.bump();
                    acc = Expr::Mul(Box::new(acc), Box::new(self.parse_unary()?));
                }
                b'/' => {
                    self.bump();
                    let rhs = self.parse_unary()?;
                    if rhs.is_zero_const() {
                        return Err(self.error("division by constant zero"));
                    }
                    // Fold constant quotients so `3/2` is an exact literal.
                    if let (Expr::Const(a), Expr::Const(b)) = (&acc, &rhs) {
                        acc = Expr::Const(a / b);
                    } else {
                        acc = Expr::Div(Box::new(acc), Box::new(rhs));
                    }
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.parse_unary()?)));
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(b'^') {
            self.bump();
            let exp = self.parse_uint()?;
            if exp > 64 {
                return Err(self.error("exponent too large"));
            }
            return Ok(Expr::Pow(Box::new(base), exp as u32));
        }
        Ok(base)
    }

    fn parse_uint(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an unsigned integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("integer literal out of range"))
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.parse_expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.bump();
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.parse_uint()?;
                if n > i64::MAX as u64 {
                    return Err(self.error("integer literal out of range"));
                }
                Ok(Expr::int(n as i64))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                self.skip_ws();
                let start = self.pos;
                while self.pos < self.src.len()
                    && ((self.src[self.pos] as char).is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Ok(classify_ident(name))
            }
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

fn classify_ident(name: &str) -> Expr {
    if name == "t" {
        return Expr::t();
    }
    for (prefix, ctor) in [("x", Var::X as fn(usize) -> Var), ("y", Var::Y as fn(usize) -> Var)] {
        if let Some(rest) = name.strip_prefix(prefix) {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(i) = rest.parse::<usize>() {
                    if i >= 1 {
                        return Expr::Var(ctor(i));
                    }
                }
            }
        }
    }
    Expr::param(name)
}

/// Parses one expression in the data-file grammar.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src);
    let e = p.parse_expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input after expression"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Printing (inverse of the parser, used to freeze generated data files)
// ---------------------------------------------------------------------------

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) => 1,
        Expr::Neg(..) => 2,
        Expr::Mul(..) | Expr::Div(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Const(c) if c.is_negative() || !c.is_integer() => 3,
        _ => 5,
    }
}

fn write_prec(e: &Expr, min: u8, out: &mut String) {
    let p = precedence(e);
    if p < min {
        out.push('(');
    }
    match e {
        Expr::Const(c) => out.push_str(&c.to_string()),
        Expr::Param(name) => out.push_str(name),
        Expr::Var(Var::T) => out.push('t'),
        Expr::Var(Var::X(i)) => out.push_str(&format!("x{i}")),
        Expr::Var(Var::Y(i)) => out.push_str(&format!("y{i}")),
        Expr::Add(a, b) => {
            write_prec(a, 1, out);
            match &**b {
                Expr::Neg(inner) => {
                    out.push_str(" - ");
                    write_prec(inner, 2, out);
                }
                Expr::Const(c) if c.is_negative() => {
                    out.push_str(" - ");
                    write_prec(&Expr::Const(c.abs()), 2, out);
                }
                _ => {
                    out.push_str(" + ");
                    write_prec(b, 2, out);
                }
            }
        }
        Expr::Neg(a) => {
            out.push('-');
            write_prec(a, 3, out);
        }
        Expr::Mul(a, b) => {
            write_prec(a, 3, out);
            out.push('*');
            write_prec(b, 4, out);
        }
        Expr::Div(a, b) => {
            write_prec(a, 3, out);
            out.push('/');
            // `^` binds tighter than `/`, so a power may stand unparenthesized.
            write_prec(b, 4, out);
        }
        Expr::Pow(a, exp) => {
            write_prec(a, 5, out);
            out.push_str(&format!("^{exp}"));
        }
    }
    if p < min {
        out.push(')');
    }
}

impl fmt::Display for Expr {
    /// Renders in the data-file grammar; `parse_expr` round-trips the output.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_prec(self, 0, &mut s);
        write!(f, "{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, ratio, QMatrix};
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn env() -> ParamEnv {
        ParamEnv::new().set("p", rat(2)).set("q", rat(1))
    }

    #[test]
    fn constant_expression_evaluates_to_itself() {
        let e = Expr::int(5);
        assert_eq!(e.eval_point(&env(), &rat(0), &[], &[]).unwrap(), rat(5));
    }

    #[test]
    fn parse_divides_constants_exactly() {
        let e = parse_expr("3/2").unwrap();
        assert_eq!(e, Expr::Const(ratio(3, 2)));
        let e = parse_expr("2*p + q/3").unwrap();
        assert_eq!(e.eval_point(&env(), &rat(0), &[], &[]).unwrap(), ratio(13, 3));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_expr("1 + ").unwrap_err();
        assert_eq!(err.col, 5);
        let err = parse_expr("x1 * (x2 + 3").unwrap_err();
        assert!(err.message.contains("expected `)`"));
        let err = parse_expr("2 ; 3").unwrap_err();
        assert!(err.message.contains("trailing input"));
        let err = parse_expr("1/0").unwrap_err();
        assert!(err.message.contains("division by constant zero"));
    }

    #[test]
    fn variables_parse_and_evaluate() {
        let e = parse_expr("x1^2/x3 - y2*t").unwrap();
        let x = [rat(2), rat(0), rat(4)];
        let y = [rat(0), rat(3), rat(0)];
        // 4/4 - 3*5 = 1 - 15
        assert_eq!(e.eval_point(&env(), &rat(5), &x, &y).unwrap(), rat(-14));
    }

    #[test]
    fn division_by_zero_is_reported() {
        let e = parse_expr("1/x1").unwrap();
        assert_eq!(
            e.eval_point(&env(), &rat(0), &[rat(0)], &[]),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let e = parse_expr("lambda*x1").unwrap();
        assert_eq!(
            e.eval_point(&ParamEnv::new(), &rat(0), &[rat(1)], &[]),
            Err(EvalError::UnboundParameter("lambda".into()))
        );
    }

    #[test]
    fn polynomial_jacobian_matches_hand_computation() {
        // (x1^2, x1*x2) at x = (3,5) -> [[6,0],[5,3]]
        let es = [parse_expr("x1^2").unwrap(), parse_expr("x1*x2").unwrap()];
        let jac = jacobian_at(&es, WrtBlock::XBlock, &env(), &rat(0), &[rat(3), rat(5)], &[]).unwrap();
        assert_eq!(jac, QMatrix::from_int_rows(&[&[6, 0], &[5, 3]]));
    }

    #[test]
    fn series_evaluation_of_plain_variable() {
        let e = parse_expr("x1").unwrap();
        let one_plus_t = RationalSeries::from_coeffs(vec![rat(1), rat(1), rat(0)]);
        let t = RationalSeries::t(2);
        assert_eq!(e.eval_series(&env(), &t, &[one_plus_t.clone()], &[]).unwrap(), one_plus_t);
    }

    #[test]
    fn series_geometric_expansion() {
        // 1/x2 with x2(t) = zeta0_sq*(1-t), zeta0_sq = 1, order 2 -> 1 + t + t^2
        let e = parse_expr("1/x2").unwrap();
        let x2 = RationalSeries::from_coeffs(vec![rat(1), rat(-1), rat(0)]);
        let t = RationalSeries::t(2);
        let got = e
            .eval_series(&env(), &t, &[RationalSeries::zero(2), x2], &[])
            .unwrap();
        assert_eq!(got, RationalSeries::from_coeffs(vec![rat(1), rat(1), rat(1)]));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-9i64..=9).prop_map(Expr::int),
            (1usize..=3).prop_map(Expr::x),
            (1usize..=3).prop_map(Expr::y),
            Just(Expr::t()),
            Just(Expr::param("p")),
            Just(Expr::param("q")),
        ];
        leaf.prop_recursive(4, 40, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_filter_map("nonzero denom", |(a, b)| {
                    if b.is_zero_const() {
                        None
                    } else {
                        Some(Expr::Div(Box::new(a), Box::new(b)))
                    }
                }),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner, 0u32..=4).prop_map(|(a, e)| Expr::Pow(Box::new(a), e)),
            ]
        })
    }

    proptest! {
        /// Printing and reparsing preserves the evaluated value.
        #[test]
        fn display_parse_roundtrip_preserves_value(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse_expr(&printed)
                .unwrap_or_else(|err| panic!("failed to reparse `{printed}`: {err}"));
            let x = [ratio(3, 2), rat(2), ratio(5, 3)];
            let y = [ratio(-1, 2), rat(1), rat(4)];
            let t = ratio(1, 7);
            let a = e.eval_point(&env(), &t, &x, &y);
            let b = reparsed.eval_point(&env(), &t, &x, &y);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn dual_jacobian_matches_central_differences() {
        let mut rng = StdRng::seed_from_u64(42);
        let es = [
            parse_expr("x1^2/x2 + q*y1*y2/(x1*x2) - p*x2^3").unwrap(),
            parse_expr("(x1 + x2)/(x1*x2) + t^2*x1").unwrap(),
        ];
        let en = env();
        for _ in 0..20 {
            let x: Vec<Rational> = (0..2).map(|_| ratio(rng.random_range(1..40), 8)).collect();
            let y: Vec<Rational> = (0..2).map(|_| ratio(rng.random_range(-20..20), 8)).collect();
            let t = ratio(1, 3);
            let jac = jacobian_at(&es, WrtBlock::XBlock, &en, &t, &x, &y).unwrap();

            let xf: Vec<f64> = x.iter().map(Rational::to_f64).collect();
            let yf: Vec<f64> = y.iter().map(Rational::to_f64).collect();
            let h = 1e-6;
            for (i, e) in es.iter().enumerate() {
                for j in 0..2 {
                    let mut xp = xf.clone();
                    let mut xm = xf.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let fd = (e.eval_f64(&en, t.to_f64(), &xp, &yf).unwrap()
                        - e.eval_f64(&en, t.to_f64(), &xm, &yf).unwrap())
                        / (2.0 * h);
                    let exact = jac[(i, j)].to_f64();
                    let denom = exact.abs().max(1.0);
                    assert!(
                        ((fd - exact) / denom).abs() < 1e-6,
                        "fd {fd} vs exact {exact} at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn series_order_zero_equals_point_evaluation() {
        let e = parse_expr("x1^2/x2 - y1*t + p").unwrap();
        let en = env();
        let x0 = [ratio(3, 2), ratio(7, 3)];
        let y0 = [ratio(-1, 4), rat(2)];
        let order = 4;
        let xs: Vec<RationalSeries> = x0
            .iter()
            .map(|v| RationalSeries::constant(v.clone(), order))
            .collect();
        let ys: Vec<RationalSeries> = y0
            .iter()
            .map(|v| RationalSeries::constant(v.clone(), order))
            .collect();
        // t-series with t(0) = 1/5 so the point evaluation sees the same t.
        let mut ts = RationalSeries::t(order);
        ts.set_coeff(0, ratio(1, 5));
        let series = e.eval_series(&en, &ts, &xs, &ys).unwrap();
        let point = e.eval_point(&en, &ratio(1, 5), &x0, &y0).unwrap();
        assert_eq!(series.coeff(0), &point);
    }
}
