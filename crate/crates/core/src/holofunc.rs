//! Holomorphic functions of one complex variable given as expression text.
//!
//! The grammar covers complex literals, the formal variable, `+ - * /`,
//! integer powers `^`, and the calls `exp`, `ln`, `sqrt`. Precedence is
//! `^` over unary minus over `* /` over `+ -`; binaries associate to the left
//! and `^` to the right. `i` is the imaginary unit and `pi` is π.
//!
//! ```
//! use cma_lift::holofunc::HoloFn;
//! let f = HoloFn::parse("z^2 + i").unwrap();
//! let w = f.eval(num_complex::Complex64::new(2.0, 0.0)).unwrap();
//! assert_eq!(w, num_complex::Complex64::new(4.0, 1.0));
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::{Jet, JetError, JetSpace};

pub const DEFAULT_VAR: &str = "z";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HoloError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at byte {offset} is not an integer")]
    NonIntegerExponent { offset: usize },
    #[error("empty expression")]
    Empty,
    #[error("{node} at byte {offset}: {source}")]
    Domain {
        node: &'static str,
        offset: usize,
        source: JetError,
    },
    #[error("missing function role `{0}`")]
    MissingRole(String),
}

impl HoloError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            HoloError::Syntax { offset, .. }
            | HoloError::UnknownIdentifier { offset, .. }
            | HoloError::NonIntegerExponent { offset }
            | HoloError::Domain { offset, .. } => Some(*offset),
            HoloError::Empty | HoloError::MissingRole(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Exp,
    Ln,
    Sqrt,
}

impl Builtin {
    fn name(self) -> &'static str {
        match self {
            Builtin::Exp => "exp",
            Builtin::Ln => "ln",
            Builtin::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Lit(Complex64),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Builtin, Box<Node>),
}

/// An expression node with the byte offset where it starts in the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub expr: Expr,
    pub offset: usize,
}

impl Node {
    fn new(expr: Expr, offset: usize) -> Self {
        Node { expr, offset }
    }

    fn conj(&self) -> Node {
        let expr = match &self.expr {
            Expr::Var => Expr::Var,
            Expr::Lit(c) => Expr::Lit(c.conj()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.conj())),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.conj()), Box::new(b.conj())),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.conj()), *n),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.conj())),
        };
        Node::new(expr, self.offset)
    }

    fn eval_jet(&self, arg: &Jet) -> Result<Jet, HoloError> {
        let domain = |node: &'static str, offset: usize| {
            move |source: JetError| HoloError::Domain {
                node,
                offset,
                source,
            }
        };
        Ok(match &self.expr {
            Expr::Var => arg.clone(),
            Expr::Lit(c) => Jet::constant(arg.space(), *c),
            Expr::Neg(a) => -a.eval_jet(arg)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval_jet(arg)?;
                let y = b.eval_jet(arg)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x.try_div(&y).map_err(domain("division", self.offset))?,
                }
            }
            Expr::Pow(a, n) => a
                .eval_jet(arg)?
                .powi(*n)
                .map_err(domain("power", self.offset))?,
            Expr::Call(f, a) => {
                let x = a.eval_jet(arg)?;
                match f {
                    Builtin::Exp => x.exp(),
                    Builtin::Ln => x.ln().map_err(domain("ln", self.offset))?,
                    Builtin::Sqrt => x.sqrt().map_err(domain("sqrt", self.offset))?,
                }
            }
        })
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, var: &str, parent: u8) -> fmt::Result {
        // precedence levels: 1 additive, 2 multiplicative, 3 unary, 4 power, 5 atom
        let own = match &self.expr {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        };
        let paren = own < parent;
        if paren {
            write!(f, "(")?;
        }
        match &self.expr {
            Expr::Var => write!(f, "{var}")?,
            Expr::Lit(c) => write_literal(f, *c)?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, var, 3)?;
            }
            Expr::Bin(op, a, b) => {
                a.fmt_prec(f, var, own)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, var, own + 1)?;
            }
            Expr::Pow(a, n) => {
                a.fmt_prec(f, var, 5)?;
                if *n < 0 {
                    write!(f, "^({n})")?;
                } else {
                    write!(f, "^{n}")?;
                }
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, var, 0)?;
                write!(f, ")")?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        if c.re < 0.0 || c.re.is_sign_negative() {
            write!(f, "({:?})", c.re)
        } else {
            write!(f, "{:?}", c.re)
        }
    } else if c.re == 0.0 {
        write!(f, "({:?}*i)", c.im)
    } else {
        write!(f, "({:?} + {:?}*i)", c.re, c.im)
    }
}

/// A parsed holomorphic function of one formal variable.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloFn {
    root: Node,
    var: String,
}

impl fmt::Display for HoloFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt_prec(f, &self.var, 0)
    }
}

impl HoloFn {
    /// Parses with the formal variable `z`.
    pub fn parse(src: &str) -> Result<Self, HoloError> {
        Self::parse_in(src, DEFAULT_VAR)
    }

    /// Parses with a caller-chosen formal variable name.
    pub fn parse_in(src: &str, var: &str) -> Result<Self, HoloError> {
        if src.trim().is_empty() {
            return Err(HoloError::Empty);
        }
        let mut parser = Parser {
            src,
            pos: 0,
            var,
        };
        let root = parser.expression()?;
        parser.skip_ws();
        if parser.pos < src.len() {
            return Err(parser.syntax("unexpected trailing input"));
        }
        Ok(HoloFn {
            root,
            var: var.to_string(),
        })
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        HoloFn {
            root: Node::new(Expr::Lit(c.into()), 0),
            var: DEFAULT_VAR.to_string(),
        }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// The function with every literal conjugated, so that
    /// `f.conjugate().eval(w.conj()) == f.eval(w).conj()`.
    pub fn conjugate(&self) -> HoloFn {
        HoloFn {
            root: self.root.conj(),
            var: self.var.clone(),
        }
    }

    /// Composition `f ∘ arg`.
    pub fn eval_jet(&self, arg: &Jet) -> Result<Jet, HoloError> {
        self.root.eval_jet(arg)
    }

    pub fn eval(&self, w: Complex64) -> Result<Complex64, HoloError> {
        Ok(self.eval_jet(&Jet::constant(&scalar_space(), w))?.value())
    }

    /// Jets of `f, f′, …, f^(upto)`, each composed with `arg`.
    pub fn eval_derivs(&self, arg: &Jet, upto: usize) -> Result<Vec<Jet>, HoloError> {
        let order = arg.order();
        let scalars = self.derivatives(arg.value(), upto + order)?;
        Ok((0..=upto)
            .map(|m| arg.compose(&scalars[m..=m + order]))
            .collect())
    }

    /// Derivatives `f(w), f'(w), …, f^(n)(w)`.
    pub fn derivatives(&self, w: Complex64, n: usize) -> Result<Vec<Complex64>, HoloError> {
        let space = JetSpace::new(&["w"], n.max(1)).map_err(|source| HoloError::Domain {
            node: "jet space",
            offset: 0,
            source,
        })?;
        let jet = self.eval_jet(&Jet::seed_index(&space, 0, w))?;
        (0..=n)
            .map(|k| {
                jet.derivative(&[k as u8]).map_err(|source| HoloError::Domain {
                    node: "derivative",
                    offset: 0,
                    source,
                })
            })
            .collect()
    }
}

fn scalar_space() -> JetSpace {
    JetSpace::new(&["w"], 1).expect("scalar space")
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: &str) -> HoloError {
        HoloError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expression(&mut self) -> Result<Node, HoloError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            let offset = self.pos;
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::new(Expr::Bin(op, Box::new(lhs), Box::new(rhs)), offset);
        }
    }

    fn term(&mut self) -> Result<Node, HoloError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            let offset = self.pos;
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::new(Expr::Bin(op, Box::new(lhs), Box::new(rhs)), offset);
        }
    }

    fn unary(&mut self) -> Result<Node, HoloError> {
        self.skip_ws();
        let offset = self.pos;
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(Node::new(Expr::Neg(Box::new(inner)), offset));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, HoloError> {
        let base = self.primary()?;
        self.skip_ws();
        let offset = self.pos;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let exp_offset = self.pos;
        let exponent = self.unary()?;
        let n = constant_integer(&exponent).ok_or(HoloError::NonIntegerExponent {
            offset: exp_offset,
        })?;
        Ok(Node::new(Expr::Pow(Box::new(base), n), offset))
    }

    fn primary(&mut self) -> Result<Node, HoloError> {
        self.skip_ws();
        let offset = self.pos;
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let inner = self.expression()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        self.pos += c.len_utf8();
                    } else {
                        break;
                    }
                }
                let name = &self.src[start..self.pos];
                let builtin = match name {
                    "exp" => Some(Builtin::Exp),
                    "ln" => Some(Builtin::Ln),
                    "sqrt" => Some(Builtin::Sqrt),
                    _ => None,
                };
                if let Some(func) = builtin {
                    if !self.eat('(') {
                        return Err(self.syntax("expected `(` after function name"));
                    }
                    let arg = self.expression()?;
                    if !self.eat(')') {
                        return Err(self.syntax("expected `)`"));
                    }
                    return Ok(Node::new(Expr::Call(func, Box::new(arg)), offset));
                }
                let expr = if name == self.var {
                    Expr::Var
                } else if name == "i" {
                    Expr::Lit(Complex64::new(0.0, 1.0))
                } else if name == "pi" {
                    Expr::Lit(Complex64::new(std::f64::consts::PI, 0.0))
                } else {
                    return Err(HoloError::UnknownIdentifier {
                        name: name.to_string(),
                        offset,
                    });
                };
                Ok(Node::new(expr, offset))
            }
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node, HoloError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        // optional exponent, only when followed by digits
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        let value: f64 = text.parse().map_err(|_| HoloError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        self.pos = end;
        Ok(Node::new(Expr::Lit(Complex64::new(value, 0.0)), start))
    }
}

fn constant_integer(node: &Node) -> Option<i32> {
    fn value(node: &Node) -> Option<Complex64> {
        match &node.expr {
            Expr::Lit(c) => Some(*c),
            Expr::Neg(a) => value(a).map(|c| -c),
            Expr::Pow(a, n) => value(a).map(|c| c.powi(*n)),
            _ => None,
        }
    }
    let c = value(node)?;
    if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= i32::MAX as f64 {
        Some(c.re as i32)
    } else {
        None
    }
}

/// Named holomorphic functions keyed by role (`"a"`, `"d"`, `"phi0"`, …).
/// The antiholomorphic partner of each role is its coefficient conjugate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FnBundle {
    roles: BTreeMap<String, HoloFn>,
}

impl FnBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, role: &str, f: HoloFn) -> Self {
        self.roles.insert(role.to_string(), f);
        self
    }

    /// Parses `src` and stores it under `role`.
    pub fn with_src(self, role: &str, src: &str) -> Result<Self, HoloError> {
        Ok(self.with(role, HoloFn::parse(src)?))
    }

    pub fn from_sources<'a, I>(pairs: I) -> Result<Self, HoloError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        pairs
            .into_iter()
            .try_fold(FnBundle::new(), |b, (role, src)| b.with_src(role, src))
    }

    pub fn insert(&mut self, role: &str, f: HoloFn) {
        self.roles.insert(role.to_string(), f);
    }

    pub fn get(&self, role: &str) -> Result<&HoloFn, HoloError> {
        self.roles
            .get(role)
            .ok_or_else(|| HoloError::MissingRole(role.to_string()))
    }

    pub fn contains(&self, role: &str) -> bool {
        self.roles.contains_key(role)
    }

    pub fn conj(&self, role: &str) -> Result<HoloFn, HoloError> {
        Ok(self.get(role)?.conjugate())
    }

    /// Every role replaced by its conjugate.
    pub fn conjugated(&self) -> FnBundle {
        FnBundle {
            roles: self
                .roles
                .iter()
                .map(|(k, v)| (k.clone(), v.conjugate()))
                .collect(),
        }
    }

    pub fn roles(&self) -> impl Iterator<Item = (&str, &HoloFn)> {
        self.roles.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn require(&self, roles: &[&str]) -> Result<(), HoloError> {
        roles.iter().try_for_each(|r| self.get(r).map(|_| ()))
    }
}

/// Source form used in configuration files.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct BundleSource(pub BTreeMap<String, String>);

impl TryFrom<&BundleSource> for FnBundle {
    type Error = HoloError;
    fn try_from(src: &BundleSource) -> Result<Self, HoloError> {
        FnBundle::from_sources(src.0.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }
}

/// One product `f₁(x₁)·f₂(x₂)·…` of single-variable factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub factors: Vec<(String, HoloFn)>,
}

/// A finite sum of separable products, used for multi-argument functional
/// parameters such as `g(p, σ, ρ)`. Arguments with no factor in a term do
/// not enter that term.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeparableFn {
    pub terms: Vec<SeparableTerm>,
}

impl SeparableFn {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Adds the product of the given `(argument, expression)` factors. Each
    /// expression is parsed with its argument name as the formal variable.
    pub fn term(mut self, factors: &[(&str, &str)]) -> Result<Self, HoloError> {
        let factors = factors
            .iter()
            .map(|(arg, src)| Ok((arg.to_string(), HoloFn::parse_in(src, arg)?)))
            .collect::<Result<Vec<_>, HoloError>>()?;
        self.terms.push(SeparableTerm { factors });
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Conjugates literals and renames arguments through `rename`, e.g.
    /// `p → pb`, `sigma → sigmab`.
    pub fn conjugate_with(&self, rename: impl Fn(&str) -> String) -> SeparableFn {
        SeparableFn {
            terms: self
                .terms
                .iter()
                .map(|t| SeparableTerm {
                    factors: t
                        .factors
                        .iter()
                        .map(|(arg, f)| (rename(arg), f.conjugate()))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Evaluates with `args` supplying a jet for each argument name.
    pub fn eval_jet(
        &self,
        space: &JetSpace,
        args: &dyn Fn(&str) -> Option<Jet>,
    ) -> Result<Jet, HoloError> {
        let mut total = Jet::zero(space);
        for term in &self.terms {
            let mut prod = Jet::constant(space, 1.0);
            for (arg, f) in &term.factors {
                let x = args(arg).ok_or_else(|| HoloError::UnknownIdentifier {
                    name: arg.clone(),
                    offset: 0,
                })?;
                prod = prod * f.eval_jet(&x)?;
            }
            total += &prod;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluates_polynomial_with_imaginary_unit() {
        let f = HoloFn::parse("z^2 + i").unwrap();
        assert_eq!(f.eval(c(2.0, 0.0)).unwrap(), c(4.0, 1.0));
    }

    #[test]
    fn chain_rule_through_exp() {
        let f = HoloFn::parse("exp(2*z)").unwrap();
        let d = f.derivatives(c(0.0, 0.0), 1).unwrap();
        assert!((d[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn double_caret_is_syntax_error_at_offset_two() {
        let err = HoloFn::parse("z^^2").unwrap_err();
        assert!(matches!(err, HoloError::Syntax { offset: 2, .. }), "{err:?}");
    }

    #[test]
    fn rejects_unknown_identifier_and_fractional_exponent() {
        assert!(matches!(
            HoloFn::parse("z + w").unwrap_err(),
            HoloError::UnknownIdentifier { offset: 4, .. }
        ));
        assert!(matches!(
            HoloFn::parse("z^0.5").unwrap_err(),
            HoloError::NonIntegerExponent { offset: 2 }
        ));
        assert!(matches!(HoloFn::parse("  ").unwrap_err(), HoloError::Empty));
        assert!(HoloFn::parse("(z + 1").is_err());
        assert!(HoloFn::parse("z 2").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let z = c(1.5, -0.5);
        let cases: [(&str, Complex64); 6] = [
            ("-z^2", -(z * z)),
            ("2^3^2", c(512.0, 0.0)),
            ("1 - z - 1", -z),
            ("8 / z / 2", c(4.0, 0.0) / z),
            ("2*z^-1", c(2.0, 0.0) / z),
            ("1 + 2*z^2", c(1.0, 0.0) + c(2.0, 0.0) * z * z),
        ];
        for (src, expect) in cases {
            let got = HoloFn::parse(src).unwrap().eval(z).unwrap();
            assert!((got - expect).norm() < 1e-14, "{src}: {got} vs {expect}");
        }
    }

    #[test]
    fn ln_taylor_coefficients_at_one() {
        let f = HoloFn::parse("ln(z)").unwrap();
        let sp = JetSpace::new(&["z"], 2).unwrap();
        let jet = f.eval_jet(&Jet::seed(&sp, "z", 1.0).unwrap()).unwrap();
        assert!(jet.coefficient(&[0]).unwrap().norm() < 1e-15);
        assert!((jet.coefficient(&[1]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((jet.coefficient(&[2]).unwrap() - c(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_names_the_division_node() {
        let f = HoloFn::parse("1/z").unwrap();
        let err = f.eval(c(0.0, 0.0)).unwrap_err();
        match err {
            HoloError::Domain { node, offset, .. } => {
                assert_eq!(node, "division");
                assert_eq!(offset, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn third_derivative_matches_finite_differences() {
        let f = HoloFn::parse("exp(z)+z^3").unwrap();
        let d3 = f.derivatives(c(0.3, 0.0), 3).unwrap()[3];
        let expect = 0.3f64.exp() + 6.0;
        assert!((d3.re - expect).abs() < 1e-12);
        // third central difference of the scalar evaluator
        let h = 1e-2;
        let g = |x: f64| f.eval(c(x, 0.0)).unwrap().re;
        let fd = (g(0.3 + 2.0 * h) - 2.0 * g(0.3 + h) + 2.0 * g(0.3 - h) - g(0.3 - 2.0 * h))
            / (2.0 * h * h * h);
        assert!((d3.re - fd).abs() / expect < 1e-4);
    }

    #[test]
    fn conjugation() {
        let f = HoloFn::parse("i*z").unwrap();
        assert_eq!(f.conjugate().eval(c(2.0, 0.0)).unwrap(), c(0.0, -2.0));
        let real = HoloFn::parse("exp(z) + 3*z^2").unwrap();
        assert_eq!(real.conjugate(), real);
        let g = HoloFn::parse("(1+2*i)*z - ln(z + i)").unwrap();
        assert_eq!(g.conjugate().conjugate(), g);
    }

    #[test]
    fn display_round_trips() {
        for src in ["-z^2", "exp(-(z - 1)) / (2 + i)", "(1.5e-3*i - z)^(-2)", "z - (1 - z)"] {
            let f = HoloFn::parse(src).unwrap();
            let again = HoloFn::parse(&f.to_string()).unwrap();
            let w = c(0.7, 0.2);
            assert!((f.eval(w).unwrap() - again.eval(w).unwrap()).norm() < 1e-13, "{src} -> {f}");
        }
    }

    #[test]
    fn custom_variable_name() {
        let f = HoloFn::parse_in("sigma^2", "sigma").unwrap();
        assert_eq!(f.eval(c(3.0, 0.0)).unwrap(), c(9.0, 0.0));
        assert!(HoloFn::parse_in("z", "sigma").is_err());
    }

    #[test]
    fn separable_sum() {
        let g = SeparableFn::zero()
            .term(&[("p", "p^2"), ("s", "exp(s)")])
            .unwrap()
            .term(&[("s", "3*s")])
            .unwrap();
        let sp = JetSpace::new(&["p", "s"], 2).unwrap();
        let p = Jet::seed(&sp, "p", 2.0).unwrap();
        let s = Jet::seed(&sp, "s", 0.0).unwrap();
        let v = g
            .eval_jet(&sp, &|name| match name {
                "p" => Some(p.clone()),
                "s" => Some(s.clone()),
                _ => None,
            })
            .unwrap();
        assert!((v.value() - c(4.0, 0.0)).norm() < 1e-15);
        assert!((v.d(&["p", "s"]).unwrap() - c(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn bundle_roles() {
        let b = FnBundle::from_sources([("a", "exp(z)"), ("d", "i*z")]).unwrap();
        assert!(b.require(&["a", "d"]).is_ok());
        assert_eq!(b.require(&["phi0"]).unwrap_err(), HoloError::MissingRole("phi0".into()));
        let w = b.conj("d").unwrap().eval(c(1.0, 0.0)).unwrap();
        assert_eq!(w, c(0.0, -1.0));
    }
}
