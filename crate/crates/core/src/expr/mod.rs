//! Symbolic expressions over named real variables with complex coefficients.
//!
//! `Expr` is a plain tree. Structural work (differentiation, substitution,
//! printing) happens on the tree; canonical comparisons go through
//! [`NormalForm`], which collects like terms over exact Gaussian rationals.

mod coeff;
mod eval;
mod normal;
mod parse;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use coeff::{integer, parse_decimal, parse_rational, rational, rational_to_f64, Coeff, GaussianRational, Rational};
pub use eval::{Bindings, Evaluator};
pub use normal::{Monomial, NormalForm};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use zero::{ZeroPath, ZeroTest, ZeroTestConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("variable `{0}` has no binding")]
    UnboundVariable(String),
    #[error("division by zero while evaluating")]
    DivisionByZero,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Coeff),
    Var(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn constant(c: Coeff) -> Expr {
        Expr::Const(c)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Coeff::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Const(Coeff::ratio(n, d))
    }

    pub fn rational(r: Rational) -> Expr {
        Expr::Const(Coeff::real(r))
    }

    pub fn zero() -> Expr {
        Expr::Const(Coeff::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Coeff::one())
    }

    pub fn i() -> Expr {
        Expr::Const(Coeff::i())
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::Exp(Box::new(arg))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::Sin(Box::new(arg))
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::Cos(Box::new(arg))
    }

    pub fn pow(base: Expr, n: i32) -> Expr {
        match n {
            0 => Expr::one(),
            1 => base,
            _ => Expr::Pow(Box::new(base), n),
        }
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_const_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// Sum with zero terms dropped and nested sums flattened.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Sum(inner) => out.extend(inner),
                t if t.is_const_zero() => {}
                t => out.push(t),
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    /// Product with unit factors dropped, constants merged, nested products flattened.
    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut constant = Coeff::one();
        let mut out = Vec::with_capacity(factors.len());
        for f in factors {
            match f {
                Expr::Product(inner) => {
                    for g in inner {
                        match g {
                            Expr::Const(c) => constant = constant.mul(&c),
                            g => out.push(g),
                        }
                    }
                }
                Expr::Const(c) => constant = constant.mul(&c),
                f => out.push(f),
            }
        }
        if constant.is_zero() {
            return Expr::Const(constant);
        }
        if !constant.is_one() {
            out.insert(0, Expr::Const(constant));
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::Product(out),
        }
    }

    pub fn scale(self, c: Coeff) -> Expr {
        Expr::product(vec![Expr::Const(c), self])
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Expr::Pow(b, _) => b.collect_vars(out),
            Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v == var,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| x.depends_on(var)),
            Expr::Pow(b, _) => b.depends_on(var),
            Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.depends_on(var),
        }
    }

    /// Partial derivative, computed structurally on the tree.
    pub fn differentiate(&self, var: &str) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(v) => {
                if v == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Sum(xs) => Expr::sum(xs.iter().map(|x| x.differentiate(var)).collect()),
            Expr::Product(xs) => {
                let mut terms = Vec::new();
                for k in 0..xs.len() {
                    let dk = xs[k].differentiate(var);
                    if dk.is_const_zero() {
                        continue;
                    }
                    let mut factors = xs.clone();
                    factors[k] = dk;
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Expr::Pow(b, n) => {
                let db = b.differentiate(var);
                if db.is_const_zero() || *n == 0 {
                    return Expr::zero();
                }
                Expr::product(vec![Expr::int(*n as i64), Expr::pow((**b).clone(), n - 1), db])
            }
            Expr::Exp(a) => {
                let da = a.differentiate(var);
                if da.is_const_zero() {
                    return Expr::zero();
                }
                Expr::product(vec![self.clone(), da])
            }
            Expr::Sin(a) => {
                let da = a.differentiate(var);
                if da.is_const_zero() {
                    return Expr::zero();
                }
                Expr::product(vec![Expr::Cos(a.clone()), da])
            }
            Expr::Cos(a) => {
                let da = a.differentiate(var);
                if da.is_const_zero() {
                    return Expr::zero();
                }
                Expr::product(vec![Expr::int(-1), Expr::Sin(a.clone()), da])
            }
        }
    }

    /// Repeated partial derivative along each name in `vars`, in order.
    pub fn differentiate_many(&self, vars: &[&str]) -> Expr {
        vars.iter().fold(self.clone(), |e, v| e.differentiate(v))
    }

    pub fn substitute(&self, var: &str, value: &Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(var.to_string(), value.clone());
        self.substitute_all(&map)
    }

    /// Simultaneous substitution: replacement values are not themselves rewritten.
    pub fn substitute_all(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Sum(xs) => Expr::sum(xs.iter().map(|x| x.substitute_all(map)).collect()),
            Expr::Product(xs) => Expr::product(xs.iter().map(|x| x.substitute_all(map)).collect()),
            Expr::Pow(b, n) => Expr::pow(b.substitute_all(map), *n),
            Expr::Exp(a) => Expr::exp(a.substitute_all(map)),
            Expr::Sin(a) => Expr::sin(a.substitute_all(map)),
            Expr::Cos(a) => Expr::cos(a.substitute_all(map)),
        }
    }

    pub fn normal_form(&self) -> NormalForm {
        NormalForm::from_expr(self)
    }

    /// Canonical tree: like terms collected, trig rewritten as exponentials.
    pub fn simplify(&self) -> Expr {
        self.normal_form().to_expr()
    }

    pub fn is_zero(&self) -> ZeroTest {
        ZeroTest::run(self, &ZeroTestConfig::default())
    }

    pub fn is_zero_with(&self, config: &ZeroTestConfig) -> ZeroTest {
        ZeroTest::run(self, config)
    }

    /// Value of a variable-free subtree as an exact Gaussian rational, when it has one.
    pub fn exact_value(&self) -> Option<GaussianRational> {
        match self {
            Expr::Const(Coeff::Exact(g)) => Some(g.clone()),
            Expr::Const(Coeff::Float(_)) | Expr::Var(_) | Expr::Sin(_) | Expr::Cos(_) => None,
            Expr::Sum(xs) => xs.iter().try_fold(GaussianRational::zero(), |acc, x| Some(acc.add(&x.exact_value()?))),
            Expr::Product(xs) => xs.iter().try_fold(GaussianRational::one(), |acc, x| Some(acc.mul(&x.exact_value()?))),
            Expr::Pow(b, n) => b.exact_value()?.pow(*n),
            Expr::Exp(a) => {
                if a.exact_value()?.is_zero() {
                    Some(GaussianRational::one())
                } else {
                    None
                }
            }
        }
    }

    pub fn evaluate(&self, bindings: &Bindings) -> Result<num_complex::Complex64, ExprError> {
        eval::evaluate(self, bindings)
    }

    pub fn evaluator(&self, vars: &[&str]) -> Result<Evaluator, ExprError> {
        Evaluator::compile(self, vars)
    }

    /// Complex conjugate, treating every variable as real.
    pub fn conj(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Var(_) => self.clone(),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(Expr::conj).collect()),
            Expr::Product(xs) => Expr::Product(xs.iter().map(Expr::conj).collect()),
            Expr::Pow(b, n) => Expr::Pow(Box::new(b.conj()), *n),
            Expr::Exp(a) => Expr::exp(a.conj()),
            Expr::Sin(a) => Expr::sin(a.conj()),
            Expr::Cos(a) => Expr::cos(a.conj()),
        }
    }

    fn needs_parens_as_factor(&self) -> bool {
        matches!(self, Expr::Sum(_))
    }

    fn fmt_base(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(_) | Expr::Exp(_) | Expr::Sin(_) | Expr::Cos(_) => write!(f, "{self}"),
            Expr::Const(c) => {
                let atom = c.to_atom();
                if atom.starts_with('(') || atom.chars().all(|ch| ch.is_ascii_digit()) || atom == "i" {
                    f.write_str(&atom)
                } else {
                    write!(f, "({atom})")
                }
            }
            _ => write!(f, "({self})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => f.write_str(&c.to_atom()),
            Expr::Var(v) => f.write_str(v),
            Expr::Sum(xs) => {
                if xs.is_empty() {
                    return f.write_str("0");
                }
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Expr::Product(xs) => {
                if xs.is_empty() {
                    return f.write_str("1");
                }
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        f.write_str("*")?;
                    }
                    if x.needs_parens_as_factor() {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
            Expr::Pow(b, n) => {
                b.fmt_base(f)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, -rhs])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product(vec![Expr::int(-1), self])
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.clone() + rhs.clone()
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.clone() * rhs.clone()
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("s1*t2").differentiate("s1"), Expr::var("t2"));
        assert!(p("s1+t2").differentiate("s3").is_const_zero());
        let d = p("exp(2*i*s2*t1)").differentiate("t1");
        assert!((d - p("2*i*s2*exp(2*i*s2*t1)")).is_zero().is_zero);
    }

    #[test]
    fn trig_derivatives() {
        let d = p("sin(x^2)").differentiate("x");
        assert!((d - p("2*x*cos(x^2)")).is_zero().is_zero);
        let d = p("cos(3*x)").differentiate("x");
        assert!((d + p("3*sin(3*x)")).is_zero().is_zero);
        let d = p("x^(-2)").differentiate("x");
        assert!((d + p("2*x^(-3)")).is_zero().is_zero);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut map = BTreeMap::new();
        map.insert("x".to_string(), Expr::var("y"));
        map.insert("y".to_string(), Expr::var("x"));
        let swapped = p("x - 2*y").substitute_all(&map);
        assert!((swapped - p("y - 2*x")).is_zero().is_zero);
    }

    #[test]
    fn display_round_trips() {
        for s in ["s1*t2 + 3", "(1/2)*x^(-1) + exp(i*x)*(y + 1)", "-(x+y)^2", "sin(2*x)/(3 + x)", "0.1*x - 2.5"] {
            let e = p(s);
            let back = p(&e.to_string());
            assert!((e.clone() - back).is_zero().is_zero, "{s} -> {e}");
        }
    }

    #[test]
    fn exact_constant_folding() {
        assert_eq!(p("(1/2 + 1/3)*6").exact_value(), Some(GaussianRational::real(integer(5))));
        assert_eq!(p("i^2").exact_value(), Some(GaussianRational::real(integer(-1))));
        assert_eq!(p("x").exact_value(), None);
    }
}
