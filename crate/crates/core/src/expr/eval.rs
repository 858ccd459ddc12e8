//! Numeric evaluation of expression trees.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Coeff, Expr, ExprError};

/// Real values for named variables.
pub type Bindings = BTreeMap<String, f64>;

pub(crate) fn evaluate(e: &Expr, b: &Bindings) -> Result<Complex64, ExprError> {
    if let Some(g) = e.exact_value() {
        return Ok(g.to_complex());
    }
    Ok(match e {
        Expr::Const(c) => c.to_complex(),
        Expr::Var(v) => Complex64::new(*b.get(v).ok_or_else(|| ExprError::UnboundVariable(v.clone()))?, 0.0),
        Expr::Sum(xs) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in xs {
                acc += evaluate(x, b)?;
            }
            acc
        }
        Expr::Product(xs) => {
            let mut acc = Complex64::new(1.0, 0.0);
            for x in xs {
                acc *= evaluate(x, b)?;
            }
            acc
        }
        Expr::Pow(base, n) => {
            let v = evaluate(base, b)?;
            if *n < 0 && v == Complex64::new(0.0, 0.0) {
                return Err(ExprError::DivisionByZero);
            }
            v.powi(*n)
        }
        Expr::Exp(a) => evaluate(a, b)?.exp(),
        Expr::Sin(a) => evaluate(a, b)?.sin(),
        Expr::Cos(a) => evaluate(a, b)?.cos(),
    })
}

#[derive(Clone, Debug)]
enum Node {
    Const(Complex64),
    Var(usize),
    Sum(Vec<Node>),
    Product(Vec<Node>),
    Pow(Box<Node>, i32),
    Exp(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
}

/// An expression compiled against a fixed variable order, for repeated
/// evaluation on grids. Exact constant subtrees are folded once up front.
#[derive(Clone, Debug)]
pub struct Evaluator {
    root: Node,
    arity: usize,
}

impl Evaluator {
    pub fn compile(e: &Expr, vars: &[&str]) -> Result<Evaluator, ExprError> {
        Ok(Evaluator { root: compile(e, vars)?, arity: vars.len() })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluate at `values`, which must follow the compile-time variable order.
    pub fn eval(&self, values: &[f64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.arity);
        run(&self.root, values)
    }
}

fn compile(e: &Expr, vars: &[&str]) -> Result<Node, ExprError> {
    if let Some(g) = e.exact_value() {
        return Ok(Node::Const(g.to_complex()));
    }
    Ok(match e {
        Expr::Const(c) => Node::Const(Coeff::to_complex(c)),
        Expr::Var(v) => Node::Var(
            vars.iter().position(|w| w == v).ok_or_else(|| ExprError::UnboundVariable(v.clone()))?,
        ),
        Expr::Sum(xs) => Node::Sum(xs.iter().map(|x| compile(x, vars)).collect::<Result<_, _>>()?),
        Expr::Product(xs) => Node::Product(xs.iter().map(|x| compile(x, vars)).collect::<Result<_, _>>()?),
        Expr::Pow(b, n) => Node::Pow(Box::new(compile(b, vars)?), *n),
        Expr::Exp(a) => Node::Exp(Box::new(compile(a, vars)?)),
        Expr::Sin(a) => Node::Sin(Box::new(compile(a, vars)?)),
        Expr::Cos(a) => Node::Cos(Box::new(compile(a, vars)?)),
    })
}

fn run(n: &Node, v: &[f64]) -> Complex64 {
    match n {
        Node::Const(c) => *c,
        Node::Var(k) => Complex64::new(v[*k], 0.0),
        Node::Sum(xs) => xs.iter().map(|x| run(x, v)).sum(),
        Node::Product(xs) => xs.iter().map(|x| run(x, v)).product(),
        Node::Pow(b, k) => run(b, v).powi(*k),
        Node::Exp(a) => run(a, v).exp(),
        Node::Sin(a) => run(a, v).sin(),
        Node::Cos(a) => run(a, v).cos(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn tree_and_compiled_agree() {
        let e = parse("exp(i*x)*(y^2 - 1/3) + sin(x*y)/(2 + x)").unwrap();
        let ev = e.evaluator(&["x", "y"]).unwrap();
        let b: Bindings = [("x".to_string(), 0.7), ("y".to_string(), -1.3)].into();
        let a = e.evaluate(&b).unwrap();
        let c = ev.eval(&[0.7, -1.3]);
        assert!((a - c).norm() < 1e-14);
        let oracle = Complex64::new(0.0, 0.7).exp() * (1.69 - 1.0 / 3.0) + (0.7f64 * -1.3).sin() / 2.7;
        assert!((a - oracle).norm() < 1e-13);
    }

    #[test]
    fn unbound_and_pole() {
        let e = parse("x + z").unwrap();
        assert_eq!(e.evaluate(&Bindings::new()), Err(ExprError::UnboundVariable("x".into())));
        assert!(e.evaluator(&["x"]).is_err());
        let b: Bindings = [("x".to_string(), 0.0)].into();
        assert_eq!(parse("1/x").unwrap().evaluate(&b), Err(ExprError::DivisionByZero));
    }
}
