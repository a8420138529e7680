//! Complex scalar expressions over named real coordinates.
//!
//! Symbol coefficients and test maps are written as small infix formulas
//! such as `exp(i*t) * (x^2 + y^2)`. The grammar is the usual one:
//!
//! * `+ -` (left associative) bind weaker than `* /` (left associative),
//!   which bind weaker than unary `-`, which binds weaker than `^`
//!   (right associative);
//! * the exponent of `^` must fold to an integer constant, so `x^-2` and
//!   `x^(3^2)` are accepted but `x^y` and `x^0.5` are not;
//! * `i` is the imaginary unit and cannot be used as a variable name;
//! * the functions are `sin`, `cos`, `exp`, `sqrt` (principal branch),
//!   `conj` and `bump`, the smooth cutoff `bump(s) = exp(1 - 1/(1 - s))` for
//!   `Re s < 1` and `0` otherwise.
//!
//! Expressions are parsed once into an [`Expr`] tree and then compiled
//! against an ordered variable list into a [`Compiled`] stack program. The
//! compiled program evaluates either plain complex values or forward-mode
//! [`DualValue`]s carrying partial derivatives along any number of seeded
//! directions.

mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use eval::{Compiled, DualValue};

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown function `{name}` at {line}:{column}")]
    UnknownFunction {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("exponent at {line}:{column} must be an integer constant")]
    NonIntegerExponent { line: usize, column: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero at {bindings}")]
    DivisionByZero { bindings: String },
    #[error("`conj` applied to active variable `{variable}` is not differentiable")]
    NonDifferentiableConj { variable: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Conj,
    Bump,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "conj" => Func::Conj,
            "bump" => Func::Bump,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Conj => "conj",
            Func::Bump => "bump",
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    ImagUnit,
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ExprError> {
        parse::Parser::new(source)?.parse_document()
    }

    /// Names of all variables referenced in the tree.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Num(_) | Expr::ImagUnit => {}
            Expr::Var(name) => {
                out.insert(name.as_str());
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn compile<S: AsRef<str>>(&self, variables: &[S]) -> Result<Compiled, ExprError> {
        Compiled::new(self, variables)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::ImagUnit => f.write_str("i"),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_wrapped(f, a, a.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                write_wrapped(f, a, a.precedence() < p)?;
                f.write_str(match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => " * ",
                    BinOp::Div => " / ",
                })?;
                write_wrapped(f, b, b.precedence() <= p)
            }
            Expr::Pow(a, n) => {
                write_wrapped(f, a, a.precedence() < 5)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Evaluates `e` with named bindings.
pub fn eval(e: &Expr, bindings: &[(&str, C64)]) -> Result<C64, ExprError> {
    let names: Vec<&str> = bindings.iter().map(|(n, _)| *n).collect();
    let values: Vec<C64> = bindings.iter().map(|(_, v)| *v).collect();
    e.compile(&names)?.eval(&values)
}

/// Evaluates `e` together with its partial derivatives along `active`.
pub fn eval_dual(
    e: &Expr,
    bindings: &[(&str, C64)],
    active: &[&str],
) -> Result<DualValue, ExprError> {
    for a in active {
        if !bindings.iter().any(|(n, _)| n == a) {
            return Err(ExprError::UnboundVariable((*a).to_string()));
        }
    }
    let names: Vec<&str> = bindings.iter().map(|(n, _)| *n).collect();
    let inputs: Vec<DualValue> = bindings
        .iter()
        .map(|(name, v)| match active.iter().position(|a| a == name) {
            Some(k) => DualValue::variable(*v, active.len(), k),
            None => DualValue::constant(*v, active.len()),
        })
        .collect();
    e.compile(&names)?.eval_dual(&inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn literal_one() {
        assert_eq!(Expr::parse("1").unwrap(), Expr::Num(1.0));
        assert_eq!(eval(&Expr::parse("1").unwrap(), &[]).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let v = eval(&Expr::parse("i*i").unwrap(), &[]).unwrap();
        assert_eq!(v, c(-1.0, 0.0));
    }

    #[test]
    fn euler_identity() {
        let e = Expr::parse("exp(i*th)").unwrap();
        let v = eval(&e, &[("th", c(PI, 0.0))]).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn polynomial_and_sine() {
        let e = Expr::parse("x^2+1").unwrap();
        assert_eq!(eval(&e, &[("x", c(2.0, 0.0))]).unwrap(), c(5.0, 0.0));
        let e = Expr::parse("sin(t)").unwrap();
        assert_eq!(eval(&e, &[("t", c(0.0, 0.0))]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn pole_reports_bindings() {
        let e = Expr::parse("1/(x-1)").unwrap();
        match eval(&e, &[("x", c(1.0, 0.0))]) {
            Err(ExprError::DivisionByZero { bindings }) => assert!(bindings.contains("x=")),
            other => panic!("expected division by zero, got {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let cases = [
            ("-x^2", -9.0),
            ("2^3^2", 512.0),
            ("8/2/2", 2.0),
            ("1-2-3", -4.0),
            ("2*-x", -6.0),
            ("x^-1*3", 1.0),
            ("-(x+1)*2", -8.0),
        ];
        for (src, want) in cases {
            let v = eval(&Expr::parse(src).unwrap(), &[("x", c(3.0, 0.0))]).unwrap();
            assert!((v - c(want, 0.0)).norm() < 1e-12, "{src}: {v}");
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match Expr::parse("x +\n  * y") {
            Err(ExprError::Syntax { line, column, .. }) => {
                assert_eq!((line, column), (2, 3));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("(x"), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse("x y"), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse(""), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn unknown_function_and_bad_exponent() {
        assert!(matches!(
            Expr::parse("tanh(x)"),
            Err(ExprError::UnknownFunction { ref name, .. }) if name == "tanh"
        ));
        assert!(matches!(
            Expr::parse("x^0.5"),
            Err(ExprError::NonIntegerExponent { .. })
        ));
        assert!(matches!(
            Expr::parse("x^y"),
            Err(ExprError::NonIntegerExponent { .. })
        ));
    }

    #[test]
    fn unbound_variable() {
        let e = Expr::parse("x+y").unwrap();
        assert_eq!(
            eval(&e, &[("x", c(1.0, 0.0))]),
            Err(ExprError::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn dual_power_rule() {
        let d = eval_dual(&Expr::parse("t^3").unwrap(), &[("t", c(2.0, 0.0))], &["t"]).unwrap();
        assert_eq!(d.value, c(8.0, 0.0));
        assert_eq!(d.partials.as_slice(), &[c(12.0, 0.0)]);
    }

    #[test]
    fn dual_exponential_phase() {
        let d = eval_dual(
            &Expr::parse("exp(i*th)").unwrap(),
            &[("th", c(0.0, 0.0))],
            &["th"],
        )
        .unwrap();
        assert!((d.value - c(1.0, 0.0)).norm() < 1e-15);
        assert!((d.partials[0] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn conj_rejected_only_on_active_variables() {
        let e = Expr::parse("conj(a) * x").unwrap();
        let b = [("a", c(1.0, 2.0)), ("x", c(3.0, 0.0))];
        let d = eval_dual(&e, &b, &["x"]).unwrap();
        assert_eq!(d.partials[0], c(1.0, -2.0));
        assert_eq!(
            eval_dual(&e, &b, &["a"]),
            Err(ExprError::NonDifferentiableConj { variable: "a".into() })
        );
        // plain evaluation is unaffected
        assert_eq!(eval(&e, &b).unwrap(), c(3.0, -6.0));
    }

    #[test]
    fn bump_is_flat_outside_support() {
        let e = Expr::parse("bump(s)").unwrap();
        assert_eq!(eval(&e, &[("s", c(0.0, 0.0))]).unwrap(), c(1.0, 0.0));
        assert_eq!(eval(&e, &[("s", c(1.0, 0.0))]).unwrap(), c(0.0, 0.0));
        let d = eval_dual(&e, &[("s", c(1.5, 0.0))], &["s"]).unwrap();
        assert_eq!(d.partials[0], c(0.0, 0.0));
        // derivative matches finite differences inside the support
        let s0 = 0.4;
        let d = eval_dual(&e, &[("s", c(s0, 0.0))], &["s"]).unwrap();
        let h = 1e-6;
        let f = |s: f64| eval(&e, &[("s", c(s, 0.0))]).unwrap();
        let fd = (f(s0 + h) - f(s0 - h)) / (2.0 * h);
        assert!((d.partials[0] - fd).norm() < 1e-8);
    }

    #[test]
    fn display_is_readable() {
        let e = Expr::parse("(x+1)^2 - -y*2/(a-b)").unwrap();
        assert_eq!(e.to_string(), "(x + 1.0)^2 - -y * 2.0 / (a - b)");
        assert_eq!(Expr::parse("x^-2").unwrap().to_string(), "x^-2");
    }
}
