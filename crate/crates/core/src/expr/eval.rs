use smallvec::SmallVec;

use super::{BinOp, Expr, ExprError, Func, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A complex value with its partial derivatives along a fixed set of
/// directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DualValue {
    pub value: C64,
    pub partials: SmallVec<[C64; 8]>,
}

impl DualValue {
    pub fn constant(value: C64, directions: usize) -> Self {
        DualValue {
            value,
            partials: SmallVec::from_elem(ZERO, directions),
        }
    }

    /// Coordinate `k` of `directions` independent variables.
    pub fn variable(value: C64, directions: usize, k: usize) -> Self {
        let mut d = Self::constant(value, directions);
        d.partials[k] = ONE;
        d
    }

    /// A real coordinate whose derivative along direction `j` is `seeds[j]`.
    pub fn seeded(value: f64, seeds: &[f64]) -> Self {
        DualValue {
            value: C64::new(value, 0.0),
            partials: seeds.iter().map(|&s| C64::new(s, 0.0)).collect(),
        }
    }

    pub fn directions(&self) -> usize {
        self.partials.len()
    }

    pub fn is_active(&self) -> bool {
        self.partials.iter().any(|d| *d != ZERO)
    }

    /// Chain rule for a scalar function with value `f` and derivative `df`.
    fn chain(&self, f: C64, df: C64) -> Self {
        DualValue {
            value: f,
            partials: self.partials.iter().map(|d| d * df).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        DualValue {
            value: self.value + o.value,
            partials: self.partials.iter().zip(&o.partials).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        DualValue {
            value: self.value - o.value,
            partials: self.partials.iter().zip(&o.partials).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        DualValue {
            value: self.value * o.value,
            partials: self
                .partials
                .iter()
                .zip(&o.partials)
                .map(|(a, b)| a * o.value + self.value * b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        DualValue {
            value: -self.value,
            partials: self.partials.iter().map(|d| -d).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.chain(self.value * s, s)
    }

    /// Non-negative integer power.
    pub fn powu(&self, n: u32) -> Self {
        if n == 0 {
            return DualValue::constant(ONE, self.directions());
        }
        let lower = self.value.powu(n - 1);
        self.chain(lower * self.value, lower * n as f64)
    }
}

#[derive(Debug, Clone)]
enum Op {
    Const(C64),
    Var(usize),
    Neg,
    Bin(BinOp),
    Pow(i32),
    Call(Func),
    /// `conj` whose argument reads the listed variables.
    Conj(Vec<usize>),
}

/// An [`Expr`] compiled to a postfix program over an ordered variable list.
///
/// Compiled programs are immutable and may be shared across threads.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    names: Vec<String>,
    depth: usize,
}

impl Compiled {
    pub(super) fn new<S: AsRef<str>>(e: &Expr, variables: &[S]) -> Result<Self, ExprError> {
        let names: Vec<String> = variables.iter().map(|s| s.as_ref().to_string()).collect();
        let mut ops = Vec::new();
        emit(e, &names, &mut ops)?;
        let mut depth: usize = 0;
        let mut max_depth = 0;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Bin(_) => depth -= 1,
                _ => {}
            }
            max_depth = max_depth.max(depth);
        }
        Ok(Compiled { ops, names, depth: max_depth })
    }

    pub fn variables(&self) -> &[String] {
        &self.names
    }

    fn describe(&self, values: impl Iterator<Item = C64>) -> String {
        self.names
            .iter()
            .zip(values)
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Evaluates with `values[k]` bound to the k-th compiled variable.
    pub fn eval(&self, values: &[C64]) -> Result<C64, ExprError> {
        assert_eq!(values.len(), self.names.len(), "binding count mismatch");
        let mut stack: SmallVec<[C64; 16]> = SmallVec::with_capacity(self.depth);
        let div_zero = || ExprError::DivisionByZero {
            bindings: self.describe(values.iter().copied()),
        };
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Var(k) => stack.push(values[*k]),
                Op::Neg => {
                    let a = stack.pop().unwrap();
                    stack.push(-a);
                }
                Op::Bin(b) => {
                    let rhs = stack.pop().unwrap();
                    let lhs = stack.pop().unwrap();
                    stack.push(match b {
                        BinOp::Add => lhs + rhs,
                        BinOp::Sub => lhs - rhs,
                        BinOp::Mul => lhs * rhs,
                        BinOp::Div => {
                            if rhs == ZERO {
                                return Err(div_zero());
                            }
                            lhs / rhs
                        }
                    });
                }
                Op::Pow(n) => {
                    let a = stack.pop().unwrap();
                    if a == ZERO && *n < 0 {
                        return Err(div_zero());
                    }
                    stack.push(a.powi(*n));
                }
                Op::Call(f) => {
                    let a = stack.pop().unwrap();
                    stack.push(apply(*f, a).0);
                }
                Op::Conj(_) => {
                    let a = stack.pop().unwrap();
                    stack.push(a.conj());
                }
            }
        }
        Ok(stack.pop().unwrap())
    }

    /// Forward-mode evaluation. Every input must carry the same number of
    /// directions; an input with any nonzero partial counts as active.
    pub fn eval_dual(&self, values: &[DualValue]) -> Result<DualValue, ExprError> {
        assert_eq!(values.len(), self.names.len(), "binding count mismatch");
        let dirs = values.first().map_or(0, |v| v.directions());
        let mut stack: Vec<DualValue> = Vec::with_capacity(self.depth);
        let div_zero = || ExprError::DivisionByZero {
            bindings: self.describe(values.iter().map(|v| v.value)),
        };
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(DualValue::constant(*c, dirs)),
                Op::Var(k) => stack.push(values[*k].clone()),
                Op::Neg => {
                    let a = stack.pop().unwrap();
                    stack.push(a.neg());
                }
                Op::Bin(b) => {
                    let rhs = stack.pop().unwrap();
                    let lhs = stack.pop().unwrap();
                    stack.push(match b {
                        BinOp::Add => lhs.add(&rhs),
                        BinOp::Sub => lhs.sub(&rhs),
                        BinOp::Mul => lhs.mul(&rhs),
                        BinOp::Div => {
                            if rhs.value == ZERO {
                                return Err(div_zero());
                            }
                            let inv = ONE / rhs.value;
                            let q = lhs.value * inv;
                            DualValue {
                                value: q,
                                partials: lhs
                                    .partials
                                    .iter()
                                    .zip(&rhs.partials)
                                    .map(|(a, b)| (a - q * b) * inv)
                                    .collect(),
                            }
                        }
                    });
                }
                Op::Pow(n) => {
                    let a = stack.pop().unwrap();
                    if *n == 0 {
                        stack.push(DualValue::constant(ONE, dirs));
                        continue;
                    }
                    if a.value == ZERO && *n < 0 {
                        return Err(div_zero());
                    }
                    let lower = a.value.powi(n - 1);
                    stack.push(a.chain(lower * a.value, lower * *n as f64));
                }
                Op::Call(f) => {
                    let a = stack.pop().unwrap();
                    let (v, dv) = apply(*f, a.value);
                    if *f == Func::Sqrt && a.value == ZERO && a.is_active() {
                        return Err(div_zero());
                    }
                    stack.push(a.chain(v, dv));
                }
                Op::Conj(reads) => {
                    if let Some(&k) = reads.iter().find(|&&k| values[k].is_active()) {
                        return Err(ExprError::NonDifferentiableConj {
                            variable: self.names[k].clone(),
                        });
                    }
                    let a = stack.pop().unwrap();
                    stack.push(DualValue::constant(a.value.conj(), dirs));
                }
            }
        }
        Ok(stack.pop().unwrap())
    }
}

/// Value and complex derivative of a holomorphic builtin.
fn apply(f: Func, z: C64) -> (C64, C64) {
    match f {
        Func::Sin => (z.sin(), z.cos()),
        Func::Cos => (z.cos(), -z.sin()),
        Func::Exp => {
            let e = z.exp();
            (e, e)
        }
        Func::Sqrt => {
            let s = z.sqrt();
            if s == ZERO {
                (s, ZERO)
            } else {
                (s, 0.5 / s)
            }
        }
        Func::Bump => {
            if z.re >= 1.0 {
                (ZERO, ZERO)
            } else {
                let w = ONE - z;
                let b = (ONE - ONE / w).exp();
                (b, -b / (w * w))
            }
        }
        Func::Conj => (z.conj(), ZERO),
    }
}

fn emit(e: &Expr, names: &[String], ops: &mut Vec<Op>) -> Result<(), ExprError> {
    match e {
        Expr::Num(v) => ops.push(Op::Const(C64::new(*v, 0.0))),
        Expr::ImagUnit => ops.push(Op::Const(C64::new(0.0, 1.0))),
        Expr::Var(name) => {
            let k = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| ExprError::UnboundVariable(name.clone()))?;
            ops.push(Op::Var(k));
        }
        Expr::Neg(a) => {
            emit(a, names, ops)?;
            ops.push(Op::Neg);
        }
        Expr::Binary(op, a, b) => {
            emit(a, names, ops)?;
            emit(b, names, ops)?;
            ops.push(Op::Bin(*op));
        }
        Expr::Pow(a, n) => {
            emit(a, names, ops)?;
            ops.push(Op::Pow(*n));
        }
        Expr::Call(Func::Conj, a) => {
            emit(a, names, ops)?;
            let reads = a
                .variables()
                .into_iter()
                .filter_map(|v| names.iter().position(|n| n == v))
                .collect();
            ops.push(Op::Conj(reads));
        }
        Expr::Call(f, a) => {
            emit(a, names, ops)?;
            ops.push(Op::Call(*f));
        }
    }
    Ok(())
}
