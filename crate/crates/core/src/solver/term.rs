//! Numeric terms flattened into postorder arrays for forward evaluation and
//! backward (HC4) contraction.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::interval::Interval;
use super::SolverError;
use crate::expr::{eval_expr, Assignment, BinOp, Expr, Value};
use crate::num::enclose;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Op {
    Const(Interval),
    Var(usize),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, i32),
    /// Both branches of a conditional; only used for enclosures.
    Hull(usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub(crate) ops: Vec<Op>,
    pub(crate) vars: Vec<usize>,
}

pub(crate) enum Contract {
    Empty,
    Ok,
}

impl Term {
    /// Compiles a numeric expression; `index` maps variable names to box slots.
    pub fn compile(e: &Expr, index: &HashMap<String, usize>) -> Result<Term, SolverError> {
        let mut ops = Vec::new();
        build(e, index, &mut ops)?;
        let mut vars: Vec<usize> =
            ops.iter().filter_map(|o| if let Op::Var(i) = o { Some(*i) } else { None }).collect();
        vars.sort_unstable();
        vars.dedup();
        Ok(Term { ops, vars })
    }

    pub fn difference(a: Term, b: Term) -> Term {
        let mut ops = a.ops;
        let off = ops.len();
        let ra = off - 1;
        ops.extend(b.ops.into_iter().map(|o| shift(o, off)));
        let rb = ops.len() - 1;
        ops.push(Op::Sub(ra, rb));
        let mut vars = a.vars;
        vars.extend(b.vars);
        vars.sort_unstable();
        vars.dedup();
        Term { ops, vars }
    }

    pub fn negated(mut self) -> Term {
        let r = self.ops.len() - 1;
        self.ops.push(Op::Neg(r));
        self
    }

    pub fn eval(&self, b: &[Interval]) -> Interval {
        let mut vals = Vec::with_capacity(self.ops.len());
        self.forward(b, &mut vals);
        vals[vals.len() - 1]
    }

    fn forward(&self, b: &[Interval], vals: &mut Vec<Interval>) {
        vals.clear();
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(i) => b[i],
                Op::Neg(a) => vals[a].neg(),
                Op::Add(x, y) => vals[x].add(&vals[y]),
                Op::Sub(x, y) => vals[x].sub(&vals[y]),
                Op::Mul(x, y) => vals[x].mul(&vals[y]),
                Op::Div(x, y) => vals[x].div(&vals[y]),
                Op::Pow(x, n) => vals[x].powi(n),
                Op::Hull(x, y) => vals[x].hull(&vals[y]),
            };
            vals.push(v);
        }
    }

    /// Narrows `b` to points where the term may lie in `target`.
    pub(crate) fn contract(&self, b: &mut [Interval], target: Interval, vals: &mut Vec<Interval>) -> Contract {
        self.forward(b, vals);
        let root = self.ops.len() - 1;
        vals[root] = vals[root].intersect(&target);
        if vals[root].is_empty() {
            return Contract::Empty;
        }
        for k in (0..self.ops.len()).rev() {
            let r = vals[k];
            let narrowed = |vals: &mut Vec<Interval>, i: usize, v: Interval| -> bool {
                vals[i] = vals[i].intersect(&v);
                !vals[i].is_empty()
            };
            let ok = match self.ops[k] {
                Op::Const(c) => !r.intersect(&c).is_empty(),
                Op::Var(i) => {
                    b[i] = b[i].intersect(&r);
                    !b[i].is_empty()
                }
                Op::Neg(a) => narrowed(vals, a, r.neg()),
                Op::Add(x, y) => {
                    let (vx, vy) = (vals[x], vals[y]);
                    narrowed(vals, x, r.sub(&vy)) && narrowed(vals, y, r.sub(&vx))
                }
                Op::Sub(x, y) => {
                    let (vx, vy) = (vals[x], vals[y]);
                    narrowed(vals, x, r.add(&vy)) && narrowed(vals, y, vx.sub(&r))
                }
                Op::Mul(x, y) => {
                    let vy = vals[y];
                    let okx = vy.contains_zero() || narrowed(vals, x, r.div(&vy));
                    let vx = vals[x];
                    okx && (vx.contains_zero() || narrowed(vals, y, r.div(&vx)))
                }
                Op::Div(x, y) => {
                    let vy = vals[y];
                    let okx = vy.is_empty() || narrowed(vals, x, r.mul(&vy));
                    okx && (r.contains_zero() || narrowed(vals, y, vals[x].div(&r))) && !(vy.lo == 0.0 && vy.hi == 0.0)
                }
                Op::Pow(x, n) if n > 0 => {
                    let vx = vals[x];
                    let inv = if n % 2 == 0 { r.even_root_within(n as u32, &vx) } else { r.root(n as u32) };
                    narrowed(vals, x, inv)
                }
                Op::Pow(..) | Op::Hull(..) => true,
            };
            if !ok {
                return Contract::Empty;
            }
        }
        Contract::Ok
    }
}

fn shift(o: Op, off: usize) -> Op {
    match o {
        Op::Const(c) => Op::Const(c),
        Op::Var(i) => Op::Var(i),
        Op::Neg(a) => Op::Neg(a + off),
        Op::Add(a, b) => Op::Add(a + off, b + off),
        Op::Sub(a, b) => Op::Sub(a + off, b + off),
        Op::Mul(a, b) => Op::Mul(a + off, b + off),
        Op::Div(a, b) => Op::Div(a + off, b + off),
        Op::Pow(a, n) => Op::Pow(a + off, n),
        Op::Hull(a, b) => Op::Hull(a + off, b + off),
    }
}

fn constant_exponent(e: &Expr) -> Result<i32, SolverError> {
    let unsupported = || SolverError::Unsupported(format!("exponent `{e}` is not a constant integer"));
    match eval_expr(e, &Assignment::new()) {
        Ok(Value::Num(r)) if r.is_integer() => {
            r.to_integer().to_i32().filter(|k| k.abs() <= 64).ok_or_else(unsupported)
        }
        _ => Err(unsupported()),
    }
}

fn build(e: &Expr, index: &HashMap<String, usize>, ops: &mut Vec<Op>) -> Result<usize, SolverError> {
    let op = match e {
        Expr::Num(r) => {
            let (lo, hi) = enclose(r);
            Op::Const(Interval::new(lo, hi))
        }
        Expr::Var(v) => Op::Var(*index.get(v).ok_or_else(|| SolverError::UnknownVariable(v.clone()))?),
        Expr::Neg(a) => Op::Neg(build(a, index, ops)?),
        Expr::Bin(BinOp::Pow, a, k) => {
            let n = constant_exponent(k)?;
            Op::Pow(build(a, index, ops)?, n)
        }
        Expr::Bin(op, a, b) => {
            let x = build(a, index, ops)?;
            let y = build(b, index, ops)?;
            match op {
                BinOp::Add => Op::Add(x, y),
                BinOp::Sub => Op::Sub(x, y),
                BinOp::Mul => Op::Mul(x, y),
                BinOp::Div => Op::Div(x, y),
                BinOp::Pow => unreachable!(),
            }
        }
        Expr::Ite(_, t, f) => {
            let x = build(t, index, ops)?;
            let y = build(f, index, ops)?;
            Op::Hull(x, y)
        }
        Expr::Bool(_) | Expr::Not(_) | Expr::Logic(..) | Expr::Cmp(..) => {
            return Err(SolverError::Type(format!("boolean expression `{e}` used as a number")))
        }
    };
    ops.push(op);
    Ok(ops.len() - 1)
}
