use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::{BinOp, CmpOp, Expr, LogicOp};
use crate::num::Rational;

/// Total or partial map from variable label to exact value.
pub type Assignment = BTreeMap<String, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Num(Rational),
    Bool(bool),
}

impl Value {
    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Value::Num(r) => Some(r),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Num(_) => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("`**` needs an integer exponent")]
    NonIntegerExponent,
    #[error("exponent {0} is too large")]
    ExponentTooLarge(String),
    #[error("expected a number, found a boolean")]
    ExpectedNumber,
    #[error("expected a boolean, found a number")]
    ExpectedBool,
    #[error("variable `{0}` is not assigned")]
    Unbound(String),
}

const MAX_EXPONENT: i64 = 4096;

/// Evaluates with exact rational arithmetic. The guard of a conditional is
/// evaluated first and only the selected branch is evaluated afterwards.
pub fn eval_expr(e: &Expr, a: &Assignment) -> Result<Value, EvalError> {
    match e {
        Expr::Num(r) => Ok(Value::Num(r.clone())),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Var(v) => a.get(v).cloned().map(Value::Num).ok_or_else(|| EvalError::Unbound(v.clone())),
        Expr::Neg(x) => Ok(Value::Num(-num(x, a)?)),
        Expr::Not(x) => Ok(Value::Bool(!boolean(x, a)?)),
        Expr::Bin(op, x, y) => {
            let (l, r) = (num(x, a)?, num(y, a)?);
            let v = match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r.is_zero() {
                        return Err(EvalError::DivisionByZero);
                    }
                    l / r
                }
                BinOp::Pow => pow(&l, &r)?,
            };
            Ok(Value::Num(v))
        }
        Expr::Logic(op, x, y) => {
            let (l, r) = (boolean(x, a)?, boolean(y, a)?);
            Ok(Value::Bool(match op {
                LogicOp::And => l && r,
                LogicOp::Or => l || r,
                LogicOp::Xor => l ^ r,
            }))
        }
        Expr::Cmp(op, x, y) => {
            let (l, r) = (num(x, a)?, num(y, a)?);
            Ok(Value::Bool(match op {
                CmpOp::Eq => l == r,
                CmpOp::Ne => l != r,
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Gt => l > r,
                CmpOp::Ge => l >= r,
            }))
        }
        Expr::Ite(c, t, f) => {
            if boolean(c, a)? {
                eval_expr(t, a)
            } else {
                eval_expr(f, a)
            }
        }
    }
}

fn num(e: &Expr, a: &Assignment) -> Result<Rational, EvalError> {
    match eval_expr(e, a)? {
        Value::Num(r) => Ok(r),
        Value::Bool(_) => Err(EvalError::ExpectedNumber),
    }
}

fn boolean(e: &Expr, a: &Assignment) -> Result<bool, EvalError> {
    match eval_expr(e, a)? {
        Value::Bool(b) => Ok(b),
        Value::Num(_) => Err(EvalError::ExpectedBool),
    }
}

fn pow(base: &Rational, exp: &Rational) -> Result<Rational, EvalError> {
    if !exp.is_integer() {
        return Err(EvalError::NonIntegerExponent);
    }
    let k = exp
        .to_integer()
        .to_i64()
        .filter(|k| k.abs() <= MAX_EXPONENT)
        .ok_or_else(|| EvalError::ExponentTooLarge(exp.to_string()))?;
    if k < 0 && base.is_zero() {
        return Err(EvalError::DivisionByZero);
    }
    let mut acc = Rational::one();
    for _ in 0..k.unsigned_abs() {
        acc *= base;
    }
    Ok(if k < 0 { acc.recip() } else { acc })
}
