//! Arithmetic and boolean expressions over named variables.
//!
//! The accepted syntax is the operator subset used in problem specifications:
//! `+ - * / **`, unary `-`, the bitwise connectives `& | ^ ~` (with `and`,
//! `or`, `not` as keyword aliases), the six comparisons and the conditional
//! `a if cond else b`.

mod eval;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{eval_expr, Assignment, EvalError, Value};
pub use parser::{parse_expr, ParseError};

use crate::num::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicOp {
    And,
    Or,
    Xor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Rational),
    Bool(bool),
    Var(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Logic(LogicOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    /// `then if cond else otherwise`
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(r: Rational) -> Expr {
        Expr::Num(r)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn truth() -> Expr {
        Expr::Bool(true)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn ite(cond: Expr, then: Expr, otherwise: Expr) -> Expr {
        Expr::Ite(Box::new(cond), Box::new(then), Box::new(otherwise))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Bool(true), e) | (e, Expr::Bool(true)) => e,
            (a, b) => Expr::Logic(LogicOp::And, Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Bool(false), e) | (e, Expr::Bool(false)) => e,
            (a, b) => Expr::Logic(LogicOp::Or, Box::new(a), Box::new(b)),
        }
    }

    /// Conjunction of all items, `True` when empty.
    pub fn all(items: impl IntoIterator<Item = Expr>) -> Expr {
        items.into_iter().fold(Expr::Bool(true), Expr::and)
    }

    /// Disjunction of all items, `False` when empty.
    pub fn any(items: impl IntoIterator<Item = Expr>) -> Expr {
        items.into_iter().fold(Expr::Bool(false), Expr::or)
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Expr::Bool(true))
    }

    /// Names of all referenced variables.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Bool(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(a) | Expr::Not(a) => a.collect_vars(out),
            Expr::Bin(_, a, b) | Expr::Logic(_, a, b) | Expr::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Ite(c, t, e) => {
                c.collect_vars(out);
                t.collect_vars(out);
                e.collect_vars(out);
            }
        }
    }

    /// Replaces variables for which `f` returns a replacement.
    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Num(_) | Expr::Bool(_) => self.clone(),
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(f))),
            Expr::Not(a) => Expr::Not(Box::new(a.substitute(f))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Logic(op, a, b) => Expr::Logic(*op, Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            Expr::Ite(c, t, e) => {
                Expr::Ite(Box::new(c.substitute(f)), Box::new(t.substitute(f)), Box::new(e.substitute(f)))
            }
        }
    }

    pub fn rename(&self, f: &dyn Fn(&str) -> Option<String>) -> Expr {
        self.substitute(&|v| f(v).map(Expr::Var))
    }

    /// True when the root of the expression produces a boolean.
    pub fn is_boolean(&self) -> bool {
        match self {
            Expr::Bool(_) | Expr::Not(_) | Expr::Logic(..) | Expr::Cmp(..) => true,
            Expr::Ite(_, t, _) => t.is_boolean(),
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => {
                let s = format_rational(r);
                if s.starts_with('-') || s.contains('/') {
                    write!(f, "({s})")
                } else {
                    f.write_str(&s)
                }
            }
            Expr::Bool(true) => f.write_str("True"),
            Expr::Bool(false) => f.write_str("False"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(a) => match a.as_ref() {
                Expr::Num(_) => write!(f, "(-({a}))"),
                _ => write!(f, "(-{a})"),
            },
            Expr::Not(a) => write!(f, "(~{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "**",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Logic(op, a, b) => {
                let s = match op {
                    LogicOp::And => "&",
                    LogicOp::Or => "|",
                    LogicOp::Xor => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Cmp(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Ite(c, t, e) => write!(f, "({t} if {c} else {e})"),
        }
    }
}
