//! Test-local expression trees, rendered to source text and evaluated
//! without going through the library.

use std::fmt::Write as _;

use gearbox::num::Rational;
use num_traits::{One, Zero};
use proptest::prelude::*;

pub const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Debug)]
pub enum Num {
    /// `c / 10^k`
    Const(i64, u32),
    Var(usize),
    Neg(Box<Num>),
    Bin(char, Box<Num>, Box<Num>),
    Pow(Box<Num>, u32),
    Ite(Box<Pred>, Box<Num>, Box<Num>),
}

#[derive(Clone, Debug)]
pub enum Pred {
    Lit(bool),
    Cmp(&'static str, Num, Num),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

pub fn decimal(c: i64, k: u32) -> String {
    let digits = c.unsigned_abs().to_string();
    let body = if k == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = k as usize + 1);
        let (int, frac) = padded.split_at(padded.len() - k as usize);
        format!("{int}.{frac}")
    };
    if c < 0 {
        format!("(-{body})")
    } else {
        body
    }
}

fn ten_pow(k: u32) -> Rational {
    Rational::from_integer(10.into()).pow(k as i32)
}

impl Num {
    pub fn render(&self, out: &mut String) {
        match self {
            Num::Const(c, k) => out.push_str(&decimal(*c, *k)),
            Num::Var(i) => out.push_str(VARS[*i]),
            Num::Neg(a) => {
                out.push_str("(-");
                a.render(out);
                out.push(')');
            }
            Num::Bin(op, a, b) => {
                out.push('(');
                a.render(out);
                let _ = write!(out, " {op} ");
                b.render(out);
                out.push(')');
            }
            Num::Pow(a, n) => {
                out.push('(');
                a.render(out);
                let _ = write!(out, " ** {n})");
            }
            Num::Ite(c, t, e) => {
                out.push('(');
                t.render(out);
                out.push_str(" if ");
                c.render(out);
                out.push_str(" else ");
                e.render(out);
                out.push(')');
            }
        }
    }

    /// Exact value; `None` on division by zero.
    pub fn exact(&self, a: &[Rational]) -> Option<Rational> {
        Some(match self {
            Num::Const(c, k) => Rational::from_integer((*c).into()) / ten_pow(*k),
            Num::Var(i) => a[*i].clone(),
            Num::Neg(x) => -x.exact(a)?,
            Num::Bin(op, x, y) => {
                let (l, r) = (x.exact(a), y.exact(a));
                let (l, r) = (l?, r?);
                match op {
                    '+' => l + r,
                    '-' => l - r,
                    '*' => l * r,
                    '/' if r.is_zero() => return None,
                    '/' => l / r,
                    _ => unreachable!(),
                }
            }
            Num::Pow(x, n) => {
                let b = x.exact(a)?;
                (0..*n).fold(Rational::one(), |acc, _| acc * &b)
            }
            Num::Ite(c, t, e) => {
                if c.exact(a)? {
                    t.exact(a)?
                } else {
                    e.exact(a)?
                }
            }
        })
    }

    pub fn float(&self, a: &[f64]) -> f64 {
        match self {
            Num::Const(c, k) => *c as f64 / 10f64.powi(*k as i32),
            Num::Var(i) => a[*i],
            Num::Neg(x) => -x.float(a),
            Num::Bin(op, x, y) => {
                let (l, r) = (x.float(a), y.float(a));
                match op {
                    '+' => l + r,
                    '-' => l - r,
                    '*' => l * r,
                    '/' => l / r,
                    _ => unreachable!(),
                }
            }
            Num::Pow(x, n) => x.float(a).powi(*n as i32),
            Num::Ite(..) => panic!("conditional terms have no slack semantics"),
        }
    }
}

impl Pred {
    pub fn render(&self, out: &mut String) {
        match self {
            Pred::Lit(b) => out.push_str(if *b { "True" } else { "False" }),
            Pred::Cmp(op, a, b) => {
                out.push('(');
                a.render(out);
                let _ = write!(out, " {op} ");
                b.render(out);
                out.push(')');
            }
            Pred::And(a, b) | Pred::Or(a, b) => {
                let word = if matches!(self, Pred::And(..)) { "and" } else { "or" };
                out.push('(');
                a.render(out);
                let _ = write!(out, " {word} ");
                b.render(out);
                out.push(')');
            }
            Pred::Not(a) => {
                out.push_str("(not ");
                a.render(out);
                out.push(')');
            }
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        self.render(&mut s);
        s
    }

    /// Exact truth; both operands of a connective are evaluated.
    pub fn exact(&self, a: &[Rational]) -> Option<bool> {
        Some(match self {
            Pred::Lit(b) => *b,
            Pred::Cmp(op, x, y) => {
                let (l, r) = (x.exact(a), y.exact(a));
                let (l, r) = (l?, r?);
                match *op {
                    "<" => l < r,
                    "<=" => l <= r,
                    ">" => l > r,
                    ">=" => l >= r,
                    "==" => l == r,
                    "!=" => l != r,
                    _ => unreachable!(),
                }
            }
            Pred::And(x, y) => {
                let (l, r) = (x.exact(a)?, y.exact(a));
                let r = r?;
                l && r
            }
            Pred::Or(x, y) => {
                let (l, r) = (x.exact(a)?, y.exact(a));
                let r = r?;
                l || r
            }
            Pred::Not(x) => !x.exact(a)?,
        })
    }

    /// Truth with every atom shifted by slack `s`: `s > 0` weakens,
    /// `s < 0` strengthens. Negation flips the direction.
    pub fn slack(&self, a: &[f64], s: f64) -> bool {
        match self {
            Pred::Lit(b) => *b,
            Pred::Cmp(op, x, y) => {
                let d = x.float(a) - y.float(a);
                match *op {
                    "<=" => d <= s,
                    "<" => d < s,
                    ">=" => -d <= s,
                    ">" => -d < s,
                    "==" => d.abs() <= s,
                    "!=" => d.abs() > -s,
                    _ => unreachable!(),
                }
            }
            Pred::And(x, y) => x.slack(a, s) && y.slack(a, s),
            Pred::Or(x, y) => x.slack(a, s) || y.slack(a, s),
            Pred::Not(x) => !x.slack(a, -s),
        }
    }
}

fn constant() -> impl Strategy<Value = Num> {
    (-40i64..=40, 0u32..=2).prop_map(|(c, k)| Num::Const(c, k))
}

/// Terms over the first `nvars` variables. `general` adds division and conditionals.
pub fn num(nvars: usize, general: bool) -> BoxedStrategy<Num> {
    let leaf = prop_oneof![constant(), (0..nvars).prop_map(Num::Var)];
    leaf.prop_recursive(3, 12, 2, move |inner| {
        let ops: Vec<char> = if general { vec!['+', '-', '*', '/'] } else { vec!['+', '-', '*'] };
        let bin = (prop::sample::select(ops), inner.clone(), inner.clone())
            .prop_map(|(op, a, b)| Num::Bin(op, Box::new(a), Box::new(b)));
        let pow = (inner.clone(), 0u32..=3).prop_map(|(a, n)| Num::Pow(Box::new(a), n));
        let neg = inner.clone().prop_map(|a| Num::Neg(Box::new(a)));
        if general {
            let ite = (pred_over(inner.clone(), 1), inner.clone(), inner)
                .prop_map(|(c, t, e)| Num::Ite(Box::new(c), Box::new(t), Box::new(e)));
            prop_oneof![3 => bin, 1 => pow, 1 => neg, 1 => ite].boxed()
        } else {
            prop_oneof![3 => bin, 1 => pow, 1 => neg].boxed()
        }
    })
    .boxed()
}

const CMPS: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

fn pred_over(term: BoxedStrategy<Num>, depth: u32) -> BoxedStrategy<Pred> {
    let atom = (prop::sample::select(CMPS.to_vec()), term.clone(), term).prop_map(|(op, a, b)| Pred::Cmp(op, a, b));
    let leaf = prop_oneof![6 => atom, 1 => any::<bool>().prop_map(Pred::Lit)];
    leaf.prop_recursive(depth, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::Or(Box::new(a), Box::new(b))),
            inner.prop_map(|a| Pred::Not(Box::new(a))),
        ]
    })
    .boxed()
}

pub fn pred(nvars: usize, general: bool) -> BoxedStrategy<Pred> {
    pred_over(num(nvars, general), 2)
}

/// Polynomial atoms only, combined with and/or/not.
pub fn solver_formula(nvars: usize) -> BoxedStrategy<Pred> {
    pred_over(num(nvars, false), 2)
}

/// Pure conjunction of polynomial atoms without disequalities.
pub fn conjunction(nvars: usize) -> BoxedStrategy<Pred> {
    let atom = (prop::sample::select(vec!["<", "<=", ">", ">=", "=="]), num(nvars, false), num(nvars, false))
        .prop_map(|(op, a, b)| Pred::Cmp(op, a, b));
    prop::collection::vec(atom, 1..4)
        .prop_map(|atoms| atoms.into_iter().reduce(|a, b| Pred::And(Box::new(a), Box::new(b))).expect("non-empty"))
        .boxed()
}

pub fn values(nvars: usize) -> impl Strategy<Value = Vec<(i64, u32)>> {
    prop::collection::vec((-30i64..=30, 0u32..=2), nvars)
}

pub fn rationals(v: &[(i64, u32)]) -> Vec<Rational> {
    v.iter().map(|&(c, k)| Rational::from_integer(c.into()) / ten_pow(k)).collect()
}
