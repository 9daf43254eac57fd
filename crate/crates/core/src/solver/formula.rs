//! Quantifier-free formulas in negation normal form over `t rel 0` atoms.

use std::collections::HashMap;
use std::sync::Arc;

use super::interval::Interval;
use super::term::Term;
use super::SolverError;
use crate::expr::{CmpOp, Expr, LogicOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    /// `t <= 0`
    Le,
    /// `t < 0`
    Lt,
    /// `t == 0`
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub term: Term,
    pub rel: Rel,
    /// Absolute tolerance replacing the solver's δ for this atom.
    pub slack: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Verdict {
    Refuted,
    Certain,
    Undecided,
}

impl Atom {
    pub(crate) fn judge(&self, b: &[Interval], delta: f64) -> Verdict {
        let t = self.term.eval(b);
        if t.is_empty() {
            return Verdict::Refuted;
        }
        let slack = self.slack.unwrap_or(delta);
        match self.rel {
            Rel::Le if t.lo > 0.0 => Verdict::Refuted,
            Rel::Lt if t.lo >= 0.0 => Verdict::Refuted,
            Rel::Eq if t.lo > 0.0 || t.hi < 0.0 => Verdict::Refuted,
            Rel::Le if t.hi <= slack => Verdict::Certain,
            Rel::Lt if t.hi < slack || (slack > 0.0 && t.hi <= slack) => Verdict::Certain,
            Rel::Eq if t.lo >= -slack && t.hi <= slack => Verdict::Certain,
            _ => Verdict::Undecided,
        }
    }

    /// Range the term is narrowed to during contraction.
    pub(crate) fn target(&self) -> Interval {
        match self.rel {
            Rel::Le | Rel::Lt => Interval::new(f64::NEG_INFINITY, 0.0),
            Rel::Eq => Interval::point(0.0),
        }
    }

    fn negate(&self) -> Formula {
        let flip = |rel| Formula::Atom(Arc::new(Atom { term: self.term.clone().negated(), rel, slack: self.slack }));
        match self.rel {
            Rel::Le => flip(Rel::Lt),
            Rel::Lt => flip(Rel::Le),
            Rel::Eq => Formula::Or(vec![
                Formula::Atom(Arc::new(Atom { term: self.term.clone(), rel: Rel::Lt, slack: self.slack })),
                flip(Rel::Lt),
            ]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Arc<Atom>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn and(items: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(items: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// Negation, pushed down to the atoms.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a) => a.negate(),
            Formula::And(items) => Formula::or(items.iter().map(Formula::negate).collect()),
            Formula::Or(items) => Formula::and(items.iter().map(Formula::negate).collect()),
        }
    }

    /// Translates a boolean expression. Numeric conditionals are lifted into
    /// a case split over their guards; guard atoms are decided without slack
    /// so the cases stay disjoint.
    pub fn from_expr(e: &Expr, index: &HashMap<String, usize>, slack: Option<f64>) -> Result<Formula, SolverError> {
        translate(e, true, index, slack)
    }

    pub(crate) fn judge(&self, b: &[Interval], delta: f64) -> Verdict {
        match self {
            Formula::True => Verdict::Certain,
            Formula::False => Verdict::Refuted,
            Formula::Atom(a) => a.judge(b, delta),
            Formula::And(items) => {
                let mut all = true;
                for f in items {
                    match f.judge(b, delta) {
                        Verdict::Refuted => return Verdict::Refuted,
                        Verdict::Undecided => all = false,
                        Verdict::Certain => {}
                    }
                }
                if all {
                    Verdict::Certain
                } else {
                    Verdict::Undecided
                }
            }
            Formula::Or(items) => {
                let mut none = true;
                for f in items {
                    match f.judge(b, delta) {
                        Verdict::Certain => return Verdict::Certain,
                        Verdict::Undecided => none = false,
                        Verdict::Refuted => {}
                    }
                }
                if none {
                    Verdict::Refuted
                } else {
                    Verdict::Undecided
                }
            }
        }
    }

    pub fn atom_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Atom(_) => 1,
            Formula::And(v) | Formula::Or(v) => v.iter().map(Formula::atom_count).sum(),
        }
    }
}

fn translate(
    e: &Expr,
    positive: bool,
    index: &HashMap<String, usize>,
    slack: Option<f64>,
) -> Result<Formula, SolverError> {
    let rec = |e: &Expr, pos: bool| translate(e, pos, index, slack);
    Ok(match e {
        Expr::Bool(b) => {
            if *b == positive {
                Formula::True
            } else {
                Formula::False
            }
        }
        Expr::Not(a) => rec(a, !positive)?,
        Expr::Logic(LogicOp::Xor, a, b) => {
            let (a1, a0, b1, b0) = (rec(a, true)?, rec(a, false)?, rec(b, true)?, rec(b, false)?);
            if positive {
                Formula::or(vec![Formula::and(vec![a1, b0]), Formula::and(vec![a0, b1])])
            } else {
                Formula::or(vec![Formula::and(vec![a1, b1]), Formula::and(vec![a0, b0])])
            }
        }
        Expr::Logic(op, a, b) => {
            let (fa, fb) = (rec(a, positive)?, rec(b, positive)?);
            if (*op == LogicOp::And) == positive {
                Formula::and(vec![fa, fb])
            } else {
                Formula::or(vec![fa, fb])
            }
        }
        Expr::Ite(c, t, f) if e.is_boolean() => {
            let ct = translate(c, true, index, Some(0.0))?;
            let cf = translate(c, false, index, Some(0.0))?;
            Formula::or(vec![Formula::and(vec![ct, rec(t, positive)?]), Formula::and(vec![cf, rec(f, positive)?])])
        }
        Expr::Cmp(op, a, b) => {
            let mut cases = Vec::new();
            for (ga, ea) in lift(a) {
                for (gb, eb) in lift(b) {
                    let mut parts = Vec::new();
                    for (g, pol) in ga.iter().chain(gb.iter()) {
                        parts.push(translate(g, *pol, index, Some(0.0))?);
                    }
                    parts.push(comparison(*op, &ea, &eb, positive, index, slack)?);
                    cases.push(Formula::and(parts));
                }
            }
            // the guards partition the space, so negation stays a disjunction of cases
            Formula::or(cases)
        }
        Expr::Var(v) => return Err(SolverError::Type(format!("numeric variable `{v}` used as a condition"))),
        _ => return Err(SolverError::Type(format!("numeric expression `{e}` used as a condition"))),
    })
}

type Guards = Vec<(Expr, bool)>;

/// Case split of a numeric expression into conditional-free branches.
fn lift(e: &Expr) -> Vec<(Guards, Expr)> {
    match e {
        Expr::Ite(c, t, f) => {
            let mut out = Vec::new();
            for (mut g, x) in lift(t) {
                g.insert(0, ((**c).clone(), true));
                out.push((g, x));
            }
            for (mut g, x) in lift(f) {
                g.insert(0, ((**c).clone(), false));
                out.push((g, x));
            }
            out
        }
        Expr::Neg(a) => lift(a).into_iter().map(|(g, x)| (g, Expr::Neg(Box::new(x)))).collect(),
        Expr::Bin(op, a, b) => {
            let lb = lift(b);
            let mut out = Vec::new();
            for (ga, xa) in lift(a) {
                for (gb, xb) in &lb {
                    let mut g = ga.clone();
                    g.extend(gb.iter().cloned());
                    out.push((g, Expr::bin(*op, xa.clone(), xb.clone())));
                }
            }
            out
        }
        _ => vec![(Vec::new(), e.clone())],
    }
}

fn comparison(
    op: CmpOp,
    a: &Expr,
    b: &Expr,
    positive: bool,
    index: &HashMap<String, usize>,
    slack: Option<f64>,
) -> Result<Formula, SolverError> {
    let op = if positive { op } else { op.negate() };
    let ta = Term::compile(a, index)?;
    let tb = Term::compile(b, index)?;
    let atom = |term: Term, rel: Rel| Formula::Atom(Arc::new(Atom { term, rel, slack }));
    Ok(match op {
        CmpOp::Le => atom(Term::difference(ta, tb), Rel::Le),
        CmpOp::Lt => atom(Term::difference(ta, tb), Rel::Lt),
        CmpOp::Ge => atom(Term::difference(tb, ta), Rel::Le),
        CmpOp::Gt => atom(Term::difference(tb, ta), Rel::Lt),
        CmpOp::Eq => atom(Term::difference(ta, tb), Rel::Eq),
        CmpOp::Ne => Formula::or(vec![
            atom(Term::difference(ta.clone(), tb.clone()), Rel::Lt),
            atom(Term::difference(tb, ta), Rel::Lt),
        ]),
    })
}
