//! δ-complete decision procedure for quantifier-free nonlinear real and
//! integer arithmetic over bounded boxes.
//!
//! A `DeltaSat` answer means the δ-weakening of the formula holds in the
//! returned region: every `t <= 0` holds up to `t <= δ` and every `t == 0`
//! up to `|t| <= δ`. `Unsat` is exact.

mod formula;
pub mod interval;
mod kernel;
mod term;

use std::collections::HashMap;

pub use formula::{Atom, Formula, Rel};
pub use interval::Interval;
pub use term::Term;

use crate::expr::{CmpOp, Expr};
use crate::num::from_f64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("type error: {0}")]
    Type(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarDomain {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub integral: bool,
}

/// Ordered set of variables with their domains.
#[derive(Clone, Debug, Default)]
pub struct VarBox {
    pub vars: Vec<VarDomain>,
    index: HashMap<String, usize>,
}

impl VarBox {
    pub fn new() -> VarBox {
        VarBox::default()
    }

    /// Adds a variable, or narrows an existing one to the intersection.
    pub fn push(&mut self, name: &str, lo: f64, hi: f64, integral: bool) -> usize {
        if let Some(&i) = self.index.get(name) {
            let d = &mut self.vars[i];
            d.lo = d.lo.max(lo);
            d.hi = d.hi.min(hi);
            d.integral |= integral;
            return i;
        }
        self.vars.push(VarDomain { name: name.to_string(), lo, hi, integral });
        self.index.insert(name.to_string(), self.vars.len() - 1);
        self.vars.len() - 1
    }

    pub fn index(&self) -> &HashMap<String, usize> {
        &self.index
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn formula(&self, e: &Expr) -> Result<Formula, SolverError> {
        Formula::from_expr(e, &self.index, None)
    }

    /// Like [`VarBox::formula`] but every atom is decided exactly.
    pub fn strict_formula(&self, e: &Expr) -> Result<Formula, SolverError> {
        Formula::from_expr(e, &self.index, Some(0.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub delta: f64,
    /// Node budget; exceeding it yields `Unknown`.
    pub max_splits: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { delta: 1e-9, max_splits: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub point: Vec<f64>,
    pub region: Vec<Interval>,
}

impl Solution {
    pub fn value(&self, vars: &VarBox, name: &str) -> Option<f64> {
        vars.position(name).map(|i| self.point[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SatResult {
    DeltaSat(Solution),
    Unsat,
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Validity {
    Valid,
    CounterExample(Solution),
    Unknown(String),
}

pub fn check_sat(f: &Formula, vars: &VarBox, cfg: &SolverConfig) -> SatResult {
    kernel::search(f, vars, cfg)
}

/// Validity of `f` over the box, by refuting its negation.
pub fn check_valid(f: &Formula, vars: &VarBox, cfg: &SolverConfig) -> Validity {
    match check_sat(&f.negate(), vars, cfg) {
        SatResult::Unsat => Validity::Valid,
        SatResult::DeltaSat(s) => Validity::CounterExample(s),
        SatResult::Unknown(why) => Validity::Unknown(why),
    }
}

/// Expression true outside the closed box `lo[i] <= v_i <= hi[i]`.
pub fn exclude_region(names: &[String], region: &[Interval]) -> Expr {
    let num = |v: f64| Expr::Num(from_f64(v).expect("finite region bound"));
    Expr::any(names.iter().zip(region).flat_map(|(n, iv)| {
        let mut out = Vec::new();
        if iv.lo.is_finite() {
            out.push(Expr::cmp(CmpOp::Lt, Expr::var(n), num(iv.lo)));
        }
        if iv.hi.is_finite() {
            out.push(Expr::cmp(CmpOp::Gt, Expr::var(n), num(iv.hi)));
        }
        out
    }))
}

/// Outward enclosure of a numeric expression over a box.
pub fn enclose_expr(e: &Expr, vars: &VarBox, region: &[Interval]) -> Result<Interval, SolverError> {
    Ok(Term::compile(e, vars.index())?.eval(region))
}

pub fn domain_box(vars: &VarBox) -> Vec<Interval> {
    vars.vars.iter().map(|d| Interval::new(d.lo, d.hi)).collect()
}
