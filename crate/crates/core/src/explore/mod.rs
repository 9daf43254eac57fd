//! Exploration modes over ∃p ∀p'xy [η ∧ (θ ⟹ (φ_M ⟹ φ_cond))] instances.

mod certify;
mod gear;
mod optimize;
mod query;
mod report;
mod synth;
mod verify;

use indexmap::IndexMap;

pub use certify::certify;
pub use optimize::{optimize, optsyn, NullSink, ProgressRow, ProgressSink, ThresholdRow};
pub use query::query;
pub use report::{
    CertifyItem, Flag, Globals, ModeBody, ModeReport, ObjectiveResult, OptimizeReport, QueryItem, Status, SynthReport,
    VerifyItem,
};
pub use synth::synthesize;
pub use verify::verify;

use crate::exec::Execution;
use crate::expr::{eval_expr, Assignment, Expr, Value};
use crate::model::{encode_model, eval_model, leaf_hull, ModelDef, ModelError};
use crate::num::{enclose, from_f64, to_f64, Rational};
use crate::solver::{check_sat, Formula, Interval, SatResult, SolverConfig, SolverError, VarBox};
use crate::spec::{derive_domain_constraints, primed, DType, ProblemSpec, Radius};

#[derive(Debug, thiserror::Error)]
pub enum ExploreError {
    #[error("variable `{0}` needs a bounded range for exploration")]
    Unbounded(String),
    #[error("output `{0}` is not computed by the model")]
    MissingOutput(String),
    #[error("model feature `{0}` is not an input or knob of the problem specification")]
    ModelFeature(String),
    #[error("{0}")]
    Assignment(String),
    #[error("no data bounds for objective `{0}`")]
    MissingBounds(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug)]
pub struct ExploreConfig {
    /// Absolute δ for all atoms except objective thresholds.
    pub delta: f64,
    /// Objective threshold atoms use `delta_rel` times the objective's data range.
    pub delta_rel: f64,
    pub epsilon: f64,
    pub max_splits: usize,
    /// Candidate iterations per GearSAT run.
    pub max_iterations: usize,
    pub pareto: bool,
    pub exec: Execution,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            delta: 1e-9,
            delta_rel: 0.01,
            epsilon: 0.05,
            max_splits: 200_000,
            max_iterations: 500,
            pareto: false,
            exec: Execution::Parallel,
        }
    }
}

impl ExploreConfig {
    pub(crate) fn solver(&self) -> SolverConfig {
        SolverConfig { delta: self.delta, max_splits: self.max_splits }
    }
}

/// One conjunct of a condition, with an optional atom slack.
pub(crate) type Part = (Expr, Option<f64>);

pub struct Instance {
    pub spec: ProblemSpec,
    pub model: ModelDef,
    pub cfg: ExploreConfig,
    pub(crate) knobs: Vec<String>,
    pub(crate) inputs: Vec<String>,
    pub(crate) outputs: Vec<String>,
    pub(crate) alpha: Expr,
    pub(crate) eta: Expr,
    functional: Option<IndexMap<String, Expr>>,
    encoding: Expr,
    hull: IndexMap<String, (f64, f64)>,
}

fn bounds(spec: &ProblemSpec, label: &str) -> Result<(f64, f64), ExploreError> {
    let v = spec.get(label).expect("declared");
    match (&v.range.lo, &v.range.hi) {
        (Some(lo), Some(hi)) => Ok((enclose(lo).0, enclose(hi).1)),
        _ => Err(ExploreError::Unbounded(label.to_string())),
    }
}

impl Instance {
    pub fn new(spec: ProblemSpec, model: ModelDef, cfg: ExploreConfig) -> Result<Instance, ExploreError> {
        let knobs = spec.labels(crate::spec::Interface::Knob);
        let inputs = spec.labels(crate::spec::Interface::Input);
        let outputs = spec.labels(crate::spec::Interface::Output);
        for l in knobs.iter().chain(&inputs) {
            bounds(&spec, l)?;
        }
        if let Some(f) = model.features().find(|f| !knobs.contains(f) && !inputs.contains(f)) {
            return Err(ExploreError::ModelFeature(f.clone()));
        }
        if let Some(y) = outputs.iter().find(|y| !model.outputs.contains(y)) {
            return Err(ExploreError::MissingOutput(y.clone()));
        }
        let (alpha, eta) = derive_domain_constraints(&spec);
        let hull = leaf_hull(&model)
            .unwrap_or_default()
            .into_iter()
            .map(|(k, (lo, hi))| (k, (enclose(&lo).0, enclose(&hi).1)))
            .collect();
        Ok(Instance {
            functional: model.output_exprs(),
            encoding: encode_model(&model),
            spec,
            model,
            cfg,
            knobs,
            inputs,
            outputs,
            alpha,
            eta,
            hull,
        })
    }

    fn integral(&self, label: &str) -> bool {
        self.spec.get(label).is_some_and(|v| v.dtype == DType::Int)
    }

    /// Box over p, p', x and, for tree models, y plus `copies` renamed output sets.
    pub(crate) fn var_box(&self, copies: usize) -> VarBox {
        let mut b = VarBox::new();
        for k in &self.knobs {
            let (lo, hi) = bounds(&self.spec, k).expect("checked");
            b.push(k, lo, hi, self.integral(k));
            b.push(&primed(k), lo, hi, self.integral(k));
        }
        for x in &self.inputs {
            let (lo, hi) = bounds(&self.spec, x).expect("checked");
            b.push(x, lo, hi, self.integral(x));
        }
        if self.functional.is_none() {
            for c in 0..=copies {
                for y in &self.model.outputs {
                    let (lo, hi) = self.hull[y];
                    b.push(&copy_name(y, c), lo, hi, false);
                }
            }
        }
        b
    }

    fn rename(&self, e: &Expr, primed_knobs: bool, copy: usize) -> Expr {
        e.rename(&|v| {
            if primed_knobs && self.knobs.iter().any(|k| k == v) {
                Some(primed(v))
            } else if copy > 0 && self.functional.is_none() && self.model.outputs.iter().any(|y| y == v) {
                Some(copy_name(v, copy))
            } else {
                None
            }
        })
    }

    /// `e` with outputs replaced by the model (functional models) and knobs
    /// optionally read as primed.
    pub(crate) fn tie(&self, e: &Expr, primed_knobs: bool, copy: usize) -> Expr {
        let e = match &self.functional {
            Some(map) => e.substitute(&|v| map.get(v).cloned()),
            None => e.clone(),
        };
        self.rename(&e, primed_knobs, copy)
    }

    /// φ_M over the chosen variable copies; `true` for functional models.
    pub(crate) fn model_constraint(&self, primed_knobs: bool, copy: usize) -> Expr {
        match self.functional {
            Some(_) => Expr::truth(),
            None => self.rename(&self.encoding, primed_knobs, copy),
        }
    }

    /// Conjunction of parts as a formula, after tying and fixing values.
    pub(crate) fn formula(
        &self,
        vb: &VarBox,
        parts: &[Part],
        primed_knobs: bool,
        copy: usize,
        fixed: &Assignment,
    ) -> Result<Formula, ExploreError> {
        let mut out = Vec::new();
        for (e, slack) in parts {
            let e = fix(&self.tie(e, primed_knobs, copy), fixed);
            out.push(Formula::from_expr(&e, vb.index(), *slack)?);
        }
        Ok(Formula::and(out))
    }

    pub(crate) fn sat(&self, f: &Formula, vb: &VarBox) -> SatResult {
        check_sat(f, vb, &self.cfg.solver())
    }

    /// Interface (α ∧ η) and model (α ∧ η ∧ φ_M) consistency.
    pub fn global_checks(&self) -> Result<Globals, ExploreError> {
        let vb = self.var_box(0);
        let none = Assignment::new();
        let iface = Formula::and(vec![self.formula(
            &vb,
            &[(self.alpha.clone(), None), (self.eta.clone(), None)],
            false,
            0,
            &none,
        )?]);
        let interface = flag_of(&self.sat(&iface, &vb));
        let model = if interface == Flag::True {
            let f = Formula::and(vec![
                iface,
                self.formula(&vb, &[(self.model_constraint(false, 0), None)], false, 0, &none)?,
            ]);
            flag_of(&self.sat(&f, &vb))
        } else {
            interface
        };
        Ok(Globals { interface, model })
    }

    /// Exact model outputs at a point.
    pub(crate) fn outputs_at(&self, a: &Assignment) -> Result<Assignment, ExploreError> {
        let features: Assignment = a
            .iter()
            .filter(|(k, _)| self.model.features().any(|f| f == *k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Ok(eval_model(&self.model, &features)?)
    }

    /// Exact truth of a boolean expression at a point extended with model outputs.
    pub(crate) fn holds_at(&self, e: &Expr, a: &Assignment) -> bool {
        let Ok(y) = self.outputs_at(a) else {
            return false;
        };
        let mut full = a.clone();
        full.extend(y);
        matches!(eval_expr(e, &full), Ok(Value::Bool(true)))
    }

    /// Values for every knob (and input when `with_inputs`), from the problem specification
    /// entry or inferred from a point range or singleton grid.
    pub(crate) fn assignment_for(
        &self,
        given: Option<&Assignment>,
        with_inputs: bool,
        what: &str,
    ) -> Result<Assignment, ExploreError> {
        let labels = self.knobs.iter().chain(if with_inputs { self.inputs.iter() } else { [].iter() });
        let mut out = Assignment::new();
        for l in labels {
            let v = match given.and_then(|g| g.get(l)) {
                Some(v) => v.clone(),
                None => {
                    let d = self.spec.get(l).expect("declared");
                    let from_grid = d.grid.as_ref().filter(|g| g.len() == 1).map(|g| g[0].clone());
                    from_grid.or_else(|| d.range.point().cloned()).ok_or_else(|| {
                        ExploreError::Assignment(format!("{what}: no value for `{l}` and none can be inferred"))
                    })?
                }
            };
            out.insert(l.clone(), v);
        }
        Ok(out)
    }

    /// Knob value from a solver point: grid knobs snap to the nearest grid
    /// value, integers round, reals are taken exactly.
    pub(crate) fn snap(&self, label: &str, v: f64) -> Rational {
        let d = self.spec.get(label).expect("declared");
        if let Some(g) = &d.grid {
            let best = g.iter().min_by(|a, b| {
                (to_f64(a) - v).abs().partial_cmp(&(to_f64(b) - v).abs()).unwrap_or(std::cmp::Ordering::Equal)
            });
            if let Some(b) = best {
                return b.clone();
            }
        }
        let r = if d.dtype == DType::Int { v.round() } else { v };
        from_f64(r).expect("finite solver point")
    }

    /// Hole of knob values whose θ-ball meets `region` (one interval per knob).
    pub(crate) fn hole(&self, region: &[Interval]) -> Vec<Interval> {
        self.knobs
            .iter()
            .zip(region)
            .map(|(k, iv)| {
                let d = self.spec.get(k).expect("declared");
                let e = match &d.radius {
                    None => 0.0,
                    Some(Radius::Abs(r)) => enclose(r).0,
                    Some(Radius::Rel(rel)) => {
                        let m = if iv.contains_zero() { 0.0 } else { iv.lo.abs().min(iv.hi.abs()) };
                        let rel = enclose(rel).0;
                        // shrink slightly so rounding never enlarges the hole
                        (rel * m / (1.0 + rel)) * (1.0 - 1e-12)
                    }
                };
                Interval::new(iv.lo - e, iv.hi + e)
            })
            .collect()
    }

    /// θ-ball of a configuration intersected with the knob ranges, per knob.
    pub(crate) fn ball(&self, center: &Assignment) -> Vec<Interval> {
        self.knobs
            .iter()
            .map(|k| {
                let d = self.spec.get(k).expect("declared");
                let c = &center[k];
                let r = d.radius.as_ref().map_or_else(|| Rational::from_integer(0.into()), |r| r.at(c));
                let (lo, hi) = bounds(&self.spec, k).expect("checked");
                Interval::new(enclose(&(c - &r)).0.max(lo), enclose(&(c + &r)).1.min(hi))
            })
            .collect()
    }

    /// Exact corners of the θ-ball of `center` clipped to the knob ranges;
    /// empty when there are more than `2^max_knobs` of them.
    pub(crate) fn ball_corners(&self, center: &Assignment, max_knobs: usize) -> Vec<Assignment> {
        if self.knobs.len() > max_knobs {
            return Vec::new();
        }
        let mut out = vec![Assignment::new()];
        for k in &self.knobs {
            let d = self.spec.get(k).expect("declared");
            let c = &center[k];
            let r = d.radius.as_ref().map_or_else(|| Rational::from_integer(0.into()), |r| r.at(c));
            let mut ends = vec![c - &r, c + &r];
            if let (Some(lo), Some(hi)) = (&d.range.lo, &d.range.hi) {
                ends = vec![std::cmp::max(ends[0].clone(), lo.clone()), std::cmp::min(ends[1].clone(), hi.clone())];
            }
            ends.dedup();
            out = out
                .into_iter()
                .flat_map(|a| {
                    ends.iter().map(move |e| {
                        let mut a = a.clone();
                        a.insert(k.clone(), e.clone());
                        a
                    })
                })
                .collect();
        }
        out
    }
}

pub(crate) fn copy_name(y: &str, copy: usize) -> String {
    if copy == 0 {
        y.to_string()
    } else {
        format!("{y}@{copy}")
    }
}

/// Substitutes fixed values for variables.
pub(crate) fn fix(e: &Expr, fixed: &Assignment) -> Expr {
    if fixed.is_empty() {
        return e.clone();
    }
    e.substitute(&|v| fixed.get(v).map(|r| Expr::Num(r.clone())))
}

pub(crate) fn flag_of(r: &SatResult) -> Flag {
    match r {
        SatResult::DeltaSat(_) => Flag::True,
        SatResult::Unsat => Flag::False,
        SatResult::Unknown(_) => Flag::Unknown,
    }
}
