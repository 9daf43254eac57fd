//! ε-accurate max-min optimization of scaled objectives by binary search
//! on stable-synthesis thresholds.

use indexmap::IndexMap;

use super::gear::{parts, Gear, Outcome};
use super::report::{Flag, ModeBody, ModeReport, ObjectiveResult, OptimizeReport};
use super::synth::conditions;
use super::{ExploreError, Instance, Part};
use crate::expr::{eval_expr, Assignment, CmpOp, Expr, Value};
use crate::num::{from_f64, to_f64, Rational};
use crate::solver::{domain_box, enclose_expr};

/// Bounds on one objective's threshold, scaled and unscaled.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdRow {
    pub lo_scaled: f64,
    pub up_scaled: f64,
    pub lo: f64,
    pub up: f64,
}

/// Snapshot after every proven improvement.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgressRow {
    pub iteration: usize,
    pub thresholds: IndexMap<String, ThresholdRow>,
    pub knobs: IndexMap<String, f64>,
    pub outputs: IndexMap<String, f64>,
}

pub trait ProgressSink {
    fn emit(&mut self, row: &ProgressRow);
}

pub struct NullSink;

impl ProgressSink for NullSink {
    fn emit(&mut self, _: &ProgressRow) {}
}

impl<F: FnMut(&ProgressRow)> ProgressSink for F {
    fn emit(&mut self, row: &ProgressRow) {
        self(row)
    }
}

struct Objective {
    name: String,
    expr: Expr,
    min: f64,
    max: f64,
    range: f64,
    lo: f64,
    up: f64,
}

impl Objective {
    fn scale(&self, v: f64) -> f64 {
        (v - self.min) / self.range
    }

    fn unscale(&self, z: f64) -> f64 {
        self.min + z * self.range
    }

    /// `objective >= unscale(z)`, decided up to `delta_rel` of the range.
    fn at_least(&self, z: f64, delta_rel: f64) -> Part {
        let t = from_f64(self.unscale(z)).expect("finite threshold");
        (Expr::cmp(CmpOp::Ge, self.expr.clone(), Expr::Num(t)), Some(delta_rel * self.range))
    }

    fn row(&self) -> ThresholdRow {
        ThresholdRow { lo_scaled: self.lo, up_scaled: self.up, lo: self.unscale(self.lo), up: self.unscale(self.up) }
    }
}

#[derive(Clone)]
struct Config {
    knobs: Assignment,
    inputs: Assignment,
}

impl Config {
    fn point(&self) -> Assignment {
        let mut p = self.knobs.clone();
        p.extend(self.inputs.clone());
        p
    }
}

fn value_at(inst: &Instance, e: &Expr, point: &Assignment) -> Option<f64> {
    let mut full = point.clone();
    full.extend(inst.outputs_at(point).ok()?);
    match eval_expr(e, &full) {
        Ok(Value::Num(v)) => Some(to_f64(&v)),
        _ => None,
    }
}

struct Search<'a, 'b> {
    inst: &'a Instance,
    base: Vec<Expr>,
    objectives: Vec<Objective>,
    best: Config,
    iteration: usize,
    sink: &'b mut dyn ProgressSink,
}

impl Search<'_, '_> {
    fn emit(&mut self) {
        let point = self.best.point();
        let outputs = self.inst.outputs_at(&point).unwrap_or_default();
        let row = ProgressRow {
            iteration: self.iteration,
            thresholds: self.objectives.iter().map(|o| (o.name.clone(), o.row())).collect(),
            knobs: self.best.knobs.iter().map(|(k, v)| (k.clone(), to_f64(v))).collect(),
            outputs: outputs.iter().map(|(k, v)| (k.clone(), to_f64(v))).collect(),
        };
        self.sink.emit(&row);
        self.iteration += 1;
    }

    fn gear(&self, cond: Vec<Part>) -> Result<Outcome, ExploreError> {
        Gear { inst: self.inst, cond, fixed_inputs: false }.run()
    }

    /// Binary search on objective `i`, holding the other objectives at
    /// their proven thresholds when `hold` is set.
    fn search(&mut self, i: usize, hold: bool) -> Result<(), ExploreError> {
        let (eps, drel) = (self.inst.cfg.epsilon, self.inst.cfg.delta_rel);
        while self.objectives[i].up - self.objectives[i].lo > eps {
            let o = &self.objectives[i];
            let z = 0.5 * (o.lo + o.up);
            if z <= o.lo || z >= o.up {
                break;
            }
            let mut cond = parts(&self.base);
            cond.push(o.at_least(z, drel));
            if hold {
                for (j, other) in self.objectives.iter().enumerate() {
                    if j != i {
                        cond.push(other.at_least(other.lo, drel));
                    }
                }
            }
            match self.gear(cond)? {
                Outcome::Stable { knobs, inputs } => {
                    self.objectives[i].lo = z;
                    self.best = Config { knobs, inputs };
                    log::info!("{}: threshold {z} proven", self.objectives[i].name);
                    self.emit();
                }
                Outcome::Unknown(why) => {
                    log::warn!("{}: threshold {z} undecided ({why}), treated as failed", self.objectives[i].name);
                    self.objectives[i].up = z;
                }
                _ => self.objectives[i].up = z,
            }
        }
        Ok(())
    }
}

/// Lower bound of `e` over the θ-ball of `knobs` and all inputs, and upper bound over the full box.
fn enclosure(inst: &Instance, e: &Expr, knobs: &Assignment) -> Result<(f64, f64), ExploreError> {
    let vb = inst.var_box(0);
    let tied = inst.tie(e, false, 0);
    let full = domain_box(&vb);
    let mut ball = full.clone();
    for (k, iv) in inst.knobs.iter().zip(inst.ball(knobs)) {
        ball[vb.position(k).expect("knob")] = iv;
    }
    Ok((enclose_expr(&tied, &vb, &ball)?.lo, enclose_expr(&tied, &vb, &full)?.hi))
}

fn run(
    inst: &Instance,
    bounds: &IndexMap<String, (Rational, Rational)>,
    with_assertions: bool,
    sink: &mut dyn ProgressSink,
) -> Result<ModeReport, ExploreError> {
    let globals = inst.global_checks()?;
    let mut objectives = Vec::new();
    for (name, e) in &inst.spec.objectives {
        let (lo, hi) = bounds.get(name).ok_or_else(|| ExploreError::MissingBounds(name.clone()))?;
        let (min, max) = (to_f64(lo), to_f64(hi));
        let range = if max > min { max - min } else { 1.0 };
        objectives.push(Objective { name: name.clone(), expr: e.clone(), min, max, range, lo: 0.0, up: 0.0 });
    }
    let base = conditions(inst, with_assertions);
    let initial = if globals.consistent() {
        Gear { inst, cond: parts(&base), fixed_inputs: false }.run()?
    } else {
        Outcome::Infeasible
    };
    let (feasible, best) = match initial {
        Outcome::Stable { knobs, inputs } => (Flag::True, Some(Config { knobs, inputs })),
        Outcome::Unknown(why) => {
            log::warn!("initial synthesis undecided: {why}");
            (Flag::Unknown, None)
        }
        _ => (Flag::False, None),
    };
    let Some(best) = best else {
        return Ok(report(inst, globals, feasible, &objectives, None));
    };
    for o in objectives.iter_mut() {
        let (lo, hi) = enclosure(inst, &o.expr, &best.knobs)?;
        if !lo.is_finite() || !hi.is_finite() {
            return Err(ExploreError::MissingBounds(o.name.clone()));
        }
        o.lo = o.scale(lo);
        o.up = o.scale(hi).max(o.lo);
    }
    let mut s = Search { inst, base, objectives, best, iteration: 0, sink };
    s.emit();
    for i in 0..s.objectives.len() {
        s.search(i, inst.cfg.pareto)?;
    }
    Ok(report(inst, globals, feasible, &s.objectives, Some(&s.best)))
}

fn report(
    inst: &Instance,
    globals: super::Globals,
    feasible: Flag,
    objectives: &[Objective],
    best: Option<&Config>,
) -> ModeReport {
    let point = best.map(Config::point);
    let at = |e: &Expr| point.as_ref().and_then(|p| value_at(inst, e, p));
    let mut objs = IndexMap::new();
    for o in objectives {
        objs.insert(
            o.name.clone(),
            ObjectiveResult {
                value_in_config: at(&o.expr),
                threshold_scaled: best.map(|_| o.lo),
                threshold: best.map(|_| o.unscale(o.lo)),
                max_in_data: o.max,
                min_in_data: o.min,
            },
        );
    }
    let mut outputs = IndexMap::new();
    for y in &inst.outputs {
        let cfg = at(&Expr::var(y));
        let sys = match (inst.spec.system.get(y), &point) {
            (Some(e), Some(p)) => match eval_expr(e, p) {
                Ok(Value::Num(v)) => Some(to_f64(&v)),
                _ => None,
            },
            _ => None,
        };
        outputs.insert(y.clone(), (cfg, sys));
    }
    let knobs = inst.knobs.iter().map(|k| (k.clone(), best.map(|b| to_f64(&b.knobs[k])))).collect();
    let last = objectives.last().filter(|_| best.is_some());
    let report = OptimizeReport {
        feasible,
        objectives: objs,
        outputs,
        knobs,
        last_scaled: last.and_then(|o| at(&o.expr).map(|v| o.scale(v))),
        lo_scaled: last.map(|o| o.lo),
        lo: last.map(|o| o.unscale(o.lo)),
        up_scaled: last.map(|o| o.up),
        up: last.map(|o| o.unscale(o.up)),
    };
    ModeReport { globals, body: ModeBody::Optimize(report) }
}

/// Maximizes the worst case of every objective over stability regions and inputs.
pub fn optimize(
    inst: &Instance,
    bounds: &IndexMap<String, (Rational, Rational)>,
    sink: &mut dyn ProgressSink,
) -> Result<ModeReport, ExploreError> {
    run(inst, bounds, false, sink)
}

/// [`optimize`] with the assertions added to the synthesized condition.
pub fn optsyn(
    inst: &Instance,
    bounds: &IndexMap<String, (Rational, Rational)>,
    sink: &mut dyn ProgressSink,
) -> Result<ModeReport, ExploreError> {
    run(inst, bounds, true, sink)
}
