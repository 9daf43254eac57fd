//! Verification of assertions at given configurations.

use indexmap::IndexMap;

use super::certify::{stability, stable_around};
use super::report::{Flag, ModeBody, ModeReport, Status, VerifyItem};
use super::{flag_of, ExploreError, Instance};
use crate::expr::{eval_expr, Assignment, Expr, Value};
use crate::num::{from_f64, to_f64};
use crate::solver::{SatResult, Solution, VarBox};
use crate::spec::primed;

/// `∃x. parts` with the knobs fixed to `config`.
pub(crate) fn exists_inputs(inst: &Instance, config: &Assignment, parts: &[Expr]) -> Result<Flag, ExploreError> {
    let vb = inst.var_box(0);
    let mut all = vec![(inst.alpha.clone(), None), (inst.model_constraint(false, 0), None)];
    all.extend(parts.iter().map(|e| (e.clone(), None)));
    let f = inst.formula(&vb, &all, false, 0, config)?;
    Ok(flag_of(&inst.sat(&f, &vb)))
}

fn counter_example(inst: &Instance, s: &Solution, vb: &VarBox) -> IndexMap<String, f64> {
    let mut out = IndexMap::new();
    let mut point = Assignment::new();
    for k in &inst.knobs {
        let v = s.value(vb, &primed(k)).expect("primed knob");
        out.insert(k.clone(), v);
        point.insert(k.clone(), from_f64(v).expect("finite"));
    }
    for x in &inst.inputs {
        let v = s.value(vb, x).expect("input");
        out.insert(x.clone(), v);
        point.insert(x.clone(), from_f64(v).expect("finite"));
    }
    match inst.outputs_at(&point) {
        Ok(ys) => {
            for y in &inst.outputs {
                out.insert(y.clone(), to_f64(&ys[y]));
            }
        }
        Err(_) => {
            for y in &inst.outputs {
                if let Some(v) = s.value(vb, y) {
                    out.insert(y.clone(), v);
                }
            }
        }
    }
    out
}

fn item(inst: &Instance, config: &Assignment, assertion: &Expr) -> Result<VerifyItem, ExploreError> {
    let eta_holds = matches!(eval_expr(&inst.eta, config), Ok(Value::Bool(true)));
    let consistent = if eta_holds { exists_inputs(inst, config, &[])? } else { Flag::False };
    match consistent {
        Flag::False => {
            return Ok(VerifyItem { consistent, feasible: Flag::False, status: Status::Error, counter_example: None })
        }
        Flag::Unknown => {
            return Ok(VerifyItem {
                consistent,
                feasible: Flag::Unknown,
                status: Status::Unknown,
                counter_example: None,
            })
        }
        Flag::True => {}
    }
    let feasible = exists_inputs(inst, config, std::slice::from_ref(assertion))?;
    let r = stable_around(inst, config, &Assignment::new(), assertion)?;
    let (status, counter_example) = match (&r, stability(&r)) {
        (SatResult::DeltaSat(s), _) => (Status::Fail, Some(counter_example(inst, s, &inst.var_box(0)))),
        (_, Flag::True) => (Status::Pass, None),
        _ => (Status::Unknown, None),
    };
    Ok(VerifyItem { consistent, feasible, status, counter_example })
}

pub fn verify(inst: &Instance) -> Result<ModeReport, ExploreError> {
    let globals = inst.global_checks()?;
    let mut configs = Vec::new();
    for name in inst.spec.assertions.keys() {
        let given = inst.spec.configurations.get(name);
        configs.push(inst.assignment_for(given, false, &format!("configuration for assertion `{name}`"))?);
    }
    let asserts: Vec<(&String, &Expr)> = inst.spec.assertions.iter().collect();
    let results = inst.cfg.exec.map_range(asserts.len(), |i| item(inst, &configs[i], asserts[i].1));
    let mut items = IndexMap::new();
    for ((name, _), r) in asserts.into_iter().zip(results) {
        let mut it = r?;
        if let Some(s) = globals.forced() {
            it.status = s;
        }
        items.insert(name.clone(), it);
    }
    Ok(ModeReport { globals, body: ModeBody::Verify(items) })
}
