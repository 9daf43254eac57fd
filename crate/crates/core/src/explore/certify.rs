//! Certification of per-query witnesses.

use indexmap::IndexMap;

use super::report::{CertifyItem, Flag, ModeBody, ModeReport, Status};
use super::{ExploreError, Instance};
use crate::expr::{Assignment, Expr};
use crate::solver::{Formula, SatResult};
use crate::spec::theta_constraint;

/// Stability of `cond` around the knob values of `point`, with `fixed` inputs.
pub(crate) fn stable_around(
    inst: &Instance,
    point: &Assignment,
    fixed: &Assignment,
    cond: &Expr,
) -> Result<SatResult, ExploreError> {
    let vb = inst.var_box(0);
    let theta = theta_constraint(&inst.spec, point);
    let assume = inst.formula(
        &vb,
        &[(theta, None), (inst.alpha.clone(), None), (inst.model_constraint(true, 0), None)],
        true,
        0,
        fixed,
    )?;
    let c = inst.formula(&vb, &[(cond.clone(), None)], true, 0, fixed)?;
    Ok(inst.sat(&Formula::and(vec![assume, c.negate()]), &vb))
}

/// Stability flag from the result of the negated check.
pub(crate) fn stability(r: &SatResult) -> Flag {
    match r {
        SatResult::Unsat => Flag::True,
        SatResult::DeltaSat(_) => Flag::False,
        SatResult::Unknown(_) => Flag::Unknown,
    }
}

fn item(inst: &Instance, w: &Assignment, query: &Expr) -> Result<CertifyItem, ExploreError> {
    let domain = Expr::and(inst.alpha.clone(), inst.eta.clone());
    if !inst.holds_at(&domain, w) {
        return Ok(CertifyItem {
            consistent: Flag::False,
            feasible: Flag::False,
            stable: Flag::False,
            status: Status::Error,
        });
    }
    let feasible = Flag::from(inst.holds_at(query, w));
    let inputs: Assignment = inst.inputs.iter().map(|x| (x.clone(), w[x].clone())).collect();
    let stable = stability(&stable_around(inst, w, &inputs, query)?);
    let status = match (feasible, stable) {
        (_, Flag::Unknown) => Status::Unknown,
        (Flag::True, Flag::True) => Status::Pass,
        _ => Status::Fail,
    };
    Ok(CertifyItem { consistent: Flag::True, feasible, stable, status })
}

pub fn certify(inst: &Instance) -> Result<ModeReport, ExploreError> {
    let globals = inst.global_checks()?;
    let mut witnesses = Vec::new();
    for name in inst.spec.queries.keys() {
        let given = inst.spec.witnesses.get(name);
        witnesses.push(inst.assignment_for(given, true, &format!("witness for query `{name}`"))?);
    }
    let queries: Vec<(&String, &Expr)> = inst.spec.queries.iter().collect();
    let results = inst.cfg.exec.map_range(queries.len(), |i| item(inst, &witnesses[i], queries[i].1));
    let mut items = IndexMap::new();
    for ((name, _), r) in queries.into_iter().zip(results) {
        let mut it = r?;
        if let Some(s) = globals.forced() {
            it.status = s;
        }
        items.insert(name.clone(), it);
    }
    Ok(ModeReport { globals, body: ModeBody::Certify(items) })
}
