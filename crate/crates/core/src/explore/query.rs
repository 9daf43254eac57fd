//! Search for stable witnesses of queries.

use indexmap::IndexMap;

use super::gear::{parts, Gear, Outcome};
use super::report::{Flag, ModeBody, ModeReport, QueryItem, Status};
use super::{ExploreError, Instance};
use crate::expr::Expr;
use crate::num::to_f64;

fn item(inst: &Instance, q: &Expr) -> Result<QueryItem, ExploreError> {
    let gear = Gear { inst, cond: parts([q]), fixed_inputs: true };
    Ok(match gear.run()? {
        Outcome::Stable { knobs, inputs } => {
            let mut point = knobs;
            point.extend(inputs);
            let ys = inst.outputs_at(&point)?;
            let mut result = IndexMap::new();
            for v in inst.knobs.iter().chain(&inst.inputs) {
                result.insert(v.clone(), to_f64(&point[v]));
            }
            for y in &inst.outputs {
                result.insert(y.clone(), to_f64(&ys[y]));
            }
            QueryItem { feasible: Flag::True, stable: Flag::True, status: Status::Pass, result: Some(result) }
        }
        Outcome::Infeasible => {
            QueryItem { feasible: Flag::False, stable: Flag::False, status: Status::Fail, result: None }
        }
        Outcome::Unstable => {
            QueryItem { feasible: Flag::True, stable: Flag::False, status: Status::Fail, result: None }
        }
        Outcome::Unknown(why) => {
            log::warn!("query undecided: {why}");
            QueryItem { feasible: Flag::Unknown, stable: Flag::Unknown, status: Status::Unknown, result: None }
        }
    })
}

pub fn query(inst: &Instance) -> Result<ModeReport, ExploreError> {
    let globals = inst.global_checks()?;
    let queries: Vec<(&String, &Expr)> = inst.spec.queries.iter().collect();
    let results = inst.cfg.exec.map(&queries, |(_, q)| item(inst, q));
    let mut items = IndexMap::new();
    for ((name, _), r) in queries.into_iter().zip(results) {
        let mut it = r?;
        if let Some(s) = globals.forced() {
            it.status = s;
        }
        items.insert(name.clone(), it);
    }
    Ok(ModeReport { globals, body: ModeBody::Query(items) })
}
