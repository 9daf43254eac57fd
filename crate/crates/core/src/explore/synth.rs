//! Stable configuration synthesis.

use indexmap::IndexMap;

use super::gear::{parts, Gear, Outcome};
use super::report::{Flag, ModeBody, ModeReport, Status, SynthReport};
use super::{flag_of, ExploreError, Instance};
use crate::expr::{Assignment, Expr};
use crate::num::to_f64;

/// β followed by every assertion.
pub(crate) fn conditions(inst: &Instance, with_assertions: bool) -> Vec<Expr> {
    let mut out = vec![inst.spec.beta.clone()];
    if with_assertions {
        out.extend(inst.spec.assertions.values().cloned());
    }
    out
}

pub fn synthesize(inst: &Instance) -> Result<ModeReport, ExploreError> {
    let globals = inst.global_checks()?;
    let cond = conditions(inst, true);
    let vb = inst.var_box(0);
    let mut all = vec![(inst.eta.clone(), None), (inst.alpha.clone(), None), (inst.model_constraint(false, 0), None)];
    all.extend(parts(&cond));
    let feasible = flag_of(&inst.sat(&inst.formula(&vb, &all, false, 0, &Assignment::new())?, &vb));
    let gear = Gear { inst, cond: parts(&cond), fixed_inputs: false };
    let (stable, status, result) = match gear.run()? {
        Outcome::Stable { knobs, .. } => {
            let r: IndexMap<String, f64> = inst.knobs.iter().map(|k| (k.clone(), to_f64(&knobs[k]))).collect();
            (Flag::True, Status::Pass, Some(r))
        }
        Outcome::Infeasible | Outcome::Unstable => (Flag::False, Status::Fail, None),
        Outcome::Unknown(why) => {
            log::warn!("synthesis undecided: {why}");
            (Flag::Unknown, Status::Unknown, None)
        }
    };
    let status = globals.forced().unwrap_or(status);
    Ok(ModeReport { globals, body: ModeBody::Synthesize(SynthReport { feasible, stable, status, result }) })
}
