//! GearSAT: candidate search, stability check and counterexample exclusion.

use super::{fix, ExploreError, Instance, Part};
use crate::expr::{Assignment, BinOp, CmpOp, Expr};
use crate::num::{enclose, from_f64};
use crate::solver::{exclude_region, Formula, Interval, SatResult, Solution, VarBox};
use crate::spec::{primed, theta_constraint, Radius};

const MAX_CORNER_KNOBS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Outcome {
    Stable { knobs: Assignment, inputs: Assignment },
    Infeasible,
    Unstable,
    Unknown(String),
}

pub(crate) struct Gear<'a> {
    pub inst: &'a Instance,
    /// φ_cond without the α premise.
    pub cond: Vec<Part>,
    /// Inputs are existential (query): stability is checked at the candidate's inputs.
    pub fixed_inputs: bool,
}

fn point_box(vals: &Assignment, names: &[String]) -> Vec<Interval> {
    names
        .iter()
        .map(|n| {
            let (lo, hi) = enclose(&vals[n]);
            Interval::new(lo, hi)
        })
        .collect()
}

fn exact(s: &Solution, vb: &VarBox, name: &str) -> crate::num::Rational {
    from_f64(s.value(vb, name).expect("variable in box")).expect("finite solver point")
}

impl Gear<'_> {
    fn base(&self, vb: &VarBox) -> Result<Formula, ExploreError> {
        let inst = self.inst;
        let mut parts: Vec<Part> =
            vec![(inst.eta.clone(), None), (inst.alpha.clone(), None), (inst.model_constraint(false, 0), None)];
        parts.extend(self.cond.iter().cloned());
        inst.formula(vb, &parts, false, 0, &Assignment::new())
    }

    /// θ(p*, p') ∧ α(p', x) ∧ φ_M(p', x, y) ∧ ¬cond(p', x, y)
    fn instability(&self, vb: &VarBox, center: &Assignment, fixed: &Assignment) -> Result<Formula, ExploreError> {
        let inst = self.inst;
        let theta = theta_constraint(&inst.spec, center);
        let assume = inst.formula(
            vb,
            &[(theta, None), (inst.alpha.clone(), None), (inst.model_constraint(true, 0), None)],
            true,
            0,
            fixed,
        )?;
        let cond = inst.formula(vb, &self.cond, true, 0, fixed)?;
        Ok(Formula::and(vec![assume, cond.negate()]))
    }

    /// `¬α(fixed) ∨ (φ_M ∧ cond)` over output copy `copy`.
    fn implied(&self, vb: &VarBox, fixed: &Assignment, copy: usize) -> Result<Formula, ExploreError> {
        let inst = self.inst;
        let alpha = inst.formula(vb, &[(inst.alpha.clone(), None)], false, copy, fixed)?;
        let mut parts = vec![(inst.model_constraint(false, copy), None)];
        parts.extend(self.cond.iter().cloned());
        let body = inst.formula(vb, &parts, false, copy, fixed)?;
        Ok(Formula::or(vec![alpha.negate(), body]))
    }

    /// `¬α(xc) ∨ cond(c, xc)` for every corner `c` of the candidate's θ-ball,
    /// written in the candidate knobs as `clip(p ± r)`. Only for functional
    /// models whose knobs have absolute radii.
    fn corners_implied(&self, vb: &VarBox, xc: &Assignment) -> Result<Option<Formula>, ExploreError> {
        let inst = self.inst;
        if inst.functional.is_none() || inst.knobs.len() > MAX_CORNER_KNOBS {
            return Ok(None);
        }
        // per knob, per end of the ball: (guard, value) clip cases
        let mut ends: Vec<Vec<Vec<(Expr, Expr)>>> = Vec::new();
        for k in &inst.knobs {
            let d = inst.spec.get(k).expect("declared");
            let (Some(lo), Some(hi)) = (&d.range.lo, &d.range.hi) else {
                return Ok(None);
            };
            let p = Expr::var(k.as_str());
            let r = match &d.radius {
                None => {
                    ends.push(vec![vec![(Expr::truth(), p)]]);
                    continue;
                }
                Some(Radius::Abs(r)) => Expr::num(r.clone()),
                Some(Radius::Rel(_)) => return Ok(None),
            };
            let down = Expr::bin(BinOp::Sub, p.clone(), r.clone());
            let up = Expr::bin(BinOp::Add, p, r);
            let (lo, hi) = (Expr::num(lo.clone()), Expr::num(hi.clone()));
            ends.push(vec![
                vec![
                    (Expr::cmp(CmpOp::Ge, down.clone(), lo.clone()), down.clone()),
                    (Expr::cmp(CmpOp::Lt, down, lo.clone()), lo),
                ],
                vec![
                    (Expr::cmp(CmpOp::Le, up.clone(), hi.clone()), up.clone()),
                    (Expr::cmp(CmpOp::Gt, up, hi.clone()), hi),
                ],
            ]);
        }
        let alpha = inst.formula(vb, &[(inst.alpha.clone(), None)], false, 0, xc)?;
        let mut all = Vec::new();
        for corner in product(&ends) {
            let mut cases = Vec::new();
            for clips in product(&corner) {
                let values: std::collections::HashMap<&str, &Expr> =
                    inst.knobs.iter().zip(&clips).map(|(k, (_, v))| (k.as_str(), v)).collect();
                let mut parts = Vec::new();
                for (g, _) in &clips {
                    parts.push(Formula::from_expr(&fix(g, xc), vb.index(), Some(0.0))?);
                }
                for (e, slack) in &self.cond {
                    let e = inst.tie(e, false, 0).substitute(&|v| values.get(v).map(|x| (*x).clone()));
                    parts.push(Formula::from_expr(&fix(&e, xc), vb.index(), *slack)?);
                }
                cases.push(Formula::and(parts));
            }
            all.push(Formula::or(cases));
        }
        Ok(Some(Formula::or(vec![alpha.negate(), Formula::and(all)])))
    }

    pub fn run(&self) -> Result<Outcome, ExploreError> {
        let inst = self.inst;
        let mut extras: Vec<Formula> = Vec::new();
        let mut copies = 0usize;
        for iter in 0..inst.cfg.max_iterations {
            let vb = inst.var_box(copies);
            let mut f = vec![self.base(&vb)?];
            f.extend(extras.iter().cloned());
            let cand = match inst.sat(&Formula::and(f), &vb) {
                SatResult::Unsat if iter == 0 => return Ok(Outcome::Infeasible),
                SatResult::Unsat => return Ok(Outcome::Unstable),
                SatResult::Unknown(why) => return Ok(Outcome::Unknown(why)),
                SatResult::DeltaSat(s) => s,
            };
            let knobs: Assignment =
                inst.knobs.iter().map(|k| (k.clone(), inst.snap(k, cand.value(&vb, k).unwrap()))).collect();
            let inputs: Assignment = inst
                .inputs
                .iter()
                .map(|x| {
                    let v = cand.value(&vb, x).unwrap();
                    let v = if inst.integral(x) { v.round() } else { v };
                    (x.clone(), from_f64(v).unwrap())
                })
                .collect();
            log::debug!("candidate {iter}: {knobs:?} {inputs:?}");
            let fixed = if self.fixed_inputs { inputs.clone() } else { Assignment::new() };
            let cvb = inst.var_box(0);
            let cex = match inst.sat(&self.instability(&cvb, &knobs, &fixed)?, &cvb) {
                SatResult::Unsat => return Ok(Outcome::Stable { knobs, inputs }),
                SatResult::Unknown(why) => return Ok(Outcome::Unknown(why)),
                SatResult::DeltaSat(c) => c,
            };
            let region: Vec<Interval> =
                inst.knobs.iter().map(|k| cex.region[cvb.position(&primed(k)).unwrap()]).collect();
            let hole = inst.hole(&region);
            log::debug!("counterexample region {region:?}, excluding {hole:?}");
            let star = point_box(&knobs, &inst.knobs);
            let covered = hole.iter().zip(&star).all(|(h, s)| h.lo <= s.lo && s.hi <= h.hi);
            let mut names = inst.knobs.clone();
            let (mut hole_ext, mut star_ext) = (hole, star);
            if self.fixed_inputs {
                names.extend(inst.inputs.iter().cloned());
                let xs = point_box(&inputs, &inst.inputs);
                hole_ext.extend(xs.iter().copied());
                star_ext.extend(xs);
            }
            extras.push(vb.strict_formula(&exclude_region(&names, &hole_ext))?);
            if !covered {
                extras.push(vb.strict_formula(&exclude_region(&names, &star_ext))?);
            }
            // learned constraint from the counterexample
            if inst.functional.is_none() {
                copies += 1;
            }
            let vb = inst.var_box(copies);
            if self.fixed_inputs {
                let pc: Assignment = inst.knobs.iter().map(|k| (k.clone(), exact(&cex, &cvb, &primed(k)))).collect();
                let mut learned = vec![pc];
                // interior counterexamples alone converge slowly; corners are where
                // monotone models fail first
                if inst.functional.is_some() {
                    learned.extend(inst.ball_corners(&knobs, 4));
                }
                for pc in learned {
                    let around = inst.hole(&point_box(&pc, &inst.knobs));
                    let outside = vb.strict_formula(&exclude_region(&inst.knobs, &around))?;
                    extras.push(Formula::or(vec![outside, self.implied(&vb, &pc, copies)?]));
                }
            } else if !inst.inputs.is_empty() {
                let xc: Assignment = inst.inputs.iter().map(|x| (x.clone(), exact(&cex, &cvb, x))).collect();
                extras.push(self.implied(&vb, &xc, copies)?);
                extras.extend(self.corners_implied(&vb, &xc)?);
            }
        }
        Ok(Outcome::Unknown(format!("no stable candidate within {} iterations", inst.cfg.max_iterations)))
    }
}

/// Every way of picking one element from each list.
fn product<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    lists.iter().fold(vec![vec![]], |acc, list| {
        acc.into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect()
    })
}

/// Conjunction of named expressions as condition parts.
pub(crate) fn parts<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> Vec<Part> {
    exprs.into_iter().map(|e| (e.clone(), None)).collect()
}
