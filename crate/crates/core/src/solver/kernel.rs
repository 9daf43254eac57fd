//! Branch-and-prune search over boxes.

use std::sync::Arc;

use super::formula::{Atom, Formula, Verdict};
use super::interval::Interval;
use super::term::Contract;
use super::{SatResult, Solution, SolverConfig, VarBox};

const CONTRACT_ROUNDS: usize = 8;

/// Leaf widths relative to each variable's domain, coarse first; the last
/// pass always splits down to `delta`.
const RESOLUTIONS: [f64; 4] = [1e-2, 1e-4, 1e-6, 0.0];

#[derive(Clone)]
struct Node {
    b: Vec<Interval>,
    atoms: Vec<Arc<Atom>>,
    ors: Vec<Vec<Formula>>,
}

impl Node {
    fn add(&mut self, f: Formula) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => {
                self.atoms.push(a);
                true
            }
            Formula::And(items) => items.into_iter().all(|f| self.add(f)),
            Formula::Or(items) => {
                self.ors.push(items);
                true
            }
        }
    }
}

enum Step {
    Pruned,
    Open,
}

struct Search<'a> {
    vars: &'a VarBox,
    cfg: &'a SolverConfig,
    scratch: Vec<Interval>,
    resolution: f64,
    steps: usize,
}

enum Pass {
    Done(SatResult),
    Undecided,
}

/// Finite point strictly inside a non-degenerate interval.
fn split_point(iv: &Interval) -> f64 {
    match (iv.lo.is_finite(), iv.hi.is_finite()) {
        (true, true) => iv.mid(),
        (false, false) => 0.0,
        (false, true) => iv.hi - iv.hi.abs().max(1.0),
        (true, false) => iv.lo + iv.lo.abs().max(1.0),
    }
}

fn center(b: &[Interval], vars: &VarBox) -> Vec<f64> {
    b.iter()
        .zip(&vars.vars)
        .map(|(iv, d)| {
            let c = if iv.lo == iv.hi { iv.lo } else { split_point(iv) };
            if d.integral {
                c.floor().max(iv.lo)
            } else {
                c
            }
        })
        .collect()
}

impl Search<'_> {
    fn round_integral(&self, b: &mut [Interval]) -> bool {
        for (iv, d) in b.iter_mut().zip(&self.vars.vars) {
            if d.integral {
                iv.lo = iv.lo.ceil();
                iv.hi = iv.hi.floor();
            }
            if iv.is_empty() {
                return false;
            }
        }
        true
    }

    fn contract(&mut self, n: &mut Node) -> bool {
        for _ in 0..CONTRACT_ROUNDS {
            let before = n.b.clone();
            for a in &n.atoms {
                if let Contract::Empty = a.term.contract(&mut n.b, a.target(), &mut self.scratch) {
                    return false;
                }
            }
            if !self.round_integral(&mut n.b) {
                return false;
            }
            let progress = before.iter().zip(&n.b).any(|(o, c)| {
                let w = o.width();
                c.width() < 0.9 * w || (w.is_infinite() && c.width().is_finite())
            });
            if !progress {
                break;
            }
        }
        true
    }

    /// Contracts, discards decided constraints and inlines disjunctions
    /// with a single live child, until nothing changes.
    fn simplify(&mut self, n: &mut Node) -> Step {
        loop {
            if !self.contract(n) {
                return Step::Pruned;
            }
            let delta = self.cfg.delta;
            let mut refuted = false;
            n.atoms.retain(|a| match a.judge(&n.b, delta) {
                Verdict::Certain => false,
                Verdict::Refuted => {
                    refuted = true;
                    false
                }
                Verdict::Undecided => true,
            });
            if refuted {
                return Step::Pruned;
            }
            let mut inline = Vec::new();
            let mut kept = Vec::new();
            for mut children in std::mem::take(&mut n.ors) {
                let mut certain = false;
                children.retain(|c| match c.judge(&n.b, delta) {
                    Verdict::Certain => {
                        certain = true;
                        true
                    }
                    Verdict::Refuted => false,
                    Verdict::Undecided => true,
                });
                if certain {
                    continue;
                }
                match children.len() {
                    0 => return Step::Pruned,
                    1 => inline.push(children.pop().unwrap()),
                    _ => kept.push(children),
                }
            }
            n.ors = kept;
            if inline.is_empty() {
                return Step::Open;
            }
            for f in inline {
                if !n.add(f) {
                    return Step::Pruned;
                }
            }
        }
    }

    fn split_var(&self, n: &Node) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        let mut vars: Vec<usize> = n.atoms.iter().flat_map(|a| a.term.vars.iter().copied()).collect();
        vars.sort_unstable();
        vars.dedup();
        for i in vars {
            let iv = n.b[i];
            let d = &self.vars.vars[i];
            let splittable = if d.integral {
                iv.hi - iv.lo >= 1.0
            } else {
                let m = split_point(&iv);
                let scale = d.hi - d.lo;
                let leaf = if scale.is_finite() { self.resolution * scale } else { self.resolution };
                iv.width() > self.cfg.delta.max(leaf) && m > iv.lo && m < iv.hi
            };
            if !splittable {
                continue;
            }
            let scale = d.hi - d.lo;
            let w = if scale.is_finite() && scale > 0.0 { iv.width() / scale } else { iv.width() };
            if best.is_none_or(|(bw, _)| w > bw) {
                best = Some((w, i));
            }
        }
        best.map(|(_, i)| i)
    }

    fn run(&mut self, root: Node) -> SatResult {
        for r in RESOLUTIONS {
            self.resolution = r;
            match self.pass(root.clone()) {
                Pass::Done(res) => return res,
                Pass::Undecided => log::trace!("undecided at resolution {r}"),
            }
        }
        SatResult::Unknown("undecided boxes below the splitting precision".into())
    }

    fn pass(&mut self, root: Node) -> Pass {
        let mut stack = vec![root];
        let mut unknown_leaf = false;
        while let Some(mut n) = stack.pop() {
            self.steps += 1;
            if self.steps > self.cfg.max_splits {
                let why = format!("search budget of {} nodes exhausted", self.cfg.max_splits);
                return Pass::Done(SatResult::Unknown(why));
            }
            if let Step::Pruned = self.simplify(&mut n) {
                log::trace!("prune at depth {}", stack.len());
                continue;
            }
            if n.atoms.is_empty() && n.ors.is_empty() {
                log::trace!("solution box after {} nodes", self.steps);
                let point = center(&n.b, self.vars);
                return Pass::Done(SatResult::DeltaSat(Solution { point, region: n.b }));
            }
            // a centre that already satisfies everything is a witness without further splitting
            let point = center(&n.b, self.vars);
            let pb: Vec<Interval> = point.iter().map(|&v| Interval::point(v)).collect();
            let delta = self.cfg.delta;
            if n.atoms.iter().all(|a| a.judge(&pb, delta) == Verdict::Certain)
                && n.ors.iter().all(|cs| cs.iter().any(|c| c.judge(&pb, delta) == Verdict::Certain))
            {
                return Pass::Done(SatResult::DeltaSat(Solution { point, region: pb }));
            }
            if !n.ors.is_empty() {
                let k = (0..n.ors.len()).min_by_key(|&k| n.ors[k].len()).unwrap();
                let children = n.ors.swap_remove(k);
                log::trace!("branch on disjunction of {}", children.len());
                for c in children.into_iter().rev() {
                    let mut child = n.clone();
                    if child.add(c) {
                        stack.push(child);
                    }
                }
                continue;
            }
            match self.split_var(&n) {
                Some(i) => {
                    let iv = n.b[i];
                    let (left, right) = if self.vars.vars[i].integral {
                        let m = split_point(&iv).floor().min(iv.hi - 1.0);
                        (Interval::new(iv.lo, m), Interval::new(m + 1.0, iv.hi))
                    } else {
                        let m = split_point(&iv);
                        (Interval::new(iv.lo, m), Interval::new(m, iv.hi))
                    };
                    log::trace!("split {} at {:?} | {:?}", self.vars.vars[i].name, left, right);
                    let mut r = n.clone();
                    r.b[i] = right;
                    n.b[i] = left;
                    stack.push(r);
                    stack.push(n);
                }
                // the probe above already failed at this leaf's centre; a refuting
                // centre only settles boxes at the final precision
                None => {
                    if self.resolution > 0.0 || !n.atoms.iter().any(|a| a.judge(&pb, delta) == Verdict::Refuted) {
                        log::trace!("undecided leaf {:?}", n.b);
                        unknown_leaf = true;
                    }
                }
            }
        }
        if unknown_leaf {
            Pass::Undecided
        } else {
            Pass::Done(SatResult::Unsat)
        }
    }
}

pub(crate) fn search(f: &Formula, vars: &VarBox, cfg: &SolverConfig) -> SatResult {
    let mut root =
        Node { b: vars.vars.iter().map(|d| Interval::new(d.lo, d.hi)).collect(), atoms: Vec::new(), ors: Vec::new() };
    if root.b.iter().any(Interval::is_empty) || !root.add(f.clone()) {
        return SatResult::Unsat;
    }
    let mut s = Search { vars, cfg, scratch: Vec::new(), resolution: 0.0, steps: 0 };
    s.run(root)
}
