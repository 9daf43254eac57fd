//! Model refinement: sample the system around a solution, check whether a
//! model-level finding reproduces, and refit on the augmented data.

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{eval_expr, Assignment, BinOp, CmpOp, Expr, LogicOp, Value};
use crate::model::{eval_model, fit_polynomial, fit_tree, Dataset, ModelDef, ModelError};
use crate::num::{abs, from_f64_decimal, max, min, to_f64, Rational};
use crate::spec::{DType, ProblemSpec, Radius};

fn uniform(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Rational {
    if lo >= hi {
        return lo.clone();
    }
    let (a, b) = (to_f64(lo), to_f64(hi));
    let v = from_f64_decimal(a + rng.gen::<f64>() * (b - a)).unwrap_or_else(|| lo.clone());
    min(&max(&v, lo), hi)
}

/// `n` system evaluations at uniform points of the θ-ball of `center` and of `input_box`.
pub fn sample_stability_region(
    system: &ModelDef,
    spec: &ProblemSpec,
    center: &Assignment,
    input_box: &IndexMap<String, (Rational, Rational)>,
    n: usize,
    seed: u64,
) -> Result<Dataset, ModelError> {
    let mut boxes: Vec<(String, Rational, Rational, bool)> = Vec::new();
    for k in spec.knobs() {
        let c = center.get(&k.label).ok_or_else(|| ModelError::MissingFeature(k.label.clone()))?;
        let r = k.radius.as_ref().map_or_else(|| Rational::from_integer(0.into()), |r| r.at(c));
        let lo = k.range.lo.as_ref().map_or_else(|| c - &r, |l| max(l, &(c - &r)));
        let hi = k.range.hi.as_ref().map_or_else(|| c + &r, |h| min(h, &(c + &r)));
        boxes.push((k.label.clone(), lo, hi, false));
    }
    for (x, (lo, hi)) in input_box {
        let int = spec.get(x).is_some_and(|d| d.dtype == DType::Int);
        boxes.push((x.clone(), lo.clone(), hi.clone(), int));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<String> = boxes.iter().map(|b| b.0.clone()).collect();
    columns.extend(system.outputs.iter().cloned());
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut a = Assignment::new();
        let mut row = Vec::new();
        for (name, lo, hi, int) in &boxes {
            let mut v = uniform(&mut rng, lo, hi);
            if *int {
                let r = v.round();
                v = if &r < lo {
                    lo.ceil()
                } else if &r > hi {
                    hi.floor()
                } else {
                    r
                };
            }
            a.insert(name.clone(), v.clone());
            row.push(v);
        }
        let y = eval_model(system, &a)?;
        row.extend(system.outputs.iter().map(|o| y[o].clone()));
        rows.push(row);
    }
    Dataset::new(columns, rows)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Confirmation {
    /// Index of the first sample that violates the assertion on the system.
    Confirmed(usize),
    NotConfirmed,
}

pub fn confirm_counterexample(
    system: &ModelDef,
    assertion: &Expr,
    samples: &Dataset,
) -> Result<Confirmation, ModelError> {
    for i in 0..samples.len() {
        let mut a = samples.row_assignment(i);
        let y = eval_model(system, &a)?;
        a.extend(y);
        if let Value::Bool(false) = eval_expr(assertion, &a)? {
            return Ok(Confirmation::Confirmed(i));
        }
    }
    Ok(Confirmation::NotConfirmed)
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitParams {
    Tree { max_depth: usize, shared: bool },
    Poly { degree: u32 },
}

/// `old` followed by every row of `new` repeated `⌈weight⌉` times.
pub fn augment(old: &Dataset, new: &Dataset, weight: f64) -> Result<Dataset, ModelError> {
    let copies = weight.ceil().max(0.0) as usize;
    let mut out = old.clone();
    for _ in 0..copies {
        out = out.concat(new)?;
    }
    Ok(out)
}

pub fn refine_model(
    old: &Dataset,
    new: &Dataset,
    weight: f64,
    inputs: &[String],
    knobs: &[String],
    responses: &[String],
    fit: &FitParams,
) -> Result<ModelDef, ModelError> {
    let data = augment(old, new, weight)?;
    match *fit {
        FitParams::Tree { max_depth, shared } => fit_tree(&data, inputs, knobs, responses, max_depth, shared),
        FitParams::Poly { degree } => Ok(fit_polynomial(&data, inputs, knobs, responses, degree)?.0),
    }
}

/// Path of the augmented dataset written next to `data`.
pub fn refined_path(data: &Path) -> PathBuf {
    let name = data.file_name().and_then(|n| n.to_str()).unwrap_or("data");
    let stem = name.trim_end_matches(".gz").trim_end_matches(".csv");
    data.with_file_name(format!("{stem}_refined.csv"))
}

/// Tightens every comparison by `offset`: lower bounds move up, upper bounds move down.
pub fn strengthen(e: &Expr, offset: &Rational) -> Expr {
    fn go(e: &Expr, off: &Rational) -> Expr {
        let shift = |b: &Expr, d: Rational| Expr::bin(BinOp::Add, b.clone(), Expr::Num(d));
        match e {
            Expr::Cmp(op, a, b) => match op {
                CmpOp::Ge | CmpOp::Gt => Expr::cmp(*op, (**a).clone(), shift(b, off.clone())),
                CmpOp::Le | CmpOp::Lt => Expr::cmp(*op, (**a).clone(), shift(b, -off.clone())),
                _ => e.clone(),
            },
            Expr::Not(a) => Expr::not(go(a, &-off.clone())),
            Expr::Logic(op @ (LogicOp::And | LogicOp::Or), a, b) => {
                Expr::Logic(*op, Box::new(go(a, off)), Box::new(go(b, off)))
            }
            _ => e.clone(),
        }
    }
    go(e, offset)
}

/// Scales every knob radius by `factor`.
pub fn scale_radii(spec: &ProblemSpec, factor: &Rational) -> ProblemSpec {
    let mut out = spec.clone();
    for v in &mut out.variables {
        v.radius = v.radius.take().map(|r| match r {
            Radius::Abs(a) => Radius::Abs(abs(&(a * factor))),
            Radius::Rel(a) => Radius::Rel(abs(&(a * factor))),
        });
    }
    out
}
