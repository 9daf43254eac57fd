//! The model function `M(p, x) = y`: evaluation, constraint encoding,
//! fitting and persistence.

mod dataset;
mod io;
mod poly;
mod tree;

use indexmap::IndexMap;
use thiserror::Error;

pub use dataset::{objective_bounds, Dataset};
pub use io::{load_model, model_from_json, model_to_json, save_model};
pub use poly::{fit_polynomial, Polynomial};
pub use tree::{fit_tree, TreeGroup, TreeNode};

use crate::expr::{eval_expr, Assignment, CmpOp, EvalError, Expr, Value};
use crate::num::Rational;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature `{0}` is not assigned")]
    MissingFeature(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("model output `{0}` evaluated to a boolean")]
    BooleanOutput(String),
    #[error("design matrix is rank deficient ({rows} rows, {monomials} monomials)")]
    RankDeficient { rows: usize, monomials: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("unsupported model kind `{0}`")]
    UnknownKind(String),
    #[error("model file: {0}")]
    Schema(String),
    #[error("column `{0}` not found in dataset")]
    UnknownColumn(String),
    #[error("data: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelBody {
    /// Output label to expression over inputs and knobs.
    Expression(IndexMap<String, Expr>),
    Polynomial(IndexMap<String, Polynomial>),
    Tree(Vec<TreeGroup>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDef {
    pub inputs: Vec<String>,
    pub knobs: Vec<String>,
    pub outputs: Vec<String>,
    pub body: ModelBody,
}

impl ModelDef {
    pub fn kind(&self) -> &'static str {
        match self.body {
            ModelBody::Expression(_) => "expression",
            ModelBody::Polynomial(_) => "polynomial",
            ModelBody::Tree(_) => "tree",
        }
    }

    pub fn features(&self) -> impl Iterator<Item = &String> {
        self.inputs.iter().chain(self.knobs.iter())
    }

    /// Closed-form output expressions, when the model has them.
    pub fn output_exprs(&self) -> Option<IndexMap<String, Expr>> {
        match &self.body {
            ModelBody::Expression(m) => Some(m.clone()),
            ModelBody::Polynomial(m) => Some(m.iter().map(|(k, p)| (k.clone(), p.to_expr())).collect()),
            ModelBody::Tree(_) => None,
        }
    }
}

/// Evaluates the model at a point assigning every input and knob.
pub fn eval_model(m: &ModelDef, a: &Assignment) -> Result<Assignment, ModelError> {
    if let Some(f) = m.features().find(|f| !a.contains_key(*f)) {
        return Err(ModelError::MissingFeature(f.clone()));
    }
    let mut out = Assignment::new();
    match &m.body {
        ModelBody::Expression(map) => {
            for (y, e) in map {
                match eval_expr(e, a)? {
                    Value::Num(v) => {
                        out.insert(y.clone(), v);
                    }
                    Value::Bool(_) => return Err(ModelError::BooleanOutput(y.clone())),
                }
            }
        }
        ModelBody::Polynomial(map) => {
            for (y, p) in map {
                out.insert(y.clone(), p.eval(a)?);
            }
        }
        ModelBody::Tree(groups) => {
            for g in groups {
                let leaf = g.root.route(a)?;
                for (y, v) in g.outputs.iter().zip(leaf) {
                    out.insert(y.clone(), v.clone());
                }
            }
        }
    }
    Ok(out)
}

/// Boolean constraint over features and output labels that holds exactly
/// when the outputs equal the model's prediction.
pub fn encode_model(m: &ModelDef) -> Expr {
    match &m.body {
        ModelBody::Tree(groups) => Expr::all(groups.iter().map(|g| g.root.encode(&g.outputs))),
        _ => {
            let exprs = m.output_exprs().unwrap_or_default();
            Expr::all(exprs.into_iter().map(|(y, e)| Expr::cmp(CmpOp::Eq, Expr::var(y), e)))
        }
    }
}

/// Output range of a tree model over its leaves, per output.
pub fn leaf_hull(m: &ModelDef) -> Option<IndexMap<String, (Rational, Rational)>> {
    let ModelBody::Tree(groups) = &m.body else {
        return None;
    };
    let mut out = IndexMap::new();
    for g in groups {
        let mut leaves = Vec::new();
        g.root.leaves(&mut leaves);
        for (i, y) in g.outputs.iter().enumerate() {
            let vals = leaves.iter().map(|l| &l[i]);
            let lo = vals.clone().min().cloned()?;
            let hi = vals.max().cloned()?;
            out.insert(y.clone(), (lo, hi));
        }
    }
    Some(out)
}
