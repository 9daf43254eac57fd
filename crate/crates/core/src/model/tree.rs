use std::collections::BTreeMap;

use num_traits::Zero;

use super::{Dataset, ModelBody, ModelDef, ModelError};
use crate::expr::{Assignment, CmpOp, Expr};
use crate::num::{int, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeNode {
    /// One value per output of the owning group.
    Leaf(Vec<Rational>),
    /// `feature <= threshold` goes left.
    Split { feature: String, threshold: Rational, left: Box<TreeNode>, right: Box<TreeNode> },
}

/// A tree predicting one or more outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeGroup {
    pub outputs: Vec<String>,
    pub root: TreeNode,
}

impl TreeNode {
    pub fn route(&self, a: &Assignment) -> Result<&[Rational], ModelError> {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf(v) => return Ok(v),
                TreeNode::Split { feature, threshold, left, right } => {
                    let v = a.get(feature).ok_or_else(|| ModelError::MissingFeature(feature.clone()))?;
                    node = if v <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn encode(&self, outputs: &[String]) -> Expr {
        match self {
            TreeNode::Leaf(vals) => Expr::all(
                outputs.iter().zip(vals).map(|(y, v)| Expr::cmp(CmpOp::Eq, Expr::var(y), Expr::Num(v.clone()))),
            ),
            TreeNode::Split { feature, threshold, left, right } => {
                let t = || Expr::Num(threshold.clone());
                Expr::or(
                    Expr::and(Expr::cmp(CmpOp::Le, Expr::var(feature), t()), left.encode(outputs)),
                    Expr::and(Expr::cmp(CmpOp::Gt, Expr::var(feature), t()), right.encode(outputs)),
                )
            }
        }
    }

    pub fn leaves<'a>(&'a self, out: &mut Vec<&'a [Rational]>) {
        match self {
            TreeNode::Leaf(v) => out.push(v),
            TreeNode::Split { left, right, .. } => {
                left.leaves(out);
                right.leaves(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Checks that every root-to-leaf path describes a non-empty region
    /// and that leaves have `width` values.
    pub fn validate(&self, width: usize) -> Result<(), ModelError> {
        fn rec(
            n: &TreeNode,
            width: usize,
            bounds: &mut BTreeMap<String, (Option<Rational>, Option<Rational>)>,
        ) -> Result<(), ModelError> {
            match n {
                TreeNode::Leaf(v) if v.len() == width => Ok(()),
                TreeNode::Leaf(v) => Err(ModelError::Schema(format!("leaf with {} values, expected {width}", v.len()))),
                TreeNode::Split { feature, threshold, left, right } => {
                    let saved = bounds.get(feature).cloned();
                    let (lo, hi) = saved.clone().unwrap_or((None, None));
                    // region is (lo, hi]
                    let empty_left = lo.as_ref().is_some_and(|l| threshold <= l);
                    let empty_right = hi.as_ref().is_some_and(|h| threshold >= h);
                    if empty_left || empty_right {
                        return Err(ModelError::Schema(format!(
                            "split on `{feature}` at {threshold} leaves an empty branch"
                        )));
                    }
                    bounds.insert(feature.clone(), (lo.clone(), Some(threshold.clone())));
                    rec(left, width, bounds)?;
                    bounds.insert(feature.clone(), (Some(threshold.clone()), hi));
                    rec(right, width, bounds)?;
                    match saved {
                        Some(s) => bounds.insert(feature.clone(), s),
                        None => bounds.remove(feature),
                    };
                    Ok(())
                }
            }
        }
        rec(self, width, &mut BTreeMap::new())
    }
}

struct Fit<'a> {
    names: &'a [String],
    features: Vec<Vec<&'a Rational>>,
    responses: Vec<Vec<&'a Rational>>,
    max_depth: usize,
}

fn mean(ys: &[&Rational], rows: &[usize]) -> Rational {
    let sum = rows.iter().fold(Rational::zero(), |acc, &i| acc + ys[i]);
    sum / int(rows.len() as i64)
}

fn sse(sum: &Rational, sq: &Rational, n: usize) -> Rational {
    sq - sum * sum / int(n as i64)
}

impl Fit<'_> {
    fn grow(&self, rows: &[usize], depth: usize) -> TreeNode {
        let leaf = || TreeNode::Leaf(self.responses.iter().map(|ys| mean(ys, rows)).collect());
        if depth >= self.max_depth || rows.len() < 2 {
            return leaf();
        }
        let pure = self.responses.iter().all(|ys| rows.iter().all(|&i| ys[i] == ys[rows[0]]));
        if pure {
            return leaf();
        }
        let mut best: Option<(Rational, usize, Rational)> = None;
        for (f, col) in self.features.iter().enumerate() {
            let mut order = rows.to_vec();
            order.sort_by(|&a, &b| col[a].cmp(col[b]));
            let total: Vec<(Rational, Rational)> = self
                .responses
                .iter()
                .map(|ys| {
                    order.iter().fold((Rational::zero(), Rational::zero()), |(s, q), &i| (s + ys[i], q + ys[i] * ys[i]))
                })
                .collect();
            let mut left: Vec<(Rational, Rational)> = vec![(Rational::zero(), Rational::zero()); self.responses.len()];
            for k in 0..order.len() - 1 {
                let i = order[k];
                for (acc, ys) in left.iter_mut().zip(&self.responses) {
                    acc.0 += ys[i];
                    acc.1 += ys[i] * ys[i];
                }
                let (a, b) = (col[order[k]], col[order[k + 1]]);
                if a == b {
                    continue;
                }
                let nl = k + 1;
                let nr = order.len() - nl;
                let mut cost = Rational::zero();
                for (l, t) in left.iter().zip(&total) {
                    cost += sse(&l.0, &l.1, nl) + sse(&(&t.0 - &l.0), &(&t.1 - &l.1), nr);
                }
                if best.as_ref().is_none_or(|(c, _, _)| &cost < c) {
                    best = Some((cost, f, (a + b) / int(2)));
                }
            }
        }
        let Some((_, f, threshold)) = best else {
            return leaf();
        };
        let col = &self.features[f];
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| col[i] <= &threshold);
        TreeNode::Split {
            feature: self.names[f].clone(),
            threshold,
            left: Box::new(self.grow(&l, depth + 1)),
            right: Box::new(self.grow(&r, depth + 1)),
        }
    }
}

/// Greedy CART regression fit. With `shared`, one tree predicts all
/// responses (split cost summed over responses); otherwise one tree per
/// response. Ties go to the lowest feature index, then the smallest threshold.
pub fn fit_tree(
    d: &Dataset,
    inputs: &[String],
    knobs: &[String],
    responses: &[String],
    max_depth: usize,
    shared: bool,
) -> Result<ModelDef, ModelError> {
    if d.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let names: Vec<String> = inputs.iter().chain(knobs).cloned().collect();
    let features = names
        .iter()
        .map(|f| d.column_index(f).map(|c| d.rows.iter().map(|r| &r[c]).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    let resp_cols = responses
        .iter()
        .map(|r| d.column_index(r).map(|c| d.rows.iter().map(|row| &row[c]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<usize> = (0..d.len()).collect();
    let groups: Vec<(Vec<String>, Vec<Vec<&Rational>>)> = if shared {
        vec![(responses.to_vec(), resp_cols)]
    } else {
        responses.iter().cloned().zip(resp_cols).map(|(r, c)| (vec![r], vec![c])).collect()
    };
    let mut out = Vec::new();
    for (outputs, cols) in groups {
        let fit = Fit { names: &names, features: features.clone(), responses: cols, max_depth };
        let root = fit.grow(&rows, 0);
        out.push(TreeGroup { outputs, root });
    }
    Ok(ModelDef {
        inputs: inputs.to_vec(),
        knobs: knobs.to_vec(),
        outputs: responses.to_vec(),
        body: ModelBody::Tree(out),
    })
}
