use num_traits::{One, Zero};

use super::{Dataset, ModelBody, ModelDef, ModelError};
use crate::expr::{Assignment, BinOp, Expr};
use crate::num::{int, Rational};

/// Sum of `coef * prod(feature_i ** exponent_i)` terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    pub features: Vec<String>,
    pub terms: Vec<(Vec<u32>, Rational)>,
}

impl Polynomial {
    pub fn new(features: Vec<String>, terms: Vec<(Vec<u32>, Rational)>) -> Polynomial {
        Polynomial { features, terms }
    }

    pub fn eval(&self, a: &Assignment) -> Result<Rational, ModelError> {
        let vals = self
            .features
            .iter()
            .map(|f| a.get(f).ok_or_else(|| ModelError::MissingFeature(f.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.terms.iter().map(|(exps, c)| c * monomial(&vals, exps)).fold(Rational::zero(), |acc, t| acc + t))
    }

    pub fn to_expr(&self) -> Expr {
        let mut sum: Option<Expr> = None;
        for (exps, c) in &self.terms {
            let mut term = Expr::Num(c.clone());
            let factors: Vec<Expr> = self
                .features
                .iter()
                .zip(exps)
                .filter(|(_, &k)| k > 0)
                .map(|(f, &k)| Expr::bin(BinOp::Pow, Expr::var(f), Expr::Num(int(k as i64))))
                .collect();
            if !factors.is_empty() {
                let prod = factors.into_iter().reduce(|a, b| Expr::bin(BinOp::Mul, a, b)).unwrap();
                term = if c.is_one() { prod } else { Expr::bin(BinOp::Mul, term, prod) };
            }
            sum = Some(match sum {
                None => term,
                Some(s) => Expr::bin(BinOp::Add, s, term),
            });
        }
        sum.unwrap_or(Expr::Num(Rational::zero()))
    }
}

fn monomial(vals: &[&Rational], exps: &[u32]) -> Rational {
    let mut acc = Rational::one();
    for (v, &k) in vals.iter().zip(exps) {
        for _ in 0..k {
            acc *= *v;
        }
    }
    acc
}

/// Exponent vectors of total degree `<= degree`, by degree then lexicographically descending.
fn exponents(n: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=degree {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}

/// Exact least-squares fit of one polynomial per response. Returns the
/// model and the training residual sum of squares per response.
pub fn fit_polynomial(
    d: &Dataset,
    inputs: &[String],
    knobs: &[String],
    responses: &[String],
    degree: u32,
) -> Result<(ModelDef, Vec<Rational>), ModelError> {
    if d.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let features: Vec<String> = inputs.iter().chain(knobs).cloned().collect();
    let fidx = features.iter().map(|f| d.column_index(f)).collect::<Result<Vec<_>, _>>()?;
    let ridx = responses.iter().map(|r| d.column_index(r)).collect::<Result<Vec<_>, _>>()?;
    let exps = exponents(features.len(), degree);
    let m = exps.len();
    if d.len() < m {
        return Err(ModelError::RankDeficient { rows: d.len(), monomials: m });
    }
    let design: Vec<Vec<Rational>> = d
        .rows
        .iter()
        .map(|row| {
            let vals: Vec<&Rational> = fidx.iter().map(|&i| &row[i]).collect();
            exps.iter().map(|e| monomial(&vals, e)).collect()
        })
        .collect();
    // normal equations, all responses as extra right-hand-side columns
    let mut aug = vec![vec![Rational::zero(); m + ridx.len()]; m];
    for (row, data) in design.iter().zip(&d.rows) {
        for i in 0..m {
            for j in 0..m {
                aug[i][j] += &row[i] * &row[j];
            }
            for (k, &r) in ridx.iter().enumerate() {
                aug[i][m + k] += &row[i] * &data[r];
            }
        }
    }
    let coefs = solve(aug, m, ridx.len()).ok_or(ModelError::RankDeficient { rows: d.len(), monomials: m })?;
    let mut body = indexmap::IndexMap::new();
    let mut residuals = Vec::new();
    for (k, (resp, &r)) in responses.iter().zip(&ridx).enumerate() {
        let terms: Vec<(Vec<u32>, Rational)> =
            exps.iter().zip(&coefs).filter(|(_, c)| !c[k].is_zero()).map(|(e, c)| (e.clone(), c[k].clone())).collect();
        let mut rss = Rational::zero();
        for (row, data) in design.iter().zip(&d.rows) {
            let pred = row.iter().zip(&coefs).fold(Rational::zero(), |acc, (x, c)| acc + x * &c[k]);
            let e = pred - &data[r];
            rss += &e * &e;
        }
        residuals.push(rss);
        body.insert(resp.clone(), Polynomial::new(features.clone(), terms));
    }
    let model = ModelDef {
        inputs: inputs.to_vec(),
        knobs: knobs.to_vec(),
        outputs: responses.to_vec(),
        body: ModelBody::Polynomial(body),
    };
    Ok((model, residuals))
}

/// Gauss-Jordan elimination on an `m x (m + k)` augmented matrix; `None`
/// when singular. Row `i` of the result holds the `k` solutions for unknown `i`.
fn solve(mut a: Vec<Vec<Rational>>, m: usize, k: usize) -> Option<Vec<Vec<Rational>>> {
    for col in 0..m {
        let piv = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[m..m + k].to_vec()).collect())
}
