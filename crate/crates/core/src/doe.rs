//! Experiment matrices from per-feature value grids.

use std::io::Read;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Dataset;
use crate::num::{from_f64_decimal, int, max, min, parse_decimal, to_f64, Rational};

#[derive(Debug, thiserror::Error)]
pub enum DoeError {
    #[error("feature `{0}` has no values")]
    EmptyFeature(String),
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
    #[error("feature `{feature}`: not a number: `{cell}`")]
    NotANumber { feature: String, cell: String },
    #[error("{samples} samples requested but feature `{feature}` has only {levels} levels")]
    TooManySamples { samples: usize, feature: String, levels: usize },
    #[error("unknown design `{0}`")]
    UnknownAlgorithm(String),
    #[error("design `{0}` needs a sample count")]
    MissingSamples(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Ordered features with their levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorGrid {
    pub factors: Vec<(String, Vec<Rational>)>,
}

impl FactorGrid {
    pub fn new(factors: Vec<(String, Vec<Rational>)>) -> Result<FactorGrid, DoeError> {
        for (i, (name, levels)) in factors.iter().enumerate() {
            if levels.is_empty() {
                return Err(DoeError::EmptyFeature(name.clone()));
            }
            if factors[..i].iter().any(|(n, _)| n == name) {
                return Err(DoeError::DuplicateFeature(name.clone()));
            }
        }
        Ok(FactorGrid { factors })
    }

    /// Header row of feature names, one column of levels per feature;
    /// columns may have different lengths and blank cells are skipped.
    /// Levels are sorted ascending and deduplicated.
    pub fn from_csv<R: Read>(reader: R) -> Result<FactorGrid, DoeError> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut levels: Vec<Vec<Rational>> = vec![Vec::new(); names.len()];
        for rec in rdr.records() {
            for (i, cell) in rec?.iter().enumerate().take(names.len()) {
                if cell.is_empty() {
                    continue;
                }
                let v = parse_decimal(cell)
                    .ok_or_else(|| DoeError::NotANumber { feature: names[i].clone(), cell: cell.to_string() })?;
                levels[i].push(v);
            }
        }
        for l in &mut levels {
            l.sort();
            l.dedup();
        }
        FactorGrid::new(names.into_iter().zip(levels).collect())
    }

    fn columns(&self) -> Vec<String> {
        self.factors.iter().map(|(n, _)| n.clone()).collect()
    }

    fn bounds(&self) -> Vec<(Rational, Rational)> {
        self.factors
            .iter()
            .map(|(_, l)| {
                let lo = l.iter().skip(1).fold(l[0].clone(), |a, b| min(&a, b));
                let hi = l.iter().skip(1).fold(l[0].clone(), |a, b| max(&a, b));
                (lo, hi)
            })
            .collect()
    }
}

fn matrix(g: &FactorGrid, rows: Vec<Vec<Rational>>) -> Dataset {
    Dataset::new(g.columns(), rows).expect("rows match the feature count")
}

/// Cartesian product of all levels, first feature varying fastest.
fn product(axes: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let total: usize = axes.iter().map(Vec::len).product();
    (0..total)
        .map(|mut i| {
            axes.iter()
                .map(|a| {
                    let v = a[i % a.len()].clone();
                    i /= a.len();
                    v
                })
                .collect()
        })
        .collect()
}

pub fn full_factorial(g: &FactorGrid) -> Dataset {
    let axes: Vec<Vec<Rational>> = g.factors.iter().map(|(_, l)| l.clone()).collect();
    matrix(g, product(&axes))
}

/// `n` rows where each column uses `n` distinct levels of its feature.
pub fn latin_hypercube(g: &FactorGrid, n: usize, seed: u64) -> Result<Dataset, DoeError> {
    if let Some((name, l)) = g.factors.iter().find(|(_, l)| l.len() < n) {
        return Err(DoeError::TooManySamples { samples: n, feature: name.clone(), levels: l.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<Rational>> = g
        .factors
        .iter()
        .map(|(_, l)| {
            let mut l = l.clone();
            l.shuffle(&mut rng);
            l.truncate(n);
            l
        })
        .collect();
    Ok(matrix(g, (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()))
}

/// Cell centers of a `k^d` grid over the feature bounds, `k = ⌊n^(1/d)⌋`.
pub fn sukharev_grid(g: &FactorGrid, n: usize) -> Dataset {
    let d = g.factors.len() as u32;
    if d == 0 {
        return matrix(g, Vec::new());
    }
    let mut k = (n as f64).powf(1.0 / d as f64).round() as usize;
    while k > 0 && k.checked_pow(d).is_none_or(|p| p > n) {
        k -= 1;
    }
    let axes: Vec<Vec<Rational>> = g
        .bounds()
        .into_iter()
        .map(|(lo, hi)| (0..k).map(|i| &lo + (&hi - &lo) * Rational::new((2 * i + 1).into(), (2 * k).into())).collect())
        .collect();
    if k == 0 {
        return matrix(g, Vec::new());
    }
    matrix(g, product(&axes))
}

/// `n` rows with cells uniform over each feature's level range.
pub fn uniform_random(g: &FactorGrid, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = g.bounds();
    let rows = (0..n)
        .map(|_| {
            bounds
                .iter()
                .map(|(lo, hi)| {
                    let (a, b) = (to_f64(lo), to_f64(hi));
                    let v = from_f64_decimal(a + rng.gen::<f64>() * (b - a)).unwrap_or_else(|| int(0));
                    min(&max(&v, lo), hi)
                })
                .collect()
        })
        .collect();
    matrix(g, rows)
}

/// Dispatch by design name.
pub fn generate(g: &FactorGrid, algo: &str, n: Option<usize>, seed: u64) -> Result<Dataset, DoeError> {
    let need = || n.ok_or_else(|| DoeError::MissingSamples(algo.to_string()));
    match algo {
        "full_factorial" => Ok(full_factorial(g)),
        "latin_hypercube" => latin_hypercube(g, need()?, seed),
        "sukharev_grid" | "sukharev" => Ok(sukharev_grid(g, need()?)),
        "uniform_random" | "uniform" => Ok(uniform_random(g, need()?, seed)),
        other => Err(DoeError::UnknownAlgorithm(other.to_string())),
    }
}
