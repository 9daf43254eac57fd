use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use indexmap::IndexMap;

use super::ModelError;
use crate::expr::{eval_expr, Assignment, Expr, Value};
use crate::num::{format_rational, parse_decimal, Rational};

/// Rectangular table of exact numbers with named columns.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Rational>>,
}

impl Dataset {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Dataset, ModelError> {
        if let Some(i) = rows.iter().position(|r| r.len() != columns.len()) {
            return Err(ModelError::Data(format!("row {i} has {} cells, expected {}", rows[i].len(), columns.len())));
        }
        Ok(Dataset { columns, rows })
    }

    /// Reads a CSV file with a header row; `.gz` files (or gzip content) are
    /// decompressed transparently.
    pub fn load(path: &Path) -> Result<Dataset, ModelError> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        if bytes.starts_with(&[0x1f, 0x8b]) {
            let mut plain = Vec::new();
            GzDecoder::new(&bytes[..]).read_to_end(&mut plain)?;
            bytes = plain;
        }
        Dataset::from_csv(&bytes[..])
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Dataset, ModelError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .zip(&columns)
                .map(|(cell, col)| {
                    parse_decimal(cell).ok_or_else(|| {
                        ModelError::Data(format!("row {}: column `{col}`: not a number: `{cell}`", i + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Dataset::new(columns, rows)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(format_rational)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    pub fn column_index(&self, label: &str) -> Result<usize, ModelError> {
        self.columns.iter().position(|c| c == label).ok_or_else(|| ModelError::UnknownColumn(label.to_string()))
    }

    pub fn column(&self, label: &str) -> Result<Vec<Rational>, ModelError> {
        let i = self.column_index(label)?;
        Ok(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    pub fn row_assignment(&self, i: usize) -> Assignment {
        self.columns.iter().cloned().zip(self.rows[i].iter().cloned()).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows of `other` appended; columns are matched by name.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset, ModelError> {
        let idx = self.columns.iter().map(|c| other.column_index(c)).collect::<Result<Vec<_>, _>>()?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()));
        Ok(Dataset { columns: self.columns.clone(), rows })
    }
}

/// Minimum and maximum of each objective over the rows of `d`.
pub fn objective_bounds(
    d: &Dataset,
    objectives: &IndexMap<String, Expr>,
) -> Result<IndexMap<String, (Rational, Rational)>, ModelError> {
    let mut out = IndexMap::new();
    for (name, e) in objectives {
        for v in e.variables() {
            d.column_index(&v)?;
        }
        let mut bounds: Option<(Rational, Rational)> = None;
        for i in 0..d.len() {
            let v = match eval_expr(e, &d.row_assignment(i))? {
                Value::Num(v) => v,
                Value::Bool(_) => return Err(ModelError::BooleanOutput(name.clone())),
            };
            bounds = Some(match bounds {
                None => (v.clone(), v),
                Some((lo, hi)) => (if v < lo { v.clone() } else { lo }, if v > hi { v } else { hi }),
            });
        }
        out.insert(name.clone(), bounds.ok_or(ModelError::EmptyDataset)?);
    }
    Ok(out)
}
