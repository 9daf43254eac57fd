//! Single-dash flag parsing. Unsupported flags are warned about and dropped.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Parser;

#[derive(Parser, Debug, Default, Clone)]
#[command(name = "gearbox", version, about = "Stability-aware exploration of ML models", rename_all = "snake_case")]
pub struct Args {
    /// Labeled training data (CSV, optionally gzipped; `.csv` may be omitted)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Data to predict on
    #[arg(long)]
    pub new_data: Option<PathBuf>,
    /// Problem specification (JSON)
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Run name, first part of every output file name
    #[arg(long, default_value = "")]
    pub pref: String,
    /// train, predict, certify, query, verify, synthesize, optimize, optsyn or doe
    #[arg(long)]
    pub mode: String,
    /// Comma-separated responses
    #[arg(long)]
    pub resp: Option<String>,
    /// Comma-separated features
    #[arg(long)]
    pub feat: Option<String>,
    /// dt, poly or system
    #[arg(long, default_value = "dt")]
    pub model: String,
    #[arg(long)]
    pub model_per_response: Option<String>,
    #[arg(long)]
    pub dt_sklearn_max_depth: Option<usize>,
    #[arg(long)]
    pub poly_sklearn_degree: Option<u32>,
    #[arg(long)]
    pub pareto: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta_rel: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    #[arg(long)]
    pub asrt_names: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub asrt_exprs: Option<String>,
    #[arg(long)]
    pub quer_names: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub quer_exprs: Option<String>,
    #[arg(long)]
    pub objv_names: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub objv_exprs: Option<String>,
    #[arg(long)]
    pub doe_spec: Option<PathBuf>,
    #[arg(long, default_value = "full_factorial")]
    pub doe_algo: String,
    #[arg(long)]
    pub doe_num_samples: Option<usize>,
    #[arg(long)]
    pub save_model: Option<String>,
    #[arg(long)]
    pub use_model: Option<String>,
    #[arg(long)]
    pub model_name: Option<String>,
}

const KNOWN: &[&str] = &[
    "data",
    "new_data",
    "spec",
    "out_dir",
    "pref",
    "mode",
    "resp",
    "feat",
    "model",
    "model_per_response",
    "dt_sklearn_max_depth",
    "poly_sklearn_degree",
    "pareto",
    "epsilon",
    "delta_rel",
    "seed",
    "alpha",
    "beta",
    "eta",
    "asrt_names",
    "asrt_exprs",
    "quer_names",
    "quer_exprs",
    "objv_names",
    "objv_exprs",
    "doe_spec",
    "doe_algo",
    "doe_num_samples",
    "save_model",
    "use_model",
    "model_name",
    "help",
    "version",
];

fn flag_name(arg: &str) -> Option<&str> {
    if !arg.starts_with('-') || arg.len() < 2 || arg.parse::<f64>().is_ok() {
        return None;
    }
    Some(arg.trim_start_matches('-'))
}

/// Rewrites `-flag value` to `--flag value` and drops unsupported flags
/// together with their value. Returns the dropped flag names.
pub fn normalize(argv: &[String]) -> (Vec<String>, Vec<String>) {
    let mut out = Vec::with_capacity(argv.len());
    let mut dropped = Vec::new();
    let mut it = argv.iter().peekable();
    if let Some(bin) = it.next() {
        out.push(bin.clone());
    }
    while let Some(a) = it.next() {
        match flag_name(a) {
            Some("h") => out.push("--help".into()),
            // spelling used in published command lines
            Some("doe_spec.csv") => {
                out.push("--doe_spec".into());
                out.extend(it.next().cloned());
            }
            Some(name) if KNOWN.contains(&name) => {
                out.push(format!("--{name}"));
                if let Some(v) = it.next_if(|_| !matches!(name, "help" | "version")) {
                    out.push(v.clone());
                }
            }
            Some(name) => {
                dropped.push(name.to_string());
                it.next_if(|v| flag_name(v).is_none());
            }
            None => out.push(a.clone()),
        }
    }
    (out, dropped)
}

/// `t`/`f` style switch.
pub fn switch(value: &Option<String>, flag: &str, default: bool) -> Result<bool> {
    match value.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None => Ok(default),
        Some("t" | "true" | "1" | "yes" | "y") => Ok(true),
        Some("f" | "false" | "0" | "no" | "n") => Ok(false),
        Some(other) => bail!("-{flag}: expected t or f, got `{other}`"),
    }
}

/// Comma-separated list, blanks removed.
pub fn list(value: &Option<String>) -> Option<Vec<String>> {
    value.as_ref().map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect())
}

/// Pairs `names` (comma-separated) with `exprs` (semicolon-separated).
pub fn named(names: &Option<String>, exprs: &Option<String>, what: &str) -> Result<Option<Vec<(String, String)>>> {
    match (names, exprs) {
        (None, None) => Ok(None),
        (Some(_), None) | (None, Some(_)) => {
            bail!("-{what}_names and -{what}_exprs must be given together")
        }
        (Some(n), Some(e)) => {
            let n = list(&Some(n.clone())).unwrap_or_default();
            let e: Vec<String> = e.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect();
            if n.len() != e.len() {
                bail!("-{what}_names lists {} names but -{what}_exprs has {} expressions", n.len(), e.len());
            }
            Ok(Some(n.into_iter().zip(e).collect()))
        }
    }
}
