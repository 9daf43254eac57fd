//! Problem specification files: variable declarations, constraint
//! expressions, and per-item witnesses/configurations.

use indexmap::IndexMap;
use serde_json::Value as Json;
use thiserror::Error;

use crate::expr::{parse_expr, Assignment, CmpOp, Expr, ParseError};
use crate::num::{abs, from_json_number, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interface {
    Input,
    Knob,
    Output,
}

impl Interface {
    fn parse(s: &str) -> Option<Interface> {
        match s {
            "input" => Some(Interface::Input),
            "knob" => Some(Interface::Knob),
            "output" => Some(Interface::Output),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DType {
    Real,
    Int,
}

/// Closed interval; `None` endpoints are unbounded.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Range {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl Range {
    pub fn contains(&self, v: &Rational) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo <= v) && self.hi.as_ref().is_none_or(|hi| v <= hi)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn point(&self) -> Option<&Rational> {
        match (&self.lo, &self.hi) {
            (Some(lo), Some(hi)) if lo == hi => Some(lo),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Radius {
    Abs(Rational),
    Rel(Rational),
}

impl Radius {
    /// Radius of the stability ball around `center`.
    pub fn at(&self, center: &Rational) -> Rational {
        match self {
            Radius::Abs(r) => r.clone(),
            Radius::Rel(r) => r * abs(center),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableDecl {
    pub label: String,
    pub interface: Interface,
    pub dtype: DType,
    pub range: Range,
    pub radius: Option<Radius>,
    pub grid: Option<Vec<Rational>>,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error("variable `{label}`: unknown {what} `{tag}`")]
    UnknownTag { label: String, what: &'static str, tag: String },
    #[error("duplicate variable label `{0}`")]
    DuplicateLabel(String),
    #[error("variable `{label}`: grid value outside range: {value}")]
    GridOutsideRange { label: String, value: String },
    #[error("variable `{label}`: {msg}")]
    Variable { label: String, msg: String },
    #[error("{slot}: {source}")]
    Expr { slot: String, source: ParseError },
    #[error("{slot}: variable `{name}` is not declared")]
    Undeclared { slot: String, name: String },
    #[error("{slot}: variable `{name}` is not allowed here")]
    IllegalVariable { slot: String, name: String },
    #[error("{0}")]
    Witness(String),
}

/// Command-line replacements for spec fields; applied before validation.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub eta: Option<String>,
    pub assertions: Option<Vec<(String, String)>>,
    pub queries: Option<Vec<(String, String)>>,
    pub objectives: Option<Vec<(String, String)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub version: String,
    pub variables: Vec<VariableDecl>,
    pub alpha: Expr,
    pub beta: Expr,
    pub eta: Expr,
    pub assertions: IndexMap<String, Expr>,
    pub queries: IndexMap<String, Expr>,
    pub objectives: IndexMap<String, Expr>,
    pub witnesses: IndexMap<String, Assignment>,
    pub configurations: IndexMap<String, Assignment>,
    /// Output label to expression over inputs and knobs, for `-model system`.
    pub system: IndexMap<String, Expr>,
    pub warnings: Vec<String>,
}

const KNOWN_KEYS: &[&str] = &[
    "version",
    "variables",
    "alpha",
    "beta",
    "eta",
    "assertions",
    "queries",
    "objectives",
    "witnesses",
    "configurations",
    "system",
];
const KNOWN_VAR_KEYS: &[&str] = &["label", "interface", "type", "range", "rad-abs", "rad-rel", "grid"];

pub fn parse_spec(text: &str) -> Result<ProblemSpec, SpecError> {
    parse_spec_with(text, &Overrides::default())
}

pub fn parse_spec_with(text: &str, overrides: &Overrides) -> Result<ProblemSpec, SpecError> {
    let doc: Json = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| SpecError::Schema("spec must be a JSON object".into()))?;
    let mut warnings = Vec::new();
    for key in obj.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            warnings.push(format!("ignoring unsupported spec key `{key}`"));
        }
    }
    let version = match obj.get("version") {
        None | Some(Json::Null) => String::new(),
        Some(Json::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    };
    let mut variables = Vec::new();
    match obj.get("variables") {
        None | Some(Json::Null) => {}
        Some(Json::Array(items)) => {
            for item in items {
                variables.push(parse_variable(item, &mut warnings)?);
            }
        }
        Some(_) => return Err(SpecError::Schema("`variables` must be a list".into())),
    }

    let single = |key: &str, over: &Option<String>| -> Result<Expr, SpecError> {
        let text = match over {
            Some(t) => Some(t.clone()),
            None => match obj.get(key) {
                None | Some(Json::Null) => None,
                Some(Json::String(s)) => Some(s.clone()),
                Some(Json::Bool(b)) => Some(if *b { "True".into() } else { "False".into() }),
                Some(_) => return Err(SpecError::Schema(format!("`{key}` must be an expression string"))),
            },
        };
        match text {
            None => Ok(Expr::truth()),
            Some(t) if t.trim().is_empty() => Ok(Expr::truth()),
            Some(t) => parse_expr(&t).map_err(|source| SpecError::Expr { slot: key.into(), source }),
        }
    };
    let alpha = single("alpha", &overrides.alpha)?;
    let beta = single("beta", &overrides.beta)?;
    let eta = single("eta", &overrides.eta)?;

    let named = |key: &str, over: &Option<Vec<(String, String)>>| -> Result<IndexMap<String, Expr>, SpecError> {
        let pairs: Vec<(String, String)> = match over {
            Some(p) => p.clone(),
            None => match obj.get(key) {
                None | Some(Json::Null) => Vec::new(),
                Some(Json::Object(m)) => m
                    .iter()
                    .map(|(k, v)| match v {
                        Json::String(s) => Ok((k.clone(), s.clone())),
                        _ => Err(SpecError::Schema(format!("`{key}.{k}` must be an expression string"))),
                    })
                    .collect::<Result<_, _>>()?,
                Some(_) => return Err(SpecError::Schema(format!("`{key}` must be an object"))),
            },
        };
        let mut out = IndexMap::new();
        for (name, text) in pairs {
            let e = parse_expr(&text).map_err(|source| SpecError::Expr { slot: format!("{key}.{name}"), source })?;
            if out.insert(name.clone(), e).is_some() {
                return Err(SpecError::Schema(format!("duplicate name `{name}` in `{key}`")));
            }
        }
        Ok(out)
    };
    let assertions = named("assertions", &overrides.assertions)?;
    let queries = named("queries", &overrides.queries)?;
    let objectives = named("objectives", &overrides.objectives)?;
    let system = named("system", &None)?;
    let witnesses = point_maps(obj.get("witnesses"), "witnesses")?;
    let configurations = point_maps(obj.get("configurations"), "configurations")?;

    let spec = ProblemSpec {
        version,
        variables,
        alpha,
        beta,
        eta,
        assertions,
        queries,
        objectives,
        witnesses,
        configurations,
        system,
        warnings,
    };
    spec.validate()?;
    Ok(spec)
}

fn number(v: &Json, what: &str) -> Result<Rational, SpecError> {
    match v {
        Json::Number(n) => from_json_number(n).ok_or_else(|| SpecError::Schema(format!("{what}: bad number {n}"))),
        _ => Err(SpecError::Schema(format!("{what}: expected a number, found {v}"))),
    }
}

fn parse_variable(item: &Json, warnings: &mut Vec<String>) -> Result<VariableDecl, SpecError> {
    let obj = item.as_object().ok_or_else(|| SpecError::Schema("variable entries must be objects".into()))?;
    let label = obj
        .get("label")
        .and_then(Json::as_str)
        .ok_or_else(|| SpecError::Schema("variable without a string `label`".into()))?
        .to_string();
    for key in obj.keys() {
        if !KNOWN_VAR_KEYS.contains(&key.as_str()) {
            warnings.push(format!("variable `{label}`: ignoring unsupported key `{key}`"));
        }
    }
    let tag = |key: &'static str| -> Result<String, SpecError> {
        obj.get(key)
            .and_then(Json::as_str)
            .map(str::to_string)
            .ok_or_else(|| SpecError::Variable { label: label.clone(), msg: format!("missing `{key}`") })
    };
    let itf = tag("interface")?;
    let interface = Interface::parse(&itf).ok_or_else(|| SpecError::UnknownTag {
        label: label.clone(),
        what: "interface",
        tag: itf.clone(),
    })?;
    let dtype = match obj.get("type").and_then(Json::as_str) {
        None | Some("real") => DType::Real,
        Some("int") => DType::Int,
        Some(other) => {
            return Err(SpecError::UnknownTag { label: label.clone(), what: "type", tag: other.to_string() })
        }
    };
    let range = match obj.get("range") {
        None | Some(Json::Null) => Range::default(),
        Some(Json::Array(ends)) if ends.len() == 2 => {
            let end = |v: &Json| -> Result<Option<Rational>, SpecError> {
                match v {
                    Json::Null => Ok(None),
                    v => number(v, &format!("variable `{label}` range")).map(Some),
                }
            };
            Range { lo: end(&ends[0])?, hi: end(&ends[1])? }
        }
        Some(_) => {
            return Err(SpecError::Variable { label, msg: "`range` must be a two-element list".into() });
        }
    };
    if let (Some(lo), Some(hi)) = (&range.lo, &range.hi) {
        if lo > hi {
            return Err(SpecError::Variable { label, msg: "empty range".into() });
        }
    }
    let rad = |key: &str| -> Result<Option<Rational>, SpecError> {
        match obj.get(key) {
            None | Some(Json::Null) => Ok(None),
            Some(v) => {
                let r = number(v, &format!("variable `{label}` {key}"))?;
                if r < int(0) {
                    return Err(SpecError::Variable { label: label.clone(), msg: format!("negative `{key}`") });
                }
                Ok(Some(r))
            }
        }
    };
    let radius = match (rad("rad-abs")?, rad("rad-rel")?) {
        (Some(_), Some(_)) => {
            return Err(SpecError::Variable { label, msg: "only one of `rad-abs`/`rad-rel` may be given".into() })
        }
        (Some(a), None) => Some(Radius::Abs(a)),
        (None, Some(r)) => Some(Radius::Rel(r)),
        (None, None) => None,
    };
    let grid = match obj.get("grid") {
        None | Some(Json::Null) => None,
        Some(Json::Array(vals)) => {
            let mut g =
                vals.iter().map(|v| number(v, &format!("variable `{label}` grid"))).collect::<Result<Vec<_>, _>>()?;
            g.sort();
            g.dedup();
            if g.is_empty() {
                return Err(SpecError::Variable { label, msg: "empty grid".into() });
            }
            Some(g)
        }
        Some(_) => return Err(SpecError::Variable { label, msg: "`grid` must be a list".into() }),
    };
    let decl = VariableDecl { label, interface, dtype, range, radius, grid };
    check_decl(&decl)?;
    Ok(decl)
}

fn check_decl(d: &VariableDecl) -> Result<(), SpecError> {
    let err = |msg: &str| SpecError::Variable { label: d.label.clone(), msg: msg.into() };
    if d.radius.is_some() && d.interface != Interface::Knob {
        return Err(err("stability radius given on a non-knob"));
    }
    if d.grid.is_some() && d.interface != Interface::Knob {
        return Err(err("grid given on a non-knob"));
    }
    if let Some(g) = &d.grid {
        if let Some(v) = g.iter().find(|v| !d.range.contains(v)) {
            return Err(SpecError::GridOutsideRange { label: d.label.clone(), value: crate::num::format_rational(v) });
        }
    }
    if d.dtype == DType::Int {
        let ends = d.range.lo.iter().chain(d.range.hi.iter());
        if ends.into_iter().any(|v| !v.is_integer()) {
            return Err(err("int variable with a non-integer range endpoint"));
        }
        if d.grid.iter().flatten().any(|v| !v.is_integer()) {
            return Err(err("int variable with a non-integer grid value"));
        }
    }
    Ok(())
}

fn point_maps(v: Option<&Json>, key: &str) -> Result<IndexMap<String, Assignment>, SpecError> {
    let mut out = IndexMap::new();
    let m = match v {
        None | Some(Json::Null) => return Ok(out),
        Some(Json::Object(m)) => m,
        Some(_) => return Err(SpecError::Schema(format!("`{key}` must be an object"))),
    };
    for (name, vals) in m {
        let vals = vals.as_object().ok_or_else(|| SpecError::Schema(format!("`{key}.{name}` must be an object")))?;
        let mut a = Assignment::new();
        for (label, v) in vals {
            a.insert(label.clone(), number(v, &format!("{key}.{name}.{label}"))?);
        }
        out.insert(name.clone(), a);
    }
    Ok(out)
}

/// Name of the perturbed copy of a knob.
pub fn primed(label: &str) -> String {
    format!("{label}'")
}

impl ProblemSpec {
    pub fn get(&self, label: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.label == label)
    }

    pub fn with_interface(&self, i: Interface) -> impl Iterator<Item = &VariableDecl> {
        self.variables.iter().filter(move |v| v.interface == i)
    }

    pub fn knobs(&self) -> impl Iterator<Item = &VariableDecl> {
        self.with_interface(Interface::Knob)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &VariableDecl> {
        self.with_interface(Interface::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &VariableDecl> {
        self.with_interface(Interface::Output)
    }

    pub fn labels(&self, i: Interface) -> Vec<String> {
        self.with_interface(i).map(|v| v.label.clone()).collect()
    }

    /// Checks every invariant that spans more than one variable.
    pub fn validate(&self) -> Result<(), SpecError> {
        let mut seen = std::collections::HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.label.as_str()) {
                return Err(SpecError::DuplicateLabel(v.label.clone()));
            }
            check_decl(v)?;
        }
        let knobs = [Interface::Knob];
        let inputs_knobs = [Interface::Input, Interface::Knob];
        let all = [Interface::Input, Interface::Knob, Interface::Output];
        self.check_slot("eta", &self.eta, &knobs)?;
        self.check_slot("alpha", &self.alpha, &inputs_knobs)?;
        self.check_slot("beta", &self.beta, &all)?;
        for (slot, map) in
            [("assertions", &self.assertions), ("queries", &self.queries), ("objectives", &self.objectives)]
        {
            for (name, e) in map {
                self.check_slot(&format!("{slot}.{name}"), e, &all)?;
            }
        }
        for (name, e) in &self.system {
            if self.get(name).map(|v| v.interface) != Some(Interface::Output) {
                return Err(SpecError::Schema(format!("`system.{name}` is not a declared output")));
            }
            self.check_slot(&format!("system.{name}"), e, &inputs_knobs)?;
        }
        for (name, point) in &self.witnesses {
            if !self.queries.contains_key(name) {
                return Err(SpecError::Witness(format!("witness given for unknown query `{name}`")));
            }
            self.check_point("witness", name, point, &inputs_knobs)?;
        }
        for (name, point) in &self.configurations {
            if !self.assertions.contains_key(name) {
                return Err(SpecError::Witness(format!("configuration given for unknown assertion `{name}`")));
            }
            self.check_point("configuration", name, point, &knobs)?;
        }
        Ok(())
    }

    fn check_slot(&self, slot: &str, e: &Expr, legal: &[Interface]) -> Result<(), SpecError> {
        for name in e.variables() {
            match self.get(&name) {
                None => return Err(SpecError::Undeclared { slot: slot.into(), name }),
                Some(v) if !legal.contains(&v.interface) => {
                    return Err(SpecError::IllegalVariable { slot: slot.into(), name })
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn check_point(&self, what: &str, name: &str, point: &Assignment, legal: &[Interface]) -> Result<(), SpecError> {
        for label in point.keys() {
            match self.get(label) {
                Some(v) if legal.contains(&v.interface) => {}
                _ => {
                    return Err(SpecError::Witness(format!(
                        "{what} `{name}` assigns `{label}`, which is not a declared {}",
                        if legal.len() == 1 { "knob" } else { "knob or input" }
                    )))
                }
            }
        }
        for v in self.variables.iter().filter(|v| legal.contains(&v.interface)) {
            if !point.contains_key(&v.label) {
                return Err(SpecError::Witness(format!("{what} `{name}` does not assign `{}`", v.label)));
            }
        }
        Ok(())
    }
}

fn bound_atoms(label: &str, range: &Range) -> Vec<Expr> {
    let mut out = Vec::new();
    if let Some(lo) = &range.lo {
        out.push(Expr::cmp(CmpOp::Ge, Expr::var(label), Expr::Num(lo.clone())));
    }
    if let Some(hi) = &range.hi {
        out.push(Expr::cmp(CmpOp::Le, Expr::var(label), Expr::Num(hi.clone())));
    }
    out
}

/// Grid membership of a knob as a disjunction of equalities.
pub fn grid_constraint(label: &str, grid: &[Rational]) -> Expr {
    Expr::any(grid.iter().map(|g| Expr::cmp(CmpOp::Eq, Expr::var(label), Expr::Num(g.clone()))))
}

/// `(alpha_full, eta_full)`: user alpha with input and knob ranges, user eta
/// with grid memberships. Output ranges are not included.
pub fn derive_domain_constraints(spec: &ProblemSpec) -> (Expr, Expr) {
    let ranges = spec
        .variables
        .iter()
        .filter(|v| v.interface != Interface::Output)
        .flat_map(|v| bound_atoms(&v.label, &v.range));
    let alpha = Expr::all(std::iter::once(spec.alpha.clone()).chain(ranges));
    let grids = spec.knobs().filter_map(|v| v.grid.as_ref().map(|g| grid_constraint(&v.label, g)));
    let eta = Expr::all(grids.chain(std::iter::once(spec.eta.clone())));
    (alpha, eta)
}

/// Stability region around `center` over the primed knobs.
pub fn theta_constraint(spec: &ProblemSpec, center: &Assignment) -> Expr {
    Expr::all(spec.knobs().flat_map(|k| {
        let p = primed(&k.label);
        let c = center.get(&k.label).cloned().unwrap_or_else(|| int(0));
        let r = k.radius.as_ref().map_or_else(|| int(0), |r| r.at(&c));
        let mut atoms = if r == int(0) {
            vec![Expr::cmp(CmpOp::Eq, Expr::var(&p), Expr::Num(c))]
        } else {
            vec![
                Expr::cmp(CmpOp::Ge, Expr::var(&p), Expr::Num(&c - &r)),
                Expr::cmp(CmpOp::Le, Expr::var(&p), Expr::Num(&c + &r)),
            ]
        };
        atoms.extend(bound_atoms(&p, &k.range));
        atoms
    }))
}
