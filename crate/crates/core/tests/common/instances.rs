//! Exploration instances shared by the acceptance and property targets.

use gearbox::explore::{ExploreConfig, Instance};
use gearbox::expr::parse_expr;
use gearbox::model::{ModelBody, ModelDef};
use gearbox::num::Rational;
use gearbox::spec::parse_spec;
use indexmap::IndexMap;

pub fn expression_model(inputs: &[&str], knobs: &[&str], outputs: &[(&str, &str)]) -> ModelDef {
    ModelDef {
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        knobs: knobs.iter().map(|s| s.to_string()).collect(),
        outputs: outputs.iter().map(|(y, _)| y.to_string()).collect(),
        body: ModelBody::Expression(
            outputs.iter().map(|(y, e)| (y.to_string(), parse_expr(e).expect("model expression"))).collect(),
        ),
    }
}

pub const RUNNING: &str = "0 if (p <= 0 and x <= 0) else (x if x > 0 else p)";

/// Knob `p`, input `x`, output `y = f(p, x)`; `extra` is spliced into the specification object.
pub fn running(p: (&str, &str), x: (&str, &str), radius: Option<&str>, extra: &str) -> Instance {
    let rad = radius.map_or(String::new(), |r| format!(r#", "rad-abs": {r}"#));
    let text = format!(
        r#"{{"version": "1.0", "variables": [
            {{"label": "p", "interface": "knob", "type": "real", "range": [{}, {}]{rad}}},
            {{"label": "x", "interface": "input", "type": "real", "range": [{}, {}]}},
            {{"label": "y", "interface": "output", "type": "real"}}
        ]{extra}}}"#,
        p.0, p.1, x.0, x.1
    );
    let model = expression_model(&["x"], &["p"], &[("y", RUNNING)]);
    Instance::new(parse_spec(&text).unwrap(), model, ExploreConfig::default()).unwrap()
}

/// The toy interface: input x, grid knob p1 with relative radius, knob p2
/// with absolute radius, outputs y1 and y2 computed in closed form.
pub fn toy(extra: &str, cfg: ExploreConfig) -> Instance {
    let text = format!(
        r#"{{"version": "1.2", "variables": [
            {{"label": "x", "interface": "input", "type": "real", "range": [0, 10]}},
            {{"label": "p1", "interface": "knob", "type": "real", "range": [0, 10], "rad-rel": 0.1, "grid": [2, 4, 7]}},
            {{"label": "p2", "interface": "knob", "type": "real", "range": [3, 7], "rad-abs": 0.2}},
            {{"label": "y1", "interface": "output", "type": "real"}},
            {{"label": "y2", "interface": "output", "type": "real"}}
        ]{extra}}}"#
    );
    let model = expression_model(&["x"], &["p1", "p2"], &[("y1", "100*(p2 - 6)"), ("y2", "x*p1 + p2")]);
    Instance::new(parse_spec(&text).unwrap(), model, cfg).unwrap()
}

pub const TOY_WITNESSES: &str = r#""witnesses": {
    "query_stable_witness": {"x": 7, "p1": 7.0, "p2": 6.000000067055225},
    "query_grid_conflict": {"x": 6.2, "p1": 3.0, "p2": 6.000000067055225},
    "query_unstable_witness": {"x": 7, "p1": 7.0, "p2": 6.0},
    "query_infeasible_witness": {"x": 7, "p1": 7.0, "p2": 6.0}
}"#;

pub const TOY_QUERIES: &str = r#""queries": {
    "query_stable_witness": "y2 <= 90",
    "query_grid_conflict": "y1 >= 9",
    "query_unstable_witness": "y1 >= (-10)",
    "query_infeasible_witness": "y1 > 9"
}"#;

/// One knob term `sign * a * (p - m)^2` with absolute radius `r`; all
/// numbers are `n / 100`.
#[derive(Clone, Debug)]
pub struct Bowl {
    pub sign: i32,
    pub a: i64,
    pub m: i64,
    pub r: i64,
}

impl Bowl {
    fn a(&self) -> f64 {
        self.a as f64 / 100.0
    }

    fn m(&self) -> f64 {
        self.m as f64 / 100.0
    }

    pub fn at(&self, p: f64) -> f64 {
        self.sign as f64 * self.a() * (p - self.m()).powi(2)
    }

    /// Exact minimum over `[lo, hi]`: an endpoint for concave terms, the
    /// clamped vertex for convex ones.
    pub fn min_over(&self, lo: f64, hi: f64) -> f64 {
        if self.sign < 0 {
            self.at(lo).min(self.at(hi))
        } else {
            self.at(self.m().clamp(lo, hi))
        }
    }

    /// Bound on |d/dp| over [-1, 1].
    pub fn lipschitz(&self) -> f64 {
        2.0 * self.a() * (1.0 + self.m().abs())
    }
}

/// Separable max-min instance over knobs in [-1, 1] and input x in [-1, 1]:
/// `y = sum of bowls - c * x^2`.
#[derive(Clone, Debug)]
pub struct MaxMin {
    pub bowls: Vec<Bowl>,
    pub c: i64,
}

fn hundredths(n: i64) -> String {
    crate::common::gen::decimal(n, 2)
}

impl MaxMin {
    pub fn knob(i: usize) -> String {
        format!("p{}", i + 1)
    }

    pub fn output_expr(&self) -> String {
        let mut terms: Vec<String> = self
            .bowls
            .iter()
            .enumerate()
            .map(|(i, b)| {
                format!(
                    "{} * {} * ({} - {})**2",
                    if b.sign < 0 { "(-1)" } else { "1" },
                    hundredths(b.a),
                    Self::knob(i),
                    hundredths(b.m)
                )
            })
            .collect();
        terms.push(format!("(-{}) * x**2", hundredths(self.c)));
        terms.join(" + ")
    }

    pub fn spec_text(&self, extra: &str) -> String {
        let mut vars: Vec<String> = self
            .bowls
            .iter()
            .enumerate()
            .map(|(i, b)| {
                format!(
                    r#"{{"label": "{}", "interface": "knob", "type": "real", "range": [-1, 1], "rad-abs": {}}}"#,
                    Self::knob(i),
                    hundredths(b.r)
                )
            })
            .collect();
        vars.push(r#"{"label": "x", "interface": "input", "type": "real", "range": [-1, 1]}"#.into());
        vars.push(r#"{"label": "y", "interface": "output", "type": "real"}"#.into());
        format!(r#"{{"version": "1.0", "variables": [{}], "objectives": {{"obj": "y"}}{extra}}}"#, vars.join(", "))
    }

    pub fn instance(&self, extra: &str, cfg: ExploreConfig) -> Instance {
        let knobs: Vec<String> = (0..self.bowls.len()).map(Self::knob).collect();
        let knob_refs: Vec<&str> = knobs.iter().map(String::as_str).collect();
        let expr = self.output_expr();
        let model = expression_model(&["x"], &knob_refs, &[("y", &expr)]);
        Instance::new(parse_spec(&self.spec_text(extra)).unwrap(), model, cfg).unwrap()
    }

    /// Objective bounds making the scaled objective equal the objective.
    pub fn unit_bounds() -> IndexMap<String, (Rational, Rational)> {
        [("obj".to_string(), (Rational::from_integer(0.into()), Rational::from_integer(1.into())))]
            .into_iter()
            .collect()
    }

    /// Brute-force optimum over a knob grid of the given pitch, and the
    /// largest error that pitch can cause.
    pub fn grid_optimum(&self, pitch: f64) -> (f64, f64) {
        let steps = (2.0 / pitch).round() as usize;
        let mut total = -(self.c as f64) / 100.0;
        let mut err = 0.0;
        for b in &self.bowls {
            let r = b.r as f64 / 100.0;
            let best = (0..=steps)
                .map(|i| {
                    let p = -1.0 + i as f64 * pitch;
                    b.min_over((p - r).max(-1.0), (p + r).min(1.0))
                })
                .fold(f64::NEG_INFINITY, f64::max);
            total += best;
            err += b.lipschitz() * pitch / 2.0;
        }
        (total, err)
    }
}

pub fn maxmin_strategy(max_knobs: usize) -> impl proptest::strategy::Strategy<Value = MaxMin> {
    use proptest::prelude::*;
    let bowl = (prop::sample::select(vec![-1, 1]), 10i64..=50, -100i64..=100, 5i64..=30)
        .prop_map(|(sign, a, m, r)| Bowl { sign, a, m, r });
    (prop::collection::vec(bowl, 1..=max_knobs), 0i64..=50).prop_map(|(bowls, c)| MaxMin { bowls, c })
}
