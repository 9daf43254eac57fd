//! Small multilinear instances with grid-only knobs and an exact
//! enumeration oracle for every mode.
//!
//! `y = sum(a_i p_i) + b x + sum(c_i p_i x)` is affine in each variable, so
//! its extremes over a box sit at the box vertices. Knob values are halves,
//! thresholds are odd eighths, so no vertex ever ties with a threshold.

use gearbox::explore::{ExploreConfig, Instance, Status};
use gearbox::num::Rational;
use gearbox::spec::parse_spec;
use proptest::prelude::*;

use super::gen::decimal;
use super::instances::expression_model;

#[derive(Clone, Debug)]
pub struct Small {
    /// Per knob: grid in halves and radius in halves.
    pub knobs: Vec<(Vec<i64>, i64)>,
    pub a: Vec<i64>,
    pub c: Vec<i64>,
    pub b: i64,
    /// Threshold `(2t + 1) / 8`.
    pub t: i64,
    /// `y <= T` when set, `y >= T` otherwise.
    pub upper: bool,
    /// Witness / configuration knobs in halves, and witness input in halves.
    pub point: Vec<i64>,
    pub x: i64,
}

fn half(h: i64) -> Rational {
    Rational::new(h.into(), 2.into())
}

impl Small {
    pub fn knob(i: usize) -> String {
        format!("p{}", i + 1)
    }

    pub fn threshold(&self) -> Rational {
        Rational::new((2 * self.t + 1).into(), 8.into())
    }

    pub fn condition(&self) -> String {
        let op = if self.upper { "<=" } else { ">=" };
        format!("y {op} {}", decimal((2 * self.t + 1) * 125, 3))
    }

    pub fn model_expr(&self) -> String {
        let mut terms = vec![format!("{} * x", decimal(self.b, 0))];
        for i in 0..self.knobs.len() {
            let p = Self::knob(i);
            terms.push(format!("{} * {p}", decimal(self.a[i], 0)));
            terms.push(format!("{} * {p} * x", decimal(self.c[i], 0)));
        }
        terms.join(" + ")
    }

    fn assignment_json(&self, with_input: bool) -> String {
        let mut parts: Vec<String> = self
            .point
            .iter()
            .enumerate()
            .map(|(i, &h)| format!(r#""{}": {}"#, Self::knob(i), h as f64 / 2.0))
            .collect();
        if with_input {
            parts.push(format!(r#""x": {}"#, self.x as f64 / 2.0));
        }
        format!("{{{}}}", parts.join(", "))
    }

    pub fn instance(&self, cfg: ExploreConfig) -> Instance {
        let mut vars: Vec<String> = self
            .knobs
            .iter()
            .enumerate()
            .map(|(i, (grid, r))| {
                let g: Vec<String> = grid.iter().map(|&h| (h as f64 / 2.0).to_string()).collect();
                format!(
                    r#"{{"label": "{}", "interface": "knob", "type": "real", "range": [-2, 2], "grid": [{}], "rad-abs": {}}}"#,
                    Self::knob(i),
                    g.join(", "),
                    *r as f64 / 2.0
                )
            })
            .collect();
        vars.push(r#"{"label": "x", "interface": "input", "type": "real", "range": [-1, 1]}"#.into());
        vars.push(r#"{"label": "y", "interface": "output", "type": "real"}"#.into());
        let q = self.condition();
        let text = format!(
            r#"{{"version": "1.0", "variables": [{}], "beta": "{q}", "queries": {{"q": "{q}"}},
                "assertions": {{"a": "{q}"}}, "witnesses": {{"q": {}}}, "configurations": {{"a": {}}}}}"#,
            vars.join(", "),
            self.assignment_json(true),
            self.assignment_json(false),
        );
        let names: Vec<String> = (0..self.knobs.len()).map(Self::knob).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let model = expression_model(&["x"], &refs, &[("y", &self.model_expr())]);
        Instance::new(parse_spec(&text).expect("generated spec"), model, cfg).expect("generated instance")
    }

    /// `(A, B)` with `y = A + B x` at knob values `p`.
    fn affine(&self, p: &[Rational]) -> (Rational, Rational) {
        let mut a = Rational::from_integer(0.into());
        let mut b = Rational::from_integer(self.b.into());
        for (i, v) in p.iter().enumerate() {
            a += Rational::from_integer(self.a[i].into()) * v;
            b += Rational::from_integer(self.c[i].into()) * v;
        }
        (a, b)
    }

    pub fn y(&self, p: &[Rational], x: &Rational) -> Rational {
        let (a, b) = self.affine(p);
        a + b * x
    }

    pub fn holds(&self, y: &Rational) -> bool {
        if self.upper {
            *y <= self.threshold()
        } else {
            *y >= self.threshold()
        }
    }

    pub fn on_grid(&self, p: &[Rational]) -> bool {
        self.knobs.iter().zip(p).all(|((g, _), v)| g.iter().any(|&h| half(h) == *v))
    }

    /// Vertices of the stability box of `p`, clipped to the knob range.
    pub fn vertices(&self, p: &[Rational]) -> Vec<Vec<Rational>> {
        let two = Rational::from_integer(2.into());
        let mut out: Vec<Vec<Rational>> = vec![vec![]];
        for ((_, r), c) in self.knobs.iter().zip(p) {
            let r = half(*r);
            let lo = std::cmp::max(c - &r, -two.clone());
            let hi = std::cmp::min(c + &r, two.clone());
            out = out
                .into_iter()
                .flat_map(|v| {
                    [lo.clone(), hi.clone()].into_iter().map(move |e| {
                        let mut w = v.clone();
                        w.push(e);
                        w
                    })
                })
                .collect();
        }
        out
    }

    pub fn stable_at(&self, p: &[Rational], x: &Rational) -> bool {
        self.vertices(p).iter().all(|v| self.holds(&self.y(v, x)))
    }

    pub fn stable_for_all_inputs(&self, p: &[Rational]) -> bool {
        [-1, 1].iter().all(|&x| self.stable_at(p, &Rational::from_integer(x.into())))
    }

    /// Whether some input in [-1, 1] is a stable witness for `p`.
    pub fn some_stable_input(&self, p: &[Rational]) -> bool {
        let mut lo = Rational::from_integer((-1).into());
        let mut hi = Rational::from_integer(1.into());
        let t = self.threshold();
        for v in self.vertices(p) {
            let (a, b) = self.affine(&v);
            // upper: a + b x <= t; lower: a + b x >= t, i.e. (-b) x <= a - t
            let (b, rhs) = if self.upper { (b, &t - &a) } else { (-b, &a - &t) };
            if b == Rational::from_integer(0.into()) {
                if rhs < Rational::from_integer(0.into()) {
                    return false;
                }
            } else if b > Rational::from_integer(0.into()) {
                hi = std::cmp::min(hi, rhs / b);
            } else {
                lo = std::cmp::max(lo, rhs / b);
            }
        }
        lo <= hi
    }

    pub fn grid_points(&self) -> Vec<Vec<Rational>> {
        let mut out: Vec<Vec<Rational>> = vec![vec![]];
        for (g, _) in &self.knobs {
            out = out
                .into_iter()
                .flat_map(|v| {
                    g.iter().map(move |&h| {
                        let mut w = v.clone();
                        w.push(half(h));
                        w
                    })
                })
                .collect();
        }
        out
    }

    pub fn point(&self) -> Vec<Rational> {
        self.point.iter().map(|&h| half(h)).collect()
    }

    pub fn certify_status(&self) -> Status {
        let p = self.point();
        let x = half(self.x);
        if !self.on_grid(&p) {
            Status::Error
        } else if self.holds(&self.y(&p, &x)) && self.stable_at(&p, &x) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn verify_status(&self) -> Status {
        let p = self.point();
        if !self.on_grid(&p) {
            Status::Error
        } else if self.stable_for_all_inputs(&p) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn query_status(&self) -> Status {
        if self.grid_points().iter().any(|p| self.some_stable_input(p)) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn synth_status(&self) -> Status {
        if self.grid_points().iter().any(|p| self.stable_for_all_inputs(p)) {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

pub fn strategy() -> impl Strategy<Value = Small> {
    let knob = (prop::sample::subsequence((-4i64..=4).collect::<Vec<_>>(), 1..=4), 0i64..=2, any::<bool>(), 0usize..9);
    (prop::collection::vec((knob, -2i64..=2, -2i64..=2), 1..=2), -2i64..=2, -24i64..=24, any::<bool>(), -2i64..=2)
        .prop_map(|(ks, b, t, upper, x)| {
            let mut s = Small { knobs: vec![], a: vec![], c: vec![], b, t, upper, point: vec![], x };
            for ((grid, r, on_grid, pick), a, c) in ks {
                let p = if on_grid { grid[pick % grid.len()] } else { pick as i64 - 4 };
                s.knobs.push((grid, r));
                s.a.push(a);
                s.c.push(c);
                s.point.push(p);
            }
            s
        })
}
