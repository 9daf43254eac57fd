//! Invariant suites, each a named proptest run with a fixed seed.

use gearbox::doe::{full_factorial, latin_hypercube, sukharev_grid, uniform_random, FactorGrid};
use gearbox::explore::{
    certify, optimize, query, synthesize, verify, ExploreConfig, Flag, ModeBody, ModeReport, ProgressRow, Status,
};
use gearbox::expr::{eval_expr, parse_expr, Assignment, Value};
use gearbox::model::{
    encode_model, eval_model, fit_polynomial, fit_tree, objective_bounds, Dataset, ModelBody, ModelDef, Polynomial,
    TreeGroup, TreeNode,
};
use gearbox::num::{to_f64, Rational};
use gearbox::refine::{augment, refine_model, sample_stability_region, FitParams};
use gearbox::solver::{check_sat, SatResult, SolverConfig, VarBox};
use gearbox::spec::{derive_domain_constraints, parse_spec, primed, theta_constraint};
use indexmap::IndexMap;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};

use super::gen::{self, rationals, Pred, VARS};
use super::instances::{expression_model, maxmin_strategy, MaxMin};
use super::small;

pub const CASES: u32 = 1000;

pub type Property = (&'static str, fn() -> Result<(), String>);

pub const ALL: &[Property] = &[
    ("expr: print/parse round trip", print_parse_round_trip),
    ("expr: differential evaluation", differential_evaluation),
    ("spec: theta reflexivity", theta_reflexive),
    ("spec: domain constraints imply ranges", domain_constraints_imply_ranges),
    ("model: encode/eval coherence", encode_eval_coherence),
    ("model: polynomial fit recovers generator", polynomial_fit_exact),
    ("model: tree depth and leaf means", tree_depth_and_leaf_means),
    ("model: objective bounds enclose rows", objective_bounds_enclose),
    ("solver: delta-sat witnesses", delta_sat_witnesses),
    ("solver: unsat agrees with grid oracle", unsat_grid_oracle),
    ("solver: determinism", solver_determinism),
    ("solver: conjunctions terminate", conjunctions_terminate),
    ("explore: modes match enumeration oracle", modes_match_oracle),
    ("explore: optimization soundness and progress", optimization_soundness),
    ("doe: full factorial rows", factorial_rows),
    ("doe: latin hypercube columns distinct", latin_columns_distinct),
    ("doe: designs stay in bounds", designs_in_bounds),
    ("refine: augmentation keeps rows", augmentation_keeps_rows),
    ("refine: model equal to system is a fixed point", refine_fixed_point),
];

pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, max_shrink_iters: 256, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(config.rng_algorithm));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn assignment(vals: &[Rational]) -> Assignment {
    VARS.iter().zip(vals).map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn print_parse_round_trip() -> Result<(), String> {
    run(CASES, gen::pred(3, true), |p| {
        let e = parse_expr(&p.text()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let printed = e.to_string();
        let again = parse_expr(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
        prop_assert_eq!(&again, &e);
        prop_assert_eq!(again.to_string(), printed);
        Ok(())
    })
}

pub fn differential_evaluation() -> Result<(), String> {
    run(CASES, (gen::pred(3, true), gen::values(3)), |(p, v)| {
        let vals = rationals(&v);
        let e = parse_expr(&p.text()).unwrap();
        match (eval_expr(&e, &assignment(&vals)), p.exact(&vals)) {
            (Ok(Value::Bool(a)), Some(b)) => prop_assert_eq!(a, b),
            (Err(_), None) => {}
            (got, want) => prop_assert!(false, "{} gave {:?}, oracle {:?}", p.text(), got, want),
        }
        Ok(())
    })
}

fn knob_decls() -> impl Strategy<Value = Vec<(i64, i64, u8, i64, i64)>> {
    // (lo, width, radius kind, radius tenths, center offset in tenths of width)
    prop::collection::vec((-10i64..=10, 1i64..=10, 0u8..3, 0i64..=20, 0i64..=10), 1..=3)
}

fn knob_spec(decls: &[(i64, i64, u8, i64, i64)]) -> (String, Assignment) {
    let mut vars = Vec::new();
    let mut center = Assignment::new();
    for (i, &(lo, w, kind, r, off)) in decls.iter().enumerate() {
        let rad = match kind {
            0 => String::new(),
            1 => format!(r#", "rad-abs": {}"#, r as f64 / 10.0),
            _ => format!(r#", "rad-rel": {}"#, r as f64 / 10.0),
        };
        let label = format!("k{i}");
        vars.push(format!(
            r#"{{"label": "{label}", "interface": "knob", "type": "real", "range": [{lo}, {}]{rad}}}"#,
            lo + w
        ));
        center.insert(label, Rational::from_integer(lo.into()) + Rational::new((w * off).into(), 10.into()));
    }
    (format!(r#"{{"version": "1", "variables": [{}]}}"#, vars.join(", ")), center)
}

pub fn theta_reflexive() -> Result<(), String> {
    run(CASES, knob_decls(), |decls| {
        let (text, center) = knob_spec(&decls);
        let spec = parse_spec(&text).unwrap();
        let theta = theta_constraint(&spec, &center);
        let mut a = center.clone();
        for (k, v) in &center {
            a.insert(primed(k), v.clone());
        }
        prop_assert_eq!(eval_expr(&theta, &a).unwrap(), Value::Bool(true), "{}", theta);
        Ok(())
    })
}

pub fn domain_constraints_imply_ranges() -> Result<(), String> {
    let ranges = prop::collection::vec((-3i64..=1, 1i64..=4), 3);
    run(CASES, (ranges, gen::pred(3, false), gen::values(3)), |(ranges, alpha, v)| {
        let vars: Vec<String> = VARS
            .iter()
            .zip(&ranges)
            .enumerate()
            .map(|(i, (name, (lo, w)))| {
                let iface = if i == 0 { "input" } else { "knob" };
                format!(r#"{{"label": "{name}", "interface": "{iface}", "type": "real", "range": [{lo}, {}]}}"#, lo + w)
            })
            .collect();
        let text = format!(r#"{{"version": "1", "variables": [{}], "alpha": "{}"}}"#, vars.join(", "), alpha.text());
        let spec = parse_spec(&text).unwrap();
        let (full, _) = derive_domain_constraints(&spec);
        let vals: Vec<Rational> = rationals(&v).into_iter().map(|r| r / Rational::from_integer(5.into())).collect();
        if let Ok(Value::Bool(true)) = eval_expr(&full, &assignment(&vals)) {
            prop_assert_eq!(alpha.exact(&vals), Some(true));
            for (val, (lo, w)) in vals.iter().zip(&ranges) {
                prop_assert!(*val >= Rational::from_integer((*lo).into()));
                prop_assert!(*val <= Rational::from_integer((lo + w).into()));
            }
        }
        Ok(())
    })
}

fn tree_node(outputs: usize) -> BoxedStrategy<TreeNode> {
    let leaf = prop::collection::vec((-20i64..=20).prop_map(|v| Rational::new(v.into(), 4.into())), outputs)
        .prop_map(TreeNode::Leaf);
    leaf.prop_recursive(3, 15, 2, |inner| {
        (prop::sample::select(vec!["x", "p"]), -8i64..=8, inner.clone(), inner).prop_map(|(f, t, l, r)| {
            TreeNode::Split {
                feature: f.to_string(),
                threshold: Rational::new(t.into(), 4.into()),
                left: Box::new(l),
                right: Box::new(r),
            }
        })
    })
    .boxed()
}

fn model_strategy() -> BoxedStrategy<ModelDef> {
    let features = || (vec!["x".to_string()], vec!["p".to_string()]);
    let tree = tree_node(2).prop_map(move |root| {
        let (inputs, knobs) = features();
        let outputs = vec!["y1".to_string(), "y2".to_string()];
        ModelDef { inputs, knobs, outputs: outputs.clone(), body: ModelBody::Tree(vec![TreeGroup { outputs, root }]) }
    });
    let expr = gen::num(2, false).prop_map(|n| {
        let mut s = String::new();
        n.render(&mut s);
        // rename the generator's variables to model features
        let s = s.replace('y', "p");
        expression_model(&["x"], &["p"], &[("y1", &s)])
    });
    let poly = prop::collection::vec(((0u32..=2, 0u32..=2), -5i64..=5), 1..6).prop_map(move |terms| {
        let (inputs, knobs) = features();
        let terms = terms.into_iter().map(|((a, b), c)| (vec![a, b], Rational::from_integer(c.into()))).collect();
        let poly = Polynomial::new(vec!["x".into(), "p".into()], terms);
        ModelDef {
            inputs,
            knobs,
            outputs: vec!["y1".into()],
            body: ModelBody::Polynomial([("y1".to_string(), poly)].into_iter().collect()),
        }
    });
    prop_oneof![tree, expr, poly].boxed()
}

pub fn encode_eval_coherence() -> Result<(), String> {
    run(CASES, (model_strategy(), gen::values(2)), |(m, v)| {
        let vals = rationals(&v);
        let point: Assignment = [("x".to_string(), vals[0].clone()), ("p".to_string(), vals[1].clone())].into();
        let y = eval_model(&m, &point).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let enc = encode_model(&m);
        let mut full = point.clone();
        full.extend(y.clone());
        prop_assert_eq!(eval_expr(&enc, &full).unwrap(), Value::Bool(true));
        let mut off = full.clone();
        *off.get_mut("y1").unwrap() += Rational::from_integer(1.into());
        prop_assert_eq!(eval_expr(&enc, &off).unwrap(), Value::Bool(false));
        Ok(())
    })
}

fn dataset(columns: &[&str], rows: Vec<Vec<Rational>>) -> Dataset {
    Dataset::new(columns.iter().map(|c| c.to_string()).collect(), rows).unwrap()
}

fn distinct_halves(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Rational>> {
    prop::sample::subsequence((-6i64..=6).collect::<Vec<_>>(), n)
        .prop_map(|v| v.into_iter().map(|h| Rational::new(h.into(), 2.into())).collect())
}

fn generator_poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(((0u32..=2, 0u32..=2), -5i64..=5), 1..6).prop_map(|terms| {
        let terms = terms
            .into_iter()
            .filter(|((a, b), _)| a + b <= 2)
            .map(|((a, b), c)| (vec![a, b], Rational::from_integer(c.into())))
            .collect();
        Polynomial::new(vec!["x".into(), "p".into()], terms)
    })
}

fn poly_data(gen: &Polynomial, xs: &[Rational], ps: &[Rational]) -> Dataset {
    let mut rows = Vec::new();
    for x in xs {
        for p in ps {
            let a: Assignment = [("x".to_string(), x.clone()), ("p".to_string(), p.clone())].into();
            rows.push(vec![x.clone(), p.clone(), gen.eval(&a).unwrap()]);
        }
    }
    dataset(&["x", "p", "y"], rows)
}

pub fn polynomial_fit_exact() -> Result<(), String> {
    run(
        CASES,
        (generator_poly(), distinct_halves(3..=5), distinct_halves(3..=5), gen::values(2)),
        |(g, xs, ps, probe)| {
            let d = poly_data(&g, &xs, &ps);
            let (m, rss) = fit_polynomial(&d, &["x".into()], &["p".into()], &["y".into()], 2).unwrap();
            prop_assert!(rss.iter().all(|r| *r == Rational::from_integer(0.into())));
            let probe = rationals(&probe);
            let a: Assignment = [("x".to_string(), probe[0].clone()), ("p".to_string(), probe[1].clone())].into();
            prop_assert_eq!(&eval_model(&m, &a).unwrap()["y"], &g.eval(&a).unwrap());
            Ok(())
        },
    )
}

pub fn tree_depth_and_leaf_means() -> Result<(), String> {
    let row = (-8i64..=8, -8i64..=8, -20i64..=20, -20i64..=20);
    run(CASES, (prop::collection::vec(row, 1..30), 0usize..5, any::<bool>()), |(rows, depth, shared)| {
        let rows: Vec<Vec<Rational>> = rows
            .into_iter()
            .map(|(x, p, a, b)| [x, p, a, b].iter().map(|&v| Rational::new(v.into(), 2.into())).collect())
            .collect();
        let d = dataset(&["x", "p", "y1", "y2"], rows);
        let outputs = ["y1".to_string(), "y2".to_string()];
        let m = fit_tree(&d, &["x".into()], &["p".into()], &outputs, depth, shared).unwrap();
        let ModelBody::Tree(groups) = &m.body else { panic!("tree model expected") };
        for g in groups {
            prop_assert!(g.root.depth() <= depth);
            let mut sums: IndexMap<usize, (Vec<Rational>, usize, Vec<Rational>)> = IndexMap::new();
            for i in 0..d.len() {
                let a = d.row_assignment(i);
                let leaf = g.root.route(&a).unwrap();
                let e = sums
                    .entry(leaf.as_ptr() as usize)
                    .or_insert_with(|| (vec![Rational::from_integer(0.into()); g.outputs.len()], 0, leaf.to_vec()));
                for (k, y) in g.outputs.iter().enumerate() {
                    e.0[k] += &a[y];
                }
                e.1 += 1;
            }
            for (sum, n, leaf) in sums.values() {
                for (s, l) in sum.iter().zip(leaf) {
                    prop_assert_eq!(&(s / Rational::from_integer((*n as i64).into())), l);
                }
            }
        }
        Ok(())
    })
}

pub fn objective_bounds_enclose() -> Result<(), String> {
    let rows = prop::collection::vec(gen::values(3), 1..20);
    run(CASES, (rows, gen::num(3, false)), |(rows, n)| {
        let rows: Vec<Vec<Rational>> = rows.iter().map(|r| rationals(r)).collect();
        let d = dataset(&VARS, rows.clone());
        let mut text = String::new();
        n.render(&mut text);
        let objectives: IndexMap<String, _> = [("o".to_string(), parse_expr(&text).unwrap())].into_iter().collect();
        let (lo, hi) = objective_bounds(&d, &objectives).unwrap()["o"].clone();
        let values: Vec<Rational> = rows.iter().map(|r| n.exact(r).unwrap()).collect();
        prop_assert!(values.iter().all(|v| lo <= *v && *v <= hi));
        prop_assert!(values.contains(&lo) && values.contains(&hi));
        Ok(())
    })
}

pub const KERNEL_DELTA: f64 = 0.1;

pub fn unit_box(n: usize) -> VarBox {
    let mut b = VarBox::new();
    for v in &VARS[..n] {
        b.push(v, -1.0, 1.0, false);
    }
    b
}

pub fn solve(p: &Pred, n: usize, delta: f64) -> SatResult {
    let b = unit_box(n);
    let f = b.formula(&parse_expr(&p.text()).unwrap()).unwrap();
    check_sat(&f, &b, &SolverConfig { delta, max_splits: 1_000_000 })
}

/// A satisfying point of the δ-strengthened formula on the grid of pitch δ/2.
pub fn strengthened_grid_point(p: &Pred, n: usize, delta: f64) -> Option<Vec<f64>> {
    let steps = (2.0 / (delta / 2.0)).round() as usize;
    let total = (steps + 1).pow(n as u32);
    (0..total).find_map(|mut i| {
        let pt: Vec<f64> = (0..n)
            .map(|_| {
                let k = i % (steps + 1);
                i /= steps + 1;
                -1.0 + 2.0 * k as f64 / steps as f64
            })
            .collect();
        p.slack(&pt, -delta).then_some(pt)
    })
}

/// Float evaluation of the witness may be off by rounding.
pub const WITNESS_TOL: f64 = 1e-9;

pub fn delta_sat_witnesses() -> Result<(), String> {
    run(CASES, (1usize..=3).prop_flat_map(|n| (Just(n), gen::solver_formula(n))), |(n, p)| {
        if let SatResult::DeltaSat(s) = solve(&p, n, KERNEL_DELTA) {
            prop_assert!(p.slack(&s.point, KERNEL_DELTA + WITNESS_TOL), "{} at {:?}", p.text(), s.point);
        }
        Ok(())
    })
}

pub fn unsat_grid_oracle() -> Result<(), String> {
    run(CASES, (1usize..=3).prop_flat_map(|n| (Just(n), gen::solver_formula(n))), |(n, p)| {
        if let SatResult::Unsat = solve(&p, n, KERNEL_DELTA) {
            let hit = strengthened_grid_point(&p, n, KERNEL_DELTA);
            prop_assert!(hit.is_none(), "{} unsat but holds at {:?}", p.text(), hit);
        }
        Ok(())
    })
}

pub fn solver_determinism() -> Result<(), String> {
    run(CASES, (1usize..=3).prop_flat_map(|n| (Just(n), gen::solver_formula(n))), |(n, p)| {
        prop_assert_eq!(solve(&p, n, 1e-3), solve(&p, n, 1e-3));
        Ok(())
    })
}

pub fn conjunctions_terminate() -> Result<(), String> {
    run(CASES, gen::conjunction(2), |p| {
        if let SatResult::Unknown(why) = solve(&p, 2, 1e-3) {
            prop_assert!(!why.contains("budget"), "{}: {}", p.text(), why);
        }
        Ok(())
    })
}

fn check_algebra(r: &ModeReport) -> Result<(), TestCaseError> {
    let g = r.globals;
    let any_false = g.interface == Flag::False || g.model == Flag::False;
    let globals_true = g.interface == Flag::True && g.model == Flag::True;
    match &r.body {
        ModeBody::Certify(items) => {
            for i in items.values() {
                let flags = (i.consistent, i.feasible, i.stable);
                match i.status {
                    Status::Error => prop_assert!(any_false || i.consistent == Flag::False),
                    Status::Pass => {
                        prop_assert!(globals_true && flags == (Flag::True, Flag::True, Flag::True))
                    }
                    Status::Fail => prop_assert!(globals_true && i.consistent == Flag::True && i.stable == Flag::False),
                    Status::Unknown => {}
                }
            }
        }
        ModeBody::Query(items) => {
            for i in items.values() {
                match i.status {
                    Status::Error => prop_assert!(any_false),
                    Status::Pass => prop_assert!(globals_true && i.feasible == Flag::True && i.stable == Flag::True),
                    Status::Fail => prop_assert!(globals_true && i.stable == Flag::False),
                    Status::Unknown => {}
                }
            }
        }
        ModeBody::Verify(items) => {
            for i in items.values() {
                match i.status {
                    Status::Error => prop_assert!(any_false || i.consistent == Flag::False),
                    Status::Pass | Status::Fail => {
                        prop_assert!(globals_true && i.consistent == Flag::True)
                    }
                    Status::Unknown => {}
                }
            }
        }
        ModeBody::Synthesize(s) => match s.status {
            Status::Error => prop_assert!(any_false),
            Status::Pass => {
                prop_assert!(globals_true && s.feasible == Flag::True && s.stable == Flag::True)
            }
            Status::Fail => prop_assert!(globals_true && s.stable == Flag::False),
            Status::Unknown => {}
        },
        ModeBody::Optimize(_) => {}
    }
    Ok(())
}

fn knob_values(s: &small::Small, m: &IndexMap<String, f64>) -> Vec<Rational> {
    (0..s.knobs.len()).map(|i| gearbox::num::from_f64(m[&small::Small::knob(i)]).unwrap()).collect()
}

pub fn modes_match_oracle() -> Result<(), String> {
    run(CASES, small::strategy(), |s| {
        let inst = s.instance(ExploreConfig::default());
        let delta = inst.cfg.delta;
        let tol = Rational::new(1.into(), 1_000_000.into());

        let r = certify(&inst).unwrap();
        check_algebra(&r)?;
        let ModeBody::Certify(items) = &r.body else { unreachable!() };
        prop_assert_eq!(items["q"].status, s.certify_status(), "certify {:?}", s);
        if items["q"].status == Status::Pass {
            // the witness lies in its own stability region
            prop_assert!(s.holds(&s.y(&s.point(), &Rational::new(s.x.into(), 2.into()))));
        }

        let r = verify(&inst).unwrap();
        check_algebra(&r)?;
        let ModeBody::Verify(items) = &r.body else { unreachable!() };
        let item = &items["a"];
        prop_assert_eq!(item.status, s.verify_status(), "verify {:?}", s);
        if let Some(ce) = &item.counter_example {
            let y = s.y(&knob_values(&s, ce), &gearbox::num::from_f64(ce["x"]).unwrap());
            prop_assert!((to_f64(&y) - ce["y"]).abs() <= 1e-6);
            let t = to_f64(&s.threshold());
            let violated = if s.upper { ce["y"] > t - delta } else { ce["y"] < t + delta };
            prop_assert!(violated, "counterexample {:?} does not violate {}", ce, s.condition());
        }

        let r = query(&inst).unwrap();
        check_algebra(&r)?;
        let ModeBody::Query(items) = &r.body else { unreachable!() };
        prop_assert_eq!(items["q"].status, s.query_status(), "query {:?}", s);
        if let Some(res) = &items["q"].result {
            let p = knob_values(&s, res);
            prop_assert!(s.on_grid(&p) && s.some_stable_input(&p), "query result {:?}", res);
            let y = gearbox::num::from_f64(res["y"]).unwrap();
            let t = s.threshold();
            let within = if s.upper { y <= &t + &tol } else { y >= &t - &tol };
            prop_assert!(within, "query output {} against {}", y, s.condition());
            let x = gearbox::num::from_f64(res["x"]).unwrap();
            for v in s.vertices(&p) {
                let y = s.y(&v, &x);
                let within = if s.upper { y <= &t + &tol } else { y >= &t - &tol };
                prop_assert!(within, "witness x = {} fails at knobs {:?}", x, v);
            }
        }

        let r = synthesize(&inst).unwrap();
        check_algebra(&r)?;
        let ModeBody::Synthesize(syn) = &r.body else { unreachable!() };
        prop_assert_eq!(syn.status, s.synth_status(), "synthesize {:?}", s);
        if let Some(res) = &syn.result {
            let p = knob_values(&s, res);
            prop_assert!(s.on_grid(&p) && s.stable_for_all_inputs(&p), "synthesis result {:?}", res);
        }
        Ok(())
    })
}

pub fn maxmin_config() -> ExploreConfig {
    ExploreConfig { epsilon: 1e-2, delta_rel: 1e-4, ..ExploreConfig::default() }
}

pub fn optimization_soundness() -> Result<(), String> {
    run(CASES, maxmin_strategy(1), |mm| {
        let cfg = maxmin_config();
        let inst = mm.instance("", cfg.clone());
        let mut rows: Vec<ProgressRow> = Vec::new();
        let mut sink = |r: &ProgressRow| rows.push(r.clone());
        let r = optimize(&inst, &MaxMin::unit_bounds(), &mut sink).unwrap();
        let ModeBody::Optimize(o) = &r.body else { unreachable!() };
        prop_assert_eq!(o.feasible, Flag::True);
        let (lo, up) = (o.lo_scaled.unwrap(), o.up_scaled.unwrap());
        prop_assert!(lo <= up && up - lo <= cfg.epsilon + 1e-12, "lo {} up {}", lo, up);
        for w in rows.windows(2) {
            let (a, b) = (&w[0].thresholds["obj"], &w[1].thresholds["obj"]);
            prop_assert!(b.lo_scaled >= a.lo_scaled && b.up_scaled <= a.up_scaled);
        }
        // the reported configuration keeps the objective above the threshold
        let config: Vec<String> = o.knobs.iter().map(|(k, v)| format!(r#""{k}": {}"#, v.unwrap())).collect();
        let threshold = lo - 2.0 * cfg.delta_rel;
        let extra = format!(
            r#", "assertions": {{"a": "y >= {threshold:e}"}}, "configurations": {{"a": {{{}}}}}"#,
            config.join(", ")
        );
        let check = mm.instance(&extra, cfg);
        let ModeBody::Verify(items) = verify(&check).unwrap().body else { unreachable!() };
        prop_assert_eq!(items["a"].status, Status::Pass, "config {:?} at {}", o.knobs, threshold);
        Ok(())
    })
}

fn factor_grid() -> impl Strategy<Value = FactorGrid> {
    prop::collection::vec(distinct_halves(1..=5), 1..=4).prop_map(|cols| {
        FactorGrid::new(cols.into_iter().enumerate().map(|(i, l)| (format!("f{i}"), l)).collect()).unwrap()
    })
}

pub fn factorial_rows() -> Result<(), String> {
    run(CASES, factor_grid(), |g| {
        let m = full_factorial(&g);
        let expected: usize = g.factors.iter().map(|(_, l)| l.len()).product();
        prop_assert_eq!(m.len(), expected);
        let mut rows = m.rows.clone();
        rows.sort();
        rows.dedup();
        prop_assert_eq!(rows.len(), expected);
        Ok(())
    })
}

pub fn latin_columns_distinct() -> Result<(), String> {
    run(CASES, (factor_grid(), any::<u64>(), 1usize..=5), |(g, seed, n)| {
        let levels = g.factors.iter().map(|(_, l)| l.len()).min().unwrap();
        let n = n.min(levels);
        let m = latin_hypercube(&g, n, seed).unwrap();
        prop_assert_eq!(m.len(), n);
        for (name, _) in &g.factors {
            let mut col = m.column(name).unwrap();
            col.sort();
            col.dedup();
            prop_assert_eq!(col.len(), n);
        }
        Ok(())
    })
}

pub fn designs_in_bounds() -> Result<(), String> {
    run(CASES, (factor_grid(), any::<u64>(), 0usize..40), |(g, seed, n)| {
        let levels = g.factors.iter().map(|(_, l)| l.len()).min().unwrap();
        let designs = [
            full_factorial(&g),
            latin_hypercube(&g, n.min(levels), seed).unwrap(),
            sukharev_grid(&g, n),
            uniform_random(&g, n, seed),
        ];
        for d in &designs {
            for (j, (_, l)) in g.factors.iter().enumerate() {
                let (lo, hi) = (l.iter().min().unwrap(), l.iter().max().unwrap());
                prop_assert!(d.rows.iter().all(|r| lo <= &r[j] && &r[j] <= hi));
            }
        }
        Ok(())
    })
}

pub fn augmentation_keeps_rows() -> Result<(), String> {
    let rows = || prop::collection::vec(gen::values(2), 0..10);
    run(CASES, (rows(), rows(), 1u32..=30), |(old, new, w)| {
        let old = dataset(&["a", "b"], old.iter().map(|r| rationals(r)).collect());
        let new = dataset(&["b", "a"], new.iter().map(|r| rationals(r)).collect());
        let weight = w as f64 / 10.0;
        let out = augment(&old, &new, weight).unwrap();
        prop_assert_eq!(out.len(), old.len() + weight.ceil() as usize * new.len());
        prop_assert_eq!(&out.rows[..old.len()], &old.rows[..]);
        Ok(())
    })
}

pub fn refine_fixed_point() -> Result<(), String> {
    run(
        CASES,
        (generator_poly(), distinct_halves(3..=4), distinct_halves(3..=4), -4i64..=4, any::<u64>()),
        |(g, xs, ps, c, seed)| {
            let old = poly_data(&g, &xs, &ps);
            let (inputs, knobs, resp) = (["x".to_string()], ["p".to_string()], ["y".to_string()]);
            let (model, _) = fit_polynomial(&old, &inputs, &knobs, &resp, 2).unwrap();
            let spec = parse_spec(
                r#"{"version": "1", "variables": [
                {"label": "p", "interface": "knob", "type": "real", "range": [-3, 3], "rad-abs": 0.5},
                {"label": "x", "interface": "input", "type": "real", "range": [-3, 3]},
                {"label": "y", "interface": "output", "type": "real"}]}"#,
            )
            .unwrap();
            let center: Assignment = [("p".to_string(), Rational::new(c.into(), 2.into()))].into();
            let input_box =
                [("x".to_string(), (Rational::from_integer((-3).into()), Rational::from_integer(3.into())))]
                    .into_iter()
                    .collect();
            let new = sample_stability_region(&model, &spec, &center, &input_box, 6, seed).unwrap();
            let refined =
                refine_model(&old, &new, 1.5, &inputs, &knobs, &resp, &FitParams::Poly { degree: 2 }).unwrap();
            prop_assert_eq!(refined, model);
            Ok(())
        },
    )
}
