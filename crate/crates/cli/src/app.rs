//! Mode dispatch, output naming and report files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use indexmap::IndexMap;
use serde_json::{json, Value as Json};

use gearbox::doe::{generate, FactorGrid};
use gearbox::exec::Execution;
use gearbox::explore::{self, ExploreConfig, Instance, ModeReport, ProgressRow, ProgressSink};
use gearbox::model::{
    eval_model, fit_polynomial, fit_tree, load_model, objective_bounds, save_model, Dataset, ModelBody, ModelDef,
};
use gearbox::num::{format_rational, to_f64};
use gearbox::spec::{parse_spec_with, Interface, Overrides, ProblemSpec};

use crate::args::{list, named, switch, Args};

const EXPLORE_MODES: &[&str] = &["certify", "query", "verify", "synthesize", "optimize", "optsyn"];

/// Existing data file for `path`, trying the `.csv` and `.csv.gz` suffixes.
pub fn resolve_data(path: &Path) -> Result<PathBuf> {
    let mut candidates = vec![path.to_path_buf()];
    for ext in [".csv", ".csv.gz"] {
        let mut p = path.as_os_str().to_owned();
        p.push(ext);
        candidates.push(PathBuf::from(p));
    }
    candidates.into_iter().find(|p| p.is_file()).ok_or_else(|| anyhow!("data file `{}` not found", path.display()))
}

fn stem(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let mut s = name;
    for ext in [".gz", ".bz2", ".csv", ".json", ".spec"] {
        s = s.strip_suffix(ext).unwrap_or(s);
    }
    s.to_string()
}

fn dir_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// `-out_dir`, else the directory of the data, new data or DOE spec file.
pub fn resolve_output_dir(a: &Args) -> Result<PathBuf> {
    if let Some(d) = &a.out_dir {
        return Ok(d.clone());
    }
    [&a.data, &a.new_data, &a.doe_spec]
        .into_iter()
        .flatten()
        .next()
        .map(|p| dir_of(p))
        .ok_or_else(|| anyhow!("no output directory: give -out_dir, -data, -new_data or -doe_spec"))
}

/// Run name joined with the data, new data, saved model or DOE spec name.
pub fn file_prefix(a: &Args) -> String {
    let name = match (&a.data, &a.new_data, &a.model_name, &a.doe_spec) {
        (Some(d), ..) => stem(d),
        (None, Some(n), ..) => stem(n),
        (None, None, Some(m), _) => stem(Path::new(m)),
        (None, None, None, Some(s)) => stem(s),
        _ => String::new(),
    };
    match (a.pref.is_empty(), name.is_empty()) {
        (true, _) => name,
        (false, true) => a.pref.clone(),
        (false, false) => format!("{}_{name}", a.pref),
    }
}

struct Ctx {
    args: Args,
    out_dir: PathBuf,
    prefix: String,
}

impl Ctx {
    fn path(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}_{suffix}", self.prefix))
    }

    fn write(&self, suffix: &str, content: &str) -> Result<PathBuf> {
        let p = self.path(suffix);
        fs::write(&p, content).with_context(|| format!("writing `{}`", p.display()))?;
        log::info!("wrote {}", p.display());
        Ok(p)
    }

    fn data(&self) -> Result<Option<Dataset>> {
        match &self.args.data {
            None => Ok(None),
            Some(p) => {
                let p = resolve_data(p)?;
                Ok(Some(Dataset::load(&p).with_context(|| format!("reading `{}`", p.display()))?))
            }
        }
    }
}

pub fn run(args: Args) -> Result<()> {
    let mode = args.mode.clone();
    let mode = mode.as_str();
    if mode == "subgroups" {
        bail!("mode `subgroups` is not supported");
    }
    if !EXPLORE_MODES.contains(&mode) && !["train", "predict", "doe"].contains(&mode) {
        bail!("unknown mode `{mode}`");
    }
    if EXPLORE_MODES.contains(&mode) && args.spec.is_none() {
        bail!("-mode {mode} requires -spec");
    }
    if mode == "doe" && args.doe_spec.is_none() {
        bail!("-mode doe requires -doe_spec");
    }
    let out_dir = resolve_output_dir(&args)?;
    fs::create_dir_all(&out_dir).with_context(|| format!("creating `{}`", out_dir.display()))?;
    let prefix = file_prefix(&args);
    let ctx = Ctx { args, out_dir, prefix };
    match mode {
        "doe" => doe(&ctx),
        "train" | "predict" => train_predict(&ctx),
        _ => explore_mode(&ctx),
    }
}

fn doe(ctx: &Ctx) -> Result<()> {
    let path = resolve_data(ctx.args.doe_spec.as_ref().expect("checked"))?;
    let text = fs::read(&path).with_context(|| format!("reading `{}`", path.display()))?;
    let grid = FactorGrid::from_csv(&text[..])?;
    let m = generate(&grid, &ctx.args.doe_algo, ctx.args.doe_num_samples, ctx.args.seed.unwrap_or(0))?;
    ctx.write("doe.csv", &m.to_csv())?;
    Ok(())
}

/// Inputs and knobs among `features`, split by the problem specification when there is one.
fn split_features(features: &[String], spec: Option<&ProblemSpec>) -> (Vec<String>, Vec<String>) {
    match spec {
        None => (features.to_vec(), Vec::new()),
        Some(s) => {
            let knob = |f: &String| s.get(f).is_some_and(|v| v.interface == Interface::Knob);
            (
                features.iter().filter(|f| !knob(f)).cloned().collect(),
                features.iter().filter(|f| knob(f)).cloned().collect(),
            )
        }
    }
}

fn train(ctx: &Ctx, data: &Dataset, spec: Option<&ProblemSpec>) -> Result<ModelDef> {
    let a = &ctx.args;
    let resp = list(&a.resp)
        .or_else(|| spec.map(|s| s.labels(Interface::Output)))
        .ok_or_else(|| anyhow!("-resp is required to train a model"))?;
    let feat = list(&a.feat)
        .or_else(|| {
            spec.map(|s| {
                let mut f = s.labels(Interface::Input);
                f.extend(s.labels(Interface::Knob));
                f
            })
        })
        .unwrap_or_else(|| data.columns.iter().filter(|c| !resp.contains(c)).cloned().collect());
    let (inputs, knobs) = split_features(&feat, spec);
    let model = match a.model.as_str() {
        "dt" | "dt_sklearn" => {
            let depth = a.dt_sklearn_max_depth.unwrap_or(usize::MAX);
            let shared = !switch(&a.model_per_response, "model_per_response", true)?;
            fit_tree(data, &inputs, &knobs, &resp, depth, shared)?
        }
        "poly" | "poly_sklearn" => fit_polynomial(data, &inputs, &knobs, &resp, a.poly_sklearn_degree.unwrap_or(2))?.0,
        other => bail!("model `{other}` cannot be trained"),
    };
    if switch(&a.save_model, "save_model", false)? {
        let name = a.model_name.as_ref().ok_or_else(|| anyhow!("-save_model t requires -model_name"))?;
        let base = stem(Path::new(name));
        let file = if a.pref.is_empty() { format!("{base}.json") } else { format!("{}_{base}.json", a.pref) };
        let p = ctx.out_dir.join(file);
        save_model(&model, &p)?;
        log::info!("saved model to {}", p.display());
    }
    Ok(model)
}

fn saved_model(name: &str) -> Result<ModelDef> {
    let candidates = [name.to_string(), format!("{name}.json")];
    let p = candidates
        .iter()
        .map(PathBuf::from)
        .find(|p| p.is_file())
        .ok_or_else(|| anyhow!("saved model `{name}` not found"))?;
    Ok(load_model(&p)?)
}

fn system_model(spec: &ProblemSpec) -> Result<ModelDef> {
    if spec.system.is_empty() {
        bail!("-model system needs a `system` field in the problem specification");
    }
    Ok(ModelDef {
        inputs: spec.labels(Interface::Input),
        knobs: spec.labels(Interface::Knob),
        outputs: spec.system.keys().cloned().collect(),
        body: ModelBody::Expression(spec.system.clone()),
    })
}

fn obtain_model(ctx: &Ctx, data: Option<&Dataset>, spec: Option<&ProblemSpec>) -> Result<ModelDef> {
    let a = &ctx.args;
    if switch(&a.use_model, "use_model", false)? {
        let name = a.model_name.as_ref().ok_or_else(|| anyhow!("-use_model t requires -model_name"))?;
        return saved_model(name);
    }
    if a.model == "system" {
        return system_model(spec.ok_or_else(|| anyhow!("-model system requires -spec"))?);
    }
    train(ctx, data.ok_or_else(|| anyhow!("training a model requires -data"))?, spec)
}

/// Per-row predictions next to the features and any labeled responses,
/// plus mse and r2 per labeled response.
fn predictions(ctx: &Ctx, model: &ModelDef, d: &Dataset, kind: &str) -> Result<()> {
    let mut cols: Vec<String> = d.columns.clone();
    cols.extend(model.outputs.iter().map(|o| format!("{o}_pred")));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&cols)?;
    let mut preds: Vec<Vec<f64>> = vec![Vec::new(); model.outputs.len()];
    for i in 0..d.len() {
        let y = eval_model(model, &d.row_assignment(i))?;
        let mut rec: Vec<String> = d.rows[i].iter().map(format_rational).collect();
        for (k, o) in model.outputs.iter().enumerate() {
            rec.push(format!("{}", to_f64(&y[o])));
            preds[k].push(to_f64(&y[o]));
        }
        w.write_record(&rec)?;
    }
    ctx.write(&format!("{kind}_predictions_summary.csv"), &String::from_utf8(w.into_inner()?)?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["response", "msqe", "r2_score"])?;
    let mut any = false;
    for (k, o) in model.outputs.iter().enumerate() {
        let Ok(actual) = d.column(o) else { continue };
        let actual: Vec<f64> = actual.iter().map(to_f64).collect();
        let (mse, r2) = precision(&actual, &preds[k]);
        w.write_record([o.clone(), mse.to_string(), r2.to_string()])?;
        any = true;
    }
    if any {
        ctx.write(&format!("{kind}_prediction_precisions.csv"), &String::from_utf8(w.into_inner()?)?)?;
    }
    Ok(())
}

pub fn precision(actual: &[f64], predicted: &[f64]) -> (f64, f64) {
    let n = actual.len().max(1) as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let ss_res: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    let ss_tot: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    (ss_res / n, r2)
}

fn load_spec(ctx: &Ctx) -> Result<Option<ProblemSpec>> {
    let Some(p) = &ctx.args.spec else {
        return Ok(None);
    };
    let a = &ctx.args;
    let overrides = Overrides {
        alpha: a.alpha.clone(),
        beta: a.beta.clone(),
        eta: a.eta.clone(),
        assertions: named(&a.asrt_names, &a.asrt_exprs, "asrt")?,
        queries: named(&a.quer_names, &a.quer_exprs, "quer")?,
        objectives: named(&a.objv_names, &a.objv_exprs, "objv")?,
    };
    let text = fs::read_to_string(p).with_context(|| format!("reading `{}`", p.display()))?;
    let spec = parse_spec_with(&text, &overrides).with_context(|| format!("spec `{}`", p.display()))?;
    for w in &spec.warnings {
        log::warn!("{w}");
    }
    Ok(Some(spec))
}

fn new_data_predictions(ctx: &Ctx, model: &ModelDef) -> Result<()> {
    if let Some(p) = &ctx.args.new_data {
        let p = resolve_data(p)?;
        let d = Dataset::load(&p).with_context(|| format!("reading `{}`", p.display()))?;
        predictions(ctx, model, &d, "new")?;
    }
    Ok(())
}

fn train_predict(ctx: &Ctx) -> Result<()> {
    let spec = load_spec(ctx)?;
    let data = ctx.data()?;
    if ctx.args.mode == "predict" && ctx.args.new_data.is_none() {
        bail!("-mode predict requires -new_data");
    }
    let model = obtain_model(ctx, data.as_ref(), spec.as_ref())?;
    if let Some(d) = &data {
        predictions(ctx, &model, d, "training")?;
    }
    new_data_predictions(ctx, &model)
}

fn config(a: &Args) -> Result<ExploreConfig> {
    let mut cfg = ExploreConfig::default();
    if let Some(e) = a.epsilon {
        if !(e > 0.0) {
            bail!("-epsilon must be positive");
        }
        cfg.epsilon = e;
    }
    if let Some(d) = a.delta_rel {
        if !(d > 0.0) {
            bail!("-delta_rel must be positive");
        }
        cfg.delta_rel = d;
    }
    cfg.pareto = switch(&a.pareto, "pareto", false)?;
    cfg.exec = Execution::default();
    Ok(cfg)
}

/// Streams progress rows to CSV and JSON as they arrive.
struct ProgressFiles {
    csv: PathBuf,
    json: PathBuf,
    rows: Vec<Json>,
    error: Option<std::io::Error>,
}

impl ProgressFiles {
    fn record(&mut self, row: &ProgressRow) -> std::io::Result<()> {
        let mut header = vec!["iteration".to_string()];
        let mut values = vec![row.iteration.to_string()];
        let mut obj = serde_json::Map::new();
        obj.insert("iteration".into(), json!(row.iteration));
        for (name, t) in &row.thresholds {
            for (field, v) in [("lo_scaled", t.lo_scaled), ("up_scaled", t.up_scaled), ("lo", t.lo), ("up", t.up)] {
                header.push(format!("{name}_{field}"));
                values.push(v.to_string());
                obj.insert(format!("{name}_{field}"), json!(v));
            }
        }
        for (name, v) in row.knobs.iter().chain(&row.outputs) {
            header.push(name.clone());
            values.push(v.to_string());
            obj.insert(name.clone(), json!(v));
        }
        let first = self.rows.is_empty();
        let mut f = fs::OpenOptions::new().create(true).append(!first).write(true).truncate(first).open(&self.csv)?;
        if first {
            writeln!(f, "{}", header.join(","))?;
        }
        writeln!(f, "{}", values.join(","))?;
        self.rows.push(Json::Object(obj));
        fs::write(&self.json, serde_json::to_string_pretty(&self.rows)? + "\n")
    }
}

impl ProgressSink for ProgressFiles {
    fn emit(&mut self, row: &ProgressRow) {
        if self.error.is_none() {
            if let Err(e) = self.record(row) {
                self.error = Some(e);
            }
        }
    }
}

fn explore_mode(ctx: &Ctx) -> Result<()> {
    let mode = ctx.args.mode.as_str();
    let spec = load_spec(ctx)?.expect("checked");
    let data = ctx.data()?;
    let model = obtain_model(ctx, data.as_ref(), Some(&spec))?;
    if let Some(d) = &data {
        if model.features().all(|f| d.columns.contains(f)) {
            predictions(ctx, &model, d, "training")?;
        }
    }
    new_data_predictions(ctx, &model)?;
    let objectives = spec.objectives.clone();
    let inst = Instance::new(spec, model, config(&ctx.args)?)?;
    let report = match mode {
        "certify" => explore::certify(&inst)?,
        "query" => explore::query(&inst)?,
        "verify" => explore::verify(&inst)?,
        "synthesize" => explore::synthesize(&inst)?,
        _ => {
            let d = data.as_ref().ok_or_else(|| anyhow!("-mode {mode} needs -data for objective bounds"))?;
            let bounds = objective_bounds(d, &objectives)?;
            let mut sink = ProgressFiles {
                csv: ctx.path("optimization_progress.csv"),
                json: ctx.path("optimization_progress.json"),
                rows: Vec::new(),
                error: None,
            };
            let r = if mode == "optimize" {
                explore::optimize(&inst, &bounds, &mut sink)?
            } else {
                explore::optsyn(&inst, &bounds, &mut sink)?
            };
            if let Some(e) = sink.error {
                return Err(e).context("writing optimization progress");
            }
            write_optimization_csv(ctx, &r)?;
            return write_report(ctx, "optimization", &r);
        }
    };
    write_report(ctx, mode, &report)
}

fn write_report(ctx: &Ctx, name: &str, r: &ModeReport) -> Result<()> {
    let text = serde_json::to_string_pretty(&r.to_json())? + "\n";
    ctx.write(&format!("{name}_results.json"), &text)?;
    for (item, status) in r.statuses() {
        println!("{item}: {}", status.as_str());
    }
    Ok(())
}

/// One-row CSV with a column per `<entry>_<field>` of the results.
fn write_optimization_csv(ctx: &Ctx, r: &ModeReport) -> Result<()> {
    let mut cols: IndexMap<String, String> = IndexMap::new();
    if let Json::Object(m) = r.to_json() {
        for (k, v) in m {
            match v {
                Json::Object(fields) => {
                    for (f, x) in fields {
                        cols.insert(format!("{k}_{f}"), scalar(&x));
                    }
                }
                other => {
                    cols.insert(k, scalar(&other));
                }
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(cols.keys())?;
    w.write_record(cols.values())?;
    ctx.write("optimization_results.csv", &String::from_utf8(w.into_inner()?)?)?;
    Ok(())
}

fn scalar(v: &Json) -> String {
    match v {
        Json::String(s) => s.clone(),
        Json::Null => String::new(),
        other => other.to_string(),
    }
}
