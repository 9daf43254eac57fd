use std::path::Path;

use indexmap::IndexMap;
use serde_json::{json, Map, Value as Json};

use super::{ModelBody, ModelDef, ModelError, Polynomial, TreeGroup, TreeNode};
use crate::expr::parse_expr;
use crate::num::{format_rational, parse_decimal, Rational};

fn num(r: &Rational) -> Json {
    Json::String(format_rational(r))
}

fn node_json(n: &TreeNode) -> Json {
    match n {
        TreeNode::Leaf(v) => json!({ "leaf": v.iter().map(num).collect::<Vec<_>>() }),
        TreeNode::Split { feature, threshold, left, right } => json!({
            "feature": feature,
            "threshold": num(threshold),
            "left": node_json(left),
            "right": node_json(right),
        }),
    }
}

pub fn model_to_json(m: &ModelDef) -> Json {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(m.kind()));
    obj.insert("inputs".into(), json!(m.inputs));
    obj.insert("knobs".into(), json!(m.knobs));
    obj.insert("outputs".into(), json!(m.outputs));
    match &m.body {
        ModelBody::Expression(map) => {
            let exprs: Map<String, Json> = map.iter().map(|(k, e)| (k.clone(), json!(e.to_string()))).collect();
            obj.insert("expressions".into(), Json::Object(exprs));
        }
        ModelBody::Polynomial(map) => {
            let polys: Map<String, Json> = map
                .iter()
                .map(|(k, p)| {
                    let terms: Vec<Json> =
                        p.terms.iter().map(|(e, c)| json!({ "exponents": e, "coef": num(c) })).collect();
                    (k.clone(), json!({ "features": p.features, "terms": terms }))
                })
                .collect();
            obj.insert("polynomials".into(), Json::Object(polys));
        }
        ModelBody::Tree(groups) => {
            let trees: Vec<Json> =
                groups.iter().map(|g| json!({ "outputs": g.outputs, "root": node_json(&g.root) })).collect();
            obj.insert("trees".into(), Json::Array(trees));
        }
    }
    Json::Object(obj)
}

fn schema(msg: impl Into<String>) -> ModelError {
    ModelError::Schema(msg.into())
}

fn strings(v: Option<&Json>, what: &str) -> Result<Vec<String>, ModelError> {
    v.and_then(Json::as_array)
        .ok_or_else(|| schema(format!("`{what}` must be a list")))?
        .iter()
        .map(|s| s.as_str().map(str::to_string).ok_or_else(|| schema(format!("`{what}` must hold strings"))))
        .collect()
}

fn rational(v: &Json) -> Result<Rational, ModelError> {
    let parsed = match v {
        Json::String(s) => parse_decimal(s),
        Json::Number(n) => crate::num::from_json_number(n),
        _ => None,
    };
    parsed.ok_or_else(|| schema(format!("bad number {v}")))
}

fn node_from(v: &Json) -> Result<TreeNode, ModelError> {
    if let Some(leaf) = v.get("leaf") {
        let vals = leaf.as_array().ok_or_else(|| schema("`leaf` must be a list"))?;
        return Ok(TreeNode::Leaf(vals.iter().map(rational).collect::<Result<_, _>>()?));
    }
    let feature = v.get("feature").and_then(Json::as_str).ok_or_else(|| schema("split without `feature`"))?;
    let threshold = rational(v.get("threshold").ok_or_else(|| schema("split without `threshold`"))?)?;
    let child = |k: &str| v.get(k).ok_or_else(|| schema(format!("split without `{k}`"))).and_then(node_from);
    Ok(TreeNode::Split {
        feature: feature.to_string(),
        threshold,
        left: Box::new(child("left")?),
        right: Box::new(child("right")?),
    })
}

pub fn model_from_json(v: &Json) -> Result<ModelDef, ModelError> {
    let kind = v.get("kind").and_then(Json::as_str).ok_or_else(|| schema("missing `kind`"))?;
    let inputs = strings(v.get("inputs"), "inputs")?;
    let knobs = strings(v.get("knobs"), "knobs")?;
    let outputs = strings(v.get("outputs"), "outputs")?;
    let body = match kind {
        "expression" => {
            let map = v.get("expressions").and_then(Json::as_object).ok_or_else(|| schema("missing `expressions`"))?;
            let mut out = IndexMap::new();
            for (k, e) in map {
                let text = e.as_str().ok_or_else(|| schema(format!("expression for `{k}` must be a string")))?;
                out.insert(k.clone(), parse_expr(text).map_err(|e| schema(format!("`{k}`: {e}")))?);
            }
            ModelBody::Expression(out)
        }
        "polynomial" => {
            let map = v.get("polynomials").and_then(Json::as_object).ok_or_else(|| schema("missing `polynomials`"))?;
            let mut out = IndexMap::new();
            for (k, p) in map {
                let features = strings(p.get("features"), "features")?;
                let terms = p
                    .get("terms")
                    .and_then(Json::as_array)
                    .ok_or_else(|| schema("missing `terms`"))?
                    .iter()
                    .map(|t| {
                        let exps = t
                            .get("exponents")
                            .and_then(Json::as_array)
                            .ok_or_else(|| schema("term without `exponents`"))?
                            .iter()
                            .map(|e| e.as_u64().map(|e| e as u32).ok_or_else(|| schema("bad exponent")))
                            .collect::<Result<Vec<_>, _>>()?;
                        if exps.len() != features.len() {
                            return Err(schema("exponent vector length differs from feature count"));
                        }
                        Ok((exps, rational(t.get("coef").ok_or_else(|| schema("term without `coef`"))?)?))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                out.insert(k.clone(), Polynomial::new(features, terms));
            }
            ModelBody::Polynomial(out)
        }
        "tree" => {
            let trees = v.get("trees").and_then(Json::as_array).ok_or_else(|| schema("missing `trees`"))?;
            let mut out = Vec::new();
            for t in trees {
                let outs = strings(t.get("outputs"), "outputs")?;
                let root = node_from(t.get("root").ok_or_else(|| schema("tree without `root`"))?)?;
                root.validate(outs.len())?;
                out.push(TreeGroup { outputs: outs, root });
            }
            ModelBody::Tree(out)
        }
        other => return Err(ModelError::UnknownKind(other.to_string())),
    };
    let m = ModelDef { inputs, knobs, outputs, body };
    check_references(&m)?;
    Ok(m)
}

fn check_references(m: &ModelDef) -> Result<(), ModelError> {
    let feature_ok = |f: &String| m.inputs.contains(f) || m.knobs.contains(f);
    let output_ok = |y: &String| m.outputs.contains(y);
    let bad = |what: &str, name: &str| schema(format!("{what} `{name}` is not declared"));
    match &m.body {
        ModelBody::Expression(map) => {
            for (y, e) in map {
                if !output_ok(y) {
                    return Err(bad("output", y));
                }
                if let Some(f) = e.variables().iter().find(|f| !feature_ok(f)) {
                    return Err(bad("feature", f));
                }
            }
        }
        ModelBody::Polynomial(map) => {
            for (y, p) in map {
                if !output_ok(y) {
                    return Err(bad("output", y));
                }
                if let Some(f) = p.features.iter().find(|f| !feature_ok(f)) {
                    return Err(bad("feature", f));
                }
            }
        }
        ModelBody::Tree(groups) => {
            fn feats<'a>(n: &'a TreeNode, out: &mut Vec<&'a String>) {
                if let TreeNode::Split { feature, left, right, .. } = n {
                    out.push(feature);
                    feats(left, out);
                    feats(right, out);
                }
            }
            for g in groups {
                if let Some(y) = g.outputs.iter().find(|y| !output_ok(y)) {
                    return Err(bad("output", y));
                }
                let mut fs = Vec::new();
                feats(&g.root, &mut fs);
                if let Some(f) = fs.into_iter().find(|f| !feature_ok(f)) {
                    return Err(bad("feature", f));
                }
            }
        }
    }
    Ok(())
}

pub fn save_model(m: &ModelDef, path: &Path) -> Result<(), ModelError> {
    let text = serde_json::to_string_pretty(&model_to_json(m))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelDef, ModelError> {
    let text = std::fs::read_to_string(path)?;
    model_from_json(&serde_json::from_str(&text)?)
}
