//! Mode results and their JSON report shapes.

use indexmap::IndexMap;
use serde_json::{json, Map, Value as Json};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    True,
    False,
    Unknown,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::True => "true",
            Flag::False => "false",
            Flag::Unknown => "unknown",
        }
    }
}

impl From<bool> for Flag {
    fn from(b: bool) -> Flag {
        if b {
            Flag::True
        } else {
            Flag::False
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
            Status::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Globals {
    pub interface: Flag,
    pub model: Flag,
}

impl Globals {
    pub fn consistent(&self) -> bool {
        self.interface == Flag::True && self.model == Flag::True
    }

    /// Item status forced by the global checks, if any.
    pub(crate) fn forced(&self) -> Option<Status> {
        if self.interface == Flag::False || self.model == Flag::False {
            Some(Status::Error)
        } else if !self.consistent() {
            Some(Status::Unknown)
        } else {
            None
        }
    }

    fn write(&self, m: &mut Map<String, Json>) {
        m.insert("smlp_execution".into(), json!("completed"));
        m.insert("interface_consistent".into(), json!(self.interface.as_str()));
        m.insert("model_consistent".into(), json!(self.model.as_str()));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyItem {
    pub consistent: Flag,
    pub feasible: Flag,
    pub stable: Flag,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryItem {
    pub feasible: Flag,
    pub stable: Flag,
    pub status: Status,
    /// Knob and output values of the stable witness.
    pub result: Option<IndexMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyItem {
    pub consistent: Flag,
    pub feasible: Flag,
    pub status: Status,
    /// Perturbed knobs (under the knob names), inputs and outputs.
    pub counter_example: Option<IndexMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthReport {
    pub feasible: Flag,
    pub stable: Flag,
    pub status: Status,
    pub result: Option<IndexMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveResult {
    pub value_in_config: Option<f64>,
    pub threshold_scaled: Option<f64>,
    pub threshold: Option<f64>,
    pub max_in_data: f64,
    pub min_in_data: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeReport {
    pub feasible: Flag,
    pub objectives: IndexMap<String, ObjectiveResult>,
    /// Output values at the configuration and, when a system is given, in the system.
    pub outputs: IndexMap<String, (Option<f64>, Option<f64>)>,
    pub knobs: IndexMap<String, Option<f64>>,
    /// Scaled value of the last objective at the configuration.
    pub last_scaled: Option<f64>,
    pub lo_scaled: Option<f64>,
    pub lo: Option<f64>,
    pub up_scaled: Option<f64>,
    pub up: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModeBody {
    Certify(IndexMap<String, CertifyItem>),
    Query(IndexMap<String, QueryItem>),
    Verify(IndexMap<String, VerifyItem>),
    Synthesize(SynthReport),
    Optimize(OptimizeReport),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeReport {
    pub globals: Globals,
    pub body: ModeBody,
}

fn num(v: Option<f64>) -> Json {
    v.and_then(serde_json::Number::from_f64).map_or(Json::Null, Json::Number)
}

fn values(m: &Option<IndexMap<String, f64>>) -> Json {
    match m {
        None => Json::Null,
        Some(m) => Json::Object(m.iter().map(|(k, v)| (k.clone(), num(Some(*v)))).collect()),
    }
}

impl ModeReport {
    /// Status of every item, in report order.
    pub fn statuses(&self) -> Vec<(String, Status)> {
        match &self.body {
            ModeBody::Certify(m) => m.iter().map(|(k, v)| (k.clone(), v.status)).collect(),
            ModeBody::Query(m) => m.iter().map(|(k, v)| (k.clone(), v.status)).collect(),
            ModeBody::Verify(m) => m.iter().map(|(k, v)| (k.clone(), v.status)).collect(),
            ModeBody::Synthesize(s) => vec![("synthesis".into(), s.status)],
            ModeBody::Optimize(_) => vec![],
        }
    }

    pub fn to_json(&self) -> Json {
        let mut m = Map::new();
        match &self.body {
            ModeBody::Certify(items) => {
                for (k, i) in items {
                    m.insert(
                        k.clone(),
                        json!({
                            "witness_consistent": i.consistent.as_str(),
                            "witness_feasible": i.feasible.as_str(),
                            "witness_stable": i.stable.as_str(),
                            "witness_status": i.status.as_str(),
                        }),
                    );
                }
                self.globals.write(&mut m);
            }
            ModeBody::Query(items) => {
                for (k, i) in items {
                    m.insert(
                        k.clone(),
                        json!({
                            "query_feasible": i.feasible.as_str(),
                            "query_stable": i.stable.as_str(),
                            "query_status": i.status.as_str(),
                            "query_result": values(&i.result),
                        }),
                    );
                }
                self.globals.write(&mut m);
            }
            ModeBody::Verify(items) => {
                for (k, i) in items {
                    m.insert(
                        k.clone(),
                        json!({
                            "configuration_consistent": i.consistent.as_str(),
                            "assertion_status": i.status.as_str(),
                            "counter_example": values(&i.counter_example),
                            "assertion_feasible": i.feasible.as_str(),
                        }),
                    );
                }
                self.globals.write(&mut m);
            }
            ModeBody::Synthesize(s) => {
                self.globals.write(&mut m);
                m.insert("configuration_feasible".into(), json!(s.feasible.as_str()));
                m.insert("configuration_stable".into(), json!(s.stable.as_str()));
                m.insert("synthesis_status".into(), json!(s.status.as_str()));
                m.insert("synthesis_result".into(), values(&s.result));
            }
            ModeBody::Optimize(o) => {
                for (k, r) in &o.objectives {
                    m.insert(
                        k.clone(),
                        json!({
                            "value_in_config": num(r.value_in_config),
                            "threshold_scaled": num(r.threshold_scaled),
                            "threshold": num(r.threshold),
                            "max_in_data": num(Some(r.max_in_data)),
                            "min_in_data": num(Some(r.min_in_data)),
                        }),
                    );
                }
                for (k, (cfg, sys)) in &o.outputs {
                    m.insert(k.clone(), json!({ "value_in_config": num(*cfg), "value_in_system": num(*sys) }));
                }
                for (k, v) in &o.knobs {
                    m.insert(k.clone(), json!({ "value_in_config": num(*v) }));
                }
                if let Some(last) = o.objectives.keys().last() {
                    m.insert(format!("{last}_scaled"), json!({ "value_in_config": num(o.last_scaled) }));
                }
                let fields = [
                    ("threshold_lo_scaled", o.lo_scaled),
                    ("threshold_lo", o.lo),
                    ("threshold_up_scaled", o.up_scaled),
                    ("threshold_up", o.up),
                    ("max_in_data", Some(1.0)),
                    ("min_in_data", Some(0.0)),
                ];
                for (k, v) in fields {
                    m.insert(k.into(), json!({ "value_in_config": num(v) }));
                }
                self.globals.write(&mut m);
                m.insert("synthesis_feasible".into(), json!(o.feasible.as_str()));
            }
        }
        Json::Object(m)
    }
}
