//! Machine-readable summary printed by every CLI command.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            status: Status::Ok,
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn artifact(&mut self, path: &str) -> &mut Self {
        self.artifacts.push(path.to_string());
        self
    }

    pub fn detail(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(name.to_string(), v);
        self
    }

    /// Marks the run failed unless `ok`.
    pub fn require(&mut self, ok: bool) -> &mut Self {
        if !ok {
            self.status = Status::Fail;
        }
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_ok() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
