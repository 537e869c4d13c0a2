use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// One JSON report per command run. Wall time is only included on request so
/// that reports are byte-stable for a fixed seed and input.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub input_digest: Option<String>,
    pub seed: u64,
    pub parameters: BTreeMap<&'static str, Value>,
    pub summary: BTreeMap<&'static str, Value>,
    pub points: Vec<Value>,
    pub residuals: BTreeMap<&'static str, f64>,
    pub verdicts: BTreeMap<&'static str, bool>,
    pub all_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(command: &'static str, input_digest: Option<String>, seed: u64) -> Self {
        Self {
            command,
            input_digest,
            seed,
            parameters: BTreeMap::new(),
            summary: BTreeMap::new(),
            points: Vec::new(),
            residuals: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            all_pass: true,
            wall_time_s: None,
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl Serialize) -> &mut Self {
        self.parameters
            .insert(key, serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn summarize(&mut self, key: &'static str, value: impl Serialize) -> &mut Self {
        self.summary
            .insert(key, serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn residual(&mut self, key: &'static str, value: f64) -> &mut Self {
        self.residuals.insert(key, value);
        self
    }

    pub fn verdict(&mut self, key: &'static str, pass: bool) -> &mut Self {
        self.verdicts.insert(key, pass);
        self.all_pass &= pass;
        self
    }
}
