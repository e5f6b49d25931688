//! Report envelope shared by every verb.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::{RunConfig, Verb};
use crate::CliError;

pub const TOOL: &str = "entrolab";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub verb: Verb,
    /// Identifier of the experiment the run reproduces.
    pub experiment: String,
    pub config_hash: String,
    pub config: Value,
    pub tolerances: Value,
    pub result: Value,
    pub pass: bool,
}

/// SHA-256 of the verb and the canonical JSON of the config.
pub fn config_hash(verb: Verb, config: &RunConfig) -> String {
    let text = serde_json::to_string(&(verb, config)).expect("config serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(verb: Verb, config: &RunConfig, experiment: &str, result: impl Serialize, pass: bool) -> Result<Self, CliError> {
        Ok(Report {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            verb,
            experiment: experiment.into(),
            config_hash: config_hash(verb, config),
            config: value(config)?,
            tolerances: value(&config.tolerances)?,
            result: value(&result)?,
            pass,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Usage(format!("report encoding: {e}")))
}
