//! Run manifests: every invocation that writes files also writes a
//! `<prefix>.manifest.json` recording the resolved parameters, tolerances,
//! output paths, and summary metrics. Re-running the same command on the
//! same build reproduces the outputs byte for byte.

use serde_json::{json, Value};
use std::fs;
use std::path::Path;

pub const SCHEMA: &str = "slcone/1";

pub struct RunManifest {
    pub subcommand: String,
    pub args: Value,
    pub tolerances: Value,
    pub outputs: Vec<String>,
    pub metrics: Value,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            args: json!({}),
            tolerances: json!({}),
            outputs: Vec::new(),
            metrics: json!({}),
        }
    }

    pub fn to_value(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "args": self.args,
            "tolerances": self.tolerances,
            "outputs": self.outputs,
            "metrics": self.metrics,
        })
    }

    pub fn write(&self, prefix: &Path) -> anyhow::Result<String> {
        let path = prefix.with_extension("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&self.to_value())?)?;
        Ok(path.display().to_string())
    }
}
