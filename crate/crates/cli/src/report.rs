//! Report assembly and emission.
//!
//! Reports echo the resolved configuration, so a run can be reproduced from
//! its own output. States are serialized as canonically sorted
//! (configuration, re, im) triples. JSON carries everything; CSV is limited
//! to scalar rows (nested arrays such as full states are skipped, numeric
//! arrays are joined with semicolons).

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use qbanyan_core::{FusedState, PhotonicState, Polarization};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub duration_ms: f64,
    pub config: Value,
    pub result: Value,
}

impl Report {
    pub fn new(config: Value, result: Value, duration_ms: f64) -> Self {
        Report {
            tool: "qbanyan",
            version: env!("CARGO_PKG_VERSION"),
            duration_ms,
            config,
            result,
        }
    }
}

/// Canonically sorted amplitude triples of a state.
pub fn state_triples(state: &PhotonicState) -> Vec<(String, f64, f64)> {
    state
        .terms()
        .map(|(cfg, amp)| (cfg.to_string(), amp.re, amp.im))
        .collect()
}

/// Fused coefficients as labelled triples in (bin, polarization) order.
pub fn fused_triples(fused: &FusedState) -> Vec<(String, f64, f64)> {
    let mut out = Vec::with_capacity(4);
    for bin in [0u32, 1] {
        for pol in [Polarization::H, Polarization::V] {
            let c = fused.coeff(bin, pol);
            out.push((format!("bin{bin}:{pol}"), c.re, c.im));
        }
    }
    out
}

pub fn to_json_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report payloads serialize")
}

fn render_json(report: &Report) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Flattens scalar leaves into metric rows. Numeric arrays join with
/// semicolons; arrays holding objects or nested arrays are skipped.
fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, rows);
            }
        }
        Value::Array(items) => {
            if items
                .iter()
                .all(|v| matches!(v, Value::Number(_) | Value::Bool(_) | Value::String(_)))
            {
                let joined = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(";");
                rows.push((prefix.to_string(), joined));
            }
        }
        Value::Null => {}
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn render_csv(report: &Report) -> Result<String, CliError> {
    let mut rows: Vec<(String, String)> = vec![
        ("tool".into(), report.tool.into()),
        ("version".into(), report.version.into()),
        ("duration_ms".into(), report.duration_ms.to_string()),
    ];
    flatten("config", &report.config, &mut rows);
    flatten("result", &report.result, &mut rows);

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["metric", "value"])
        .map_err(|e| CliError::Domain(format!("csv: {e}")))?;
    for (k, v) in rows {
        writer
            .write_record([k, v])
            .map_err(|e| CliError::Domain(format!("csv: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Domain(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Domain(format!("csv: {e}")))
}

pub fn emit(report: &Report, json: bool, output: Option<&Path>) -> Result<(), CliError> {
    let text = if json {
        render_json(report)
    } else {
        render_csv(report)?
    };
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Domain(format!("cannot write {path:?}: {e}"))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .map_err(|e| CliError::Domain(format!("stdout: {e}")))
        }
    }
}
