use std::fmt::Write as _;

use serde_json::{Map, Value};

use super::{Format, RunConfig, EXIT_ASSERTION_FAILED, EXIT_PASS};

pub const SCHEMA_VERSION: &str = "1.0";

const FLOAT_DECIMALS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub scenario: String,
    pub config: RunConfig,
    /// Scenario-specific sections, keyed by name.
    pub fields: Map<String, Value>,
    pub assertions: Vec<Assertion>,
    pub exit_code: u8,
}

impl ReportDocument {
    pub fn new(scenario: &str, config: &RunConfig) -> Self {
        Self {
            scenario: scenario.to_string(),
            config: config.clone(),
            fields: Map::new(),
            assertions: Vec::new(),
            exit_code: EXIT_PASS,
        }
    }

    pub fn insert(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.get(key)
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn failed_assertions(&self) -> Vec<&str> {
        self.assertions
            .iter()
            .filter(|a| !a.passed)
            .map(|a| a.name.as_str())
            .collect()
    }

    /// Sets the exit code from the assertions: 0 if all pass, 2 otherwise.
    pub fn settle(&mut self) {
        self.exit_code = if self.assertions.iter().all(|a| a.passed) {
            EXIT_PASS
        } else {
            EXIT_ASSERTION_FAILED
        };
    }

    pub fn to_value(&self) -> Value {
        let mut root = self.fields.clone();
        root.insert("schema_version".into(), SCHEMA_VERSION.into());
        root.insert("scenario".into(), self.scenario.clone().into());
        let mut config = Map::new();
        // exact echo; fixed-point would round small tolerances to zero
        config.insert(
            "tolerance".into(),
            format!("{:e}", self.config.tolerance).into(),
        );
        config.insert("format".into(), self.config.format.as_str().into());
        config.insert("seed".into(), self.config.seed.into());
        config.insert("steps".into(), self.config.steps.into());
        root.insert("config".into(), Value::Object(config));
        let assertions = self
            .assertions
            .iter()
            .map(|a| {
                let mut m = Map::new();
                m.insert("name".into(), a.name.clone().into());
                m.insert("passed".into(), a.passed.into());
                m.insert("detail".into(), a.detail.clone().into());
                Value::Object(m)
            })
            .collect();
        root.insert("assertions".into(), Value::Array(assertions));
        root.insert("exit_code".into(), self.exit_code.into());
        Value::Object(root)
    }
}

/// Fixed-point with 12 decimals; negative zero prints as zero.
pub fn format_float(x: f64) -> String {
    let s = format!("{:.*}", FLOAT_DECIMALS, x);
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    const STEP: usize = 2;
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().expect("f64")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_inline) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_json(out, item, indent);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                out.push_str(if k == 0 { "\n" } else { ",\n" });
                out.push_str(&" ".repeat(indent + STEP));
                write_json(out, item, indent + STEP);
            }
            out.push('\n');
            out.push_str(&" ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            // serde_json's default map is ordered by key
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(if k == 0 { "\n" } else { ",\n" });
                out.push_str(&" ".repeat(indent + STEP));
                out.push_str(&serde_json::to_string(key).expect("string"));
                out.push_str(": ");
                write_json(out, item, indent + STEP);
            }
            out.push('\n');
            out.push_str(&" ".repeat(indent));
            out.push('}');
        }
    }
}

fn is_inline(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
        || matches!(v, Value::Array(inner) if inner.len() <= 2 && inner.iter().all(|x| x.is_number()))
}

fn text_summary(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", doc.scenario);
    let _ = writeln!(
        out,
        "config: tolerance={} seed={} steps={}",
        doc.config.tolerance, doc.config.seed, doc.config.steps
    );
    let str_at = |path: &[&str]| -> Option<String> {
        let mut v = doc.fields.get(path[0])?;
        for key in &path[1..] {
            v = v.get(key)?;
        }
        Some(match v {
            Value::String(s) => s.clone(),
            Value::Number(n) if n.is_f64() => format_float(n.as_f64().expect("f64")),
            other => other.to_string(),
        })
    };
    if let Some(status) = str_at(&["verdict", "status"]) {
        let _ = writeln!(out, "verdict: {status}");
    }
    if let Some(reason) = str_at(&["verdict", "certificate", "reason"]) {
        let _ = writeln!(
            out,
            "certificate: {} at pair {} magnitude {}",
            reason,
            str_at(&["verdict", "certificate", "pair"]).unwrap_or_default(),
            str_at(&["verdict", "certificate", "magnitude"]).unwrap_or_default()
        );
    }
    if let Some(intact) = str_at(&["catalyst_intact", "overall"]) {
        let _ = writeln!(out, "catalyst intact: {intact}");
    }
    if let Some(c) = str_at(&["coherence_preserving"]) {
        let _ = writeln!(out, "coherence preserving: {c}");
    }
    if let Some(label) = str_at(&["classification", "label"]) {
        match str_at(&["classification", "reason"]).filter(|r| r != "null") {
            Some(reason) => {
                let _ = writeln!(out, "classification: {label} ({reason})");
            }
            None => {
                let _ = writeln!(out, "classification: {label}");
            }
        }
    }
    if let Some(Value::Array(ws)) = doc.fields.get("witnesses") {
        for w in ws {
            let get = |k: &str| {
                w.get(k).map(|v| match v {
                    Value::Number(n) => format_float(n.as_f64().unwrap_or(f64::NAN)),
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
            };
            let _ = writeln!(
                out,
                "witness {}: concurrence {} -> {}",
                get("source").unwrap_or_default(),
                get("concurrence_in").unwrap_or_default(),
                get("concurrence_out").unwrap_or_default()
            );
        }
    }
    if let Some(Value::Array(points)) = doc.fields.get("sweep") {
        let _ = writeln!(out, "sweep: {} points", points.len());
    }
    if let Some(Value::Object(ledger)) = doc.fields.get("ledger") {
        let n = |k: &str| ledger.get(k).map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "ledger: {} ebit, {} cbit A->B, {} cbit B->A",
            n("ebits_consumed"),
            n("cbits_a_to_b"),
            n("cbits_b_to_a")
        );
    }
    for a in &doc.assertions {
        let _ = writeln!(
            out,
            "[{}] {}: {}",
            if a.passed { "pass" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
    let _ = writeln!(out, "exit code: {}", doc.exit_code);
    out
}

/// Renders `doc`. JSON output depends only on the document contents.
pub fn emit_report(doc: &ReportDocument, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = String::new();
            write_json(&mut out, &doc.to_value(), 0);
            out.push('\n');
            out.into_bytes()
        }
        Format::Text => text_summary(doc).into_bytes(),
    }
}
