//! The JSON process-spec file format:
//!
//! ```json
//! { "version": 1, "dimA": 2, "dimB": 2,
//!   "pairs": [ { "in": [[re, im], ...], "out": [[re, im], ...] } ] }
//! ```
//!
//! Amplitudes are listed A-major (`index = a·dimB + b`).

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::numerics::{c64, ComplexScalar, DenseVector, MAX_DIM};
use crate::process::{ProcessError, ProcessSpec};
use crate::quantum::{PureState, QuantumError};

pub const SPEC_FILE_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFileError {
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error("field '{field}': {message}")]
    Field { field: String, message: String },
    #[error("pair {pair}: '{side}' state is not normalized (norm {norm})")]
    NotNormalized {
        pair: usize,
        side: &'static str,
        norm: f64,
    },
    #[error(transparent)]
    Process(#[from] ProcessError),
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> SpecFileError {
    SpecFileError::Field {
        field: field.into(),
        message: message.into(),
    }
}

fn positive_int(obj: &Map<String, Value>, key: &str) -> Result<usize, SpecFileError> {
    let v = obj.get(key).ok_or_else(|| field_error(key, "missing"))?;
    match v.as_u64() {
        Some(n) if n >= 1 => Ok(n as usize),
        _ => Err(field_error(
            key,
            format!("expected a positive integer, got {v}"),
        )),
    }
}

fn amplitudes(v: &Value, field: &str, dim: usize) -> Result<Vec<ComplexScalar>, SpecFileError> {
    let arr = v
        .as_array()
        .ok_or_else(|| field_error(field, "expected an array of [re, im] pairs"))?;
    if arr.len() != dim {
        return Err(field_error(
            field,
            format!("expected {dim} amplitudes (dimA·dimB), got {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(k, z)| {
            let at = format!("{field}[{k}]");
            let parts = z
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| field_error(&at, "expected [re, im]"))?;
            let re = parts[0]
                .as_f64()
                .ok_or_else(|| field_error(&at, "real part is not a number"))?;
            let im = parts[1]
                .as_f64()
                .ok_or_else(|| field_error(&at, "imaginary part is not a number"))?;
            Ok(c64(re, im))
        })
        .collect()
}

/// Parses a spec file. States must have norm within `tol` of 1.
pub fn parse_spec_file(text: &str, tol: f64) -> Result<ProcessSpec, SpecFileError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| SpecFileError::Syntax(e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| field_error("<root>", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "version" | "dimA" | "dimB" | "pairs") {
            return Err(field_error(key, "unknown field"));
        }
    }
    match obj.get("version") {
        None => return Err(field_error("version", "missing")),
        Some(v) if v.as_u64() == Some(SPEC_FILE_VERSION) => {}
        Some(v) => return Err(field_error("version", format!("unsupported version {v}"))),
    }
    let dim_a = positive_int(obj, "dimA")?;
    let dim_b = positive_int(obj, "dimB")?;
    let dim = dim_a
        .checked_mul(dim_b)
        .filter(|&d| d <= MAX_DIM)
        .ok_or_else(|| field_error("dimA", format!("dimA·dimB must not exceed {MAX_DIM}")))?;

    let pairs = obj
        .get("pairs")
        .ok_or_else(|| field_error("pairs", "missing"))?
        .as_array()
        .ok_or_else(|| field_error("pairs", "expected an array"))?;
    if pairs.is_empty() {
        return Err(field_error("pairs", "at least one pair is required"));
    }

    let mut states = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let at = format!("pairs[{i}]");
        let p = pair
            .as_object()
            .ok_or_else(|| field_error(&at, "expected an object"))?;
        for key in p.keys() {
            if key != "in" && key != "out" {
                return Err(field_error(format!("{at}.{key}"), "unknown field"));
            }
        }
        let side_state = |side: &'static str| -> Result<PureState, SpecFileError> {
            let field = format!("{at}.{side}");
            let v = p.get(side).ok_or_else(|| field_error(&field, "missing"))?;
            let amps = amplitudes(v, &field, dim)?;
            let vector = DenseVector::new(amps).map_err(|e| field_error(&field, e.to_string()))?;
            PureState::new(vec![dim_a, dim_b], vector, tol).map_err(|e| match e {
                QuantumError::NotNormalized { norm } => SpecFileError::NotNormalized {
                    pair: i,
                    side,
                    norm,
                },
                other => field_error(&field, other.to_string()),
            })
        };
        let input = side_state("in")?;
        let output = side_state("out")?;
        states.push((input, output));
    }
    Ok(ProcessSpec::new(dim_a, dim_b, states)?)
}

fn amplitude_array(state: &PureState) -> Value {
    Value::Array(
        state
            .amplitudes()
            .iter()
            .map(|z| json!([z.re, z.im]))
            .collect(),
    )
}

/// Serializes `spec` in the file format. Floats are written in shortest
/// round-trip form, so re-reading reproduces the amplitudes bit for bit.
pub fn write_spec_file(spec: &ProcessSpec) -> String {
    let pairs: Vec<Value> = spec
        .pairs()
        .iter()
        .map(|p| json!({ "in": amplitude_array(&p.input), "out": amplitude_array(&p.output) }))
        .collect();
    let doc = json!({
        "version": SPEC_FILE_VERSION,
        "dimA": spec.dim_a(),
        "dimB": spec.dim_b(),
        "pairs": pairs,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("plain JSON values");
    text.push('\n');
    text
}
