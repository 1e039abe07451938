//! JSON formats for superoperators, circuits and decomposition results.
//!
//! Matrices are row-major lists of `[re, im]` pairs. Both a flat list of
//! `n²` pairs and a nested list of rows are accepted on input; output is
//! always flat.

use std::path::Path;

use nalgebra::DMatrix;
use nepec::{Circuit, Gate, GateSpec, Superoperator, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{CliError, Result};

fn pair(v: &Value) -> Option<C64> {
    let a = v.as_array()?;
    match a.as_slice() {
        [re, im] => Some(C64::new(re.as_f64()?, im.as_f64()?)),
        _ => None,
    }
}

pub fn matrix_from_json(v: &Value) -> Result<DMatrix<C64>> {
    let items = v.as_array().ok_or_else(|| CliError::Config("matrix must be a list".into()))?;
    let entries: Vec<C64> = if items.first().and_then(pair).is_some() {
        items
            .iter()
            .map(|e| pair(e).ok_or_else(|| CliError::Config("matrix entries must be [re, im]".into())))
            .collect::<Result<_>>()?
    } else {
        let mut flat = Vec::new();
        let width = items.first().and_then(Value::as_array).map_or(0, Vec::len);
        for row in items {
            let row = row.as_array().ok_or_else(|| CliError::Config("matrix rows must be lists".into()))?;
            if row.len() != width {
                return Err(CliError::Config("ragged matrix rows".into()));
            }
            for e in row {
                flat.push(pair(e).ok_or_else(|| CliError::Config("matrix entries must be [re, im]".into()))?);
            }
        }
        flat
    };
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != entries.len() {
        return Err(CliError::Config(format!("{} matrix entries do not form a square matrix", entries.len())));
    }
    Ok(DMatrix::from_row_slice(n, n, &entries))
}

pub fn matrix_to_json(m: &DMatrix<C64>) -> Value {
    let mut flat = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            flat.push(serde_json::json!([z.re, z.im]));
        }
    }
    Value::Array(flat)
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// A labeled superoperator: `{"label": str, "matrix": [...]}` or a bare
/// matrix.
pub fn superop_from_json(v: &Value) -> Result<(String, Superoperator)> {
    let (label, matrix) = match v {
        Value::Object(map) => (
            map.get("label").and_then(Value::as_str).unwrap_or("op").to_string(),
            map.get("matrix").ok_or_else(|| CliError::Config("superoperator needs a \"matrix\"".into()))?,
        ),
        other => ("op".to_string(), other),
    };
    Ok((label, Superoperator::from_matrix(matrix_from_json(matrix)?)?))
}

/// One superoperator, or a list of them, from a file.
pub fn read_superops(path: &Path) -> Result<Vec<(String, Superoperator)>> {
    let v = read_json(path)?;
    match &v {
        Value::Array(items) if items.first().is_some_and(Value::is_object) => {
            items.iter().map(superop_from_json).collect()
        }
        _ => Ok(vec![superop_from_json(&v)?]),
    }
}

pub fn superop_to_json(label: &str, s: &Superoperator) -> Value {
    serde_json::json!({ "label": label, "matrix": matrix_to_json(s.matrix()) })
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    label: String,
    matrix: Value,
    targets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    qubits: usize,
    gates: Vec<GateJson>,
}

pub fn circuit_from_json(v: &Value) -> Result<Circuit> {
    let parsed: CircuitJson =
        serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("circuit: {e}")))?;
    let gates = parsed
        .gates
        .into_iter()
        .map(|g| Ok(GateSpec::new(Gate::new(g.label, matrix_from_json(&g.matrix)?)?, g.targets)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Circuit::new(parsed.qubits, gates)?)
}

pub fn circuit_to_json(c: &Circuit) -> Value {
    let doc = CircuitJson {
        qubits: c.num_qubits(),
        gates: c
            .gates()
            .iter()
            .map(|g| GateJson {
                label: g.label().to_string(),
                matrix: matrix_to_json(g.unitary()),
                targets: g.targets.clone(),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("circuit serializes")
}
