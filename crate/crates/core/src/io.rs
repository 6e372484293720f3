//! JSON and CSV documents for kernels, product systems and trajectories.
//!
//! Kernel JSON: `{"states": ["a","b"], "rows": [[0.75,0.25],[0.75,0.25]]}`.
//! Kernel CSV: a header of state labels followed by `n` rows of `n`
//! probabilities.
//!
//! System JSON:
//! `{"states": [...], "env": {"weights": [...], "functions": [[...], ...]},
//!   "x_map": [[...]], "y_map": [[...]]}`; `env.labels` is optional.
//!
//! Readers also accept a report document and pull the artifact out of its
//! `outputs.kernel` / `outputs.system` field, so anything the CLI emits can
//! be fed back in.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dilation::{EnvironmentSpace, ProductDynamicalSystem};
use crate::error::{Error, Result};
use crate::markov::{MarkovKernel, StateSpace};
use crate::sde::FlowResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDocument {
    pub states: Vec<Value>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub states: Vec<Value>,
    pub env: EnvDocument,
    pub x_map: Vec<Vec<usize>>,
    pub y_map: Vec<Vec<usize>>,
}

fn labels_from(values: &[Value]) -> Result<StateSpace> {
    let labels = values
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => Err(Error::Parse(format!(
                "state {i} must be a string, got {other}"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    StateSpace::new(labels)
}

fn labels_to(space: &StateSpace) -> Vec<Value> {
    space.labels().iter().cloned().map(Value::String).collect()
}

/// Unwraps `outputs.<field>` when `doc` is a report.
fn artifact(doc: Value, field: &str) -> Value {
    match doc {
        Value::Object(mut m) if m.contains_key("outputs") => match m.remove("outputs") {
            Some(Value::Object(mut out)) if out.contains_key(field) => {
                out.remove(field).unwrap_or(Value::Null)
            }
            Some(other) => {
                m.insert("outputs".into(), other);
                Value::Object(m)
            }
            None => Value::Object(m),
        },
        other => other,
    }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn kernel_to_document(k: &MarkovKernel) -> KernelDocument {
    KernelDocument {
        states: labels_to(k.space()),
        rows: k.rows(),
    }
}

pub fn kernel_from_document(doc: KernelDocument) -> Result<MarkovKernel> {
    MarkovKernel::new(labels_from(&doc.states)?, doc.rows)
}

pub fn kernel_from_json(text: &str) -> Result<MarkovKernel> {
    let value = artifact(parse_json(text)?, "kernel");
    let doc: KernelDocument =
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("kernel: {e}")))?;
    kernel_from_document(doc)
}

pub fn kernel_from_csv(text: &str) -> Result<MarkovKernel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let space = StateSpace::new(header)?;
    let mut rows = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("csv row {row}: {e}")))?;
        let values = rec
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "csv row {row}, entry {col}: {field:?} is not a number"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    MarkovKernel::new(space, rows)
}

pub fn kernel_to_csv(k: &MarkovKernel) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(k.space().labels()).expect("in-memory write");
    for r in k.rows() {
        w.write_record(r.iter().map(f64::to_string))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Reads a kernel, choosing CSV for `.csv` files and JSON otherwise.
pub fn read_kernel(path: &Path) -> Result<MarkovKernel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        kernel_from_csv(&text)
    } else {
        kernel_from_json(&text)
    }
}

pub fn system_to_document(sys: &ProductDynamicalSystem) -> SystemDocument {
    SystemDocument {
        states: labels_to(sys.states()),
        env: EnvDocument {
            labels: Some(sys.env().labels().to_vec()),
            weights: sys.env().weights().to_vec(),
            functions: sys.env().functions().map(<[_]>::to_vec),
        },
        x_map: sys.x_table(),
        y_map: sys.y_table(),
    }
}

pub fn system_from_document(doc: SystemDocument) -> Result<ProductDynamicalSystem> {
    let states = labels_from(&doc.states)?;
    let labels = doc
        .env
        .labels
        .unwrap_or_else(|| (1..=doc.env.weights.len()).map(|i| i.to_string()).collect());
    if let Some(fs) = &doc.env.functions {
        for (row, f) in fs.iter().enumerate() {
            if f.len() != states.size() {
                return Err(Error::RaggedRow {
                    row,
                    expected: states.size(),
                    got: f.len(),
                });
            }
            if let Some((col, &value)) = f.iter().enumerate().find(|(_, &v)| v >= states.size()) {
                return Err(Error::MapOutOfRange {
                    row,
                    col,
                    value,
                    bound: states.size(),
                });
            }
        }
    }
    let env = EnvironmentSpace::new(labels, doc.env.weights, doc.env.functions)?;
    ProductDynamicalSystem::new(states, env, doc.x_map, doc.y_map)
}

pub fn system_from_json(text: &str) -> Result<ProductDynamicalSystem> {
    let value = artifact(parse_json(text)?, "system");
    let doc: SystemDocument =
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("system: {e}")))?;
    system_from_document(doc)
}

pub fn read_system(path: &Path) -> Result<ProductDynamicalSystem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    system_from_json(&text)
}

/// `t,x0,x1,…` rows for plotting.
pub fn flow_to_csv(flow: &FlowResult) -> String {
    let n = flow.states.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    w.write_record(&header).expect("in-memory write");
    for (t, s) in flow.times.iter().zip(&flow.states) {
        let mut rec = vec![t.to_string()];
        rec.extend(s.iter().map(f64::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{dilate, DEFAULT_ENV_CAP};
    use serde_json::json;

    #[test]
    fn kernel_json_round_trip() {
        let text = r#"{"states": ["a","b"], "rows": [[0.75,0.25],[0.75,0.25]]}"#;
        let k = kernel_from_json(text).unwrap();
        assert_eq!(k.space().labels(), &["a", "b"]);
        let back = serde_json::to_string(&kernel_to_document(&k)).unwrap();
        assert_eq!(kernel_from_json(&back).unwrap(), k);
        let report = json!({"command": "x", "outputs": {"kernel": kernel_to_document(&k)}});
        assert_eq!(kernel_from_json(&report.to_string()).unwrap(), k);
    }

    #[test]
    fn kernel_json_errors_name_the_entry() {
        let err = kernel_from_json(r#"{"states": ["a","b"], "rows": [[0.5,0.5],[0.5,0.7]]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::RowSum { row: 1, .. }));
        let err = kernel_from_json(r#"{"states": ["a","b"], "rows": [[0.5,0.5],[0.5,"x"]]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(kernel_from_json("{").is_err());
        let k = kernel_from_json(r#"{"states": [1, 2], "rows": [[1,0],[0,1]]}"#).unwrap();
        assert_eq!(k.space().labels(), &["1", "2"]);
    }

    #[test]
    fn kernel_csv_round_trip() {
        let text = "a,b\n0.75,0.25\n0.75,0.25\n";
        let k = kernel_from_csv(text).unwrap();
        assert_eq!(k.get(0, 0), 0.75);
        assert_eq!(kernel_from_csv(&kernel_to_csv(&k)).unwrap(), k);
        let err = kernel_from_csv("a,b\n0.5,0.5\n0.5,zz\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse("csv row 1, entry 1: \"zz\" is not a number".into())
        );
    }

    #[test]
    fn system_round_trip() {
        let k =
            kernel_from_json(r#"{"states": ["1","2"], "rows": [[0.75,0.25],[0.5,0.5]]}"#).unwrap();
        let sys = dilate(&k, DEFAULT_ENV_CAP).unwrap();
        let text = serde_json::to_string(&system_to_document(&sys)).unwrap();
        assert_eq!(system_from_json(&text).unwrap(), sys);
    }

    #[test]
    fn rotation_system_document() {
        let text = r#"{"states": ["1","2"], "env": {"weights": [0.25, 0.75]},
                       "x_map": [[1,0],[1,0]], "y_map": [[0,0],[1,1]]}"#;
        let sys = system_from_json(text).unwrap();
        assert_eq!(sys, ProductDynamicalSystem::rotation([0.25, 0.75]).unwrap());
        let bad = r#"{"states": ["1","2"], "env": {"weights": [0.25, 0.75]},
                      "x_map": [[1,0],[1,3]], "y_map": [[0,0],[1,1]]}"#;
        assert_eq!(
            system_from_json(bad).unwrap_err(),
            Error::MapOutOfRange {
                row: 1,
                col: 1,
                value: 3,
                bound: 2
            }
        );
    }

    #[test]
    fn flow_csv_layout() {
        let flow = FlowResult {
            times: vec![0.0, 0.5],
            states: vec![vec![1.0, 2.0], vec![1.5, 2.5]],
        };
        assert_eq!(flow_to_csv(&flow), "t,x0,x1\n0,1,2\n0.5,1.5,2.5\n");
    }
}
