//! Report document and its bit-stable JSON form: sorted keys, numbers at
//! twelve significant digits, non-finite values as strings.

use std::collections::BTreeMap;
use std::path::Path;

use bdfoa_core::format::{g12, round12};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: Vec<String>,
    pub versions: BTreeMap<String, String>,
    pub problem: Option<Value>,
    pub reports: BTreeMap<String, Value>,
    /// Flat machine-readable verdicts.
    pub summary: BTreeMap<String, Value>,
    pub exit_code: i32,
}

impl ReportDocument {
    pub fn new(command: Vec<String>) -> ReportDocument {
        let mut versions = BTreeMap::new();
        versions.insert("bdfoa".to_string(), env!("CARGO_PKG_VERSION").to_string());
        ReportDocument {
            command,
            versions,
            problem: None,
            reports: BTreeMap::new(),
            summary: BTreeMap::new(),
            exit_code: 0,
        }
    }

    pub fn add<T: Serialize>(&mut self, key: &str, value: &T) {
        self.reports.insert(key.to_string(), normalize(to_value(value)));
    }

    pub fn set_problem(&mut self, config: Value) {
        self.problem = Some(normalize(config));
    }

    pub fn note<T: Serialize>(&mut self, key: &str, value: T) {
        self.summary.insert(key.to_string(), normalize(to_value(&value)));
    }

    pub fn to_json(&self) -> String {
        let v = normalize(to_value(self));
        let mut out = String::new();
        write_value(&v, 0, &mut out);
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<ReportDocument, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.to_json())
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e.to_string()))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))
}

/// Through serde-value first: serde_json maps non-finite floats to null,
/// which would lose infinite bounds and moduli.
fn to_value<T: Serialize + ?Sized>(v: &T) -> Value {
    match serde_value::to_value(v) {
        Ok(raw) => from_raw(raw),
        Err(e) => Value::String(format!("unserializable: {e}")),
    }
}

fn from_raw(v: serde_value::Value) -> Value {
    use serde_value::Value as R;
    let float = |f: f64| serde_json::Number::from_f64(f).map_or_else(|| Value::String(g12(f)), Value::Number);
    match v {
        R::Bool(b) => Value::Bool(b),
        R::U8(n) => n.into(),
        R::U16(n) => n.into(),
        R::U32(n) => n.into(),
        R::U64(n) => n.into(),
        R::I8(n) => n.into(),
        R::I16(n) => n.into(),
        R::I32(n) => n.into(),
        R::I64(n) => n.into(),
        R::F32(f) => float(f as f64),
        R::F64(f) => float(f),
        R::Char(c) => Value::String(c.to_string()),
        R::String(s) => Value::String(s),
        R::Unit | R::Option(None) => Value::Null,
        R::Option(Some(b)) | R::Newtype(b) => from_raw(*b),
        R::Seq(xs) => Value::Array(xs.into_iter().map(from_raw).collect()),
        R::Map(m) => Value::Object(
            m.into_iter()
                .map(|(k, v)| {
                    let key = match from_raw(k) {
                        Value::String(s) => s,
                        other => other.to_string(),
                    };
                    (key, from_raw(v))
                })
                .collect(),
        ),
        R::Bytes(b) => Value::Array(b.into_iter().map(Value::from).collect()),
    }
}

/// Round floats to what the emitter prints so that the document compares
/// equal to its own re-parsed JSON.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round12(f)).map_or_else(|| Value::String(g12(f)), Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) if !n.is_f64() => out.push_str(&i.to_string()),
            (_, Some(u)) if !n.is_f64() => out.push_str(&u.to_string()),
            _ => {
                let s = g12(n.as_f64().unwrap_or(f64::NAN));
                out.push_str(&s);
                // Keep floats recognisable as floats on re-load.
                if !s.contains(['.', 'e', 'n', 'i']) {
                    out.push_str(".0");
                }
            }
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            // Short numeric rows stay on one line.
            if a.len() <= 8 && a.iter().all(|x| x.is_number()) {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, depth, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(depth + 1, out);
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(o) if o.is_empty() => out.push_str("{}"),
        Value::Object(o) => {
            out.push_str("{\n");
            // serde_json's default map is ordered by key.
            for (i, (k, x)) in o.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}
