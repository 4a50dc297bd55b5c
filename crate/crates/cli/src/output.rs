//! Envelopes, canonical JSON and CSV writers.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use vicinal_core::{IterationTrace, ResidualSample, SpherePoint};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::CliError;

/// JSON Schema of the envelope for [`SCHEMA_VERSION`].
pub const SCHEMA: &str = include_str!("../schema/envelope-v1.json");

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Recursively sorts object keys so output does not depend on insertion order.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonical(v))).collect::<Map<_, _>>())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

pub fn envelope(config: &ExperimentConfig, result: Value) -> Value {
    let command = config.command.map(|c| c.name()).unwrap_or_default();
    canonical(serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": to_value(config),
        "result": result,
    }))
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// `# schema_version=…` and `# config=…` comment lines heading CSV output.
pub fn csv_prelude(config: &ExperimentConfig) -> String {
    format!(
        "# schema_version={SCHEMA_VERSION}\n# config={}\n",
        serde_json::to_string(&canonical(to_value(config))).expect("serializable")
    )
}

fn coords(p: &SpherePoint) -> String {
    p.coords().iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// Columns `n, step_dist, dist_to_ref, x0, x1, …`; `step_dist` is
/// `d(x_n, x_{n−1})` and empty for `n = 0`.
pub fn trace_csv(trace: &IterationTrace) -> Result<String, CliError> {
    let dim = trace.iterates.first().map_or(0, |p| p.ambient_dim());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "step_dist".into(), "dist_to_ref".into()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (n, p) in trace.iterates.iter().enumerate() {
        let mut row = vec![n.to_string()];
        row.push(if n == 0 { String::new() } else { trace.step_distances[n - 1].to_string() });
        row.push(
            trace
                .reference_distances
                .as_ref()
                .map_or(String::new(), |d| d[n].to_string()),
        );
        row.extend(p.coords().iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    into_string(w)
}

/// Columns `x, y, lhs, rhs, residual`; points are `;`-separated coordinates.
pub fn samples_csv(samples: &[ResidualSample]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "lhs", "rhs", "residual"])?;
    for s in samples {
        w.write_record([
            coords(&s.x),
            coords(&s.y),
            s.lhs.to_string(),
            s.rhs.to_string(),
            s.residual.to_string(),
        ])?;
    }
    into_string(w)
}

/// A table with one row per object of `rows`, columns in the given order.
pub fn table_csv(columns: &[&str], rows: &[Value]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(columns.iter().map(|c| match &r[*c] {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            v => v.to_string(),
        }))?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

pub fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// A JSON array of coordinate arrays, or CSV rows of coordinates (a
/// non-numeric header row is skipped).
pub fn read_points(path: &Path) -> Result<Vec<SpherePoint>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read points {}: {e}", path.display())))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("points {}: {e}", path.display())));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("points: {e}")))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse).collect();
        match parsed {
            Ok(c) => points.push(SpherePoint::new(c)?),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(CliError::Config(format!("points row {i}: {e}"))),
        }
    }
    Ok(points)
}
