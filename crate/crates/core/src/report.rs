//! Report rendering.
//!
//! Structured reports are JSON with every number rounded to
//! [`REPORT_DIGITS`] significant digits so that they diff cleanly. The CSV
//! companion keeps full round-trip precision.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::asymptotics::SampleRow;
use crate::error::ReportError;

pub const REPORT_DIGITS: usize = 12;

pub const CSV_HEADER: [&str; 6] = ["psi", "s", "log_f", "prediction_leading", "prediction_corrected", "ratio"];

/// Rounds `x` to `digits` significant digits. Non-finite values pass through.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_significant(x, REPORT_DIGITS)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty-printed JSON with rounded numbers and a trailing newline.
///
/// Non-finite numbers are written as `null`.
pub fn to_structured_text<T: Serialize>(value: &T) -> Result<String, ReportError> {
    let mut tree = serde_json::to_value(value)?;
    round_value(&mut tree);
    let mut text = serde_json::to_string_pretty(&tree)?;
    text.push('\n');
    Ok(text)
}

pub fn write_csv<W: Write>(rows: &[SampleRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([r.psi, r.s, r.log_f, r.prediction_leading, r.prediction_corrected, r.ratio].map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SampleRow]) -> Result<String, ReportError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<(), ReportError> {
    std::fs::write(path, contents)?;
    Ok(())
}
