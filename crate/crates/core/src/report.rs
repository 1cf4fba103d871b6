//! Serialization helpers shared by every report.
//!
//! Floating-point values are written with 17 significant digits so that
//! identical runs produce byte-identical files.

use std::io::Write;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::Result;

pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0.0000000000000000e0"
        "0.0000000000000000e0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(format_f64(x)).expect("formatted float is valid JSON")
}

/// `serialize_with` helper: finite floats as 17-digit numbers, others as null.
pub fn sig17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        raw(*x).serialize(s)
    } else {
        s.serialize_none()
    }
}

pub fn sig17_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => sig17(v, s),
        None => s.serialize_none(),
    }
}

pub fn sig17_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        if x.is_finite() {
            seq.serialize_element(&raw(*x))?;
        } else {
            seq.serialize_element(&Option::<f64>::None)?;
        }
    }
    seq.end()
}

/// Writes equal-length columns as CSV with a header row.
pub fn write_columns<W: Write>(out: W, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(headers)?;
    let rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| format_f64(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
