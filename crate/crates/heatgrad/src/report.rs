//! Deterministic report emission: CSV with a fixed column order and
//! 17-significant-digit rendering, JSON with sorted keys. Identical inputs
//! produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::auxfn::AuxScanResult;
use crate::error::Result;
use crate::pde::FieldSnapshot;
use crate::verify::{HmapCell, RatioRecord, VerificationReport};

/// 17-significant-digit decimal rendering (round-trips every f64).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON value for a float; non-finite values become strings so they survive
/// serialization.
pub fn json_f64(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_f64(x)),
    }
}

/// Serializes with sorted keys (the default map is ordered) and a trailing
/// newline.
pub fn to_json_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn csv_line(fields: &[f64]) -> String {
    let mut line = String::new();
    for (i, &x) in fields.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&fmt_f64(x));
    }
    line.push('\n');
    line
}

/// CSV of Lambda records: `x,t,s,lhs,bound,lambda`.
pub fn verification_csv(records: &[RatioRecord]) -> String {
    let mut out = String::from("x,t,s,lhs,bound,lambda\n");
    for r in records {
        out.push_str(&csv_line(&[r.x, r.t, r.s, r.lhs, r.bound, r.lambda]));
    }
    out
}

fn record_json(r: &RatioRecord) -> Value {
    let mut m = Map::new();
    m.insert("x".into(), json_f64(r.x));
    m.insert("t".into(), json_f64(r.t));
    m.insert("s".into(), json_f64(r.s));
    m.insert("lhs".into(), json_f64(r.lhs));
    m.insert("bound".into(), json_f64(r.bound));
    m.insert("lambda".into(), json_f64(r.lambda));
    Value::Object(m)
}

/// JSON summary of an upper-bound scan: `c_emp`, `violations`, `argmax`
/// plus the configuration echo.
pub fn verification_summary(report: &VerificationReport) -> Value {
    let mut env = Map::new();
    env.insert("n".into(), Value::from(report.env.n));
    env.insert("k".into(), json_f64(report.env.k));
    env.insert("radius".into(), json_f64(report.env.radius));
    env.insert("horizon".into(), json_f64(report.env.horizon));
    env.insert("ceiling".into(), json_f64(report.env.ceiling));

    let mut m = Map::new();
    m.insert("c_emp".into(), json_f64(report.c_emp));
    m.insert("violations".into(), Value::from(report.violations));
    m.insert(
        "argmax".into(),
        report.argmax.as_ref().map_or(Value::Null, record_json),
    );
    m.insert("kind".into(), Value::String(report.kind.clone()));
    m.insert("source".into(), Value::String(report.source.clone()));
    m.insert("grid".into(), Value::String(report.grid_description.clone()));
    m.insert("trial_c".into(), json_f64(report.trial_c));
    m.insert("excluded".into(), Value::from(report.excluded));
    m.insert("records".into(), Value::from(report.records.len()));
    m.insert("env".into(), Value::Object(env));
    Value::Object(m)
}

/// CSV of the auxiliary-function scan: `s,R,tau,k,F1,F2,ratio`.
pub fn aux_scan_csv(result: &AuxScanResult) -> String {
    let mut out = String::from("s,R,tau,k,F1,F2,ratio\n");
    for r in &result.rows {
        out.push_str(&csv_line(&[r.s, r.radius, r.aux_time, r.k, r.f1, r.f2, r.ratio]));
    }
    out
}

fn quad_json(q: (f64, f64, f64, f64)) -> Value {
    let mut m = Map::new();
    m.insert("s".into(), json_f64(q.0));
    m.insert("R".into(), json_f64(q.1));
    m.insert("tau".into(), json_f64(q.2));
    m.insert("k".into(), json_f64(q.3));
    Value::Object(m)
}

/// JSON envelope summary of the auxiliary-function scan.
pub fn aux_scan_summary(result: &AuxScanResult) -> Value {
    let mut m = Map::new();
    m.insert("ratio_min".into(), json_f64(result.ratio_min));
    m.insert("ratio_max".into(), json_f64(result.ratio_max));
    m.insert("spread".into(), json_f64(result.ratio_max / result.ratio_min));
    m.insert("argmin".into(), quad_json(result.argmin));
    m.insert("argmax".into(), quad_json(result.argmax));
    m.insert("flagged".into(), Value::from(result.flagged));
    m.insert("cells".into(), Value::from(result.rows.len()));
    m.insert("grid".into(), Value::String(result.grid_description.clone()));
    Value::Object(m)
}

/// CSV of the sharpness map: `s,t,R,lower_search,lower_envelope,h0,ratio`.
pub fn hmap_csv(cells: &[HmapCell]) -> String {
    let mut out = String::from("s,t,R,lower_search,lower_envelope,h0,ratio\n");
    for c in cells {
        out.push_str(&csv_line(&[
            c.s,
            c.t,
            c.radius,
            c.lower_search,
            c.lower_envelope,
            c.h0,
            c.ratio,
        ]));
    }
    out
}

/// CSV of a field snapshot: `node,r,u`.
pub fn snapshot_csv(snapshot: &FieldSnapshot) -> String {
    let mut out = String::from("node,r,u\n");
    for (i, (&r, &u)) in snapshot.grid.nodes.iter().zip(&snapshot.u).enumerate() {
        out.push_str(&format!("{i},{},{}\n", fmt_f64(r), fmt_f64(u)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_rendering_fixed_width() {
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        // Round trip through 17 significant digits.
        let x = 0.1 + 0.2;
        let parsed: f64 = fmt_f64(x).parse().unwrap();
        assert_eq!(parsed.to_bits(), x.to_bits());
    }

    #[test]
    fn json_keys_sorted() {
        let mut m = Map::new();
        m.insert("zeta".into(), Value::from(1));
        m.insert("alpha".into(), Value::from(2));
        let s = to_json_string(&Value::Object(m));
        let a = s.find("alpha").unwrap();
        let z = s.find("zeta").unwrap();
        assert!(a < z);
    }

    #[test]
    fn non_finite_floats_become_strings() {
        assert_eq!(json_f64(f64::INFINITY), Value::String("inf".into()));
        assert!(json_f64(1.5).is_number());
    }

    #[test]
    fn verification_csv_header() {
        let csv = verification_csv(&[]);
        assert!(csv.starts_with("x,t,s,lhs,bound,lambda\n"));
    }
}
