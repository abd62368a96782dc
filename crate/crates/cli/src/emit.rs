//! Text rendering and atomic output.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use bandgap::DecayCurve;
use serde_json::{json, Value};

/// Shortest round-trip decimal, with `-0` printed as `0` and no `.0` on integers.
pub fn num(x: f64) -> String {
    let s = format!("{:?}", x + 0.0);
    match s.strip_suffix(".0") {
        Some(int) => int.to_string(),
        None => s,
    }
}

pub fn decay_csv(curve: &DecayCurve) -> String {
    let mut out = String::from("t,re_c,im_c,p,method\n");
    for s in &curve.samples {
        let _ = writeln!(out, "{},{},{},{},{}", num(s.t), num(s.c.re), num(s.c.im), num(s.p), s.method);
    }
    out
}

pub fn decay_json(curve: &DecayCurve, method: &str) -> Value {
    let samples: Vec<Value> = curve
        .samples
        .iter()
        .map(|s| json!({"t": s.t, "re_c": s.c.re + 0.0, "im_c": s.c.im + 0.0, "p": s.p, "method": s.method.as_str()}))
        .collect();
    json!({"metadata": metadata(&curve.params, method, curve.overlap_mismatch), "samples": samples})
}

pub fn metadata(params: &bandgap::ReservoirParams, method: &str, mismatch: Option<f64>) -> Value {
    let mut m = json!({"params": params, "method": method, "version": env!("CARGO_PKG_VERSION")});
    if let Some(x) = mismatch {
        m["overlap_mismatch"] = json!(x);
    }
    m
}

pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Writes through a sibling temporary file, or to stdout without a path.
pub fn write_out(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.flush()?;
            tmp.persist(p).map_err(|e| e.error)?;
            Ok(())
        }
    }
}
