//! JSON and plain-text rendering of localization reports.

use std::fmt::Write;
use std::time::Duration;

use serde_json::{json, Map, Value};

use crate::localize::McsReport;
use crate::num::Scalar;

fn millis(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

/// Report as a JSON value. Object keys are sorted; entries and MCSs keep the
/// report order.
pub fn to_value<S: Scalar>(report: &McsReport<S>) -> Value {
    let ce: Map<String, Value> = report
        .counterexample
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "deviations": e.deviations,
                "mcs": e.mcs.iter().map(|m| m.lines.clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "counterexample": ce,
        "entries": entries,
        "timings": {
            "preprocess_ms": millis(report.timings.preprocess),
            "localize_ms": millis(report.timings.localize),
        },
    })
}

pub fn render_json<S: Scalar>(report: &McsReport<S>) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(report)).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Removes every `timings` object, recursively.
pub fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("timings");
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

fn set(lines: &[u32], mark: bool) -> String {
    let items: Vec<String> = lines
        .iter()
        .map(|l| if mark { format!("*{l}") } else { l.to_string() })
        .collect();
    format!("{{{}}}", items.join(","))
}

/// One row per entry. Flipped conditions are marked with `*`.
pub fn render_text<S: Scalar>(report: &McsReport<S>) -> String {
    let mut out = String::new();
    let ce: Vec<String> = report
        .counterexample
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    writeln!(out, "counterexample: {{{}}}", ce.join(", ")).unwrap();
    if report.entries.is_empty() {
        out.push_str("no entries\n");
    }
    for e in &report.entries {
        let head = if e.deviations.is_empty() {
            "path".to_string()
        } else {
            set(&e.deviations, true)
        };
        let mcs: Vec<String> = e.mcs.iter().map(|m| set(&m.lines, false)).collect();
        let body = if mcs.is_empty() {
            "-".to_string()
        } else {
            mcs.join(" ")
        };
        writeln!(out, "{head:<16} {body}").unwrap();
    }
    writeln!(
        out,
        "time: preprocess {:.3} ms, localize {:.3} ms ({} deviation checks)",
        millis(report.timings.preprocess),
        millis(report.timings.localize),
        report.stats.correct_calls
    )
    .unwrap();
    out
}
