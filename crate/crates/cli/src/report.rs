//! Text and JSON rendering of an executed command's outcome.
//!
//! The JSON layer is byte-stable for identical inputs apart from the
//! `timing_ms` field: objects are key-sorted, arrays keep construction
//! order, and every mathematical object is a canonical string.

use serde_json::json;

use crate::exec::Outcome;

pub fn render_json(outcome: &Outcome, timing_ms: u64) -> String {
    let v = json!({
        "command": outcome.command,
        "status": outcome.status.text(),
        "result": outcome.result,
        "residual": outcome.residual,
        "diagnostics": outcome.diagnostics,
        "timing_ms": timing_ms,
    });
    v.to_string()
}

pub fn render_text(outcome: &Outcome, timing_ms: u64) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}: {}\n", outcome.command, outcome.status.text()));
    for (key, value) in &outcome.result {
        let shown = match value {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        out.push_str(&format!("{key}: {shown}\n"));
    }
    if let Some(residual) = &outcome.residual {
        out.push_str(&format!("residual: {residual}\n"));
    }
    for d in &outcome.diagnostics {
        out.push_str(&format!("note: {d}\n"));
    }
    out.push_str(&format!("time: {timing_ms} ms\n"));
    out
}
