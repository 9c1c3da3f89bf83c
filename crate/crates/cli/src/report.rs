//! Machine- and human-readable command reports.
//!
//! The JSON schema is fixed: `command`, `verdict`, `relativization`,
//! `detail`, `timing_ms`. Witness formulas inside `detail` are rendered in
//! the DSL so they can be re-parsed and re-checked.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    /// `true`/`false` for checks; `null` for informational commands.
    pub verdict: Option<bool>,
    /// Tags of the model classes / pools the verdict is relative to.
    pub relativization: Vec<String>,
    pub detail: Value,
    pub timing_ms: u128,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Some(true) | None => 0,
            Some(false) => 1,
        }
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command : {}\n", self.command));
        if let Some(v) = self.verdict {
            out.push_str(&format!("verdict : {v}\n"));
        }
        for tag in &self.relativization {
            out.push_str(&format!("relative: {tag}\n"));
        }
        out.push_str(&format!(
            "detail  : {}\n",
            serde_json::to_string(&self.detail).unwrap_or_default()
        ));
        out.push_str(&format!("time    : {} ms", self.timing_ms));
        out
    }
}

/// Build a report from any serializable detail payload.
pub fn report<D: Serialize>(
    command: &str,
    verdict: Option<bool>,
    relativization: Vec<String>,
    detail: &D,
    timing_ms: u128,
) -> Report {
    Report {
        command: command.to_string(),
        verdict,
        relativization,
        detail: serde_json::to_value(detail).unwrap_or(Value::Null),
        timing_ms,
    }
}
