use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// One verified quantity. `value` is a residual (compared with `<= tolerance`)
/// or an exact value (compared with `expected`, tolerance 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Value>,
    pub tolerance: f64,
}

impl Check {
    /// Passes iff `residual <= tolerance`; NaN fails.
    pub fn residual(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            status: if residual <= tolerance { Status::Pass } else { Status::Fail },
            value: json!(residual),
            expected: None,
            tolerance,
        }
    }

    /// Passes iff the integer `value` equals `expected`.
    pub fn exact(name: impl Into<String>, value: i64, expected: i64) -> Self {
        Check {
            name: name.into(),
            status: if value == expected { Status::Pass } else { Status::Fail },
            value: json!(value),
            expected: Some(json!(expected)),
            tolerance: 0.0,
        }
    }

    /// A yes/no outcome recorded as 1/0 against the expected outcome.
    pub fn flag(name: impl Into<String>, value: bool, expected: bool) -> Self {
        Self::exact(name, i64::from(value), i64::from(expected))
    }

    /// `value` against `expected` with relative tolerance `tolerance`.
    pub fn close(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let err = (value - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
        let ok = value == expected || err <= tolerance;
        Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value: json!(value),
            expected: Some(json!(expected)),
            tolerance,
        }
    }

    pub fn inconclusive(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            status: Status::Inconclusive,
            value: json!(value),
            expected: None,
            tolerance,
        }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub command: String,
    pub inputs_digest: String,
    pub results: Vec<Check>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl ScenarioReport {
    pub fn tally(&self) -> Tally {
        let count = |s| self.results.iter().filter(|c| c.status == s).count();
        Tally {
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            inconclusive: count(Status::Inconclusive),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.tally().failed == 0
    }

    /// One JSON object per check followed by a summary line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.results {
            let mut line = serde_json::to_value(c).expect("check serializes");
            let obj = line.as_object_mut().expect("check is an object");
            obj.insert("scenario".into(), json!(self.scenario));
            obj.insert("command".into(), json!(self.command));
            out.push_str(&line.to_string());
            out.push('\n');
        }
        let t = self.tally();
        let summary = json!({
            "scenario": self.scenario,
            "command": self.command,
            "summary": true,
            "inputs_digest": self.inputs_digest,
            "checks": self.results.len(),
            "passed": t.passed,
            "failed": t.failed,
            "inconclusive": t.inconclusive,
            "status": if t.failed == 0 { "pass" } else { "fail" },
            "wall_time_s": self.wall_time_s,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    /// Short human-readable summary.
    pub fn summary_line(&self) -> String {
        let t = self.tally();
        format!(
            "{} [{}]: {} checks, {} passed, {} failed, {} inconclusive ({:.3} s)",
            self.scenario,
            self.command,
            self.results.len(),
            t.passed,
            t.failed,
            t.inconclusive,
            self.wall_time_s
        )
    }
}

/// Hex SHA-256 of the scenario bytes followed by the canonical settings string.
pub fn inputs_digest(input: &[u8], settings: &str) -> String {
    let mut h = Sha256::new();
    h.update(input);
    h.update([0u8]);
    h.update(settings.as_bytes());
    hex::encode(h.finalize())
}
