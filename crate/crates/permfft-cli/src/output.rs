//! JSON output for the CLI.
//!
//! Success objects have a fixed field set and order, so a run with the
//! same configuration and seed is byte-identical except for
//! `wall_time_ms`. Failures print a one-line error object and exit with
//! a category code:
//!
//! * 1: the input file cannot be read or parsed
//! * 2: invalid configuration (flags, caps, unsupported combinations)
//! * 3: input degenerate for the chosen statistic
//! * 4: a verification suite failed

use permfft::Error as LibError;
use serde::Serialize;

use crate::input::InputError;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Result record for `pvalue`.
#[derive(Debug, Serialize)]
pub struct PvalueRecord {
    pub schema_version: u32,
    pub p_estimate: f64,
    pub method: String,
    pub statistic: String,
    pub n: usize,
    pub batches: u64,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: u64,
    pub empirical_batch_variance: f64,
    pub tie_flag: bool,
    pub wall_time_ms: f64,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit: i32,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    schema_version: u32,
    error: ErrorBody<'a>,
}

/// A failure to report and the process exit code that goes with it.
#[derive(Debug)]
pub struct Failure {
    pub exit: i32,
    pub kind: &'static str,
    pub message: String,
    pub row: Option<usize>,
    pub column: Option<usize>,
}

impl Failure {
    pub fn parse(message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_PARSE,
            kind: "parse",
            message: message.into(),
            row: None,
            column: None,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_CONFIG,
            kind: "config",
            message: message.into(),
            row: None,
            column: None,
        }
    }

    pub fn degenerate(message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_DEGENERATE,
            kind: "degenerate",
            message: message.into(),
            row: None,
            column: None,
        }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_VERIFY,
            kind: "verify",
            message: message.into(),
            row: None,
            column: None,
        }
    }

    /// One-line JSON error object.
    pub fn to_json(&self) -> String {
        let record = ErrorRecord {
            schema_version: SCHEMA_VERSION,
            error: ErrorBody {
                kind: self.kind,
                exit: self.exit,
                message: &self.message,
                row: self.row,
                column: self.column,
            },
        };
        serde_json::to_string(&record).expect("error record serializes")
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure {
            exit: EXIT_PARSE,
            kind: "parse",
            message: e.message.clone(),
            row: e.row,
            column: e.column,
        }
    }
}

impl From<LibError> for Failure {
    fn from(e: LibError) -> Self {
        let message = e.to_string();
        match e {
            LibError::Degenerate(_) | LibError::TooShort { .. } => Failure::degenerate(message),
            LibError::NonFinite { .. } | LibError::DimensionMismatch { .. } => {
                Failure::parse(message)
            }
            _ => Failure::config(message),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_record_is_one_line_json() {
        let f = Failure::config("bad epsilon");
        let line = f.to_json();
        assert!(!line.contains('\n'));
        let parsed: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(parsed["schema_version"], 1);
        assert_eq!(parsed["error"]["exit"], 2);
        assert_eq!(parsed["error"]["kind"], "config");
        assert!(parsed["error"].get("row").is_none());
    }

    #[test]
    fn input_error_keeps_coordinates() {
        let f: Failure = InputError {
            message: "expected a number".to_string(),
            row: Some(3),
            column: Some(2),
        }
        .into();
        let parsed: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        assert_eq!(parsed["error"]["row"], 3);
        assert_eq!(parsed["error"]["column"], 2);
        assert_eq!(parsed["error"]["exit"], 1);
    }

    #[test]
    fn lib_errors_map_to_exit_codes() {
        let deg: Failure = LibError::Degenerate("constant input".to_string()).into();
        assert_eq!(deg.exit, EXIT_DEGENERATE);
        let cfg: Failure = LibError::InvalidAccuracy {
            name: "epsilon",
            value: 0.0,
            reason: "must be positive",
        }
        .into();
        assert_eq!(cfg.exit, EXIT_CONFIG);
        let size: Failure = LibError::SizeLimit {
            n: 12,
            limit: 10,
            what: "exact enumeration",
        }
        .into();
        assert_eq!(size.exit, EXIT_CONFIG);
    }
}
