use crate::domain::ConfigViolation;

/// Crate-wide error type.
///
/// Contract violations on hot numeric paths (dimension mismatches,
/// out-of-range targets) panic instead; this type covers recoverable
/// configuration, parsing, and I/O failures that a caller can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Pool configuration failed validation; all violations are listed.
    #[error("invalid pool config:\n{}", format_violations(.0))]
    InvalidConfig(Vec<ConfigViolation>),

    /// Malformed config, table, profile, or results file.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    /// Unknown policy name.
    #[error("unknown policy '{name}'; valid names: {valid}")]
    UnknownPolicy { name: String, valid: String },

    /// Request is structurally invalid (empty grid, bad axis values, ...).
    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn format_violations(violations: &[ConfigViolation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
