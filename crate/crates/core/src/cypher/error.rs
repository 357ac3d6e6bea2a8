use std::fmt;

use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CypherError {
    #[error("syntax error at {line}:{column}: {message}{}", expected_suffix(.expected))]
    Syntax {
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("unbound variable `{name}` at {line}:{column}")]
    UnboundVariable {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("invalid pattern at {line}:{column}: {message}")]
    InvalidPattern {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing parameter `${0}`")]
    MissingParameter(String),
    #[error("invalid LIMIT: {0}")]
    InvalidLimit(String),
    #[error("invalid property value for `{key}`: {reason}")]
    InvalidProperty { key: String, reason: String },
    #[error("reference interpreter refuses graphs above {limit} nodes (got {nodes})")]
    SizeGuardExceeded { nodes: usize, limit: usize },
    #[error("{0}")]
    Unsupported(String),
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl CypherError {
    /// Short machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            CypherError::Syntax { .. } => "syntax-error",
            CypherError::UnboundVariable { .. } => "unbound-variable",
            CypherError::InvalidPattern { .. } => "invalid-pattern",
            CypherError::MissingParameter(_) => "missing-parameter",
            CypherError::InvalidLimit(_) => "invalid-limit",
            CypherError::InvalidProperty { .. } => "invalid-property",
            CypherError::SizeGuardExceeded { .. } => "size-guard-exceeded",
            CypherError::Unsupported(_) => "unsupported",
        }
    }

    /// Source position when the error is tied to query text.
    pub fn position(&self) -> Option<Pos> {
        match self {
            CypherError::Syntax { line, column, .. }
            | CypherError::UnboundVariable { line, column, .. }
            | CypherError::InvalidPattern { line, column, .. } => Some(Pos {
                line: *line,
                column: *column,
            }),
            _ => None,
        }
    }
}
