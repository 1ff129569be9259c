use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::ExpFit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must agree (lengths, shapes) do not.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("not found: {what}{}", format_nearest(.nearest))]
    NotFound { what: String, nearest: Vec<String> },

    /// A located failure while parsing a text file. `line` is 1-based and
    /// counts every physical line, comments included.
    #[error("parse error at line {line}{}: {message}", format_column(.column))]
    Parse {
        line: usize,
        column: Option<String>,
        message: String,
    },

    #[error("half-power crossing missing on the {side} side: lobe truncated")]
    LobeTruncated { side: &'static str },

    #[error("exponential fit failed: {reason} (last iterate a={}, b={}, c={})", .last.a, .last.b, .last.c)]
    Fit { reason: String, last: Box<ExpFit> },

    #[error("unsupported or corrupted model file: {0}")]
    ModelFormat(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn parse(line: usize, column: Option<&str>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column: column.map(str::to_owned),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_nearest(nearest: &[String]) -> String {
    if nearest.is_empty() {
        String::new()
    } else {
        format!(" (nearest: {})", nearest.join(", "))
    }
}

fn format_column(column: &Option<String>) -> String {
    match column {
        Some(c) => format!(", column `{c}`"),
        None => String::new(),
    }
}
