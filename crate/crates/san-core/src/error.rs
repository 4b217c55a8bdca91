//! Error type shared by every module in the crate.
//!
//! Errors are grouped into four [`ErrorKind`]s so that callers (notably the
//! CLI) can map failure classes to distinct process exit codes without
//! matching on individual variants.

use std::path::PathBuf;

use crate::graph::{NodeRef, Violation};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    /// Malformed input data: unparseable TSV/JSON, bad CLI grid strings.
    Parse,
    /// Structurally valid input that violates a precondition or invariant.
    Domain,
    /// An iterative numerical routine failed to converge.
    Solver,
    /// Underlying I/O failure.
    Io,
}

impl ErrorKind {
    /// Process exit code conventionally associated with this failure class.
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Domain => 3,
            ErrorKind::Solver => 4,
            ErrorKind::Io => 5,
        }
    }
}

/// Unified error type for graph construction, ingestion, scoring, training
/// and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A text input (edge list, attribute list, manifest, grid string) could
    /// not be parsed. `location` is a file path or a short description of the
    /// input, `line` is 1-based where applicable.
    #[error("parse error in {location}{}: {message}", fmt_line(*.line))]
    Parse {
        location: String,
        line: Option<usize>,
        message: String,
    },

    /// A network failed validation. Carries every violation found, not just
    /// the first, so callers can report them all.
    #[error("invalid network: {}", fmt_violations(.0))]
    InvalidNetwork(Vec<Violation>),

    /// A node reference does not exist in the network it was used with.
    #[error("unknown node: {0:?}")]
    UnknownNode(NodeRef),

    /// An operation precondition failed (wrong node kinds, empty candidate
    /// set, mismatched universes, out-of-range parameter, ...).
    #[error("{0}")]
    Precondition(String),

    /// Core selection removed every node.
    #[error("core selection with k={k} emptied the network")]
    EmptyCore { k: usize },

    /// An iterative solver exhausted its iteration budget.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    /// I/O failure wrapped with the path being read or written.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_line(line: Option<usize>) -> String {
    match line {
        Some(n) => format!(" (line {n})"),
        None => String::new(),
    }
}

fn fmt_violations(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(3).map(|v| v.to_string()).collect();
    if violations.len() > 3 {
        format!("{} (and {} more)", shown.join("; "), violations.len() - 3)
    } else {
        shown.join("; ")
    }
}

impl Error {
    /// Failure class of this error; see [`ErrorKind::exit_code`].
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } => ErrorKind::Parse,
            Error::InvalidNetwork(_)
            | Error::UnknownNode(_)
            | Error::Precondition(_)
            | Error::EmptyCore { .. } => ErrorKind::Domain,
            Error::NoConvergence { .. } => ErrorKind::Solver,
            Error::Io { .. } => ErrorKind::Io,
        }
    }

    /// Shorthand for a [`Error::Parse`] with a location and line number.
    pub fn parse(location: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            line,
            message: message.into(),
        }
    }

    /// Shorthand for a [`Error::Precondition`].
    pub fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    /// Shorthand for an [`Error::Io`] carrying the offending path.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
