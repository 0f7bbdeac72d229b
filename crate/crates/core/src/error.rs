// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("propagation failed at t = {time}: {reason}")]
    Step { time: f64, reason: String },

    #[error("configuration key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error class.
    ///
    /// Constraint violations exit 1, numerical failures 2, I/O failures
    /// (including a missing config file) 3, and malformed documents 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Validation(_) => 1,
            Error::Numerical(_)
            | Error::Step { .. }
            | Error::Shape(_)
            | Error::InvalidDimension(_) => 2,
            Error::Io { .. } => 3,
            Error::Parse(_) => 4,
        }
    }
}
