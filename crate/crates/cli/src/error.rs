// Copyright 2026 The qlg-floquet Authors
// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// Numerical or I/O failure while running a valid configuration.
    Computation,
    /// The configuration was rejected before any computation.
    Config,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Computation => 1,
            ExitKind::Config => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub field: Option<String>,
    pub exit: ExitKind,
}

#[derive(Serialize)]
struct Body<'a> {
    kind: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    exit_code: i32,
}

#[derive(Serialize)]
struct Envelope<'a> {
    error: Body<'a>,
}

impl CliError {
    pub fn config(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.into(),
            message: message.into(),
            field: None,
            exit: ExitKind::Config,
        }
    }

    /// Rejected value of a single configuration field.
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: "invalid-config".into(),
            message: message.into(),
            field: Some(field.into()),
            exit: ExitKind::Config,
        }
    }

    pub fn computation(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.into(),
            message: message.into(),
            field: None,
            exit: ExitKind::Computation,
        }
    }

    pub fn io(context: &str, e: std::io::Error) -> Self {
        CliError::computation("io", format!("{context}: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        self.exit.code()
    }

    /// Single-line JSON written to stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope {
            error: Body {
                kind: &self.kind,
                message: &self.message,
                field: self.field.as_deref(),
                exit_code: self.exit_code(),
            },
        })
        .expect("error serializes")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<qlg_core::Error> for CliError {
    fn from(e: qlg_core::Error) -> Self {
        use qlg_core::Error as E;
        // Errors that can only come from bad inputs are configuration errors.
        let exit = match e {
            E::InvalidParameter { .. }
            | E::Parse(_)
            | E::InsufficientDimension { .. }
            | E::DimensionMismatch { .. }
            | E::NotNormalized { .. } => ExitKind::Config,
            _ => ExitKind::Computation,
        };
        let field = match &e {
            E::InvalidParameter { name, .. } => Some(name.to_string()),
            _ => None,
        };
        CliError {
            kind: e.kind().into(),
            message: e.to_string(),
            field,
            exit,
        }
    }
}
