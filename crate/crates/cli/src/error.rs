use std::fmt;

use scatter_core::ScatterError;
use thiserror::Error;

/// One problem in a scenario, with its line when it has one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError { line: Some(line), message: message.into() }
    }

    pub fn general(message: impl Into<String>) -> Self {
        ParseError { line: None, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", join(.0))]
    Parse(Vec<ParseError>),

    #[error("{context}: {source}")]
    Numeric { context: String, source: ScatterError },

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

fn join(errors: &[ParseError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// Routes a library error by kind: bad input is a scenario error,
    /// numerical breakdown is a numeric error, files are I/O.
    pub fn from_core(context: impl Into<String>, e: ScatterError) -> Self {
        let context = context.into();
        match e {
            ScatterError::Io(source) => CliError::Io { context, source },
            ScatterError::Format(msg) => {
                CliError::Io { context, source: std::io::Error::new(std::io::ErrorKind::InvalidData, msg) }
            }
            ScatterError::Domain(_) | ScatterError::UnsupportedOrder { .. } => {
                CliError::Parse(vec![ParseError::general(format!("{context}: {e}"))])
            }
            source => CliError::Numeric { context, source },
        }
    }
}
