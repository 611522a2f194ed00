//! The model-construction language an LLM writes.
//!
//! It looks like Python but is a tiny closed grammar: an optional import of
//! `ModelGenerator`, one instantiation, and assignments whose right-hand sides
//! are calls to `activity`, `xor`, `loop`, `partial_order` or `.copy()`.
//! Nothing here ever reaches a general-purpose runtime. The pipeline is
//! [`extract_code_block`] → [`parse`] → [`audit`] → [`interpret`]; [`compile`]
//! runs the last three.
//!
//! ```
//! use promodel::dsl;
//!
//! let code = "gen = ModelGenerator()\n\
//!             a = gen.activity('a')\n\
//!             final_model = gen.xor(a, None)\n";
//! let out = dsl::compile(code).unwrap();
//! assert_eq!(out.model.activity_count(), 1);
//! ```

mod ast;
mod audit;
mod extract;
mod interpret;
mod lexer;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::powl::PowlError;

pub use ast::{render, Expr, Program, Statement, StatementKind};
pub use audit::{audit, rules};
pub use extract::{extract_code_block, ExtractedCode};
pub use interpret::{interpret, Interpretation, Warning};
pub use parser::parse;

/// Module paths accepted in `from <path> import ModelGenerator`.
pub const ALLOWED_MODULES: [&str; 2] = ["utils.model_generation", "model_generation"];
pub const GENERATOR_CLASS: &str = "ModelGenerator";
pub const FINAL_MODEL: &str = "final_model";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SecurityViolationKind {
    ForbiddenImport,
    UnknownFunction,
    ForbiddenSyntax,
    MissingFinalModel,
    BadArity,
    BadArgumentType,
    UndefinedVariable,
}

/// Why a program was refused. Lines and columns are 1-based and refer to the
/// audited source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityViolation {
    pub kind: SecurityViolationKind,
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl SecurityViolation {
    pub(crate) fn new(
        kind: SecurityViolationKind,
        line: usize,
        column: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        SecurityViolation {
            kind,
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for SecurityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "{:?} at line {}, column {c}: {}", self.kind, self.line, self.message),
            None => write!(f, "{:?} at line {}: {}", self.kind, self.line, self.message),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("no code block assigning final_model was found in the response")]
    NoCodeFound,
    #[error("{}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"))]
    Rejected(Vec<SecurityViolation>),
    #[error("error at line {line}: {source}")]
    Interpretation { line: usize, source: PowlError },
}

impl DslError {
    /// First source line the error points at, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            DslError::NoCodeFound => None,
            DslError::Rejected(v) => v.first().map(|v| v.line),
            DslError::Interpretation { line, .. } => Some(*line),
        }
    }
}

/// Parse, audit and interpret `code`.
pub fn compile(code: &str) -> Result<Interpretation, DslError> {
    let program = parse(code).map_err(|v| DslError::Rejected(vec![v]))?;
    interpret(&program)
}

/// The source line `line` (1-based) with its number, for quoting in error
/// messages.
pub fn line_context(code: &str, line: usize) -> Option<String> {
    code.lines()
        .nth(line.checked_sub(1)?)
        .map(|text| format!("{line:>4} | {text}"))
}
