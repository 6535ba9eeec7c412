//! MiniLang: a small imperative language with checked 64-bit integers,
//! fixed-size arrays and byte-stream input. Programs written in it are the
//! targets that get mutated and fuzzed.
//!
//! The grammar is documented in `docs/minilang.md` at the repository root.

mod ast;
mod interp;
mod lexer;
mod oracle;
mod parser;
mod printer;

pub use ast::*;
pub use interp::{
    execute, Coverage, CoverageElement, CrashKind, ExecutionResult, NodeSet, Outcome, TestInput,
    DEFAULT_MAX_INPUT_LEN, MAX_CALL_DEPTH,
};
pub use oracle::{kills, OracleKind, OracleMode};
pub use parser::{parse, parse_named, MAX_ARRAY_LEN};
pub use printer::{expr_to_string, pretty_print, stmt_to_string};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("function `{name}` defined twice (second definition at {line}:{col})")]
    DuplicateFunction { name: String, line: u32, col: u32 },
    #[error("program has no `main` function")]
    MissingMain,
}
