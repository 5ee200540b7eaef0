//! Source parsing, dialect detection and lifting into the pivot model.

pub mod ast;
mod dialect;
mod extract;
mod lexer;
mod parser;
mod symbols;

use thiserror::Error;

pub use ast::SyntaxTree;
pub use dialect::{detect_dialect, Detection, Dialect, Framework, Style};
pub use extract::{extract, ExtractError, Extraction, Note};
pub use parser::parse_source;
pub(crate) use parser::is_keyword;
pub use symbols::{Const, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: syntax error: expected {expected}")]
pub struct SyntaxError {
    pub line: u32,
    pub column: u32,
    pub expected: String,
}
