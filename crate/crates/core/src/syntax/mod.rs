//! Specification language front end: tokens, syntax tree, parser, printer
//! and static validation.

mod ast;
mod lexer;
mod parser;
mod print;
mod validate;

pub use ast::*;
pub use lexer::{tokenize, LexError, Pos, Spanned, Token};
pub use parser::{parse_spec, ParseError};
pub use validate::{
    requirements, validate, Diagnostic, DiagnosticKind, Requirements, RESERVED_PREDICATES,
};
