//! Surface language: AST, parser, canonical printer and scope checking.

mod ast;
mod lexer;
mod parser;
mod printer;
mod scope;

use std::fmt;

pub use ast::*;
pub use lexer::{is_keyword, KEYWORDS};
pub use parser::{parse_expr, parse_program, MAX_BLOCK_NESTING, MAX_NESTING};
pub use printer::{expr_to_string, pretty_print, stmt_to_string};
pub use scope::{validate_scopes, ScopeError, ScopeErrorKind};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} expected ", self.span)?;
        match self.expected.as_slice() {
            [] => f.write_str("nothing")?,
            [one] => f.write_str(one)?,
            [init @ .., last] => write!(f, "{} or {}", init.join(", "), last)?,
        }
        write!(f, ", found {}", self.found)
    }
}
