//! Frontend for the `.imp` mini-language: integer-only, linear arithmetic,
//! `if`/`else`, bounded `while`, and `pre`/`post` annotations.
//!
//! The grammar is documented in `docs/grammar.ebnf`.

mod ast;
pub mod interp;
mod lexer;
mod parser;
pub mod pretty;
mod unroll;

pub use ast::{walk_stmts, Cond, Expr, Program, Stmt, StmtKind};
pub use parser::parse;
pub use pretty::pretty;
pub use unroll::unroll;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("undeclared variable `{name}` at line {line}")]
    UndeclaredVariable { name: String, line: u32 },
    #[error("variable `{name}` may be read before it is assigned (line {line})")]
    UnassignedVariable { name: String, line: u32 },
    #[error("nonlinear expression at line {line}")]
    NonLinearExpression { line: u32 },
    #[error("two statements share line {line}; put each statement on its own line")]
    DuplicateLine { line: u32 },
}
