//! The synchronization language: `sync` / `when` / `where` / `then` rules.

mod ast;
mod check;
mod lexer;
mod parser;
mod print;

use thiserror::Error;

pub use ast::{ActionPattern, Invocation, SyncDef, TemplateValue};
pub use check::{check_syncs, Diagnostic};
pub use lexer::Pos;
pub use parser::parse_sync;
pub use print::print_syncs;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyncError {
    #[error("{pos}: {message}")]
    Parse { pos: Pos, message: String },
}
