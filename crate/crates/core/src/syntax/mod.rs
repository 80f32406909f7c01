//! Script frontend: lexer, parser, pretty-printer, and the sort checker.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod sortck;

pub use ast::{Atom, Binder, Clause, Decl, Proc, Script, Span};
pub use lexer::SyntaxError;
pub use parser::{parse_goal, parse_script};
pub use pretty::{ast_eq, pretty_script};
pub use sortck::{
    sort_check, ChannelDecl, CheckError, CheckedClause, CheckedScript, ClauseModes,
    CorrespondenceDecl, PredicateDef, ProcessDef,
};

/// Parses and sort-checks in one step.
pub fn load_script(source: &str) -> Result<CheckedScript, LoadError> {
    let ast = parse_script(source)?;
    Ok(sort_check(ast)?)
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Check(#[from] CheckError),
}
