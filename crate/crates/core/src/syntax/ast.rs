//! Abstract syntax of scripts.
//!
//! Variable sorts in parsed terms are placeholders until the sort checker
//! rebuilds terms with resolved sorts; the checked script is the one the
//! engines consume.

use crate::sorts::Sort;
use crate::term::Term;
use serde::Serialize;

/// Byte offsets into the source, with the line/column of the start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Script {
    pub decls: Vec<Decl>,
}

#[derive(Debug, Clone, Serialize)]
pub enum Decl {
    Constructor {
        name: String,
        arg_sorts: Vec<Sort>,
        result_sort: Sort,
        span: Span,
    },
    Destructor {
        name: String,
        arg_sorts: Vec<Sort>,
        result_sort: Sort,
        lhs: Term,
        rhs: Term,
        span: Span,
    },
    /// One clause; a predicate is the ordered family of clauses sharing a name.
    Clause(Clause),
    Channel {
        name: String,
        payload_sorts: Vec<Sort>,
        private: bool,
        span: Span,
    },
    Correspondence {
        name: String,
        payload_sorts: Vec<Sort>,
        span: Span,
    },
    Process {
        name: String,
        params: Vec<(String, Sort)>,
        body: Proc,
        span: Span,
    },
    /// The top-level process.
    Main { body: Proc, span: Span },
}

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub body: Vec<Atom>,
    pub span: Span,
}

#[derive(Debug, Clone, Serialize)]
pub enum Atom {
    Eq { left: Term, right: Term, span: Span },
    Call { predicate: String, args: Vec<Term>, span: Span },
}

impl Atom {
    pub fn span(&self) -> Span {
        match self {
            Atom::Eq { span, .. } | Atom::Call { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Binder {
    Name(String),
    Wildcard,
}

#[derive(Debug, Clone, Serialize)]
pub enum Proc {
    Out { channel: String, args: Vec<Term>, next: Box<Proc>, span: Span },
    In { channel: String, binders: Vec<Binder>, next: Box<Proc>, span: Span },
    New { name: String, sort: Sort, next: Box<Proc>, span: Span },
    Let { name: String, term: Term, next: Box<Proc>, span: Span },
    Filter { atoms: Vec<Atom>, outputs: Vec<String>, next: Box<Proc>, span: Span },
    Begin { label: String, args: Vec<Term>, next: Box<Proc>, span: Span },
    End { label: String, args: Vec<Term>, next: Box<Proc>, span: Span },
    Par { left: Box<Proc>, right: Box<Proc>, span: Span },
    Repl { body: Box<Proc>, span: Span },
    Invoke { process: String, args: Vec<Term>, span: Span },
    Done { span: Span },
    Nil { span: Span },
}

impl Proc {
    pub fn span(&self) -> Span {
        match self {
            Proc::Out { span, .. }
            | Proc::In { span, .. }
            | Proc::New { span, .. }
            | Proc::Let { span, .. }
            | Proc::Filter { span, .. }
            | Proc::Begin { span, .. }
            | Proc::End { span, .. }
            | Proc::Par { span, .. }
            | Proc::Repl { span, .. }
            | Proc::Invoke { span, .. }
            | Proc::Done { span }
            | Proc::Nil { span } => *span,
        }
    }
}
