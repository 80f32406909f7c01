//! Symbolic verification toolkit for SOAP-style security protocols.
//!
//! Scripts describe XML messages over a sorted term algebra with symbolic
//! cryptography, Prolog-style predicates for building and checking
//! messages, pi-style processes exchanging terms on named channels, and
//! correspondence assertions stating authentication and correlation goals.
//! The toolkit sort-checks scripts, simulates them against a bounded
//! attacker, and verifies robust safety of the declared correspondences by
//! Horn-clause resolution.

pub mod sorts;
pub mod term;
pub mod unify;
pub mod symtab;
pub mod matching;
pub mod syntax;
pub mod pred;
pub mod expand;
pub mod sim;
pub mod fixtures;

pub use sorts::Sort;
pub use symtab::{DeclareError, RewriteRule, SortError, Symbol, SymbolKind, SymbolTable};
pub use syntax::{CheckedScript, LoadError};
pub use term::{Element, FreshName, Seq, Subst, Term};
