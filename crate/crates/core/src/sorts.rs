//! The sort system of the term algebra.
//!
//! There are four base sorts. `string` is a subsort of `item`: a string
//! literal may appear anywhere an item is expected, because element bodies
//! hold either nested elements or strings. The only compound sort is the
//! list sort, used internally for element children, attribute sequences,
//! and the bindings of `@` rest markers.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sort {
    String,
    Bytes,
    Att,
    Item,
    /// Sequence sort bound by rest markers; not declarable in scripts.
    List,
}

impl Sort {
    pub fn parse(name: &str) -> Option<Sort> {
        match name {
            "string" => Some(Sort::String),
            "bytes" => Some(Sort::Bytes),
            "att" => Some(Sort::Att),
            "item" => Some(Sort::Item),
            _ => None,
        }
    }

    /// Subsort check: a term of sort `self` is usable where `expected` is required.
    pub fn fits(self, expected: Sort) -> bool {
        self == expected || (self == Sort::String && expected == Sort::Item)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sort::String => "string",
            Sort::Bytes => "bytes",
            Sort::Att => "att",
            Sort::Item => "item",
            Sort::List => "list",
        };
        f.write_str(s)
    }
}
