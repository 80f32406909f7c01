//! Attacker knowledge: every public observation, closed under data
//! decomposition and destructor normalization.
//!
//! Derivability charges depth only for applications of declared symbols;
//! XML elements, attributes, lists and string literals are transparent
//! wire data the attacker can always take apart and reassemble.

use crate::sorts::Sort;
use crate::symtab::{root_symbol, SymbolKind, SymbolTable};
use crate::term::Term;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

#[derive(Debug, Clone, Default)]
pub struct Knowledge {
    base: Arc<BTreeSet<Term>>,
    /// Order-independent content fingerprint, maintained incrementally;
    /// used as a cache key by the attack search.
    fingerprint: u64,
}

fn term_hash(t: &Term) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

impl Knowledge {
    pub fn new() -> Knowledge {
        Knowledge::default()
    }

    pub fn base(&self) -> &BTreeSet<Term> {
        &self.base
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.base.contains(t)
    }

    /// Observes a public term: inserts it together with its decomposition
    /// closure (element parts, attribute values, coercion preimages) and
    /// whatever destructors extract from it against the existing base.
    pub fn observe(&mut self, table: &SymbolTable, t: &Term) {
        if self.base.contains(t) {
            return;
        }
        let base = Arc::make_mut(&mut self.base);
        let mut work = vec![t.clone()];
        while let Some(t) = work.pop() {
            if !base.insert(t.clone()) {
                continue;
            }
            self.fingerprint ^= term_hash(&t);
            match &t {
                Term::Element(el) => {
                    work.extend(el.attrs.items.iter().cloned());
                    work.extend(el.children.items.iter().cloned());
                }
                Term::Attr(_, v) => work.push((**v).clone()),
                Term::List(seq) => work.extend(seq.items.iter().cloned()),
                Term::Apply(f, args) => {
                    // Invertible coercions decompose for free.
                    if table.inverse_of(f).is_some() {
                        work.extend(args.iter().cloned());
                    }
                }
                _ => {}
            }
            // Destructor extractions, tried only where the rule's argument
            // shapes can possibly fire.
            for sym in table.symbols() {
                if !matches!(sym.kind, SymbolKind::Destructor) {
                    continue;
                }
                let Some(rule) = &sym.rewrite else { continue };
                let Term::Apply(_, rule_args) = &rule.lhs else { continue };
                match sym.arg_sorts.len() {
                    1 => {
                        if !root_compatible(&t, &rule_args[0]) {
                            continue;
                        }
                        let app = Term::apply(&sym.name, vec![t.clone()]);
                        let r = table.normalize(&app);
                        if r != app {
                            work.push(r);
                        }
                    }
                    2 => {
                        let mut tries: Vec<(Term, Term)> = Vec::new();
                        for other in base.iter() {
                            if root_compatible(&t, &rule_args[0])
                                && root_compatible(other, &rule_args[1])
                            {
                                tries.push((t.clone(), other.clone()));
                            }
                            if root_compatible(other, &rule_args[0])
                                && root_compatible(&t, &rule_args[1])
                            {
                                tries.push((other.clone(), t.clone()));
                            }
                        }
                        for (a, b) in tries {
                            let app = Term::apply(&sym.name, vec![a, b]);
                            let r = table.normalize(&app);
                            if r != app && !base.contains(&r) {
                                work.push(r);
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    /// Can the attacker build this ground term within `depth` nested
    /// applications of declared symbols over known terms?
    pub fn derivable(&self, table: &SymbolTable, t: &Term, depth: usize) -> bool {
        if self.base.contains(t) {
            return true;
        }
        match t {
            Term::Str(_) => true,
            Term::Fresh(_) => false,
            Term::Var(..) | Term::Wildcard(_) => false,
            Term::Attr(_, v) => self.derivable(table, v, depth),
            Term::List(seq) => {
                seq.rest.is_none() && seq.items.iter().all(|i| self.derivable(table, i, depth))
            }
            Term::Element(el) => {
                el.attrs.items.iter().all(|a| self.derivable(table, a, depth))
                    && el.children.items.iter().all(|c| self.derivable(table, c, depth))
            }
            Term::Apply(_, args) => {
                depth > 0 && args.iter().all(|a| self.derivable(table, a, depth - 1))
            }
        }
    }

    /// Known ground terms of a given sort, in deterministic order.
    pub fn of_sort(&self, table: &SymbolTable, sort: Sort) -> Vec<Term> {
        self.base
            .iter()
            .filter(|t| table.sort_of(t).map(|s| s.fits(sort)).unwrap_or(false))
            .cloned()
            .collect()
    }
}

/// Can a ground term possibly match this rule argument pattern, judging
/// by the root alone?
fn root_compatible(t: &Term, pattern: &Term) -> bool {
    match pattern {
        Term::Var(..) | Term::Wildcard(_) => true,
        Term::Apply(f, _) => root_symbol(t) == Some(f.as_str()),
        _ => true,
    }
}
