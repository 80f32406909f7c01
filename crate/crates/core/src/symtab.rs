//! Declared function symbols and the rewrite engine.
//!
//! Constructors build data; destructors carry rewrite rules that test or
//! extract data from constructor applications. Cryptography is perfect: a
//! destructor application whose rule does not match is a stuck term, a
//! legal normal form, never an error.
//!
//! The table starts from the built-in coercions between sorts (`c14n`,
//! `base64`, `utf8` and their inverses) plus `concat`, `sha1`, `psha1` and
//! `hmacsha1`; scripts add their own symbols. Each coercion pair carries
//! both inversion rules (`i(f(x)) = x` and `f(i(y)) = y`), so inverting a
//! coercion during matching yields substitutions that re-normalize to the
//! subject exactly.

use crate::sorts::Sort;
use crate::term::{Element, Seq, Subst, Term};
use crate::unify::unify;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolKind {
    Constructor,
    Destructor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteRule {
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    pub arg_sorts: Vec<Sort>,
    pub result_sort: Sort,
    /// The declared rule, present exactly when `kind` is `Destructor`.
    pub rewrite: Option<RewriteRule>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeclareError {
    #[error("symbol `{0}` is already declared")]
    DuplicateSymbol(String),
    #[error("ill-formed rule for `{symbol}`: {reason}")]
    IllFormedRule { symbol: String, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("sort error at {path}: {message}")]
pub struct SortError {
    pub path: String,
    pub message: String,
}

impl SortError {
    fn at(path: &[String], message: String) -> SortError {
        SortError { path: format!("/{}", path.join("/")), message }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    symbols: BTreeMap<String, Symbol>,
    /// All active rules (declared destructor rules plus coercion co-rules),
    /// indexed by the root symbol of the left-hand side.
    rules: Vec<RewriteRule>,
    by_root: BTreeMap<String, Vec<usize>>,
    /// Invertible unary constructor -> its inverse destructor.
    inverses: BTreeMap<String, String>,
}

impl SymbolTable {
    pub fn empty() -> SymbolTable {
        SymbolTable::default()
    }

    /// Table holding only the built-in symbols.
    pub fn stdlib() -> SymbolTable {
        let mut t = SymbolTable::empty();
        t.declare_coercion("c14n", "ic14n", Sort::Item, Sort::Bytes);
        t.declare_coercion("base64", "ibase64", Sort::Bytes, Sort::String);
        t.declare_coercion("utf8", "iutf8", Sort::String, Sort::Bytes);
        t.declare_constructor("concat", &[Sort::Bytes, Sort::Bytes], Sort::Bytes);
        t.declare_constructor("sha1", &[Sort::Bytes], Sort::Bytes);
        t.declare_constructor("psha1", &[Sort::String, Sort::Bytes], Sort::Bytes);
        t.declare_constructor("hmacsha1", &[Sort::Bytes, Sort::Bytes], Sort::Bytes);
        t
    }

    fn declare_constructor(&mut self, name: &str, args: &[Sort], result: Sort) {
        self.declare(Symbol {
            name: name.to_string(),
            kind: SymbolKind::Constructor,
            arg_sorts: args.to_vec(),
            result_sort: result,
            rewrite: None,
        })
        .expect("built-in constructor");
    }

    /// Declares `f : from -> to` and `inv : to -> from` with both inversion rules.
    fn declare_coercion(&mut self, f: &str, inv: &str, from: Sort, to: Sort) {
        let x = Term::var("x", from);
        let y = Term::var("y", to);
        self.declare_constructor(f, &[from], to);
        self.declare(Symbol {
            name: inv.to_string(),
            kind: SymbolKind::Destructor,
            arg_sorts: vec![to],
            result_sort: from,
            rewrite: Some(RewriteRule {
                lhs: Term::apply(inv, vec![Term::apply(f, vec![x.clone()])]),
                rhs: x,
            }),
        })
        .expect("built-in destructor");
        self.push_rule(RewriteRule {
            lhs: Term::apply(f, vec![Term::apply(inv, vec![y.clone()])]),
            rhs: y,
        })
        .expect("coercion co-rule");
        self.inverses.insert(f.to_string(), inv.to_string());
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values()
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    /// The inverse destructor of an invertible unary constructor, if any.
    pub fn inverse_of(&self, constructor: &str) -> Option<&str> {
        self.inverses.get(constructor).map(String::as_str)
    }

    /// Removes a symbol that has no attached rules yet; the checker uses
    /// this to finalize a destructor whose rule terms were resolved against
    /// a provisional signature.
    pub(crate) fn remove_for_redeclare(&mut self, name: &str) {
        self.symbols.remove(name);
    }

    pub fn declare(&mut self, decl: Symbol) -> Result<(), DeclareError> {
        if self.symbols.contains_key(&decl.name) {
            return Err(DeclareError::DuplicateSymbol(decl.name));
        }
        match (decl.kind, &decl.rewrite) {
            (SymbolKind::Constructor, Some(_)) => {
                return Err(DeclareError::IllFormedRule {
                    symbol: decl.name,
                    reason: "a constructor carries no rewrite rule".into(),
                })
            }
            (SymbolKind::Destructor, None) => {
                return Err(DeclareError::IllFormedRule {
                    symbol: decl.name,
                    reason: "a destructor needs exactly one rewrite rule".into(),
                })
            }
            _ => {}
        }
        if let Some(rule) = &decl.rewrite {
            if root_symbol(&rule.lhs) != Some(decl.name.as_str()) {
                return Err(DeclareError::IllFormedRule {
                    symbol: decl.name,
                    reason: "rule left-hand side must be rooted at the declared destructor".into(),
                });
            }
        }
        let rule = decl.rewrite.clone();
        let name = decl.name.clone();
        self.symbols.insert(name.clone(), decl);
        if let Some(rule) = rule {
            if let Err(e) = self.push_rule(rule) {
                self.symbols.remove(&name);
                return Err(e);
            }
            // Detect the inversion shape g(f(x)) = x for unary f.
            let sym = &self.symbols[&name];
            if let Some(RewriteRule { lhs: Term::Apply(_, args), rhs: Term::Var(v, _) }) =
                &sym.rewrite
            {
                if let [Term::Apply(f, inner)] = args.as_slice() {
                    if matches!(inner.as_slice(), [Term::Var(w, _)] if w == v) {
                        self.inverses.insert(f.clone(), name.clone());
                    }
                }
            }
        }
        Ok(())
    }

    fn push_rule(&mut self, rule: RewriteRule) -> Result<(), DeclareError> {
        let symbol = root_symbol(&rule.lhs).unwrap_or("?").to_string();
        let ill = |reason: String| DeclareError::IllFormedRule { symbol: symbol.clone(), reason };

        let lhs_vars = rule.lhs.var_list();
        for (v, _) in rule.rhs.var_list() {
            if !lhs_vars.iter().any(|(n, _)| *n == v) {
                return Err(ill(format!("right-hand side variable `{v}` not bound on the left")));
            }
        }
        if rule.rhs.size() >= rule.lhs.size() {
            return Err(ill(format!(
                "right-hand side size {} does not decrease below left-hand side size {}",
                rule.rhs.size(),
                rule.lhs.size()
            )));
        }
        for (v, _) in &lhs_vars {
            if occurrences(&rule.rhs, v) > occurrences(&rule.lhs, v) {
                return Err(ill(format!("variable `{v}` is duplicated on the right-hand side")));
            }
        }
        // Non-overlap: no two left-hand sides may be unifiable.
        for existing in &self.rules {
            let a = rename_vars(&existing.lhs, "l$");
            let b = rename_vars(&rule.lhs, "r$");
            if unify(&a, &b, Subst::new()).is_some() {
                return Err(ill(format!(
                    "left-hand side overlaps with existing rule for `{}`",
                    root_symbol(&existing.lhs).unwrap_or("?")
                )));
            }
        }
        let idx = self.rules.len();
        self.rules.push(rule);
        self.by_root.entry(symbol).or_default().push(idx);
        Ok(())
    }

    /// Re-checks size-decrease, right-hand-side variable containment, and
    /// pairwise non-overlap over the whole active rule set.
    pub fn verify_rule_set(&self) -> Result<(), DeclareError> {
        for (i, rule) in self.rules.iter().enumerate() {
            let symbol = root_symbol(&rule.lhs).unwrap_or("?").to_string();
            let ill =
                |reason: String| DeclareError::IllFormedRule { symbol: symbol.clone(), reason };
            let lhs_vars = rule.lhs.var_list();
            for (v, _) in rule.rhs.var_list() {
                if !lhs_vars.iter().any(|(n, _)| *n == v) {
                    return Err(ill(format!("free right-hand variable `{v}`")));
                }
            }
            if rule.rhs.size() >= rule.lhs.size() {
                return Err(ill("non-decreasing rule".into()));
            }
            for (v, _) in &lhs_vars {
                if occurrences(&rule.rhs, v) > occurrences(&rule.lhs, v) {
                    return Err(ill(format!("variable `{v}` duplicated on the right")));
                }
            }
            for other in &self.rules[i + 1..] {
                let a = rename_vars(&rule.lhs, "l$");
                let b = rename_vars(&other.lhs, "r$");
                if unify(&a, &b, Subst::new()).is_some() {
                    return Err(ill("overlapping left-hand sides".into()));
                }
            }
        }
        Ok(())
    }

    /// Innermost rewriting to the unique normal form.
    pub fn normalize(&self, t: &Term) -> Term {
        self.normalize_counted(t).0
    }

    /// Normal form plus the number of rewrite steps taken.
    pub fn normalize_counted(&self, t: &Term) -> (Term, usize) {
        let mut steps = 0usize;
        let n = self.norm(t, &mut steps);
        (n, steps)
    }

    fn norm(&self, t: &Term, steps: &mut usize) -> Term {
        match t {
            Term::Var(..) | Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => t.clone(),
            Term::Attr(n, v) => Term::Attr(n.clone(), Box::new(self.norm(v, steps))),
            Term::List(seq) => Term::List(self.norm_seq(seq, steps)),
            Term::Element(el) => Term::Element(Element {
                tag: el.tag.clone(),
                attrs: self.norm_seq(&el.attrs, steps),
                children: self.norm_seq(&el.children, steps),
            }),
            Term::Apply(f, args) => {
                let args: Vec<Term> = args.iter().map(|a| self.norm(a, steps)).collect();
                let reduced = Term::Apply(f.clone(), args);
                match self.reduce_root(&reduced) {
                    Some(next) => {
                        *steps += 1;
                        self.norm(&next, steps)
                    }
                    None => reduced,
                }
            }
        }
    }

    fn norm_seq(&self, seq: &Seq, steps: &mut usize) -> Seq {
        Seq {
            items: seq.items.iter().map(|i| self.norm(i, steps)).collect(),
            rest: seq.rest.clone(),
        }
    }

    /// One root rewrite step, if some rule matches the (argument-normal) term.
    pub fn reduce_root(&self, t: &Term) -> Option<Term> {
        let root = root_symbol(t)?;
        for &idx in self.by_root.get(root)? {
            let rule = &self.rules[idx];
            if let Some(subst) = rule_match(&rule.lhs, t, Subst::new()) {
                return Some(subst.apply(&rule.rhs));
            }
        }
        None
    }

    /// The sort of a term; fails on undeclared symbols and arity or sort
    /// mismatches, reporting the path to the offending subterm.
    pub fn sort_of(&self, t: &Term) -> Result<Sort, SortError> {
        let mut path = Vec::new();
        self.sort_at(t, &mut path)
    }

    fn sort_at(&self, t: &Term, path: &mut Vec<String>) -> Result<Sort, SortError> {
        match t {
            Term::Var(_, s) | Term::Wildcard(s) => Ok(*s),
            Term::Str(_) => Ok(Sort::String),
            Term::Fresh(f) => Ok(f.sort),
            Term::Attr(name, v) => {
                path.push(format!("@{name}"));
                let vs = self.sort_at(v, path)?;
                if !vs.fits(Sort::String) {
                    return Err(SortError::at(path, format!("attribute value has sort {vs}, expected string")));
                }
                path.pop();
                Ok(Sort::Att)
            }
            Term::List(seq) => {
                for (i, item) in seq.items.iter().enumerate() {
                    path.push(i.to_string());
                    self.sort_at(item, path)?;
                    path.pop();
                }
                Ok(Sort::List)
            }
            Term::Element(el) => {
                for (i, a) in el.attrs.items.iter().enumerate() {
                    path.push(format!("{}~attr{i}", el.tag));
                    let s = self.sort_at(a, path)?;
                    if s != Sort::Att {
                        return Err(SortError::at(path, format!("element attribute has sort {s}, expected att")));
                    }
                    path.pop();
                }
                for (i, c) in el.children.items.iter().enumerate() {
                    path.push(format!("{}~child{i}", el.tag));
                    let s = self.sort_at(c, path)?;
                    if !s.fits(Sort::Item) && s != Sort::List {
                        return Err(SortError::at(path, format!("element child has sort {s}, expected item")));
                    }
                    path.pop();
                }
                Ok(Sort::Item)
            }
            Term::Apply(f, args) => {
                let sym = self.symbols.get(f).ok_or_else(|| {
                    SortError::at(path, format!("unknown symbol `{f}`"))
                })?;
                if args.len() != sym.arg_sorts.len() {
                    return Err(SortError::at(
                        path,
                        format!("`{f}` expects {} arguments, got {}", sym.arg_sorts.len(), args.len()),
                    ));
                }
                for (i, (a, expect)) in args.iter().zip(&sym.arg_sorts).enumerate() {
                    path.push(format!("{f}#{i}"));
                    let s = self.sort_at(a, path)?;
                    if !s.fits(*expect) {
                        return Err(SortError::at(path, format!("argument of `{f}` has sort {s}, expected {expect}")));
                    }
                    path.pop();
                }
                Ok(sym.result_sort)
            }
        }
    }
}

fn occurrences(t: &Term, var: &str) -> usize {
    match t {
        Term::Var(n, _) => usize::from(n == var),
        Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => 0,
        Term::Attr(_, v) => occurrences(v, var),
        Term::Apply(_, args) => args.iter().map(|a| occurrences(a, var)).sum(),
        Term::List(seq) => {
            seq.items.iter().map(|a| occurrences(a, var)).sum::<usize>()
                + seq.rest.as_ref().map_or(0, |r| occurrences(r, var))
        }
        Term::Element(el) => {
            el.attrs.items.iter().map(|a| occurrences(a, var)).sum::<usize>()
                + el.children.items.iter().map(|a| occurrences(a, var)).sum::<usize>()
        }
    }
}

pub fn root_symbol(t: &Term) -> Option<&str> {
    match t {
        Term::Apply(f, _) => Some(f),
        _ => None,
    }
}

pub fn rename_vars(t: &Term, prefix: &str) -> Term {
    match t {
        Term::Var(n, s) => Term::Var(format!("{prefix}{n}"), *s),
        Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => t.clone(),
        Term::Attr(n, v) => Term::Attr(n.clone(), Box::new(rename_vars(v, prefix))),
        Term::Apply(f, args) => {
            Term::Apply(f.clone(), args.iter().map(|a| rename_vars(a, prefix)).collect())
        }
        Term::List(seq) => Term::List(rename_seq(seq, prefix)),
        Term::Element(el) => Term::Element(Element {
            tag: el.tag.clone(),
            attrs: rename_seq(&el.attrs, prefix),
            children: rename_seq(&el.children, prefix),
        }),
    }
}

fn rename_seq(seq: &Seq, prefix: &str) -> Seq {
    Seq {
        items: seq.items.iter().map(|t| rename_vars(t, prefix)).collect(),
        rest: seq.rest.as_ref().map(|r| Box::new(rename_vars(r, prefix))),
    }
}

/// First-order matching of a rule pattern against a term: syntactic, with
/// repeated pattern variables enforcing equality (the private key `s`
/// occurring twice in the `decrsa` rule).
fn rule_match(pattern: &Term, subject: &Term, mut subst: Subst) -> Option<Subst> {
    match (pattern, subject) {
        (Term::Var(n, _), _) => match subst.get(n) {
            Some(bound) => (bound == subject).then_some(subst),
            None => {
                subst.bind(n, subject.clone());
                Some(subst)
            }
        },
        (Term::Str(a), Term::Str(b)) => (a == b).then_some(subst),
        (Term::Fresh(a), Term::Fresh(b)) => (a == b).then_some(subst),
        (Term::Attr(n, v), Term::Attr(m, w)) if n == m => rule_match(v, w, subst),
        (Term::Apply(f, fa), Term::Apply(g, ga)) if f == g && fa.len() == ga.len() => {
            for (p, s) in fa.iter().zip(ga) {
                subst = rule_match(p, s, subst)?;
            }
            Some(subst)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sorts::Sort::*;

    fn crypto_table() -> SymbolTable {
        let mut t = SymbolTable::stdlib();
        let ctor = |name: &str, args: &[Sort], result| Symbol {
            name: name.into(),
            kind: SymbolKind::Constructor,
            arg_sorts: args.to_vec(),
            result_sort: result,
            rewrite: None,
        };
        t.declare(ctor("pk", &[Bytes], Bytes)).unwrap();
        t.declare(ctor("rsa", &[Bytes, Bytes], Bytes)).unwrap();
        let s = Term::var("s", Bytes);
        let b = Term::var("b", Bytes);
        t.declare(Symbol {
            name: "decrsa".into(),
            kind: SymbolKind::Destructor,
            arg_sorts: vec![Bytes, Bytes],
            result_sort: Bytes,
            rewrite: Some(RewriteRule {
                lhs: Term::apply(
                    "decrsa",
                    vec![
                        s.clone(),
                        Term::apply("rsa", vec![Term::apply("pk", vec![s.clone()]), b.clone()]),
                    ],
                ),
                rhs: b,
            }),
        })
        .unwrap();
        t.declare(ctor("rsasha1", &[Bytes, Bytes], Bytes)).unwrap();
        let x = Term::var("x", Bytes);
        let s2 = Term::var("s", Bytes);
        t.declare(Symbol {
            name: "checkrsasha1".into(),
            kind: SymbolKind::Destructor,
            arg_sorts: vec![Bytes, Bytes, Bytes],
            result_sort: Bytes,
            rewrite: Some(RewriteRule {
                lhs: Term::apply(
                    "checkrsasha1",
                    vec![
                        Term::apply("pk", vec![s2.clone()]),
                        x.clone(),
                        Term::apply("rsasha1", vec![s2.clone(), x.clone()]),
                    ],
                ),
                rhs: Term::apply("pk", vec![s2]),
            }),
        })
        .unwrap();
        t
    }

    #[test]
    fn declare_decrsa_rule_accepted() {
        crypto_table();
    }

    #[test]
    fn duplicate_symbol_rejected() {
        let mut t = crypto_table();
        let again = Symbol {
            name: "pk".into(),
            kind: SymbolKind::Constructor,
            arg_sorts: vec![Bytes],
            result_sort: Bytes,
            rewrite: None,
        };
        assert_eq!(t.declare(again), Err(DeclareError::DuplicateSymbol("pk".into())));
    }

    #[test]
    fn non_decreasing_rule_rejected() {
        let mut t = crypto_table();
        t.declare(Symbol {
            name: "pair".into(),
            kind: SymbolKind::Constructor,
            arg_sorts: vec![Bytes, Bytes],
            result_sort: Bytes,
            rewrite: None,
        })
        .unwrap();
        let x = Term::var("x", Bytes);
        let bad = Symbol {
            name: "bad".into(),
            kind: SymbolKind::Destructor,
            arg_sorts: vec![Bytes],
            result_sort: Bytes,
            rewrite: Some(RewriteRule {
                lhs: Term::apply("bad", vec![x.clone()]),
                rhs: Term::apply("pair", vec![x.clone(), x]),
            }),
        };
        assert!(matches!(t.declare(bad), Err(DeclareError::IllFormedRule { .. })));
    }

    #[test]
    fn free_rhs_variable_rejected() {
        let mut t = crypto_table();
        let bad = Symbol {
            name: "oops".into(),
            kind: SymbolKind::Destructor,
            arg_sorts: vec![Bytes],
            result_sort: Bytes,
            rewrite: Some(RewriteRule {
                lhs: Term::apply("oops", vec![Term::apply("pk", vec![Term::var("x", Bytes)])]),
                rhs: Term::var("y", Bytes),
            }),
        };
        assert!(matches!(t.declare(bad), Err(DeclareError::IllFormedRule { .. })));
    }

    #[test]
    fn rule_set_sanity_passes_and_detects_overlap() {
        let t = crypto_table();
        t.verify_rule_set().unwrap();
        // Force an overlapping pair through the internal rule store.
        let mut broken = crypto_table();
        broken
            .push_rule(RewriteRule {
                lhs: Term::apply("ibase64", vec![Term::var("z", String)]),
                rhs: Term::var("z", String),
            })
            .unwrap_err();
    }

    #[test]
    fn normalize_decrypts_and_checks_signatures() {
        let t = crypto_table();
        let s = Term::Fresh(crate::term::FreshName { id: 1, sort: Bytes, hint: "s".into() });
        let b = Term::Fresh(crate::term::FreshName { id: 2, sort: Bytes, hint: "b".into() });
        let enc = Term::apply("rsa", vec![Term::apply("pk", vec![s.clone()]), b.clone()]);
        let dec = Term::apply("decrsa", vec![s.clone(), enc]);
        assert_eq!(t.normalize(&dec), b);

        let x = Term::Fresh(crate::term::FreshName { id: 3, sort: Bytes, hint: "x".into() });
        let sig = Term::apply("rsasha1", vec![s.clone(), x.clone()]);
        let check = Term::apply(
            "checkrsasha1",
            vec![Term::apply("pk", vec![s.clone()]), x, sig],
        );
        assert_eq!(t.normalize(&check), Term::apply("pk", vec![s]));
    }

    #[test]
    fn normalize_leaves_irreducible_terms_alone() {
        let t = crypto_table();
        let k = Term::var("k", Bytes);
        let x = Term::var("x", Bytes);
        let rsa = Term::apply("rsa", vec![k, x]);
        assert_eq!(t.normalize(&rsa), rsa);
        // Stuck destructor application: wrong key, stays as-is.
        let s = Term::Fresh(crate::term::FreshName { id: 1, sort: Bytes, hint: "s".into() });
        let other = Term::Fresh(crate::term::FreshName { id: 2, sort: Bytes, hint: "t".into() });
        let enc = Term::apply("rsa", vec![Term::apply("pk", vec![s]), Term::str_b()]);
        let stuck = Term::apply("decrsa", vec![other, enc]);
        assert_eq!(t.normalize(&stuck), stuck);
    }

    #[test]
    fn coercion_inversions_cancel_both_ways() {
        let t = crypto_table();
        let e = Term::element("To", vec![], vec![Term::str("uri")]);
        let roundtrip = Term::apply("ic14n", vec![Term::apply("c14n", vec![e.clone()])]);
        assert_eq!(t.normalize(&roundtrip), e);
        let lit = Term::str("payload");
        let co = Term::apply("base64", vec![Term::apply("ibase64", vec![lit.clone()])]);
        assert_eq!(t.normalize(&co), lit);
    }

    #[test]
    fn sort_of_examples() {
        let t = crypto_table();
        let e = Term::element("To", vec![], vec![Term::str("uri")]);
        assert_eq!(t.sort_of(&e), Ok(Item));
        let digest = Term::apply(
            "base64",
            vec![Term::apply("sha1", vec![Term::apply("c14n", vec![e])])],
        );
        assert_eq!(t.sort_of(&digest), Ok(String));
        let bad = Term::apply("rsa", vec![Term::str("hello"), Term::var("x", Bytes)]);
        assert!(t.sort_of(&bad).is_err());
    }

    #[test]
    fn normalization_step_count_bounded_by_size() {
        let t = crypto_table();
        let s = Term::Fresh(crate::term::FreshName { id: 9, sort: Bytes, hint: "s".into() });
        let mut term = Term::apply("pk", vec![s.clone()]);
        for _ in 0..4 {
            term = Term::apply(
                "decrsa",
                vec![s.clone(), Term::apply("rsa", vec![Term::apply("pk", vec![s.clone()]), term])],
            );
        }
        let size = term.size();
        let (_, steps) = t.normalize_counted(&term);
        assert!(steps <= size, "{steps} rewrite steps exceeds term size {size}");
    }
}

impl Term {
    #[cfg(test)]
    fn str_b() -> Term {
        Term::apply("utf8", vec![Term::str("b")])
    }
}
