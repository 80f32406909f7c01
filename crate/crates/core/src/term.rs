//! Sorted terms: XML elements and attributes, string literals, symbolic
//! byte arrays built from declared function symbols, fresh names, lists,
//! variables and wildcards.
//!
//! Terms double as patterns. Wildcards and `@` rest markers are only legal
//! in pattern positions; a ground term never contains them.

use crate::sorts::Sort;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// A generated name, opaque and globally unique within a run.
///
/// Fresh names are never equal to string literals, so an attacker cannot
/// guess a generated password or identifier by synthesising the right text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FreshName {
    pub id: u64,
    pub sort: Sort,
    /// Binder name the value was created for, kept for readable traces.
    pub hint: String,
}

/// A sequence of terms with an optional rest marker.
///
/// Element children and attribute lists are sequences. In a pattern the
/// rest slot may hold a variable (capturing the remaining suffix as a
/// [`Term::List`]) or a wildcard; in a constructed term a bound rest
/// variable is spliced away by substitution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Seq {
    pub items: Vec<Term>,
    pub rest: Option<Box<Term>>,
}

impl Seq {
    pub fn new(items: Vec<Term>) -> Seq {
        Seq { items, rest: None }
    }
    pub fn with_rest(items: Vec<Term>, rest: Term) -> Seq {
        Seq { items, rest: Some(Box::new(rest)) }
    }
    pub fn empty() -> Seq {
        Seq { items: Vec::new(), rest: None }
    }
    pub fn is_closed(&self) -> bool {
        self.rest.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    /// Named variable with its declared sort.
    Var(String, Sort),
    /// String literal.
    Str(String),
    /// Opaque generated name (from `new`), of sort bytes or string.
    Fresh(FreshName),
    /// XML element: tag, attribute sequence, child sequence.
    Element(Element),
    /// Named attribute with a string-sorted value.
    Attr(String, Box<Term>),
    /// Application of a declared constructor or destructor.
    Apply(String, Vec<Term>),
    /// A list value or list pattern (binding of a rest variable).
    List(Seq),
    /// Pattern wildcard `_`.
    Wildcard(Sort),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Element {
    pub tag: String,
    pub attrs: Seq,
    pub children: Seq,
}

/// One step into a term, for position-based rewriting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStep {
    ApplyArg(usize),
    AttrValue,
    ElemAttr(usize),
    ElemChild(usize),
    ListItem(usize),
}

impl Term {
    pub fn var(name: &str, sort: Sort) -> Term {
        Term::Var(name.to_string(), sort)
    }
    pub fn str(text: &str) -> Term {
        Term::Str(text.to_string())
    }
    pub fn apply(sym: &str, args: Vec<Term>) -> Term {
        Term::Apply(sym.to_string(), args)
    }
    pub fn element(tag: &str, attrs: Vec<Term>, children: Vec<Term>) -> Term {
        Term::Element(Element {
            tag: tag.to_string(),
            attrs: Seq::new(attrs),
            children: Seq::new(children),
        })
    }
    pub fn attr(name: &str, value: Term) -> Term {
        Term::Attr(name.to_string(), Box::new(value))
    }

    /// Node count; rewrite rules must strictly decrease it.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(..) | Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => 1,
            Term::Attr(_, v) => 1 + v.size(),
            Term::Apply(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::List(seq) => 1 + seq_size(seq),
            Term::Element(el) => 1 + seq_size(&el.attrs) + seq_size(&el.children),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(..) | Term::Wildcard(_) => false,
            Term::Str(_) | Term::Fresh(_) => true,
            Term::Attr(_, v) => v.is_ground(),
            Term::Apply(_, args) => args.iter().all(Term::is_ground),
            Term::List(seq) => seq_ground(seq),
            Term::Element(el) => seq_ground(&el.attrs) && seq_ground(&el.children),
        }
    }

    /// Collects free variable names (rest variables included) in first-occurrence order.
    pub fn vars(&self, out: &mut Vec<(String, Sort)>) {
        match self {
            Term::Var(n, s) => {
                if !out.iter().any(|(m, _)| m == n) {
                    out.push((n.clone(), *s));
                }
            }
            Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => {}
            Term::Attr(_, v) => v.vars(out),
            Term::Apply(_, args) => args.iter().for_each(|a| a.vars(out)),
            Term::List(seq) => seq_vars(seq, out),
            Term::Element(el) => {
                seq_vars(&el.attrs, out);
                seq_vars(&el.children, out);
            }
        }
    }

    pub fn var_list(&self) -> Vec<(String, Sort)> {
        let mut v = Vec::new();
        self.vars(&mut v);
        v
    }

    pub fn has_wildcard(&self) -> bool {
        match self {
            Term::Wildcard(_) => true,
            Term::Var(..) | Term::Str(_) | Term::Fresh(_) => false,
            Term::Attr(_, v) => v.has_wildcard(),
            Term::Apply(_, args) => args.iter().any(Term::has_wildcard),
            Term::List(seq) => seq_wild(seq),
            Term::Element(el) => seq_wild(&el.attrs) || seq_wild(&el.children),
        }
    }

    /// Positions of all proper and improper subterms, paired with the
    /// subterm, in preorder. Rest slots are not positions.
    pub fn positions(&self) -> Vec<(Vec<PathStep>, &Term)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk_positions(&mut path, &mut out);
        out
    }

    fn walk_positions<'a>(
        &'a self,
        path: &mut Vec<PathStep>,
        out: &mut Vec<(Vec<PathStep>, &'a Term)>,
    ) {
        out.push((path.clone(), self));
        match self {
            Term::Var(..) | Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => {}
            Term::Attr(_, v) => {
                path.push(PathStep::AttrValue);
                v.walk_positions(path, out);
                path.pop();
            }
            Term::Apply(_, args) => {
                for (i, a) in args.iter().enumerate() {
                    path.push(PathStep::ApplyArg(i));
                    a.walk_positions(path, out);
                    path.pop();
                }
            }
            Term::List(seq) => {
                for (i, t) in seq.items.iter().enumerate() {
                    path.push(PathStep::ListItem(i));
                    t.walk_positions(path, out);
                    path.pop();
                }
            }
            Term::Element(el) => {
                for (i, a) in el.attrs.items.iter().enumerate() {
                    path.push(PathStep::ElemAttr(i));
                    a.walk_positions(path, out);
                    path.pop();
                }
                for (i, c) in el.children.items.iter().enumerate() {
                    path.push(PathStep::ElemChild(i));
                    c.walk_positions(path, out);
                    path.pop();
                }
            }
        }
    }

    /// The term with the subterm at `path` replaced.
    pub fn replace_at(&self, path: &[PathStep], new: Term) -> Term {
        let Some((step, rest)) = path.split_first() else { return new };
        let mut t = self.clone();
        match (&mut t, step) {
            (Term::Attr(_, v), PathStep::AttrValue) => **v = v.replace_at(rest, new),
            (Term::Apply(_, args), PathStep::ApplyArg(i)) => args[*i] = args[*i].replace_at(rest, new),
            (Term::List(seq), PathStep::ListItem(i)) => {
                seq.items[*i] = seq.items[*i].replace_at(rest, new)
            }
            (Term::Element(el), PathStep::ElemAttr(i)) => {
                el.attrs.items[*i] = el.attrs.items[*i].replace_at(rest, new)
            }
            (Term::Element(el), PathStep::ElemChild(i)) => {
                el.children.items[*i] = el.children.items[*i].replace_at(rest, new)
            }
            _ => panic!("path does not fit the term shape"),
        }
        t
    }

    /// All subterms, including the term itself (attribute values and
    /// sequence members descend; sequences themselves are not yielded).
    pub fn subterms(&self, out: &mut Vec<Term>) {
        out.push(self.clone());
        match self {
            Term::Var(..) | Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => {}
            Term::Attr(_, v) => v.subterms(out),
            Term::Apply(_, args) => args.iter().for_each(|a| a.subterms(out)),
            Term::List(seq) => seq.items.iter().for_each(|t| t.subterms(out)),
            Term::Element(el) => {
                el.attrs.items.iter().for_each(|t| t.subterms(out));
                el.children.items.iter().for_each(|t| t.subterms(out));
            }
        }
    }
}

fn seq_size(seq: &Seq) -> usize {
    seq.items.iter().map(Term::size).sum::<usize>() + seq.rest.as_ref().map_or(0, |r| r.size())
}

fn seq_ground(seq: &Seq) -> bool {
    seq.rest.is_none() && seq.items.iter().all(Term::is_ground)
}

fn seq_vars(seq: &Seq, out: &mut Vec<(String, Sort)>) {
    seq.items.iter().for_each(|t| t.vars(out));
    if let Some(r) = &seq.rest {
        r.vars(out);
    }
}

fn seq_wild(seq: &Seq) -> bool {
    seq.items.iter().any(Term::has_wildcard)
        || seq.rest.as_deref().is_some_and(|r| matches!(r, Term::Wildcard(_)))
}

/// A substitution from variable names to terms.
///
/// Application is idempotent: bindings are resolved against each other when
/// inserted, so bound terms never mention other bound variables.
#[derive(Debug, Clone)]
pub struct Subst {
    map: BTreeMap<String, Term>,
    all_ground: bool,
}

impl Default for Subst {
    fn default() -> Subst {
        Subst { map: BTreeMap::new(), all_ground: true }
    }
}

impl PartialEq for Subst {
    fn eq(&self, other: &Subst) -> bool {
        self.map == other.map
    }
}

impl Eq for Subst {}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.map.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.map.iter()
    }

    /// Binds `name` to the term, keeping the substitution idempotent: the
    /// inserted term is resolved against existing bindings, and existing
    /// bindings are resolved against the new one. Ground bindings (the
    /// common case in matching) skip the re-resolution pass.
    pub fn bind(&mut self, name: &str, term: Term) {
        let resolved = if self.all_ground && term.is_ground() { term } else { self.apply(&term) };
        if !resolved.is_ground() {
            self.all_ground = false;
        }
        if !self.all_ground {
            let mut single = Subst::new();
            single.map.insert(name.to_string(), resolved.clone());
            for value in self.map.values_mut() {
                *value = single.apply(value);
            }
        }
        self.map.insert(name.to_string(), resolved);
    }

    /// Keeps only bindings for the given variable names.
    pub fn restricted_to(&self, names: &[String]) -> Subst {
        let map: BTreeMap<String, Term> = self
            .map
            .iter()
            .filter(|(k, _)| names.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let all_ground = map.values().all(Term::is_ground);
        Subst { map, all_ground }
    }

    pub fn apply(&self, term: &Term) -> Term {
        match term {
            Term::Var(n, _) => match self.map.get(n) {
                Some(t) => t.clone(),
                None => term.clone(),
            },
            Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => term.clone(),
            Term::Attr(n, v) => Term::Attr(n.clone(), Box::new(self.apply(v))),
            Term::Apply(f, args) => {
                Term::Apply(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            Term::List(seq) => Term::List(self.apply_seq(seq)),
            Term::Element(el) => Term::Element(Element {
                tag: el.tag.clone(),
                attrs: self.apply_seq(&el.attrs),
                children: self.apply_seq(&el.children),
            }),
        }
    }

    /// Applies to a sequence, splicing a rest variable bound to a list value.
    fn apply_seq(&self, seq: &Seq) -> Seq {
        let mut items: Vec<Term> = seq.items.iter().map(|t| self.apply(t)).collect();
        let mut rest = None;
        if let Some(r) = &seq.rest {
            match self.apply(r) {
                Term::List(inner) => {
                    items.extend(inner.items);
                    rest = inner.rest;
                }
                other @ (Term::Var(..) | Term::Wildcard(_)) => rest = Some(Box::new(other)),
                other => {
                    // A rest slot bound to a non-list is kept as a singleton splice.
                    items.push(other);
                }
            }
        }
        Seq { items, rest }
    }
}

impl FromIterator<(String, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Subst {
        let mut s = Subst::new();
        for (k, v) in iter {
            s.bind(&k, v);
        }
        s
    }
}

// Display mirrors the script syntax: quoted literals, `</>` closers,
// `@` rest markers.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n, _) => write!(f, "{n}"),
            Term::Str(s) => write!(f, "\"{s}\""),
            Term::Fresh(fr) => write!(f, "{}#{}", fr.hint, fr.id),
            Term::Wildcard(_) => write!(f, "_"),
            Term::Attr(n, v) => write!(f, "{n}={v}"),
            Term::Apply(sym, args) => {
                write!(f, "{sym}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Term::List(seq) => {
                write!(f, "[")?;
                fmt_seq(f, seq)?;
                write!(f, "]")
            }
            Term::Element(el) => {
                write!(f, "<{}", el.tag)?;
                if !el.attrs.items.is_empty() || el.attrs.rest.is_some() {
                    write!(f, " ")?;
                    fmt_seq(f, &el.attrs)?;
                }
                write!(f, ">")?;
                fmt_seq(f, &el.children)?;
                write!(f, "</>")
            }
        }
    }
}

fn fmt_seq(f: &mut fmt::Formatter<'_>, seq: &Seq) -> fmt::Result {
    let mut first = true;
    for item in &seq.items {
        if !first {
            write!(f, " ")?;
        }
        first = false;
        write!(f, "{item}")?;
    }
    if let Some(rest) = &seq.rest {
        if !first {
            write!(f, " ")?;
        }
        write!(f, "@ {rest}")?;
    }
    Ok(())
}
