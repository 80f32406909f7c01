//! First-order unification over terms, including sequences with rest
//! markers. Used for the rule non-overlap check, destructor narrowing,
//! and resolution.

use crate::term::{Seq, Subst, Term};

/// Most general unifier extending `subst`, or `None`.
///
/// Wildcards unify with anything without creating a binding. A rest
/// variable may absorb a suffix (possibly itself open-ended). The occurs
/// check is performed on every variable binding. Bound variables resolve
/// through the (idempotent) substitution lazily, one lookup per
/// occurrence.
pub fn unify(a: &Term, b: &Term, mut subst: Subst) -> Option<Subst> {
    let a = match a {
        Term::Var(n, _) => subst.get(n).cloned().unwrap_or_else(|| a.clone()),
        _ => a.clone(),
    };
    let b = match b {
        Term::Var(n, _) => subst.get(n).cloned().unwrap_or_else(|| b.clone()),
        _ => b.clone(),
    };
    match (&a, &b) {
        (Term::Wildcard(_), _) | (_, Term::Wildcard(_)) => Some(subst),
        (Term::Var(n, _), Term::Var(m, _)) if n == m => Some(subst),
        (Term::Var(n, _), t) | (t, Term::Var(n, _)) => {
            let t = subst.apply(t);
            if occurs(n, &t) {
                return None;
            }
            subst.bind(n, t);
            Some(subst)
        }
        (Term::Str(x), Term::Str(y)) => (x == y).then_some(subst),
        (Term::Fresh(x), Term::Fresh(y)) => (x == y).then_some(subst),
        (Term::Attr(n, v), Term::Attr(m, w)) if n == m => unify(v, w, subst),
        (Term::Apply(f, fa), Term::Apply(g, ga)) if f == g && fa.len() == ga.len() => {
            for (x, y) in fa.iter().zip(ga) {
                subst = unify(x, y, subst)?;
            }
            Some(subst)
        }
        (Term::List(x), Term::List(y)) => unify_seq(x, y, subst),
        (Term::Element(x), Term::Element(y)) if x.tag == y.tag => {
            let subst = unify_seq(&x.attrs, &y.attrs, subst)?;
            unify_seq(&x.children, &y.children, subst)
        }
        _ => None,
    }
}

fn unify_seq(a: &Seq, b: &Seq, mut subst: Subst) -> Option<Subst> {
    let shared = a.items.len().min(b.items.len());
    for (x, y) in a.items[..shared].iter().zip(&b.items[..shared]) {
        subst = unify(x, y, subst)?;
    }
    let (longer, shorter) = if a.items.len() >= b.items.len() { (a, b) } else { (b, a) };
    let suffix = &longer.items[shared..];
    match (&shorter.rest, suffix.is_empty()) {
        (None, true) => close_rest(&longer.rest, subst),
        (None, false) => None,
        (Some(rest), _) => {
            let tail = Seq {
                items: suffix.to_vec(),
                rest: longer.rest.clone(),
            };
            unify(rest, &Term::List(tail), subst)
        }
    }
}

/// Unifies an open tail with the empty sequence.
fn close_rest(rest: &Option<Box<Term>>, subst: Subst) -> Option<Subst> {
    match rest {
        None => Some(subst),
        Some(r) => unify(r, &Term::List(Seq::empty()), subst),
    }
}

fn occurs(name: &str, t: &Term) -> bool {
    match t {
        Term::Var(n, _) => n == name,
        Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => false,
        Term::Attr(_, v) => occurs(name, v),
        Term::Apply(_, args) => args.iter().any(|x| occurs(name, x)),
        Term::List(seq) => {
            seq.items.iter().any(|x| occurs(name, x))
                || seq.rest.as_deref().is_some_and(|r| occurs(name, r))
        }
        Term::Element(el) => {
            el.attrs.items.iter().any(|x| occurs(name, x))
                || el.attrs.rest.as_deref().is_some_and(|r| occurs(name, r))
                || el.children.items.iter().any(|x| occurs(name, x))
                || el.children.rest.as_deref().is_some_and(|r| occurs(name, r))
        }
    }
}
