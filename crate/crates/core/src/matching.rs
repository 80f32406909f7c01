//! Pattern matching against normal-form subjects.
//!
//! Matching is top-down and structural. Where the pattern has an invertible
//! coercion (`base64`, `c14n`, `utf8`) and the subject is plain data, the
//! declared inverse destructor is applied to the subject and matching
//! recurses; the coercion co-rules guarantee that the resulting bindings
//! re-normalize to the subject. Non-invertible constructors (`rsa`, `pk`,
//! hashes) match only syntactically, and a stuck destructor application in
//! the subject never matches through an inversion.

use crate::symtab::SymbolTable;
use crate::term::{Seq, Subst, Term};

/// All substitutions extending `seed` under which the pattern, once
/// instantiated and normalized, equals the subject.
///
/// The subject must be a ground normal form. An empty result means no
/// match. Solutions are produced in a fixed order and deduplicated.
pub fn match_pattern(table: &SymbolTable, pattern: &Term, subject: &Term, seed: &Subst) -> Vec<Subst> {
    let mut out = step(table, pattern, subject, seed.clone());
    out.dedup();
    out
}

/// True iff the pattern matches with at least one substitution.
pub fn matches(table: &SymbolTable, pattern: &Term, subject: &Term, seed: &Subst) -> bool {
    !match_pattern(table, pattern, subject, seed).is_empty()
}

fn step(table: &SymbolTable, pattern: &Term, subject: &Term, subst: Subst) -> Vec<Subst> {
    match (pattern, subject) {
        (Term::Wildcard(s), _) => match table.sort_of(subject) {
            Ok(sub) if sub.fits(*s) || *s == sub => vec![subst],
            _ => vec![],
        },
        (Term::Var(n, s), _) => {
            if let Some(bound) = subst.get(n) {
                // Bound variables act as constants; both sides are ground.
                return if bound == subject { vec![subst] } else { vec![] };
            }
            match table.sort_of(subject) {
                Ok(sub) if sub.fits(*s) => {
                    let mut next = subst;
                    next.bind(n, subject.clone());
                    vec![next]
                }
                _ => vec![],
            }
        }
        (Term::Str(a), Term::Str(b)) => {
            if a == b {
                vec![subst]
            } else {
                vec![]
            }
        }
        (Term::Fresh(a), Term::Fresh(b)) => {
            if a == b {
                vec![subst]
            } else {
                vec![]
            }
        }
        (Term::Attr(n, v), Term::Attr(m, w)) if n == m => step(table, v, w, subst),
        (Term::Element(p), Term::Element(s)) if p.tag == s.tag => {
            let solutions = match_seq(table, &p.attrs, &s.attrs.items, subst);
            solutions
                .into_iter()
                .flat_map(|sol| match_seq(table, &p.children, &s.children.items, sol))
                .collect()
        }
        (Term::List(p), Term::List(s)) => match_seq(table, p, &s.items, subst),
        (Term::Apply(f, pargs), _) => {
            // A symbol application may need normalization once its
            // variables are instantiated (a digest over bound data), so
            // applications resolve against the substitution here; the
            // resolved subtree is small compared to the element spine.
            let resolved = subst.apply(pattern);
            if resolved.is_ground() && !resolved.has_wildcard() {
                return if table.normalize(&resolved) == *subject { vec![subst] } else { vec![] };
            }
            match subject {
                Term::Apply(g, sargs) if f == g && pargs.len() == sargs.len() => {
                    let mut sols = vec![subst];
                    for (p, s) in pargs.iter().zip(sargs) {
                        sols = sols.into_iter().flat_map(|sol| step(table, p, s, sol)).collect();
                        if sols.is_empty() {
                            break;
                        }
                    }
                    sols
                }
                // Inversion: pattern f(p) against plain data solves p as
                // the inverse image of the subject.
                Term::Str(_) | Term::Fresh(_) | Term::Element(_) | Term::Attr(..) | Term::List(_) => {
                    let Some(inv) = table.inverse_of(f) else { return vec![] };
                    let Some(sym) = table.get(f) else { return vec![] };
                    match table.sort_of(subject) {
                        Ok(s) if s.fits(sym.result_sort) => {}
                        _ => return vec![],
                    }
                    let image = table.normalize(&Term::apply(inv, vec![subject.clone()]));
                    step(table, &pargs[0], &image, subst)
                }
                _ => vec![],
            }
        }
        _ => vec![],
    }
}

/// Matches a pattern sequence against subject items: pairwise on the
/// listed prefix, then the rest marker absorbs the unique suffix.
fn match_seq(table: &SymbolTable, pat: &Seq, subject: &[Term], subst: Subst) -> Vec<Subst> {
    if subject.len() < pat.items.len() {
        return vec![];
    }
    if pat.rest.is_none() && subject.len() != pat.items.len() {
        return vec![];
    }
    let mut sols = vec![subst];
    for (p, s) in pat.items.iter().zip(subject) {
        sols = sols.into_iter().flat_map(|sol| step(table, p, s, sol)).collect();
        if sols.is_empty() {
            return sols;
        }
    }
    let suffix = &subject[pat.items.len()..];
    match pat.rest.as_deref() {
        None => sols,
        Some(Term::Wildcard(_)) => sols,
        Some(rest) => {
            let tail = Term::List(Seq::new(suffix.to_vec()));
            sols.into_iter().flat_map(|sol| step(table, rest, &tail, sol)).collect()
        }
    }
}

/// Equality modulo wildcard positions in `pattern`; used to re-check the
/// soundness of returned substitutions on patterns that contain `_`.
pub fn eq_modulo_wildcards(pattern: &Term, subject: &Term) -> bool {
    match (pattern, subject) {
        (Term::Wildcard(_), _) => true,
        (Term::Element(p), Term::Element(s)) => {
            p.tag == s.tag
                && seq_eq(&p.attrs, &s.attrs.items)
                && seq_eq(&p.children, &s.children.items)
        }
        (Term::List(p), Term::List(s)) => seq_eq(p, &s.items),
        (Term::Attr(n, v), Term::Attr(m, w)) => n == m && eq_modulo_wildcards(v, w),
        (Term::Apply(f, fa), Term::Apply(g, ga)) => {
            f == g
                && fa.len() == ga.len()
                && fa.iter().zip(ga).all(|(a, b)| eq_modulo_wildcards(a, b))
        }
        _ => pattern == subject,
    }
}

fn seq_eq(pat: &Seq, subject: &[Term]) -> bool {
    if subject.len() < pat.items.len() {
        return false;
    }
    if pat.rest.is_none() && subject.len() != pat.items.len() {
        return false;
    }
    if !pat.items.iter().zip(subject).all(|(a, b)| eq_modulo_wildcards(a, b)) {
        return false;
    }
    match pat.rest.as_deref() {
        None | Some(Term::Wildcard(_)) => true,
        Some(Term::List(rest)) => {
            let suffix = &subject[pat.items.len()..];
            rest.rest.is_none()
                && rest.items.len() == suffix.len()
                && rest.items.iter().zip(suffix).all(|(a, b)| eq_modulo_wildcards(a, b))
        }
        Some(other) => {
            subject.len() == pat.items.len() + 1 && eq_modulo_wildcards(other, &subject[pat.items.len()])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sorts::Sort::*;
    use crate::symtab::{RewriteRule, Symbol, SymbolKind};

    fn table() -> SymbolTable {
        let mut t = SymbolTable::stdlib();
        t.declare(Symbol {
            name: "pk".into(),
            kind: SymbolKind::Constructor,
            arg_sorts: vec![Bytes],
            result_sort: Bytes,
            rewrite: None,
        })
        .unwrap();
        t.declare(Symbol {
            name: "rsa".into(),
            kind: SymbolKind::Constructor,
            arg_sorts: vec![Bytes, Bytes],
            result_sort: Bytes,
            rewrite: None,
        })
        .unwrap();
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
                    vec![s.clone(), Term::apply("rsa", vec![Term::apply("pk", vec![s.clone()]), b.clone()])],
                ),
                rhs: b,
            }),
        })
        .unwrap();
        t
    }

    #[test]
    fn bare_variable_matches_anything() {
        let t = table();
        let subject = Term::element("Body", vec![], vec![Term::str("req")]);
        let sols = match_pattern(&t, &Term::var("x", Item), &subject, &Subst::new());
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].get("x"), Some(&subject));
    }

    #[test]
    fn created_element_binds_timestamp() {
        let t = table();
        let pattern = Term::element("Created", vec![], vec![Term::var("t", String)]);
        let subject = Term::element("Created", vec![], vec![Term::str("2004-03-19T09:46:32Z")]);
        let sols = match_pattern(&t, &pattern, &subject, &Subst::new());
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].get("t"), Some(&Term::str("2004-03-19T09:46:32Z")));
    }

    #[test]
    fn tag_mismatch_yields_no_match() {
        let t = table();
        let pattern = Term::element(
            "User",
            vec![],
            vec![
                Term::element("Username", vec![], vec![Term::var("u", String)]),
                Term::element("Password", vec![], vec![Term::var("p", String)]),
            ],
        );
        let subject = Term::element("Service", vec![], vec![Term::str("x")]);
        assert!(match_pattern(&t, &pattern, &subject, &Subst::new()).is_empty());
    }

    #[test]
    fn attribute_rest_wildcard_absorbs_all_attributes() {
        let t = table();
        let mut el = match Term::element("UsernameToken", vec![], vec![Term::str("u")]) {
            Term::Element(e) => e,
            _ => unreachable!(),
        };
        el.attrs.rest = Some(Box::new(Term::Wildcard(crate::sorts::Sort::List)));
        let pattern = Term::Element(el);
        let subject = Term::element(
            "UsernameToken",
            vec![Term::attr("Id", Term::str("1")), Term::attr("Type", Term::str("x"))],
            vec![Term::str("u")],
        );
        assert_eq!(match_pattern(&t, &pattern, &subject, &Subst::new()).len(), 1);
    }

    #[test]
    fn child_rest_variable_captures_suffix() {
        let t = table();
        let mut el = match Term::element("list", vec![], vec![Term::var("h", Item)]) {
            Term::Element(e) => e,
            _ => unreachable!(),
        };
        el.children.rest = Some(Box::new(Term::var("rest", crate::sorts::Sort::List)));
        let pattern = Term::Element(el);
        let subject =
            Term::element("list", vec![], vec![Term::str("a"), Term::str("b"), Term::str("c")]);
        let sols = match_pattern(&t, &pattern, &subject, &Subst::new());
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].get("h"), Some(&Term::str("a")));
        assert_eq!(
            sols[0].get("rest"),
            Some(&Term::List(crate::term::Seq::new(vec![Term::str("b"), Term::str("c")])))
        );
    }

    #[test]
    fn base64_pattern_inverts_against_string_literal() {
        let t = table();
        let pattern = Term::apply("base64", vec![Term::var("cipher", Bytes)]);
        let subject = Term::str("opaque-wire-data");
        let sols = match_pattern(&t, &pattern, &subject, &Subst::new());
        assert_eq!(sols.len(), 1);
        let bound = sols[0].get("cipher").unwrap();
        assert_eq!(*bound, Term::apply("ibase64", vec![subject.clone()]));
        // Soundness: the instantiated pattern re-normalizes to the subject.
        assert_eq!(t.normalize(&sols[0].apply(&pattern)), subject);
    }

    #[test]
    fn base64_pattern_matches_base64_subject_syntactically() {
        let t = table();
        let pattern = Term::apply("base64", vec![Term::var("cipher", Bytes)]);
        let payload = Term::apply("rsa", vec![Term::var_free(), Term::var_free()]);
        let payload = t.normalize(&payload);
        let subject = Term::apply("base64", vec![payload.clone()]);
        let sols = match_pattern(&t, &pattern, &subject, &Subst::new());
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].get("cipher"), Some(&payload));
    }

    #[test]
    fn opaque_constructors_never_invert() {
        let t = table();
        // rsa is not invertible: matching rsa(k,x) against a fresh byte
        // array finds nothing.
        let pattern = Term::apply("rsa", vec![Term::var("k", Bytes), Term::var("x", Bytes)]);
        let subject = Term::Fresh(crate::term::FreshName { id: 7, sort: Bytes, hint: "n".into() });
        assert!(match_pattern(&t, &pattern, &subject, &Subst::new()).is_empty());
        // And a coercion pattern does not invert a stuck destructor subject.
        let c14n_pat = Term::apply("c14n", vec![Term::var("p", Item)]);
        let stuck = Term::apply(
            "decrsa",
            vec![subject.clone(), Term::Fresh(crate::term::FreshName { id: 8, sort: Bytes, hint: "e".into() })],
        );
        assert!(match_pattern(&t, &c14n_pat, &stuck, &Subst::new()).is_empty());
    }

    #[test]
    fn seeded_variables_act_as_constants() {
        let t = table();
        let pattern = Term::element(
            "User",
            vec![],
            vec![
                Term::element("Username", vec![], vec![Term::var("u", String)]),
                Term::element("Password", vec![], vec![Term::var("p", String)]),
            ],
        );
        let subject = Term::element(
            "User",
            vec![],
            vec![
                Term::element("Username", vec![], vec![Term::str("alice")]),
                Term::element("Password", vec![], vec![Term::str("pw")]),
            ],
        );
        let mut seed = Subst::new();
        seed.bind("u", Term::str("alice"));
        assert_eq!(match_pattern(&t, &pattern, &subject, &seed).len(), 1);
        let mut wrong = Subst::new();
        wrong.bind("u", Term::str("bob"));
        assert!(match_pattern(&t, &pattern, &subject, &wrong).is_empty());
    }
}

#[cfg(test)]
impl Term {
    fn var_free() -> Term {
        Term::Fresh(crate::term::FreshName { id: 99, sort: crate::sorts::Sort::Bytes, hint: "k".into() })
    }
}
