//! Symbolic expansion of predicates: solves clause bodies by unification
//! instead of matching, producing substitutions over constructor terms.
//!
//! Destructor applications are eliminated by narrowing with their rewrite
//! rules, so a successful expansion never mentions a destructor; a
//! destructor that cannot fire contributes no branch. The Horn compiler
//! uses expansion to fold predicate calls into process clauses, and the
//! attack search uses it to compute the message shapes a blocked input is
//! prepared to accept.

use crate::symtab::{rename_vars, root_symbol, SymbolKind, SymbolTable};
use crate::syntax::ast::Atom;
use crate::syntax::CheckedScript;
use crate::term::{Element, Seq, Subst, Term};
use crate::unify::unify;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("expansion budget exhausted at `{0}` (unbounded recursion?)")]
    Budget(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}

pub struct Expander<'a> {
    script: &'a CheckedScript,
    fresh: u64,
    nodes: usize,
    max_nodes: usize,
    max_depth: usize,
}

pub const DEFAULT_MAX_NODES: usize = 200_000;
pub const DEFAULT_MAX_DEPTH: usize = 256;

impl<'a> Expander<'a> {
    pub fn new(script: &'a CheckedScript) -> Expander<'a> {
        Expander {
            script,
            fresh: 0,
            nodes: 0,
            max_nodes: DEFAULT_MAX_NODES,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    pub fn table(&self) -> &SymbolTable {
        &self.script.table
    }

    /// A fresh variable, never colliding with script variables.
    pub fn fresh_var(&mut self, hint: &str, sort: crate::sorts::Sort) -> Term {
        self.fresh += 1;
        Term::Var(format!("{hint}%{}", self.fresh), sort)
    }

    /// All symbolic solutions of a formula under a seed substitution.
    pub fn formula(&mut self, atoms: &[Atom], seed: Subst) -> Result<Vec<Subst>, ExpandError> {
        self.atoms(atoms, seed, self.max_depth)
    }

    fn charge(&mut self, what: &str) -> Result<(), ExpandError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(ExpandError::Budget(what.to_string()));
        }
        Ok(())
    }

    fn atoms(&mut self, atoms: &[Atom], seed: Subst, depth: usize) -> Result<Vec<Subst>, ExpandError> {
        let mut branches = vec![seed];
        for atom in atoms {
            let mut next = Vec::new();
            for branch in branches {
                next.extend(self.atom(atom, branch, depth)?);
            }
            branches = next;
            if branches.is_empty() {
                break;
            }
        }
        Ok(branches)
    }

    fn atom(&mut self, atom: &Atom, subst: Subst, depth: usize) -> Result<Vec<Subst>, ExpandError> {
        match atom {
            Atom::Eq { left, right, .. } => {
                self.charge("=")?;
                let mut out = Vec::new();
                for (l, s1) in self.narrow(left, subst)? {
                    for (r, s2) in self.narrow(&right.clone(), s1)? {
                        if let Some(s3) = unify(&l, &r, s2) {
                            out.push(s3);
                        }
                    }
                }
                Ok(out)
            }
            Atom::Call { predicate, args, .. } => self.call(predicate, args, subst, depth),
        }
    }

    /// Expands one predicate call into the solutions of its clauses.
    pub fn call(
        &mut self,
        predicate: &str,
        args: &[Term],
        subst: Subst,
        depth: usize,
    ) -> Result<Vec<Subst>, ExpandError> {
        if depth == 0 {
            return Err(ExpandError::Budget(predicate.to_string()));
        }
        self.charge(predicate)?;
        let def = self
            .script
            .predicates
            .get(predicate)
            .ok_or_else(|| ExpandError::UnknownPredicate(predicate.to_string()))?;

        // Narrow destructor applications out of the arguments first.
        let mut arg_branches = vec![(Vec::new(), subst)];
        for arg in args {
            let mut next = Vec::new();
            for (done, s) in arg_branches {
                for (t, s2) in self.narrow(arg, s)? {
                    let mut done = done.clone();
                    done.push(t);
                    next.push((done, s2));
                }
            }
            arg_branches = next;
        }

        let mut out = Vec::new();
        for clause in def.clauses.clone() {
            self.fresh += 1;
            let prefix = format!("{predicate}%{}%", self.fresh);
            let params: Vec<Term> = clause
                .params
                .iter()
                .map(|(n, s)| Term::Var(format!("{prefix}{n}"), *s))
                .collect();
            let body: Vec<Atom> =
                clause.body.iter().map(|a| self.rename_atom(a, &prefix)).collect();
            for (arg_terms, s) in &arg_branches {
                let mut bound = Some(s.clone());
                for (p, a) in params.iter().zip(arg_terms) {
                    bound = bound.and_then(|s| unify(p, a, s));
                }
                if let Some(s) = bound {
                    out.extend(self.atoms(&body, s, depth - 1)?);
                }
            }
        }
        Ok(out)
    }

    /// Renames clause variables apart and replaces wildcards by fresh
    /// variables so they become holes.
    fn rename_atom(&mut self, atom: &Atom, prefix: &str) -> Atom {
        match atom {
            Atom::Eq { left, right, span } => Atom::Eq {
                left: self.dewildcard(&rename_vars(left, prefix)),
                right: self.dewildcard(&rename_vars(right, prefix)),
                span: *span,
            },
            Atom::Call { predicate, args, span } => Atom::Call {
                predicate: predicate.clone(),
                args: args.iter().map(|a| self.dewildcard(&rename_vars(a, prefix))).collect(),
                span: *span,
            },
        }
    }

    pub fn dewildcard(&mut self, t: &Term) -> Term {
        match t {
            Term::Wildcard(s) => self.fresh_var("_w", *s),
            Term::Var(..) | Term::Str(_) | Term::Fresh(_) => t.clone(),
            Term::Attr(n, v) => Term::Attr(n.clone(), Box::new(self.dewildcard(v))),
            Term::Apply(f, args) => {
                Term::Apply(f.clone(), args.iter().map(|a| self.dewildcard(a)).collect())
            }
            Term::List(seq) => Term::List(self.dewildcard_seq(seq)),
            Term::Element(el) => Term::Element(Element {
                tag: el.tag.clone(),
                attrs: self.dewildcard_seq(&el.attrs),
                children: self.dewildcard_seq(&el.children),
            }),
        }
    }

    fn dewildcard_seq(&mut self, seq: &Seq) -> Seq {
        Seq {
            items: seq.items.iter().map(|t| self.dewildcard(t)).collect(),
            rest: seq.rest.as_ref().map(|r| Box::new(self.dewildcard(r))),
        }
    }

    /// Rewrites away every destructor application in the term, branching
    /// over the rules that may fire. Terms entering the substitution are
    /// always destructor-free, so bound variables need no traversal and
    /// resolve lazily at use sites.
    pub fn narrow(&mut self, t: &Term, subst: Subst) -> Result<Vec<(Term, Subst)>, ExpandError> {
        match t {
            Term::Var(..) | Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => {
                Ok(vec![(t.clone(), subst)])
            }
            Term::Attr(n, v) => Ok(self
                .narrow(v, subst)?
                .into_iter()
                .map(|(v2, s)| (Term::Attr(n.clone(), Box::new(v2)), s))
                .collect()),
            Term::List(seq) => Ok(self
                .narrow_seq(seq, subst)?
                .into_iter()
                .map(|(s2, s)| (Term::List(s2), s))
                .collect()),
            Term::Element(el) => {
                let mut out = Vec::new();
                for (attrs, s1) in self.narrow_seq(&el.attrs, subst)? {
                    for (children, s2) in self.narrow_seq(&el.children, s1)? {
                        out.push((
                            Term::Element(Element {
                                tag: el.tag.clone(),
                                attrs: attrs.clone(),
                                children,
                            }),
                            s2,
                        ));
                    }
                }
                Ok(out)
            }
            Term::Apply(f, args) => {
                self.charge(f)?;
                let mut arg_branches: Vec<(Vec<Term>, Subst)> = vec![(Vec::new(), subst)];
                for arg in args {
                    let mut next = Vec::new();
                    for (done, s) in arg_branches {
                        for (t2, s2) in self.narrow(arg, s)? {
                            let mut done = done.clone();
                            done.push(t2);
                            next.push((done, s2));
                        }
                    }
                    arg_branches = next;
                }
                let is_destructor = self
                    .script
                    .table
                    .get(f)
                    .is_some_and(|s| matches!(s.kind, SymbolKind::Destructor));
                let mut out = Vec::new();
                for (args2, s) in arg_branches {
                    let app = Term::Apply(f.clone(), args2);
                    if !is_destructor {
                        out.push((app, s));
                        continue;
                    }
                    for rule in self.script.table.rules() {
                        if root_symbol(&rule.lhs) != Some(f.as_str()) {
                            continue;
                        }
                        self.fresh += 1;
                        let prefix = format!("r%{}%", self.fresh);
                        let lhs = rename_vars(&rule.lhs, &prefix);
                        let rhs = rename_vars(&rule.rhs, &prefix);
                        if let Some(s2) = unify(&app, &lhs, s.clone()) {
                            // The rule body may itself mention coercion
                            // co-rules; narrow the result to a fixpoint.
                            out.extend(self.narrow(&rhs, s2)?);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    fn narrow_seq(&mut self, seq: &Seq, subst: Subst) -> Result<Vec<(Seq, Subst)>, ExpandError> {
        let mut branches: Vec<(Vec<Term>, Subst)> = vec![(Vec::new(), subst)];
        for item in &seq.items {
            let mut next = Vec::new();
            for (done, s) in branches {
                for (t, s2) in self.narrow(item, s)? {
                    let mut done = done.clone();
                    done.push(t);
                    next.push((done, s2));
                }
            }
            branches = next;
        }
        Ok(branches
            .into_iter()
            .map(|(items, s)| (Seq { items, rest: seq.rest.clone() }, s))
            .collect())
    }
}
