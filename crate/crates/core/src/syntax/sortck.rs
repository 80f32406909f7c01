//! Sort checking and binding-order (mode) analysis.
//!
//! Variable sorts are inferred from positions: symbol arguments and
//! attribute values impose exact sorts, element children impose `item`
//! (refinable to `string`), rest markers impose the list sort. Clause
//! parameters and process binders carry declared sorts.
//!
//! Mode analysis walks each clause body left to right: an equality atom
//! evaluates its fully bound side and matches the other side as a pattern,
//! binding its variables; a call binds whatever the callee's parameters
//! leave unbound, with callee clauses analysed for the boundness pattern of
//! the call site. A filter's outputs must be exactly the variables its
//! formula solves for.

use super::ast::*;
use crate::sorts::Sort;
use crate::symtab::{DeclareError, RewriteRule, Symbol, SymbolKind, SymbolTable};
use crate::term::{Seq, Term};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum CheckError {
    #[error("{message} (line {}, column {})", span.line, span.col)]
    Sort { message: String, span: Span },
    #[error("unbound variable `{name}` (line {}, column {})", span.line, span.col)]
    UnboundVariable { name: String, span: Span },
    #[error("unknown {kind} `{name}` (line {}, column {})", span.line, span.col)]
    UnknownIdentifier { kind: &'static str, name: String, span: Span },
    #[error("{what} expects {expected} arguments, got {found} (line {}, column {})", span.line, span.col)]
    ArityMismatch { what: String, expected: usize, found: usize, span: Span },
    #[error("duplicate {kind} `{name}` (line {}, column {})", span.line, span.col)]
    Duplicate { kind: &'static str, name: String, span: Span },
    #[error("{source} (line {}, column {})", span.line, span.col)]
    Rule {
        #[source]
        source: DeclareError,
        span: Span,
    },
    #[error("{message} (line {}, column {})", span.line, span.col)]
    Mode { message: String, span: Span },
}

impl CheckError {
    pub fn span(&self) -> Span {
        match self {
            CheckError::Sort { span, .. }
            | CheckError::UnboundVariable { span, .. }
            | CheckError::UnknownIdentifier { span, .. }
            | CheckError::ArityMismatch { span, .. }
            | CheckError::Duplicate { span, .. }
            | CheckError::Rule { span, .. }
            | CheckError::Mode { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChannelDecl {
    pub name: String,
    pub payload_sorts: Vec<Sort>,
    pub private: bool,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct CorrespondenceDecl {
    pub name: String,
    pub payload_sorts: Vec<Sort>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct CheckedClause {
    pub params: Vec<(String, Sort)>,
    pub body: Vec<Atom>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct PredicateDef {
    pub name: String,
    pub param_sorts: Vec<Sort>,
    pub clauses: Vec<CheckedClause>,
}

#[derive(Debug, Clone)]
pub struct ProcessDef {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub body: Proc,
    pub span: Span,
}

/// How each variable of a clause gets bound under one call mode.
#[derive(Debug, Clone, Default)]
pub struct ClauseModes {
    /// Variables bound on entry (parameters marked bound at the call site).
    pub input_bound: Vec<String>,
    /// Variables bound by the body, with the atom index that binds them.
    pub output_bound: Vec<(String, usize)>,
}

#[derive(Debug, Clone)]
pub struct CheckedScript {
    pub source: Script,
    pub table: SymbolTable,
    pub predicates: BTreeMap<String, PredicateDef>,
    pub channels: BTreeMap<String, ChannelDecl>,
    pub correspondences: BTreeMap<String, CorrespondenceDecl>,
    pub processes: BTreeMap<String, ProcessDef>,
    pub main: Option<Proc>,
    /// Mode analysis results per (predicate, boundness mask) seen at any call site.
    pub modes: BTreeMap<(String, Vec<bool>), Vec<ClauseModes>>,
}

pub fn sort_check(script: Script) -> Result<CheckedScript, CheckError> {
    Checker::run(script)
}

struct Checker {
    table: SymbolTable,
    predicates: BTreeMap<String, PredicateDef>,
    channels: BTreeMap<String, ChannelDecl>,
    correspondences: BTreeMap<String, CorrespondenceDecl>,
    processes: BTreeMap<String, ProcessDef>,
    modes: BTreeMap<(String, Vec<bool>), ModeEntry>,
}

#[derive(Clone)]
enum ModeEntry {
    InProgress,
    Done(Vec<ClauseModes>),
}

impl Checker {
    fn run(script: Script) -> Result<CheckedScript, CheckError> {
        let mut ck = Checker {
            table: SymbolTable::stdlib(),
            predicates: BTreeMap::new(),
            channels: BTreeMap::new(),
            correspondences: BTreeMap::new(),
            processes: BTreeMap::new(),
            modes: BTreeMap::new(),
        };

        // Symbols first: rule terms need the table for sort inference.
        for decl in &script.decls {
            ck.declare_symbol(decl)?;
        }
        // Signatures of predicates and processes allow forward references.
        ck.collect_signatures(&script)?;
        // Clause bodies.
        for decl in &script.decls {
            if let Decl::Clause(clause) = decl {
                ck.check_clause(clause)?;
            }
        }
        // Processes, then the top-level process.
        let mut main: Option<Proc> = None;
        for decl in &script.decls {
            match decl {
                Decl::Process { name, params, body, span } => {
                    let env: BTreeMap<String, Sort> = params.iter().cloned().collect();
                    if params.iter().map(|(n, _)| n).collect::<BTreeSet<_>>().len() != params.len()
                    {
                        return Err(CheckError::Duplicate {
                            kind: "process parameter",
                            name: name.clone(),
                            span: *span,
                        });
                    }
                    let body = ck.check_proc(body, env)?;
                    ck.processes.get_mut(name).expect("collected").body = body;
                }
                Decl::Main { body, span } => {
                    if main.is_some() {
                        return Err(CheckError::Duplicate {
                            kind: "top-level process",
                            name: "process".into(),
                            span: *span,
                        });
                    }
                    main = Some(ck.check_proc(body, BTreeMap::new())?);
                }
                _ => {}
            }
        }

        let modes = ck
            .modes
            .into_iter()
            .filter_map(|(k, v)| match v {
                ModeEntry::Done(m) => Some((k, m)),
                ModeEntry::InProgress => None,
            })
            .collect();
        Ok(CheckedScript {
            source: script,
            table: ck.table,
            predicates: ck.predicates,
            channels: ck.channels,
            correspondences: ck.correspondences,
            processes: ck.processes,
            main,
            modes,
        })
    }

    fn declare_symbol(&mut self, decl: &Decl) -> Result<(), CheckError> {
        match decl {
            Decl::Constructor { name, arg_sorts, result_sort, span } => self
                .table
                .declare(Symbol {
                    name: name.clone(),
                    kind: SymbolKind::Constructor,
                    arg_sorts: arg_sorts.clone(),
                    result_sort: *result_sort,
                    rewrite: None,
                })
                .map_err(|source| CheckError::Rule { source, span: *span }),
            Decl::Destructor { name, arg_sorts, result_sort, lhs, rhs, span } => {
                // Declare without the rule so the rule terms can be
                // sort-resolved against the full signature, then re-declare.
                self.table
                    .declare(Symbol {
                        name: name.clone(),
                        kind: SymbolKind::Constructor,
                        arg_sorts: arg_sorts.clone(),
                        result_sort: *result_sort,
                        rewrite: None,
                    })
                    .map_err(|source| CheckError::Rule { source, span: *span })?;
                let mut resolver = Resolver::new(&self.table, BTreeMap::new());
                resolver.infer(lhs, None, *span)?;
                resolver.infer(rhs, None, *span)?;
                let lhs = resolver.rebuild(lhs, None, *span)?;
                let rhs = resolver.rebuild(rhs, None, *span)?;
                let mut fresh = self.table.clone();
                fresh.remove_for_redeclare(name);
                fresh
                    .declare(Symbol {
                        name: name.clone(),
                        kind: SymbolKind::Destructor,
                        arg_sorts: arg_sorts.clone(),
                        result_sort: *result_sort,
                        rewrite: Some(RewriteRule { lhs, rhs }),
                    })
                    .map_err(|source| CheckError::Rule { source, span: *span })?;
                self.table = fresh;
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn collect_signatures(&mut self, script: &Script) -> Result<(), CheckError> {
        for decl in &script.decls {
            match decl {
                Decl::Clause(c) => {
                    let sorts: Vec<Sort> = c.params.iter().map(|(_, s)| *s).collect();
                    match self.predicates.get(&c.name) {
                        None => {
                            self.predicates.insert(
                                c.name.clone(),
                                PredicateDef {
                                    name: c.name.clone(),
                                    param_sorts: sorts,
                                    clauses: Vec::new(),
                                },
                            );
                        }
                        Some(existing) if existing.param_sorts == sorts => {}
                        Some(_) => {
                            return Err(CheckError::Sort {
                                message: format!(
                                    "clauses of `{}` disagree on parameter sorts",
                                    c.name
                                ),
                                span: c.span,
                            })
                        }
                    }
                }
                Decl::Channel { name, payload_sorts, private, span } => {
                    if payload_sorts.is_empty() {
                        return Err(CheckError::Sort {
                            message: format!("channel `{name}` needs a nonempty payload"),
                            span: *span,
                        });
                    }
                    let prev = self.channels.insert(
                        name.clone(),
                        ChannelDecl {
                            name: name.clone(),
                            payload_sorts: payload_sorts.clone(),
                            private: *private,
                            span: *span,
                        },
                    );
                    if prev.is_some() {
                        return Err(CheckError::Duplicate {
                            kind: "channel",
                            name: name.clone(),
                            span: *span,
                        });
                    }
                }
                Decl::Correspondence { name, payload_sorts, span } => {
                    if payload_sorts.is_empty() {
                        return Err(CheckError::Sort {
                            message: format!("correspondence `{name}` needs a nonempty payload"),
                            span: *span,
                        });
                    }
                    let prev = self.correspondences.insert(
                        name.clone(),
                        CorrespondenceDecl {
                            name: name.clone(),
                            payload_sorts: payload_sorts.clone(),
                            span: *span,
                        },
                    );
                    if prev.is_some() {
                        return Err(CheckError::Duplicate {
                            kind: "correspondence",
                            name: name.clone(),
                            span: *span,
                        });
                    }
                }
                Decl::Process { name, params, span, .. } => {
                    let prev = self.processes.insert(
                        name.clone(),
                        ProcessDef {
                            name: name.clone(),
                            params: params.clone(),
                            body: Proc::Nil { span: *span },
                            span: *span,
                        },
                    );
                    if prev.is_some() {
                        return Err(CheckError::Duplicate {
                            kind: "process",
                            name: name.clone(),
                            span: *span,
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Sort-resolves one clause body and appends it to its predicate.
    fn check_clause(&mut self, clause: &Clause) -> Result<(), CheckError> {
        let mut seen = BTreeSet::new();
        for (n, _) in &clause.params {
            if !seen.insert(n.clone()) {
                return Err(CheckError::Duplicate {
                    kind: "clause parameter",
                    name: n.clone(),
                    span: clause.span,
                });
            }
        }
        let fixed: BTreeMap<String, Sort> = clause.params.iter().cloned().collect();
        let body = self.resolve_atoms(&clause.body, fixed)?;
        self.predicates.get_mut(&clause.name).expect("collected").clauses.push(CheckedClause {
            params: clause.params.clone(),
            body,
            span: clause.span,
        });
        Ok(())
    }

    /// Infers local sorts over a whole atom list, then rebuilds the atoms.
    fn resolve_atoms(&self, atoms: &[Atom], fixed: BTreeMap<String, Sort>) -> Result<Vec<Atom>, CheckError> {
        let mut resolver = Resolver::new(&self.table, fixed);
        // Two inference passes so later constraints refine earlier uses.
        for _ in 0..2 {
            for atom in atoms {
                self.infer_atom(&mut resolver, atom)?;
            }
        }
        atoms.iter().map(|a| self.rebuild_atom(&mut resolver, a)).collect()
    }

    fn predicate_sig(&self, name: &str, span: Span) -> Result<&PredicateDef, CheckError> {
        self.predicates.get(name).ok_or_else(|| CheckError::UnknownIdentifier {
            kind: "predicate",
            name: name.to_string(),
            span,
        })
    }

    fn infer_atom(&self, resolver: &mut Resolver, atom: &Atom) -> Result<(), CheckError> {
        match atom {
            Atom::Eq { left, right, span } => {
                let ls = resolver.infer(left, None, *span)?;
                let rs = resolver.infer(right, None, *span)?;
                match (ls, rs) {
                    (Some(l), Some(r)) if !l.fits(r) && !r.fits(l) => Err(CheckError::Sort {
                        message: format!("equality between incompatible sorts {l} and {r}"),
                        span: *span,
                    }),
                    (Some(l), None) => resolver.infer(right, Some(l), *span).map(|_| ()),
                    (None, Some(r)) => resolver.infer(left, Some(r), *span).map(|_| ()),
                    _ => Ok(()),
                }
            }
            Atom::Call { predicate, args, span } => {
                let def = self.predicate_sig(predicate, *span)?;
                if def.param_sorts.len() != args.len() {
                    return Err(CheckError::ArityMismatch {
                        what: format!("predicate `{predicate}`"),
                        expected: def.param_sorts.len(),
                        found: args.len(),
                        span: *span,
                    });
                }
                let sorts = def.param_sorts.clone();
                for (arg, sort) in args.iter().zip(sorts) {
                    resolver.infer(arg, Some(sort), *span)?;
                }
                Ok(())
            }
        }
    }

    fn rebuild_atom(&self, resolver: &mut Resolver, atom: &Atom) -> Result<Atom, CheckError> {
        match atom {
            Atom::Eq { left, right, span } => Ok(Atom::Eq {
                left: resolver.rebuild(left, None, *span)?,
                right: resolver.rebuild(right, None, *span)?,
                span: *span,
            }),
            Atom::Call { predicate, args, span } => {
                let sorts = self.predicate_sig(predicate, *span)?.param_sorts.clone();
                let args = args
                    .iter()
                    .zip(sorts)
                    .map(|(a, s)| resolver.rebuild(a, Some(s), *span))
                    .collect::<Result<_, _>>()?;
                Ok(Atom::Call { predicate: predicate.clone(), args, span: *span })
            }
        }
    }

    fn check_proc(&mut self, proc: &Proc, mut env: BTreeMap<String, Sort>) -> Result<Proc, CheckError> {
        match proc {
            Proc::Out { channel, args, next, span } => {
                let decl = self.channel(channel, *span)?.clone();
                let args = self.resolve_payload(args, &decl.payload_sorts, &env, *span, channel)?;
                let next = self.check_proc(next, env)?;
                Ok(Proc::Out { channel: channel.clone(), args, next: Box::new(next), span: *span })
            }
            Proc::In { channel, binders, next, span } => {
                let decl = self.channel(channel, *span)?.clone();
                if binders.len() != decl.payload_sorts.len() {
                    return Err(CheckError::ArityMismatch {
                        what: format!("channel `{channel}`"),
                        expected: decl.payload_sorts.len(),
                        found: binders.len(),
                        span: *span,
                    });
                }
                for (b, sort) in binders.iter().zip(&decl.payload_sorts) {
                    if let Binder::Name(n) = b {
                        self.bind_name(&mut env, n, *sort, *span)?;
                    }
                }
                let next = self.check_proc(next, env)?;
                Ok(Proc::In {
                    channel: channel.clone(),
                    binders: binders.clone(),
                    next: Box::new(next),
                    span: *span,
                })
            }
            Proc::New { name, sort, next, span } => {
                if !matches!(sort, Sort::Bytes | Sort::String) {
                    return Err(CheckError::Sort {
                        message: format!("`new {name}` must have sort bytes or string"),
                        span: *span,
                    });
                }
                self.bind_name(&mut env, name, *sort, *span)?;
                let next = self.check_proc(next, env)?;
                Ok(Proc::New { name: name.clone(), sort: *sort, next: Box::new(next), span: *span })
            }
            Proc::Let { name, term, next, span } => {
                let mut resolver = Resolver::new(&self.table, env.clone());
                let sort = resolver.infer(term, None, *span)?;
                let term = resolver.rebuild(term, None, *span)?;
                for (v, _) in term.var_list() {
                    if !env.contains_key(&v) {
                        return Err(CheckError::UnboundVariable { name: v, span: *span });
                    }
                }
                if term.has_wildcard() {
                    return Err(CheckError::Sort {
                        message: "wildcard in a constructed term".into(),
                        span: *span,
                    });
                }
                let sort = sort.ok_or_else(|| CheckError::Sort {
                    message: format!("cannot determine the sort of `let {name}`"),
                    span: *span,
                })?;
                self.bind_name(&mut env, name, sort, *span)?;
                let next = self.check_proc(next, env)?;
                Ok(Proc::Let {
                    name: name.clone(),
                    term,
                    next: Box::new(next),
                    span: *span,
                })
            }
            Proc::Filter { atoms, outputs, next, span } => {
                let atoms = self.resolve_atoms(atoms, env.clone())?;
                let solved = self.mode_check_formula(&atoms, &env, *span)?;
                let listed: BTreeSet<&String> = outputs.iter().collect();
                if listed.len() != outputs.len() {
                    return Err(CheckError::Duplicate {
                        kind: "filter output",
                        name: outputs.iter().find(|o| outputs.iter().filter(|x| x == o).count() > 1).cloned().unwrap_or_default(),
                        span: *span,
                    });
                }
                let solved_names: BTreeSet<&String> = solved.keys().collect();
                if listed != solved_names {
                    return Err(CheckError::Mode {
                        message: format!(
                            "filter outputs {:?} differ from the variables the formula solves for {:?}",
                            outputs,
                            solved_names.iter().collect::<Vec<_>>()
                        ),
                        span: *span,
                    });
                }
                for (n, s) in &solved {
                    self.bind_name(&mut env, n, *s, *span)?;
                }
                let next = self.check_proc(next, env)?;
                Ok(Proc::Filter {
                    atoms,
                    outputs: outputs.clone(),
                    next: Box::new(next),
                    span: *span,
                })
            }
            Proc::Begin { label, args, next, span } | Proc::End { label, args, next, span } => {
                let decl = self.correspondence(label, *span)?.clone();
                let args = self.resolve_payload(args, &decl.payload_sorts, &env, *span, label)?;
                let next = Box::new(self.check_proc(next, env)?);
                Ok(match proc {
                    Proc::Begin { .. } => Proc::Begin { label: label.clone(), args, next, span: *span },
                    _ => Proc::End { label: label.clone(), args, next, span: *span },
                })
            }
            Proc::Par { left, right, span } => Ok(Proc::Par {
                left: Box::new(self.check_proc(left, env.clone())?),
                right: Box::new(self.check_proc(right, env)?),
                span: *span,
            }),
            Proc::Repl { body, span } => Ok(Proc::Repl {
                body: Box::new(self.check_proc(body, env)?),
                span: *span,
            }),
            Proc::Invoke { process, args, span } => {
                let def = self.processes.get(process).ok_or_else(|| CheckError::UnknownIdentifier {
                    kind: "process",
                    name: process.clone(),
                    span: *span,
                })?;
                let sorts: Vec<Sort> = def.params.iter().map(|(_, s)| *s).collect();
                let args = self.resolve_payload(args, &sorts, &env, *span, process)?;
                Ok(Proc::Invoke { process: process.clone(), args, span: *span })
            }
            Proc::Done { span } => Ok(Proc::Done { span: *span }),
            Proc::Nil { span } => Ok(Proc::Nil { span: *span }),
        }
    }

    fn bind_name(
        &self,
        env: &mut BTreeMap<String, Sort>,
        name: &str,
        sort: Sort,
        span: Span,
    ) -> Result<(), CheckError> {
        if env.insert(name.to_string(), sort).is_some() {
            return Err(CheckError::Duplicate { kind: "binder", name: name.to_string(), span });
        }
        Ok(())
    }

    fn channel(&self, name: &str, span: Span) -> Result<&ChannelDecl, CheckError> {
        self.channels.get(name).ok_or_else(|| CheckError::UnknownIdentifier {
            kind: "channel",
            name: name.to_string(),
            span,
        })
    }

    fn correspondence(&self, name: &str, span: Span) -> Result<&CorrespondenceDecl, CheckError> {
        self.correspondences.get(name).ok_or_else(|| CheckError::UnknownIdentifier {
            kind: "correspondence",
            name: name.to_string(),
            span,
        })
    }

    /// Resolves fully bound argument terms against expected sorts.
    fn resolve_payload(
        &self,
        args: &[Term],
        sorts: &[Sort],
        env: &BTreeMap<String, Sort>,
        span: Span,
        what: &str,
    ) -> Result<Vec<Term>, CheckError> {
        if args.len() != sorts.len() {
            return Err(CheckError::ArityMismatch {
                what: format!("`{what}`"),
                expected: sorts.len(),
                found: args.len(),
                span,
            });
        }
        let mut resolver = Resolver::new(&self.table, env.clone());
        let mut out = Vec::new();
        for (arg, sort) in args.iter().zip(sorts) {
            resolver.infer(arg, Some(*sort), span)?;
            let t = resolver.rebuild(arg, Some(*sort), span)?;
            for (v, _) in t.var_list() {
                if !env.contains_key(&v) {
                    return Err(CheckError::UnboundVariable { name: v, span });
                }
            }
            if t.has_wildcard() {
                return Err(CheckError::Sort {
                    message: "wildcard in a constructed term".into(),
                    span,
                });
            }
            out.push(t);
        }
        Ok(out)
    }

    /// Left-to-right executability analysis of a formula whose bound
    /// variables are `env`; returns the solved (newly bound) variables.
    fn mode_check_formula(
        &mut self,
        atoms: &[Atom],
        env: &BTreeMap<String, Sort>,
        span: Span,
    ) -> Result<BTreeMap<String, Sort>, CheckError> {
        let mut bound: BTreeSet<String> = env.keys().cloned().collect();
        let mut solved = BTreeMap::new();
        for atom in atoms {
            self.mode_step(atom, &mut bound, &mut |n, s| {
                if !env.contains_key(n) {
                    solved.insert(n.to_string(), s);
                }
            })?;
        }
        let _ = span;
        Ok(solved)
    }

    /// Processes one atom for mode analysis, binding newly solved variables.
    fn mode_step(
        &mut self,
        atom: &Atom,
        bound: &mut BTreeSet<String>,
        on_bind: &mut dyn FnMut(&str, Sort),
    ) -> Result<(), CheckError> {
        match atom {
            Atom::Eq { left, right, span } => {
                let lb = fully_bound(left, bound);
                let rb = fully_bound(right, bound);
                let pattern = match (lb, rb) {
                    (true, true) => None,
                    (true, false) => Some(right),
                    (false, true) => Some(left),
                    (false, false) => {
                        let name = first_unbound(left, bound)
                            .or_else(|| first_unbound(right, bound))
                            .unwrap_or_default();
                        return Err(CheckError::UnboundVariable { name, span: *span });
                    }
                };
                if let Some(pat) = pattern {
                    check_pattern_evaluable(pat, bound, &self.table, *span)?;
                    for (v, s) in pat.var_list() {
                        if bound.insert(v.clone()) {
                            on_bind(&v, s);
                        }
                    }
                }
                Ok(())
            }
            Atom::Call { predicate, args, span } => {
                let mask: Vec<bool> = args.iter().map(|a| fully_bound(a, bound)).collect();
                self.mode_check_predicate(predicate, &mask, *span)?;
                for arg in args {
                    for (v, s) in arg.var_list() {
                        if bound.insert(v.clone()) {
                            on_bind(&v, s);
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Analyses every clause of a predicate for one boundness mask,
    /// memoized; recursive predicates assume success while in progress.
    fn mode_check_predicate(
        &mut self,
        name: &str,
        mask: &[bool],
        span: Span,
    ) -> Result<(), CheckError> {
        let key = (name.to_string(), mask.to_vec());
        match self.modes.get(&key) {
            Some(ModeEntry::Done(_)) | Some(ModeEntry::InProgress) => return Ok(()),
            None => {}
        }
        self.modes.insert(key.clone(), ModeEntry::InProgress);
        let def = self.predicate_sig(name, span)?.clone();
        let mut infos = Vec::new();
        for clause in &def.clauses {
            let mut bound: BTreeSet<String> = clause
                .params
                .iter()
                .zip(mask)
                .filter(|(_, m)| **m)
                .map(|((n, _), _)| n.clone())
                .collect();
            let mut info = ClauseModes {
                input_bound: bound.iter().cloned().collect(),
                output_bound: Vec::new(),
            };
            for (i, atom) in clause.body.iter().enumerate() {
                let mut newly = Vec::new();
                self.mode_step(atom, &mut bound, &mut |n, _| newly.push(n.to_string()))?;
                for n in newly {
                    info.output_bound.push((n, i));
                }
            }
            for (p, _) in &clause.params {
                if !bound.contains(p) {
                    return Err(CheckError::Mode {
                        message: format!(
                            "parameter `{p}` of `{name}` stays unbound under this call pattern"
                        ),
                        span: clause.span,
                    });
                }
            }
            let mut all_vars = Vec::new();
            for atom in &clause.body {
                match atom {
                    Atom::Eq { left, right, .. } => {
                        left.vars(&mut all_vars);
                        right.vars(&mut all_vars);
                    }
                    Atom::Call { args, .. } => args.iter().for_each(|a| a.vars(&mut all_vars)),
                }
            }
            for (v, _) in all_vars {
                if !bound.contains(&v) {
                    return Err(CheckError::UnboundVariable { name: v, span: clause.span });
                }
            }
            infos.push(info);
        }
        self.modes.insert(key, ModeEntry::Done(infos));
        Ok(())
    }
}

fn fully_bound(t: &Term, bound: &BTreeSet<String>) -> bool {
    !t.has_wildcard() && t.var_list().iter().all(|(n, _)| bound.contains(n))
}

fn first_unbound(t: &Term, bound: &BTreeSet<String>) -> Option<String> {
    t.var_list().into_iter().map(|(n, _)| n).find(|n| !bound.contains(n))
}

/// A binding pattern may contain unbound variables and wildcards, but any
/// destructor application inside it must be ground-evaluable.
fn check_pattern_evaluable(
    pat: &Term,
    bound: &BTreeSet<String>,
    table: &SymbolTable,
    span: Span,
) -> Result<(), CheckError> {
    match pat {
        Term::Var(..) | Term::Str(_) | Term::Fresh(_) | Term::Wildcard(_) => Ok(()),
        Term::Attr(_, v) => check_pattern_evaluable(v, bound, table, span),
        Term::Apply(f, args) => {
            let is_destructor = table
                .get(f)
                .is_some_and(|s| matches!(s.kind, SymbolKind::Destructor));
            if is_destructor && !fully_bound(pat, bound) {
                return Err(CheckError::Mode {
                    message: format!(
                        "destructor `{f}` applied to unbound variables cannot be matched"
                    ),
                    span,
                });
            }
            args.iter().try_for_each(|a| check_pattern_evaluable(a, bound, table, span))
        }
        Term::List(seq) => seq_pattern_evaluable(seq, bound, table, span),
        Term::Element(el) => {
            seq_pattern_evaluable(&el.attrs, bound, table, span)?;
            seq_pattern_evaluable(&el.children, bound, table, span)
        }
    }
}

fn seq_pattern_evaluable(
    seq: &Seq,
    bound: &BTreeSet<String>,
    table: &SymbolTable,
    span: Span,
) -> Result<(), CheckError> {
    seq.items.iter().try_for_each(|t| check_pattern_evaluable(t, bound, table, span))?;
    if let Some(r) = &seq.rest {
        check_pattern_evaluable(r, bound, table, span)?;
    }
    Ok(())
}

/// Sort inference and term rebuilding for one scope.
struct Resolver<'a> {
    table: &'a SymbolTable,
    fixed: BTreeMap<String, Sort>,
    locals: BTreeMap<String, Option<Sort>>,
}

impl<'a> Resolver<'a> {
    fn new(table: &'a SymbolTable, fixed: BTreeMap<String, Sort>) -> Resolver<'a> {
        Resolver { table, fixed, locals: BTreeMap::new() }
    }

    fn lookup(&self, name: &str) -> Option<Sort> {
        self.fixed.get(name).copied().or_else(|| self.locals.get(name).copied().flatten())
    }

    /// Walks a term imposing positional sorts; returns the term's sort if
    /// determinable.
    fn infer(&mut self, t: &Term, expect: Option<Sort>, span: Span) -> Result<Option<Sort>, CheckError> {
        match t {
            Term::Wildcard(_) => Ok(expect),
            Term::Str(_) => {
                self.check_fits(Sort::String, expect, span)?;
                Ok(Some(Sort::String))
            }
            Term::Fresh(f) => {
                self.check_fits(f.sort, expect, span)?;
                Ok(Some(f.sort))
            }
            Term::Var(n, parsed) => {
                if let Some(s) = self.fixed.get(n) {
                    self.check_fits(*s, expect, span)?;
                    return Ok(Some(*s));
                }
                // Rest variables carry the list sort from the parser.
                let positional = if *parsed == Sort::List { Some(Sort::List) } else { expect };
                let entry = self.locals.entry(n.clone()).or_insert(None);
                match (*entry, positional) {
                    (None, s) => {
                        *entry = s;
                        Ok(s)
                    }
                    (Some(cur), None) => Ok(Some(cur)),
                    (Some(cur), Some(want)) => {
                        if cur == want || cur.fits(want) {
                            Ok(Some(cur))
                        } else if want.fits(cur) {
                            *entry = Some(want);
                            Ok(Some(want))
                        } else {
                            Err(CheckError::Sort {
                                message: format!(
                                    "variable `{n}` used both at sort {cur} and at sort {want}"
                                ),
                                span,
                            })
                        }
                    }
                }
            }
            Term::Attr(_, v) => {
                self.infer(v, Some(Sort::String), span)?;
                self.check_fits(Sort::Att, expect, span)?;
                Ok(Some(Sort::Att))
            }
            Term::Apply(f, args) => {
                let sym = self.table.get(f).ok_or_else(|| CheckError::UnknownIdentifier {
                    kind: "symbol",
                    name: f.clone(),
                    span,
                })?;
                if sym.arg_sorts.len() != args.len() {
                    return Err(CheckError::ArityMismatch {
                        what: format!("symbol `{f}`"),
                        expected: sym.arg_sorts.len(),
                        found: args.len(),
                        span,
                    });
                }
                let sorts = sym.arg_sorts.clone();
                let result = sym.result_sort;
                for (a, s) in args.iter().zip(sorts) {
                    self.infer(a, Some(s), span)?;
                }
                self.check_fits(result, expect, span)?;
                Ok(Some(result))
            }
            Term::List(seq) => {
                for item in &seq.items {
                    self.infer(item, Some(Sort::Item), span)?;
                }
                if let Some(r) = &seq.rest {
                    self.infer(r, Some(Sort::List), span)?;
                }
                Ok(Some(Sort::List))
            }
            Term::Element(el) => {
                for a in &el.attrs.items {
                    self.infer(a, Some(Sort::Att), span)?;
                }
                if let Some(r) = &el.attrs.rest {
                    self.infer(r, Some(Sort::List), span)?;
                }
                for c in &el.children.items {
                    self.infer(c, Some(Sort::Item), span)?;
                }
                if let Some(r) = &el.children.rest {
                    self.infer(r, Some(Sort::List), span)?;
                }
                self.check_fits(Sort::Item, expect, span)?;
                Ok(Some(Sort::Item))
            }
        }
    }

    fn check_fits(&self, actual: Sort, expect: Option<Sort>, span: Span) -> Result<(), CheckError> {
        match expect {
            Some(e) if !actual.fits(e) => Err(CheckError::Sort {
                message: format!("term of sort {actual} where {e} is expected"),
                span,
            }),
            _ => Ok(()),
        }
    }

    /// Rebuilds the term with resolved variable and wildcard sorts.
    fn rebuild(&mut self, t: &Term, expect: Option<Sort>, span: Span) -> Result<Term, CheckError> {
        match t {
            Term::Wildcard(parsed) => {
                let sort = if *parsed == Sort::List {
                    Sort::List
                } else {
                    expect.unwrap_or(Sort::Item)
                };
                Ok(Term::Wildcard(sort))
            }
            Term::Str(_) | Term::Fresh(_) => Ok(t.clone()),
            Term::Var(n, parsed) => {
                let sort = self
                    .lookup(n)
                    .or(if *parsed == Sort::List { Some(Sort::List) } else { None })
                    .or(expect)
                    .ok_or_else(|| CheckError::Sort {
                        message: format!("cannot infer a sort for variable `{n}`"),
                        span,
                    })?;
                Ok(Term::Var(n.clone(), sort))
            }
            Term::Attr(name, v) => {
                Ok(Term::Attr(name.clone(), Box::new(self.rebuild(v, Some(Sort::String), span)?)))
            }
            Term::Apply(f, args) => {
                let sorts = self
                    .table
                    .get(f)
                    .map(|s| s.arg_sorts.clone())
                    .unwrap_or_else(|| vec![Sort::Item; args.len()]);
                let args = args
                    .iter()
                    .zip(sorts)
                    .map(|(a, s)| self.rebuild(a, Some(s), span))
                    .collect::<Result<_, _>>()?;
                Ok(Term::Apply(f.clone(), args))
            }
            Term::List(seq) => Ok(Term::List(self.rebuild_seq(seq, span)?)),
            Term::Element(el) => Ok(Term::Element(crate::term::Element {
                tag: el.tag.clone(),
                attrs: self.rebuild_seq_with(&el.attrs, Some(Sort::Att), span)?,
                children: self.rebuild_seq_with(&el.children, Some(Sort::Item), span)?,
            })),
        }
    }

    fn rebuild_seq(&mut self, seq: &Seq, span: Span) -> Result<Seq, CheckError> {
        self.rebuild_seq_with(seq, Some(Sort::Item), span)
    }

    fn rebuild_seq_with(
        &mut self,
        seq: &Seq,
        member: Option<Sort>,
        span: Span,
    ) -> Result<Seq, CheckError> {
        let items = seq
            .items
            .iter()
            .map(|i| self.rebuild(i, member, span))
            .collect::<Result<_, _>>()?;
        let rest = match &seq.rest {
            None => None,
            Some(r) => Some(Box::new(self.rebuild(r, Some(Sort::List), span)?)),
        };
        Ok(Seq { items, rest })
    }
}
