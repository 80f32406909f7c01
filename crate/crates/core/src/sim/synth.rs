//! Goal-directed synthesis of attacker injections.
//!
//! For each process blocked on a public input, the downstream filter is
//! expanded symbolically into message patterns whose holes are the data
//! the process does not constrain. Candidates instantiate those holes
//! from attacker knowledge: known terms of the right shape, string
//! rewrites of observed messages at transparent positions, and a small
//! pool of attacker-chosen constants. Everything offered is derivable
//! within the attacker closure.

use super::{Bounds, Config, Knowledge};
use crate::expand::Expander;
use crate::matching::match_pattern;
use crate::sorts::Sort;
use crate::syntax::ast::{Binder, Proc};
use crate::syntax::CheckedScript;
use crate::term::{PathStep, Subst, Term};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A blocked input together with the payload patterns its continuation
/// will accept (one tuple of terms per symbolic disjunct; free variables
/// are unconstrained holes).
#[derive(Debug, Clone)]
pub struct InputSpec {
    pub proc: usize,
    /// Source position of the input, identifying the syntactic site.
    pub site: usize,
    /// Fingerprint of the process environment at the input.
    pub env_hash: u64,
    pub channel: String,
    pub public: bool,
    pub payload_sorts: Vec<Sort>,
    /// Positions bound to `_` by the process; their value is discarded,
    /// so one canonical candidate suffices.
    pub discarded: Vec<bool>,
    pub disjuncts: Arc<Vec<Vec<Term>>>,
}

const MAX_DISJUNCTS: usize = 16;
const MAX_CANDIDATES_PER_INPUT: usize = 512;

/// Attacker constant pool; two values are enough to force disagreement
/// anywhere one value must differ from another.
pub fn adversary_strings() -> Vec<Term> {
    vec![Term::str("adv.1"), Term::str("adv.2")]
}

/// Pool for unconstrained string holes. One value: a hole that must
/// differ from another value is always filled through a rewrite or an
/// item pool instead.
fn hole_strings() -> Vec<Term> {
    vec![Term::str("adv.1")]
}

/// Pool for unconstrained item holes; two values let two sessions carry
/// distinguishable bodies.
fn hole_items() -> Vec<Term> {
    vec![Term::str("adv.1"), Term::str("adv.2")]
}

fn env_fingerprint(env: &Subst) -> u64 {
    let mut h = DefaultHasher::new();
    for (k, v) in env.iter() {
        k.hash(&mut h);
        v.hash(&mut h);
    }
    h.finish()
}

/// Memoizes pattern expansion per input site and candidate synthesis per
/// knowledge state; both are pure in their keys.
#[derive(Default)]
pub struct SynthCache {
    specs: HashMap<(usize, u64), Arc<Vec<Vec<Term>>>>,
    cands: HashMap<(usize, u64, u64), Arc<Vec<Vec<Term>>>>,
}

impl SynthCache {
    pub fn new() -> SynthCache {
        SynthCache::default()
    }

    /// Computes the blocked inputs of a quiescent configuration and their
    /// acceptance patterns.
    pub fn input_specs(&mut self, script: &CheckedScript, config: &Config) -> Vec<InputSpec> {
        let mut specs = Vec::new();
        for (idx, live) in config.live.iter().enumerate() {
            let Proc::In { channel, binders, next, span } = &live.proc else { continue };
            let decl = &script.channels[channel];
            let env_hash = env_fingerprint(&live.env);
            let key = (span.start, env_hash);
            let disjuncts = match self.specs.get(&key) {
                Some(d) => d.clone(),
                None => {
                    let d = Arc::new(expand_input(script, live, binders, &decl.payload_sorts, next));
                    self.specs.insert(key, d.clone());
                    d
                }
            };
            specs.push(InputSpec {
                proc: idx,
                site: span.start,
                env_hash,
                channel: channel.clone(),
                public: !decl.private,
                payload_sorts: decl.payload_sorts.clone(),
                discarded: binders.iter().map(|b| matches!(b, Binder::Wildcard)).collect(),
                disjuncts,
            });
        }
        specs
    }

    /// Enumerates injectable payload tuples for one public input, cached
    /// per (site, environment, knowledge) state.
    pub fn candidates(
        &mut self,
        script: &CheckedScript,
        knowledge: &Knowledge,
        bounds: &Bounds,
        spec: &InputSpec,
    ) -> Arc<Vec<Vec<Term>>> {
        let key = (spec.site, spec.env_hash, knowledge.fingerprint());
        if let Some(c) = self.cands.get(&key) {
            return c.clone();
        }
        let c = Arc::new(candidates_uncached(script, knowledge, bounds, spec));
        self.cands.insert(key, c.clone());
        c
    }
}

/// Expands the first filter the input's continuation reaches into payload
/// patterns for the input binders.
fn expand_input(
    script: &CheckedScript,
    live: &super::LiveProc,
    binders: &[Binder],
    payload_sorts: &[Sort],
    next: &Proc,
) -> Vec<Vec<Term>> {
    let mut seed = live.env.clone();
    let mut cursor: &Proc = next;
    let atoms = loop {
        match cursor {
            Proc::New { next, .. } | Proc::In { next, .. } => cursor = next,
            Proc::Let { name, term, next, .. } => {
                let value = seed.apply(term);
                seed.bind(name, value);
                cursor = next;
            }
            Proc::Filter { atoms, .. } => break Some(atoms),
            _ => break None,
        }
    };
    let binder_vars: Vec<Term> = binders
        .iter()
        .zip(payload_sorts)
        .enumerate()
        .map(|(i, (b, sort))| match b {
            Binder::Name(n) => Term::Var(n.clone(), *sort),
            Binder::Wildcard => Term::Var(format!("_in{i}"), *sort),
        })
        .collect();
    let mut disjuncts = Vec::new();
    if let Some(atoms) = atoms {
        let mut expander = Expander::new(script);
        if let Ok(solutions) = expander.formula(atoms, seed) {
            for sol in solutions.into_iter().take(MAX_DISJUNCTS) {
                disjuncts.push(binder_vars.iter().map(|v| sol.apply(v)).collect());
            }
        }
    }
    if disjuncts.is_empty() {
        disjuncts.push(binder_vars.clone());
    }
    disjuncts
}

/// Enumerates injectable payload tuples for one public input.
fn candidates_uncached(
    script: &CheckedScript,
    knowledge: &Knowledge,
    bounds: &Bounds,
    spec: &InputSpec,
) -> Vec<Vec<Term>> {
    let table = &script.table;
    let mut out: Vec<Vec<Term>> = Vec::new();
    let mut seen: BTreeSet<Vec<Term>> = BTreeSet::new();
    for disjunct in spec.disjuncts.iter() {
        // Process positions in passes: ground, then shaped (contain
        // structure), then free holes; each pass may bind shared variables.
        let mut states: Vec<Subst> = vec![Subst::new()];
        let order = position_order(disjunct);
        for &pos in &order {
            let mut next_states = Vec::new();
            for st in &states {
                let pattern = st.apply(&disjunct[pos]);
                if pattern.is_ground() && !pattern.has_wildcard() {
                    let value = table.normalize(&pattern);
                    if knowledge.derivable(table, &value, bounds.attacker_depth) {
                        next_states.push(st.clone());
                    }
                    continue;
                }
                // A discarded unconstrained position never influences the
                // run; one canonical value is enough.
                if spec.discarded[pos] && matches!(pattern, Term::Var(..)) {
                    for ext in
                        match_pattern(table, &pattern, &canonical_value(spec.payload_sorts[pos]), st)
                    {
                        next_states.push(ext);
                    }
                    continue;
                }
                for cand in position_pool(table, knowledge, bounds, &pattern, spec.payload_sorts[pos])
                {
                    for ext in match_pattern(table, &pattern, &cand, st) {
                        next_states.push(ext);
                    }
                }
            }
            next_states.dedup();
            next_states.truncate(MAX_CANDIDATES_PER_INPUT);
            states = next_states;
            if states.is_empty() {
                break;
            }
        }
        for st in states {
            let tuple: Vec<Term> =
                disjunct.iter().map(|p| table.normalize(&st.apply(p))).collect();
            if tuple.iter().all(|t| t.is_ground())
                && tuple
                    .iter()
                    .all(|t| knowledge.derivable(table, t, bounds.attacker_depth))
                && seen.insert(tuple.clone())
            {
                out.push(tuple);
            }
            if out.len() >= MAX_CANDIDATES_PER_INPUT {
                return out;
            }
        }
    }
    out
}

/// Ground and structured positions resolve before free holes, so shared
/// variables are constrained by the strongest patterns first.
fn position_order(disjunct: &[Term]) -> Vec<usize> {
    let class = |t: &Term| -> u8 {
        if t.is_ground() {
            0
        } else if contains_apply(t) {
            1
        } else if !matches!(t, Term::Var(..)) {
            2
        } else {
            3
        }
    };
    let mut order: Vec<usize> = (0..disjunct.len()).collect();
    order.sort_by_key(|&i| (class(&disjunct[i]), i));
    order
}

fn contains_apply(t: &Term) -> bool {
    t.positions().iter().any(|(_, s)| matches!(s, Term::Apply(..)))
}

/// The pool of ground candidates a pattern position is matched against.
fn position_pool(
    table: &crate::symtab::SymbolTable,
    knowledge: &Knowledge,
    bounds: &Bounds,
    pattern: &Term,
    sort: Sort,
) -> Vec<Term> {
    let mut pool = Vec::new();
    match pattern {
        // A free hole: attacker constants, and for byte positions a few
        // known byte terms.
        Term::Var(_, _) => match sort {
            Sort::String => pool.extend(hole_strings()),
            Sort::Item => pool.extend(hole_items()),
            Sort::Bytes => {
                pool.extend(knowledge.of_sort(table, sort).into_iter().take(8));
                pool.push(canonical_value(Sort::Bytes));
            }
            _ => pool.push(canonical_value(sort)),
        },
        // Structured patterns: known terms of the right shape, plus
        // string rewrites of known elements at transparent positions.
        _ => {
            let replacements = rewrite_replacements(table, knowledge);
            for base in knowledge.of_sort(table, sort) {
                if shape_compatible(pattern, &base) {
                    pool.push(base.clone());
                    if let Term::Element(_) = &base {
                        pool.extend(string_rewrites(&base, &replacements));
                    }
                }
            }
            // A transparent pattern (pure data) can also be instantiated
            // from nothing but attacker strings; matching against the
            // pattern itself with holes pre-filled does that cheaply.
            if !contains_apply(pattern) {
                pool.extend(transparent_instances(pattern, bounds));
            }
        }
    }
    pool
}

/// One representative attacker value per sort.
pub fn canonical_value(sort: Sort) -> Term {
    match sort {
        Sort::String | Sort::Item => Term::str("adv.1"),
        Sort::Bytes => Term::apply("utf8", vec![Term::str("adv.1")]),
        Sort::Att => Term::attr("Adv", Term::str("adv.1")),
        Sort::List => Term::List(crate::term::Seq::empty()),
    }
}

/// Quick root-shape discrimination to keep pools small.
fn shape_compatible(pattern: &Term, subject: &Term) -> bool {
    match (pattern, subject) {
        (Term::Element(p), Term::Element(s)) => p.tag == s.tag,
        (Term::Apply(f, _), Term::Apply(g, _)) => f == g,
        (Term::Var(..), _) | (Term::Wildcard(_), _) => true,
        (Term::Str(a), Term::Str(b)) => a == b,
        _ => !matches!(pattern, Term::Element(_) | Term::Apply(..)),
    }
}

/// Replacement strings for rewriting: attacker constants plus observed
/// strings (a replayed identifier must be one the victim generated).
fn rewrite_replacements(
    table: &crate::symtab::SymbolTable,
    knowledge: &Knowledge,
) -> Vec<Term> {
    let mut out = adversary_strings();
    out.extend(knowledge.of_sort(table, Sort::String).into_iter().take(16));
    out.dedup();
    out
}

/// All single-position string replacements of an observed element at
/// positions not guarded by a symbol application. Rewriting inside a
/// symbol application would need the corresponding key material, so those
/// positions stay fixed.
pub fn string_rewrites(base: &Term, replacements: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    for (path, sub) in base.positions() {
        if !matches!(sub, Term::Str(_)) {
            continue;
        }
        if path_crosses_apply(base, &path) {
            continue;
        }
        for repl in replacements {
            if *repl != *sub {
                out.push(base.replace_at(&path, repl.clone()));
            }
        }
    }
    out
}

fn path_crosses_apply(base: &Term, path: &[PathStep]) -> bool {
    let mut cursor = base;
    for step in path {
        if matches!(cursor, Term::Apply(..)) {
            return true;
        }
        cursor = match (cursor, step) {
            (Term::Attr(_, v), PathStep::AttrValue) => v,
            (Term::Apply(_, args), PathStep::ApplyArg(i)) => &args[*i],
            (Term::List(seq), PathStep::ListItem(i)) => &seq.items[*i],
            (Term::Element(el), PathStep::ElemAttr(i)) => &el.attrs.items[*i],
            (Term::Element(el), PathStep::ElemChild(i)) => &el.children.items[*i],
            _ => return true,
        };
    }
    false
}

/// Instantiates a pure-data pattern by filling every hole with attacker
/// strings (rest holes become empty).
fn transparent_instances(pattern: &Term, _bounds: &Bounds) -> Vec<Term> {
    let holes = pattern.var_list();
    let pool = hole_strings();
    let mut fills: Vec<Subst> = vec![Subst::new()];
    for (name, sort) in holes {
        let mut next = Vec::new();
        for st in &fills {
            if sort == Sort::List {
                let mut s = st.clone();
                s.bind(&name, Term::List(crate::term::Seq::empty()));
                next.push(s);
                continue;
            }
            for v in &pool {
                let mut s = st.clone();
                s.bind(&name, v.clone());
                next.push(s);
            }
        }
        fills = next;
        if fills.len() > 64 {
            fills.truncate(64);
        }
    }
    fills
        .into_iter()
        .map(|s| s.apply(pattern))
        .filter(|t| t.is_ground() && !t.has_wildcard())
        .collect()
}
