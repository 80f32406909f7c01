//! The predicate engine: solves clausal predicates over terms.
//!
//! Given a goal with some arguments ground and others variable, solving
//! enumerates substitutions for the variables, clause by clause in
//! declaration order (clauses of one predicate are a disjunction), atoms
//! left to right within a clause. An equality atom evaluates whichever
//! side is fully bound and matches the other side against the result;
//! calls recurse with a decremented depth bound.

use crate::matching::match_pattern;
use crate::symtab::rename_vars;
use crate::syntax::ast::Atom;
use crate::syntax::CheckedScript;
use crate::term::{Subst, Term};
use thiserror::Error;

/// A predicate applied to a tuple of terms, some possibly variables.
#[derive(Debug, Clone)]
pub struct Goal {
    pub predicate: String,
    pub args: Vec<Term>,
}

/// Ordered, finite sequence of solutions.
pub type SolutionStream = Vec<Subst>;

pub const DEFAULT_DEPTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("recursion depth exhausted while solving `{predicate}`")]
    DepthExceeded { predicate: String },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("goal is not executable: {0}")]
    NotExecutable(String),
}

/// Enumerates substitutions for the unbound variables of the goal.
pub fn solve(script: &CheckedScript, goal: &Goal, depth: usize) -> Result<SolutionStream, SolveError> {
    let mut ctx = Ctx { script, rename_counter: 0 };
    let solutions = ctx.call(&goal.predicate, &goal.args, Subst::new(), depth)?;
    let mut names = Vec::new();
    for arg in &goal.args {
        arg.vars(&mut names);
    }
    let names: Vec<String> = names.into_iter().map(|(n, _)| n).collect();
    let mut out: SolutionStream = solutions.into_iter().map(|s| s.restricted_to(&names)).collect();
    out.dedup();
    Ok(out)
}

/// True iff the ground goal holds.
pub fn check_ground(
    script: &CheckedScript,
    predicate: &str,
    args: &[Term],
    depth: usize,
) -> Result<bool, SolveError> {
    let goal = Goal { predicate: predicate.to_string(), args: args.to_vec() };
    Ok(!solve(script, &goal, depth)?.is_empty())
}

/// Solves a formula (a filter body) under a seed environment; solutions
/// are restricted to the formula's own variables.
pub fn solve_formula(
    script: &CheckedScript,
    atoms: &[Atom],
    seed: &Subst,
    depth: usize,
) -> Result<SolutionStream, SolveError> {
    let mut ctx = Ctx { script, rename_counter: 0 };
    let solutions = ctx.atoms(atoms, seed.clone(), depth)?;
    let mut names = Vec::new();
    for atom in atoms {
        match atom {
            Atom::Eq { left, right, .. } => {
                left.vars(&mut names);
                right.vars(&mut names);
            }
            Atom::Call { args, .. } => args.iter().for_each(|a| a.vars(&mut names)),
        }
    }
    let names: Vec<String> = names.into_iter().map(|(n, _)| n).collect();
    let mut out: SolutionStream = solutions.into_iter().map(|s| s.restricted_to(&names)).collect();
    out.dedup();
    Ok(out)
}

struct Ctx<'a> {
    script: &'a CheckedScript,
    rename_counter: usize,
}

impl<'a> Ctx<'a> {
    fn call(
        &mut self,
        predicate: &str,
        args: &[Term],
        subst: Subst,
        depth: usize,
    ) -> Result<Vec<Subst>, SolveError> {
        if depth == 0 {
            return Err(SolveError::DepthExceeded { predicate: predicate.to_string() });
        }
        let def = self
            .script
            .predicates
            .get(predicate)
            .ok_or_else(|| SolveError::UnknownPredicate(predicate.to_string()))?;
        let table = &self.script.table;
        let mut solutions = Vec::new();
        for clause in &def.clauses {
            self.rename_counter += 1;
            let prefix = format!("{}${}~", predicate, self.rename_counter);
            let params: Vec<(String, crate::sorts::Sort)> =
                clause.params.iter().map(|(n, s)| (format!("{prefix}{n}"), *s)).collect();
            let body: Vec<Atom> = clause.body.iter().map(|a| rename_atom(a, &prefix)).collect();

            // Bind parameters from ground arguments; defer pattern arguments.
            let mut local = subst.clone();
            let mut deferred: Vec<(usize, &Term)> = Vec::new();
            for (i, arg) in args.iter().enumerate() {
                let value = local.apply(arg);
                if value.is_ground() && !value.has_wildcard() {
                    local.bind(&params[i].0, table.normalize(&value));
                } else {
                    deferred.push((i, arg));
                }
            }

            let mut branch = self.atoms(&body, local, depth - 1)?;

            // Match deferred argument patterns against the computed outputs.
            for (i, arg) in &deferred {
                let mut next = Vec::new();
                for sol in branch {
                    let value = match sol.get(&params[*i].0) {
                        Some(v) if v.is_ground() => table.normalize(v),
                        _ => {
                            return Err(SolveError::NotExecutable(format!(
                                "`{predicate}` leaves an output parameter unbound"
                            )))
                        }
                    };
                    next.extend(match_pattern(table, arg, &value, &sol));
                }
                branch = next;
                if branch.is_empty() {
                    break;
                }
            }
            solutions.extend(branch);
        }
        Ok(solutions)
    }

    fn atoms(&mut self, atoms: &[Atom], seed: Subst, depth: usize) -> Result<Vec<Subst>, SolveError> {
        let mut branches = vec![seed];
        for atom in atoms {
            let mut next = Vec::new();
            for sol in branches {
                next.extend(self.atom(atom, sol, depth)?);
            }
            branches = next;
            if branches.is_empty() {
                break;
            }
        }
        Ok(branches)
    }

    fn atom(&mut self, atom: &Atom, subst: Subst, depth: usize) -> Result<Vec<Subst>, SolveError> {
        let table = &self.script.table;
        match atom {
            Atom::Eq { left, right, .. } => {
                let l = subst.apply(left);
                let r = subst.apply(right);
                let lg = l.is_ground() && !l.has_wildcard();
                let rg = r.is_ground() && !r.has_wildcard();
                match (lg, rg) {
                    (true, true) => {
                        Ok(if table.normalize(&l) == table.normalize(&r) { vec![subst] } else { vec![] })
                    }
                    (true, false) => {
                        let value = table.normalize(&l);
                        Ok(match_pattern(table, &r, &value, &subst))
                    }
                    (false, true) => {
                        let value = table.normalize(&r);
                        Ok(match_pattern(table, &l, &value, &subst))
                    }
                    (false, false) => Err(SolveError::NotExecutable(format!(
                        "equality `{l} = {r}` has no fully bound side"
                    ))),
                }
            }
            Atom::Call { predicate, args, .. } => self.call(predicate, args, subst, depth),
        }
    }
}

fn rename_atom(atom: &Atom, prefix: &str) -> Atom {
    match atom {
        Atom::Eq { left, right, span } => Atom::Eq {
            left: rename_vars(left, prefix),
            right: rename_vars(right, prefix),
            span: *span,
        },
        Atom::Call { predicate, args, span } => Atom::Call {
            predicate: predicate.clone(),
            args: args.iter().map(|a| rename_vars(a, prefix)).collect(),
            span: *span,
        },
    }
}
