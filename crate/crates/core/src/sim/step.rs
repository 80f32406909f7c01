//! Single-step operational semantics and the deterministic closure of
//! internal reductions.

use super::{Action, Bounds, Config, Event, EventKind, LiveProc};
use crate::pred::{solve_formula, SolveError, DEFAULT_DEPTH};
use crate::syntax::ast::{Binder, Proc};
use crate::syntax::CheckedScript;
use crate::term::{Subst, Term};
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use thiserror::Error;

/// Memoized first solutions of filter formulas, keyed by syntactic site
/// and environment fingerprint. The same delivery reached along different
/// interleavings solves the same filter.
#[derive(Default)]
pub struct FilterCache {
    map: HashMap<(usize, u64), Option<Subst>>,
}

fn env_key(env: &Subst) -> u64 {
    let mut h = DefaultHasher::new();
    for (k, v) in env.iter() {
        k.hash(&mut h);
        v.hash(&mut h);
    }
    h.finish()
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("the chosen action is not enabled: {0}")]
    StuckPolicy(String),
    #[error("filter evaluation failed: {0}")]
    Solve(#[from] SolveError),
    #[error("{0}")]
    NotGround(String),
}

/// Applies one action to a configuration.
pub fn step(
    script: &CheckedScript,
    config: &Config,
    bounds: &Bounds,
    action: &Action,
) -> Result<Config, StepError> {
    step_cached(script, config, bounds, action, &mut FilterCache::default())
}

/// `step` with a filter memo shared across a search.
pub fn step_cached(
    script: &CheckedScript,
    config: &Config,
    bounds: &Bounds,
    action: &Action,
    cache: &mut FilterCache,
) -> Result<Config, StepError> {
    let mut next = config.clone();
    next.steps_taken += 1;
    match action {
        Action::Internal { proc } => {
            let live = next
                .live
                .get(*proc)
                .ok_or_else(|| StepError::StuckPolicy(format!("no process {proc}")))?
                .clone();
            internal(script, &mut next, bounds, *proc, live, cache)?;
        }
        Action::Deliver { channel, msg, proc } => {
            let live = next
                .live
                .get(*proc)
                .ok_or_else(|| StepError::StuckPolicy(format!("no process {proc}")))?
                .clone();
            let Proc::In { channel: want, binders, next: cont, .. } = &live.proc else {
                return Err(StepError::StuckPolicy(format!("process {proc} is not an input")));
            };
            if want != channel {
                return Err(StepError::StuckPolicy(format!(
                    "process {proc} reads `{want}`, not `{channel}`"
                )));
            }
            let queue = next.queues.entry(channel.clone()).or_default();
            if *msg >= queue.len() {
                return Err(StepError::StuckPolicy(format!("no message {msg} on `{channel}`")));
            }
            let payload = queue.remove(*msg);
            let mut env = live.env.clone();
            for (binder, value) in binders.iter().zip(&payload) {
                if let Binder::Name(n) = binder {
                    env.bind(n, value.clone());
                }
            }
            next.live[*proc] = LiveProc { proc: (**cont).clone(), env, repl_budget: bounds.repl };
        }
        Action::Inject { channel, payload } => {
            let decl = script
                .channels
                .get(channel)
                .ok_or_else(|| StepError::StuckPolicy(format!("unknown channel `{channel}`")))?;
            if decl.private {
                return Err(StepError::StuckPolicy(format!("channel `{channel}` is private")));
            }
            for t in payload {
                if !t.is_ground() {
                    return Err(StepError::NotGround(format!("injected term `{t}` is not ground")));
                }
                next.knowledge.observe(&script.table, t);
            }
            next.queues.entry(channel.clone()).or_default().push(payload.clone());
        }
        Action::Delete { channel, msg } => {
            let decl = script
                .channels
                .get(channel)
                .ok_or_else(|| StepError::StuckPolicy(format!("unknown channel `{channel}`")))?;
            if decl.private {
                return Err(StepError::StuckPolicy(format!("channel `{channel}` is private")));
            }
            let queue = next.queues.entry(channel.clone()).or_default();
            if *msg >= queue.len() {
                return Err(StepError::StuckPolicy(format!("no message {msg} on `{channel}`")));
            }
            queue.remove(*msg);
        }
        Action::ReadPublic { channel } => {
            let decl = script
                .channels
                .get(channel)
                .ok_or_else(|| StepError::StuckPolicy(format!("unknown channel `{channel}`")))?;
            if decl.private {
                return Err(StepError::StuckPolicy(format!("channel `{channel}` is private")));
            }
            let msgs: Vec<Vec<Term>> =
                next.queues.get(channel).cloned().unwrap_or_default();
            for m in msgs.iter().flatten() {
                next.knowledge.observe(&script.table, m);
            }
        }
    }
    Ok(next)
}

/// Is a non-input reduction enabled for this process?
pub fn has_internal(live: &LiveProc) -> bool {
    !matches!(live.proc, Proc::In { .. })
}

fn internal(
    script: &CheckedScript,
    config: &mut Config,
    bounds: &Bounds,
    idx: usize,
    live: LiveProc,
    cache: &mut FilterCache,
) -> Result<(), StepError> {
    let step_index = config.steps_taken;
    match live.proc {
        Proc::In { .. } => {
            return Err(StepError::StuckPolicy("input needs a delivery".into()));
        }
        Proc::Nil { .. } => {
            config.live.remove(idx);
        }
        Proc::Done { .. } => {
            config.events.push(Event {
                kind: EventKind::Done,
                label: None,
                payload: Vec::new(),
                step: step_index,
            });
            config.live.remove(idx);
        }
        Proc::Par { left, right, .. } => {
            config.live[idx] =
                LiveProc { proc: *left, env: live.env.clone(), repl_budget: bounds.repl };
            config.live.insert(
                idx + 1,
                LiveProc { proc: *right, env: live.env, repl_budget: bounds.repl },
            );
        }
        Proc::Repl { body, .. } => {
            // Bounded unfolding: the replication becomes `repl` copies.
            config.live.remove(idx);
            for i in 0..live.repl_budget.max(0) {
                config.live.insert(
                    idx + i,
                    LiveProc { proc: (*body).clone(), env: live.env.clone(), repl_budget: bounds.repl },
                );
            }
        }
        Proc::New { ref name, sort, ref next, .. } => {
            let fresh = config.fresh_name(name, sort);
            let mut env = live.env.clone();
            env.bind(name, fresh);
            config.live[idx] =
                LiveProc { proc: (**next).clone(), env, repl_budget: bounds.repl };
        }
        Proc::Let { ref name, ref term, ref next, .. } => {
            let value = script.table.normalize(&live.env.apply(term));
            if !value.is_ground() {
                return Err(StepError::NotGround(format!("let `{name}` = `{value}`")));
            }
            let mut env = live.env.clone();
            env.bind(name, value);
            config.live[idx] =
                LiveProc { proc: (**next).clone(), env, repl_budget: bounds.repl };
        }
        Proc::Out { ref channel, ref args, ref next, .. } => {
            let decl = &script.channels[channel];
            let mut payload = Vec::new();
            for (arg, sort) in args.iter().zip(&decl.payload_sorts) {
                let value = script.table.normalize(&live.env.apply(arg));
                if !value.is_ground() {
                    return Err(StepError::NotGround(format!("out `{channel}` sends `{value}`")));
                }
                debug_assert!(
                    script.table.sort_of(&value).map(|s| s.fits(*sort)).unwrap_or(false),
                    "queued message is sort-correct"
                );
                payload.push(value);
            }
            if !decl.private {
                for t in &payload {
                    config.knowledge.observe(&script.table, t);
                }
            }
            config.queues.entry(channel.clone()).or_default().push(payload);
            config.live[idx] =
                LiveProc { proc: (**next).clone(), env: live.env, repl_budget: bounds.repl };
        }
        Proc::Begin { ref label, ref args, ref next, .. }
        | Proc::End { ref label, ref args, ref next, .. } => {
            let kind = match live.proc {
                Proc::Begin { .. } => EventKind::Begin,
                _ => EventKind::End,
            };
            let payload: Vec<Term> =
                args.iter().map(|a| script.table.normalize(&live.env.apply(a))).collect();
            config.events.push(Event {
                kind,
                label: Some(label.clone()),
                payload,
                step: step_index,
            });
            config.live[idx] =
                LiveProc { proc: (**next).clone(), env: live.env, repl_budget: bounds.repl };
        }
        Proc::Invoke { ref process, ref args, .. } => {
            let def = &script.processes[process];
            let mut env = Subst::new();
            for ((param, _), arg) in def.params.iter().zip(args) {
                env.bind(param, script.table.normalize(&live.env.apply(arg)));
            }
            config.live[idx] =
                LiveProc { proc: def.body.clone(), env, repl_budget: bounds.repl };
        }
        Proc::Filter { ref atoms, ref outputs, ref next, span } => {
            let key = (span.start, env_key(&live.env));
            let first = match cache.map.get(&key) {
                Some(hit) => hit.clone(),
                None => {
                    let first =
                        solve_formula(script, atoms, &live.env, DEFAULT_DEPTH)?.into_iter().next();
                    cache.map.insert(key, first.clone());
                    first
                }
            };
            match first {
                None => {
                    // Unsatisfiable filter: the process is discarded.
                    config.live.remove(idx);
                }
                Some(sol) => {
                    let mut env = live.env.clone();
                    for name in outputs {
                        let value = sol.get(name).cloned().ok_or_else(|| {
                            StepError::NotGround(format!("filter output `{name}` unbound"))
                        })?;
                        env.bind(name, value);
                    }
                    config.live[idx] =
                        LiveProc { proc: (**next).clone(), env, repl_budget: bounds.repl };
                }
            }
        }
    }
    Ok(())
}

/// Runs every enabled internal reduction, lowest process index first,
/// until all remaining processes are blocked on inputs or the step bound
/// is reached. Returns the actions taken.
pub fn quiesce(
    script: &CheckedScript,
    config: Config,
    bounds: &Bounds,
) -> Result<(Config, Vec<Action>), StepError> {
    quiesce_cached(script, config, bounds, &mut FilterCache::default())
}

/// `quiesce` with a filter memo shared across a search.
pub fn quiesce_cached(
    script: &CheckedScript,
    config: Config,
    bounds: &Bounds,
    cache: &mut FilterCache,
) -> Result<(Config, Vec<Action>), StepError> {
    let mut config = config;
    let mut actions = Vec::new();
    loop {
        if config.steps_taken >= bounds.steps {
            return Ok((config, actions));
        }
        let Some(idx) = config.live.iter().position(has_internal) else {
            return Ok((config, actions));
        };
        let action = Action::Internal { proc: idx };
        config = step_cached(script, &config, bounds, &action, cache)?;
        actions.push(action);
    }
}
