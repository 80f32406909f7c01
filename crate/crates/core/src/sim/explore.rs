//! Bounded runs: seeded random interleavings, replay, safety verdicts on
//! event logs, and the exhaustive attack search.

use super::step::{has_internal, quiesce_cached, step_cached, FilterCache, StepError};
use super::synth::SynthCache;
use crate::matching::match_pattern;
use super::{Action, Bounds, Config, Event, EventKind, LiveProc};
use crate::syntax::ast::Proc;
use crate::syntax::CheckedScript;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Per-label safety verdict over one event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub begins: usize,
    pub ends: usize,
    /// Ends sharing a payload with an earlier end; duplicates are legal
    /// under one-to-many agreement but worth surfacing.
    pub duplicate_ends: usize,
}

/// A finished run: the actions taken, the resulting event log, and the
/// verdict per declared correspondence.
#[derive(Debug, Clone, Serialize)]
pub struct RunTrace {
    pub seed: Option<u64>,
    pub actions: Vec<Action>,
    pub events: Vec<Event>,
    pub verdicts: BTreeMap<String, SafetyVerdict>,
    pub done_reached: bool,
}

#[derive(Debug, Clone, Serialize)]
pub enum ExploreOutcome {
    Violation { label: String, trace: RunTrace, explored: usize },
    Exhausted { explored: usize },
}

/// The initial configuration: the top-level process alone.
pub fn initial(script: &CheckedScript, bounds: &Bounds) -> Config {
    let mut config = Config::new();
    if let Some(main) = &script.main {
        config.live.push(LiveProc {
            proc: main.clone(),
            env: crate::term::Subst::new(),
            repl_budget: bounds.repl,
        });
    }
    config
}

/// Every end-event must be preceded by a begin-event with the same label
/// and payload; one begin may justify many ends.
pub fn trace_safe(events: &[Event], labels: &[String]) -> BTreeMap<String, SafetyVerdict> {
    let mut out = BTreeMap::new();
    for label in labels {
        let mut begun: Vec<&[crate::term::Term]> = Vec::new();
        let mut ended: Vec<&[crate::term::Term]> = Vec::new();
        let mut safe = true;
        let mut duplicate_ends = 0;
        let mut ends = 0;
        for ev in events {
            if ev.label.as_deref() != Some(label.as_str()) {
                continue;
            }
            match ev.kind {
                EventKind::Begin => begun.push(&ev.payload),
                EventKind::End => {
                    ends += 1;
                    if ended.contains(&ev.payload.as_slice()) {
                        duplicate_ends += 1;
                    }
                    ended.push(&ev.payload);
                    if !begun.contains(&ev.payload.as_slice()) {
                        safe = false;
                    }
                }
                EventKind::Done => {}
            }
        }
        out.insert(
            label.clone(),
            SafetyVerdict { safe, begins: begun.len(), ends, duplicate_ends },
        );
    }
    out
}

fn verdicts(script: &CheckedScript, events: &[Event]) -> BTreeMap<String, SafetyVerdict> {
    let labels: Vec<String> = script.correspondences.keys().cloned().collect();
    trace_safe(events, &labels)
}

fn first_violation(verdicts: &BTreeMap<String, SafetyVerdict>) -> Option<String> {
    verdicts.iter().find(|(_, v)| !v.safe).map(|(l, _)| l.clone())
}

/// Replays an action list through `step`, returning the final configuration.
pub fn replay(
    script: &CheckedScript,
    bounds: &Bounds,
    actions: &[Action],
) -> Result<Config, StepError> {
    let mut config = initial(script, bounds);
    for action in actions {
        config = super::step::step(script, &config, bounds, action)?;
    }
    Ok(config)
}

/// A seeded random interleaving of process reductions and attacker (or,
/// at attacker depth zero, benign environment) injections. Identical
/// inputs produce identical traces.
pub fn run_bounded(script: &CheckedScript, bounds: &Bounds, seed: u64) -> Result<RunTrace, StepError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = initial(script, bounds);
    let mut actions = Vec::new();
    let mut cache = SynthCache::new();
    let mut filters = FilterCache::default();
    while config.steps_taken < bounds.steps {
        let mut enabled: Vec<Action> = Vec::new();
        for (i, live) in config.live.iter().enumerate() {
            if has_internal(live) {
                enabled.push(Action::Internal { proc: i });
            }
        }
        // Deliveries of queued messages.
        for (i, live) in config.live.iter().enumerate() {
            if let Proc::In { channel, .. } = &live.proc {
                let count = config.queues.get(channel).map_or(0, Vec::len);
                for msg in 0..count {
                    enabled.push(Action::Deliver { channel: channel.clone(), msg, proc: i });
                }
            }
        }
        // Injections for blocked public inputs; at depth zero only the
        // first (canonical) candidate per input is offered.
        if enabled.iter().all(|a| !matches!(a, Action::Internal { .. })) {
            for spec in cache.input_specs(script, &config) {
                if !spec.public {
                    continue;
                }
                let cands = cache.candidates(script, &config.knowledge, bounds, &spec);
                let take = if bounds.attacker_depth == 0 { 1 } else { cands.len() };
                for payload in cands.iter().take(take) {
                    enabled.push(Action::Inject {
                        channel: spec.channel.clone(),
                        payload: payload.clone(),
                    });
                }
            }
        }
        let Some(action) = enabled.choose(&mut rng).cloned() else { break };
        config = step_cached(script, &config, bounds, &action, &mut filters)?;
        actions.push(action);
    }
    let verdicts = verdicts(script, &config.events);
    Ok(RunTrace {
        seed: Some(seed),
        actions,
        events: config.events.clone(),
        verdicts,
        done_reached: config.events.iter().any(|e| e.kind == EventKind::Done),
    })
}

/// Exhaustive bounded search over deliveries and synthesized injections
/// for a correspondence violation. Internal reductions are collapsed
/// deterministically between choice points; delivering to an input is the
/// only branching. This is the brute-force oracle the resolution verifier
/// is checked against.
pub fn explore_attacks(script: &CheckedScript, bounds: &Bounds) -> Result<ExploreOutcome, StepError> {
    explore(script, bounds, SearchGoal::Violation)
}

/// Same search, stopping when a done-event becomes reachable.
pub fn explore_done(script: &CheckedScript, bounds: &Bounds) -> Result<ExploreOutcome, StepError> {
    explore(script, bounds, SearchGoal::Done)
}

#[derive(Clone, Copy, PartialEq)]
enum SearchGoal {
    Violation,
    Done,
}

fn explore(
    script: &CheckedScript,
    bounds: &Bounds,
    goal: SearchGoal,
) -> Result<ExploreOutcome, StepError> {
    let mut explored = 0usize;
    let mut cache = SynthCache::new();
    let mut filters = FilterCache::default();
    let mut visited: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    let mut dedup_hits = 0usize;
    let (root, root_actions) =
        quiesce_cached(script, initial(script, bounds), bounds, &mut filters)?;
    let mut stack: Vec<(Config, Vec<Action>)> = vec![(root, root_actions)];
    let debug = std::env::var("TULAVERIF_DEBUG").is_ok();
    let modulo: usize = std::env::var("TULAVERIF_DEBUG")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(100);
    while let Some((config, path)) = stack.pop() {
        explored += 1;
        if debug && explored % modulo == 0 {
            let blocked: Vec<String> = config
                .live
                .iter()
                .map(|l| match &l.proc {
                    Proc::In { channel, .. } => format!("in:{channel}"),
                    other => format!("{:?}", std::mem::discriminant(other)),
                })
                .collect();
            eprintln!(
                "explored {explored}, stack {}, dedup {dedup_hits}, know {}, path {} actions, live {:?}, {} events, queues {:?}",
                config.knowledge.base().len(),
                stack.len(),
                path.len(),
                blocked,
                config.events.len(),
                config.queues.iter().map(|(c, q)| (c.clone(), q.len())).collect::<Vec<_>>()
            );
        }
        if explored > bounds.max_states {
            return Ok(ExploreOutcome::Exhausted { explored });
        }
        let verdicts = verdicts(script, &config.events);
        let hit = match goal {
            SearchGoal::Violation => first_violation(&verdicts),
            SearchGoal::Done => config
                .events
                .iter()
                .any(|e| e.kind == EventKind::Done)
                .then(|| "done".to_string()),
        };
        if let Some(label) = hit {
            let done_reached = config.events.iter().any(|e| e.kind == EventKind::Done);
            return Ok(ExploreOutcome::Violation {
                label,
                trace: RunTrace {
                    seed: None,
                    actions: path,
                    events: config.events.clone(),
                    verdicts,
                    done_reached,
                },
                explored,
            });
        }
        if config.steps_taken >= bounds.steps {
            continue;
        }

        // Children in reverse so the stack explores deterministically in
        // forward order: queued deliveries first, then injections.
        // Structurally identical blocked replicas (same site, same
        // environment) are served once; serving the second is symmetric.
        let mut specs = cache.input_specs(script, &config);
        let mut seen_shapes = std::collections::BTreeSet::new();
        specs.retain(|s| seen_shapes.insert((s.site, s.env_hash, s.channel.clone())));

        let mut children: Vec<(Config, Vec<Action>)> = Vec::new();
        for spec in &specs {
            let queued: Vec<Vec<crate::term::Term>> =
                config.queues.get(&spec.channel).cloned().unwrap_or_default();
            for (msg, payload) in queued.iter().enumerate() {
                // A delivery the receiver's own filter can never accept
                // only kills the receiver; the same violations are
                // reachable by never delivering it.
                if !accepts(script, spec, payload) {
                    continue;
                }
                let action = Action::Deliver { channel: spec.channel.clone(), msg, proc: spec.proc };
                if let Some(child) =
                    advance(script, bounds, &config, path.clone(), vec![action], &mut filters)?
                {
                    children.push(child);
                }
            }
        }
        for spec in &specs {
            if !spec.public {
                continue;
            }
            for payload in cache.candidates(script, &config.knowledge, bounds, spec).iter() {
                let queue_len = config.queues.get(&spec.channel).map_or(0, Vec::len);
                let inject = Action::Inject { channel: spec.channel.clone(), payload: payload.clone() };
                let deliver =
                    Action::Deliver { channel: spec.channel.clone(), msg: queue_len, proc: spec.proc };
                if let Some(child) = advance(
                    script,
                    bounds,
                    &config,
                    path.clone(),
                    vec![inject, deliver],
                    &mut filters,
                )? {
                    children.push(child);
                }
            }
        }
        for child in children.into_iter().rev() {
            // Skip configurations already reached (up to fresh-name
            // renumbering and process order) with at least as much of the
            // step budget left.
            let fp = super::canon::fingerprint(&child.0);
            match visited.get(&fp) {
                Some(&steps) if steps <= child.0.steps_taken => {
                    dedup_hits += 1;
                    continue;
                }
                _ => {
                    visited.insert(fp, child.0.steps_taken);
                }
            }
            stack.push(child);
        }
    }
    Ok(ExploreOutcome::Exhausted { explored })
}

/// Applies the actions and the following internal closure; prunes edges
/// whose only effect was a process dying on an unusable delivery.
fn advance(
    script: &CheckedScript,
    bounds: &Bounds,
    config: &Config,
    mut path: Vec<Action>,
    actions: Vec<Action>,
    filters: &mut FilterCache,
) -> Result<Option<(Config, Vec<Action>)>, StepError> {
    let mut next = config.clone();
    let injected = actions.iter().any(|a| matches!(a, Action::Inject { .. }));
    for action in actions {
        next = step_cached(script, &next, bounds, &action, filters)?;
        path.push(action);
    }
    let (next, closure) = quiesce_cached(script, next, bounds, filters)?;
    path.extend(closure);
    if injected
        && next.events.len() == config.events.len()
        && queue_total(&next) == queue_total(config)
        && next.live.len() < config.live.len()
    {
        return Ok(None);
    }
    Ok(Some((next, path)))
}

fn queue_total(config: &Config) -> usize {
    config.queues.values().map(Vec::len).sum()
}

/// Does a payload tuple match at least one acceptance disjunct of the
/// blocked input?
fn accepts(script: &CheckedScript, spec: &super::synth::InputSpec, payload: &[crate::term::Term]) -> bool {
    spec.disjuncts.iter().any(|disjunct| {
        let mut states = vec![crate::term::Subst::new()];
        for (pattern, value) in disjunct.iter().zip(payload) {
            let mut next = Vec::new();
            for st in &states {
                next.extend(match_pattern(&script.table, pattern, value, st));
            }
            states = next;
            if states.is_empty() {
                return false;
            }
        }
        true
    })
}
