//! Operational simulator: executes checked scripts with explicit channel
//! queues, an event log, and a bounded Dolev-Yao attacker. The exhaustive
//! attack search doubles as the brute-force oracle for the resolution
//! verifier.

pub mod canon;
pub mod explore;
pub mod knowledge;
pub mod step;
pub mod synth;

pub use explore::{explore_attacks, run_bounded, trace_safe, ExploreOutcome, RunTrace, SafetyVerdict};
pub use knowledge::Knowledge;
pub use step::{quiesce, step, StepError};

use crate::sorts::Sort;
use crate::syntax::ast::Proc;
use crate::term::{Subst, Term};
use serde::Serialize;
use std::collections::BTreeMap;

/// Search and simulation bounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bounds {
    /// Total micro-steps a run may take.
    pub steps: usize,
    /// Copies a replication may unfold.
    pub repl: usize,
    /// Attacker synthesis depth: nested applications of declared symbols
    /// on top of known terms (XML re-assembly is free, the wire format is
    /// transparent data).
    pub attacker_depth: usize,
    /// Explored-configuration limit for the exhaustive search.
    pub max_states: usize,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds { steps: 600, repl: 2, attacker_depth: 3, max_states: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Begin,
    End,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    /// Correspondence label; absent for done events.
    pub label: Option<String>,
    pub payload: Vec<Term>,
    pub step: usize,
}

/// A schedulable transition. Traces are action lists and replay exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Action {
    /// The single enabled internal reduction of one live process.
    Internal { proc: usize },
    /// Deliver queue message `msg` on `channel` to blocked process `proc`.
    Deliver { channel: String, msg: usize, proc: usize },
    /// Attacker (or benign environment) appends a tuple to a public queue.
    Inject { channel: String, payload: Vec<Term> },
    /// Attacker removes a message from a public queue.
    Delete { channel: String, msg: usize },
    /// Attacker ingests the current contents of a public queue.
    ReadPublic { channel: String },
}

#[derive(Debug, Clone)]
pub struct LiveProc {
    pub proc: Proc,
    pub env: Subst,
    /// Remaining unfoldings when the process is a replication.
    pub repl_budget: usize,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub live: Vec<LiveProc>,
    pub queues: BTreeMap<String, Vec<Vec<Term>>>,
    pub events: Vec<Event>,
    pub fresh_supply: u64,
    pub knowledge: Knowledge,
    pub steps_taken: usize,
}

impl Config {
    pub fn new() -> Config {
        Config {
            live: Vec::new(),
            queues: BTreeMap::new(),
            events: Vec::new(),
            fresh_supply: 0,
            knowledge: Knowledge::new(),
            steps_taken: 0,
        }
    }

    pub fn fresh_name(&mut self, hint: &str, sort: Sort) -> Term {
        self.fresh_supply += 1;
        Term::Fresh(crate::term::FreshName { id: self.fresh_supply, sort, hint: hint.into() })
    }
}

impl Default for Config {
    fn default() -> Config {
        Config::new()
    }
}
