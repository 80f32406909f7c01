//! Canonical configuration fingerprints.
//!
//! Two interleavings that deliver the same multiset of messages reach
//! configurations that differ only in fresh-name numbering and process
//! order. The search deduplicates such states by hashing a canonical
//! form: live processes sorted by syntactic site, fresh names renumbered
//! by first appearance in the canonical traversal, queues hashed as
//! multisets. Imprecision here only makes the search explore more, never
//! less.

use super::Config;
use crate::term::{Seq, Term};
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

/// Hash blind to fresh-name identities (they hash by sort and hint only).
fn blind_hash_term(t: &Term, h: &mut DefaultHasher) {
    match t {
        Term::Fresh(f) => {
            0xF5u8.hash(h);
            f.sort.hash(h);
            f.hint.hash(h);
        }
        Term::Var(n, s) => {
            1u8.hash(h);
            n.hash(h);
            s.hash(h);
        }
        Term::Str(s) => {
            2u8.hash(h);
            s.hash(h);
        }
        Term::Wildcard(s) => {
            3u8.hash(h);
            s.hash(h);
        }
        Term::Attr(n, v) => {
            4u8.hash(h);
            n.hash(h);
            blind_hash_term(v, h);
        }
        Term::Apply(f, args) => {
            5u8.hash(h);
            f.hash(h);
            for a in args {
                blind_hash_term(a, h);
            }
        }
        Term::List(seq) => {
            6u8.hash(h);
            blind_hash_seq(seq, h);
        }
        Term::Element(el) => {
            7u8.hash(h);
            el.tag.hash(h);
            blind_hash_seq(&el.attrs, h);
            blind_hash_seq(&el.children, h);
        }
    }
}

fn blind_hash_seq(seq: &Seq, h: &mut DefaultHasher) {
    seq.items.len().hash(h);
    for i in &seq.items {
        blind_hash_term(i, h);
    }
    if let Some(r) = &seq.rest {
        blind_hash_term(r, h);
    }
}

fn blind(t: &Term) -> u64 {
    let mut h = DefaultHasher::new();
    blind_hash_term(t, &mut h);
    h.finish()
}

struct Canon {
    ids: HashMap<u64, u64>,
}

impl Canon {
    fn term(&mut self, t: &Term, h: &mut DefaultHasher) {
        match t {
            Term::Fresh(f) => {
                let next = self.ids.len() as u64;
                let canon = *self.ids.entry(f.id).or_insert(next);
                0xF5u8.hash(h);
                f.sort.hash(h);
                f.hint.hash(h);
                canon.hash(h);
            }
            Term::Attr(n, v) => {
                4u8.hash(h);
                n.hash(h);
                self.term(v, h);
            }
            Term::Apply(f, args) => {
                5u8.hash(h);
                f.hash(h);
                for a in args {
                    self.term(a, h);
                }
            }
            Term::List(seq) => {
                6u8.hash(h);
                self.seq(seq, h);
            }
            Term::Element(el) => {
                7u8.hash(h);
                el.tag.hash(h);
                self.seq(&el.attrs, h);
                self.seq(&el.children, h);
            }
            other => blind_hash_term(other, h),
        }
    }

    fn seq(&mut self, seq: &Seq, h: &mut DefaultHasher) {
        seq.items.len().hash(h);
        for i in &seq.items {
            self.term(i, h);
        }
        if let Some(r) = &seq.rest {
            self.term(r, h);
        }
    }
}

/// Canonical fingerprint of a configuration, excluding the step counter.
pub fn fingerprint(config: &Config) -> u64 {
    let mut canon = Canon { ids: HashMap::new() };
    let mut h = DefaultHasher::new();

    // Live processes in a site-sorted canonical order.
    let mut order: Vec<usize> = (0..config.live.len()).collect();
    order.sort_by_key(|&i| {
        let live = &config.live[i];
        let mut bh = DefaultHasher::new();
        for (k, v) in live.env.iter() {
            k.hash(&mut bh);
            blind_hash_term(v, &mut bh);
        }
        (live.proc.span().start, bh.finish())
    });
    for &i in &order {
        let live = &config.live[i];
        live.proc.span().start.hash(&mut h);
        for (k, v) in live.env.iter() {
            k.hash(&mut h);
            canon.term(v, &mut h);
        }
    }

    // Queues as per-channel multisets, messages in blind-hash order.
    for (channel, msgs) in &config.queues {
        channel.hash(&mut h);
        let mut order: Vec<usize> = (0..msgs.len()).collect();
        order.sort_by_key(|&i| msgs[i].iter().map(blind).fold(0u64, u64::wrapping_add));
        for &i in &order {
            for t in &msgs[i] {
                canon.term(t, &mut h);
            }
        }
    }

    // Of the event log, only the set of begun payloads shapes the future:
    // violations are checked at every node before expansion, and a future
    // end is justified by the begins available, regardless of log order.
    let mut acc = 0u64;
    for ev in &config.events {
        if ev.kind != super::EventKind::Begin {
            continue;
        }
        let mut local = Canon { ids: canon.ids.clone() };
        let mut th = DefaultHasher::new();
        ev.label.hash(&mut th);
        for t in &ev.payload {
            local.term(t, &mut th);
        }
        acc = acc.wrapping_add(th.finish());
    }
    acc.hash(&mut h);

    // Knowledge as an order-insensitive combination. Each term is hashed
    // with the global renaming extended by a term-local numbering for ids
    // not yet seen, so the combination is invariant under renaming.
    let mut acc = 0u64;
    for t in config.knowledge.base() {
        let mut local = Canon { ids: canon.ids.clone() };
        let mut th = DefaultHasher::new();
        local.term(t, &mut th);
        acc = acc.wrapping_add(th.finish());
    }
    acc.hash(&mut h);

    h.finish()
}
