//! Scratch driver for measuring search throughput on the fixtures.

use std::time::Instant;
use tulaverif_core::sim::{explore, Bounds, ExploreOutcome};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "correct".into());
    let goal = std::env::args().nth(2).unwrap_or_else(|| "done".into());
    let max_states: usize =
        std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let script = tulaverif_core::fixtures::load_fixture(&name).unwrap();
    let bounds = Bounds { max_states, ..Bounds::default() };
    let t0 = Instant::now();
    let outcome = if goal == "done" {
        explore::explore_done(&script, &bounds)
    } else {
        explore::explore_attacks(&script, &bounds)
    }
    .unwrap();
    match outcome {
        ExploreOutcome::Violation { label, explored, trace } => {
            println!(
                "{name}: hit `{label}` after {explored} states, {} actions, in {:?}",
                trace.actions.len(),
                t0.elapsed()
            );
        }
        ExploreOutcome::Exhausted { explored } => {
            println!("{name}: exhausted after {explored} states in {:?}", t0.elapsed());
        }
    }
}
