//! Micro-probe: time the root quiescence and first expansion layers.
use std::time::Instant;
use tulaverif_core::sim::{explore, step, Bounds};

fn main() {
    let script = tulaverif_core::fixtures::load_fixture("correct").unwrap();
    let bounds = Bounds::default();
    let t0 = Instant::now();
    let init = explore::initial(&script, &bounds);
    let (quiet, actions) = step::quiesce(&script, init, &bounds).unwrap();
    println!("root quiesce: {} actions, {} live, in {:?}", actions.len(), quiet.live.len(), t0.elapsed());
    let t1 = Instant::now();
    let mut cache = tulaverif_core::sim::synth::SynthCache::new();
    let specs = cache.input_specs(&script, &quiet);
    println!("{} specs in {:?}", specs.len(), t1.elapsed());
    for spec in &specs {
        let t2 = Instant::now();
        let cands = cache.candidates(&script, &quiet.knowledge, &bounds, spec);
        println!("  {} proc{} {} disjuncts {} cands in {:?}", spec.channel, spec.proc, spec.disjuncts.len(), cands.len(), t2.elapsed());
    }
}
