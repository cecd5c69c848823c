//! A honeycomb lattice too large for the dense simulator: correlations come
//! from the stabilizer tableau alone.

use std::time::Instant;

use inflated_selftest::commands::{cmd_gen_honeycomb, cmd_simulate};

fn main() {
    let start = Instant::now();
    let re = cmd_gen_honeycomb(6, 10, 1).unwrap();
    let (corr, state) = cmd_simulate(&re, 0.0).unwrap();
    assert!(state.is_none());
    let hits = corr.values.values().filter(|v| (v.abs() - 1.0).abs() < 1e-12).count();
    println!(
        "{} at d={} on {} qubits: {} correlators ({} at ±1) via {:?} in {:.2?}",
        re.kind,
        re.d,
        re.graph.n(),
        corr.values.len(),
        hits,
        corr.backend,
        start.elapsed()
    );
}
