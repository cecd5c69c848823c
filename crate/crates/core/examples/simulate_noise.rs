//! Correlations of the inflated triangle under increasing local depolarizing
//! noise, from the dense simulator and the stabilizer tableau.

use inflated_selftest::commands::{cmd_gen_re, cmd_simulate, KindChoice};
use inflated_selftest::selftest::reference_correlations;
use inflated_selftest::simulator::NoiseSpec;
use inflated_selftest::Graph;

fn main() {
    let re = cmd_gen_re(&Graph::triangle(), 1, KindChoice::Re1).unwrap();
    for p in [0.0, 0.01, 0.05, 0.1] {
        let (dense, _) = cmd_simulate(&re, p).unwrap();
        let tableau = reference_correlations(&re, NoiseSpec::new(p).unwrap()).unwrap();
        let gap = dense.values.iter().map(|(k, v)| (v - tableau[k]).abs()).fold(0.0, f64::max);
        let worst = dense.values.values().map(|v| 1.0 - v.abs()).fold(0.0, f64::max);
        println!("p={p:<5} backend={:?} max deviation from ±1 = {worst:.4}, dense vs tableau = {gap:.1e}", dense.backend);
    }
}
