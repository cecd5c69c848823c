//! Full self-test of the inflated triangle: ideal device, noisy
//! correlations, and a sign-flipping adversary.

use inflated_selftest::commands::{cmd_gen_re, cmd_selftest, cmd_simulate, KindChoice, RunConfig};
use inflated_selftest::selftest::{run_selftest, Adversary, Device, OutcomeSelection, SelfTestConfig};
use inflated_selftest::Graph;

fn main() {
    let re = cmd_gen_re(&Graph::triangle(), 1, KindChoice::Re1).unwrap();

    let config = RunConfig { outcomes: OutcomeSelection::All, ..RunConfig::default() };
    let ideal = cmd_selftest(&re, None, &config).unwrap();
    println!(
        "ideal: {:?}, {} branches, worst fidelity {:.12}",
        ideal.verdict,
        ideal.branches.len(),
        ideal.isometry_fidelity.unwrap()
    );

    let (noisy, _) = cmd_simulate(&re, 0.01).unwrap();
    let noisy_config = RunConfig { noise: 0.01, ..RunConfig::default() };
    let r = cmd_selftest(&re, Some(&noisy), &noisy_config).unwrap();
    println!(
        "p=0.01: {:?}, ε={:.4}, δ measured {:.4} ≤ bound {:.1}",
        r.verdict,
        r.epsilon,
        r.delta_measured.unwrap(),
        r.delta_bound.unwrap()
    );

    let device = Device::adversary(&re, Adversary::SignFlip { vertex: 1 }).unwrap();
    let r = run_selftest(&re, &device, None, &SelfTestConfig::default()).unwrap();
    println!("sign-flip adversary: {:?}, anticommutator norms {:?}", r.verdict, r.anticommutator_norms);
}
