//! Deflation of the physical state, outcome corrections and the SWAP
//! isometry that extracts the certified state into an ancilla register.

use std::collections::BTreeMap;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{key_observable, ObservableAssignment, SelfTestError};
use crate::experiments::{Anchor, Basis, ReKind, ReferenceExperiment};
use crate::graph::{Graph, Vertex};
use crate::simulator::{chain_order, gates, prepare_graph_state, NoiseSpec, Op2, SimError, StateVector};

/// Outcome-dependent `Z` corrections on the power vertices: per vertex, the
/// parity of the outcomes at even chain positions counted outward from it.
pub fn x_e_corrections(
    re: &ReferenceExperiment,
    outcomes: &BTreeMap<Vertex, u8>,
) -> Result<BTreeMap<Vertex, u8>, SelfTestError> {
    let Some(ig) = &re.inflation else {
        return Ok(re.target_graph().vertices().iter().map(|&u| (u, 0)).collect());
    };
    let bit = |v: Vertex| outcomes.get(&v).map(|x| x & 1).ok_or(SelfTestError::MissingOutcome(v));
    let mut out = BTreeMap::new();
    for &u in ig.base.vertices() {
        let mut x = 0;
        for &w in ig.base.neighbors(u).map_err(crate::experiments::ExperimentError::from)? {
            let chain = ig.chain_from(u, w);
            for s in 1..=ig.d {
                x ^= bit(chain[2 * s - 1])?;
            }
        }
        out.insert(u, x);
    }
    // Bare vertex pair: the endpoint at odd chain distance from v_m (v_l for
    // odd d, v_r for even d) also picks up x_{v_m}, plus a constant flip
    // from the Y measurements next to v_m.
    if let (true, Anchor::Pair { vl, vr, vm }) = (re.pair_only, &re.anchor) {
        let end = if re.d % 2 == 1 { vl } else { vr };
        *out.get_mut(end).expect("power vertex") ^= bit(*vm)? ^ 1;
    }
    Ok(out)
}

/// `Z^{x_e} |G⟩` on the target graph.
pub fn target_state(re: &ReferenceExperiment, corrections: &BTreeMap<Vertex, u8>) -> Result<StateVector, SelfTestError> {
    let mut s = prepare_graph_state(&re.target_graph())?;
    for (&v, &x) in corrections {
        if x & 1 == 1 {
            let q = s.qubit(v)?;
            s = s.apply_local(q, &gates::Z);
        }
    }
    Ok(s)
}

fn close(a: C, b: C) -> bool {
    (a - b).norm() < 1e-9
}

/// `(1 + (-1)^x O)/2` as a rank-one vector, `Keep` if it is the identity or
/// `Reject` if it vanishes.
enum Projector {
    Rank1([C; 2]),
    Keep,
    Reject,
}

fn eigen_projector(op: &Op2, outcome: u8) -> Projector {
    let s = if outcome & 1 == 0 { 1.0 } else { -1.0 };
    let p = gates::scale(&gates::add(&gates::ID, &gates::scale(op, s)), 0.5);
    let trace = (p[0][0] + p[1][1]).re;
    if trace > 1.5 {
        return Projector::Keep;
    }
    if trace < 0.5 {
        return Projector::Reject;
    }
    // Rank one: any non-zero column spans the range.
    let col = if p[0][0].norm() >= p[1][1].norm() { 0 } else { 1 };
    let e = [p[0][col], p[1][col]];
    let norm = (e[0].norm_sqr() + e[1].norm_sqr()).sqrt();
    debug_assert!(close(p[0][0] + p[1][1], C::new(1.0, 0.0)));
    Projector::Rank1([e[0] / norm, e[1] / norm])
}

/// Project one chain vertex onto its outcome and drop it. Returns the
/// renormalized state and the conditional probability.
fn deflate_step(
    state: &StateVector,
    v: Vertex,
    op: &Op2,
    outcome: u8,
) -> Result<(StateVector, f64), SelfTestError> {
    match eigen_projector(op, outcome) {
        Projector::Keep => Ok((state.clone(), 1.0)),
        Projector::Reject => Err(SelfTestError::ZeroProbability),
        Projector::Rank1(e) => {
            let (s, p) = state.contract_out(v, e)?;
            if p < 1e-14 {
                return Err(SelfTestError::ZeroProbability);
            }
            Ok((s.scaled(1.0 / p.sqrt()), p))
        }
    }
}

fn chain_settings(re: &ReferenceExperiment) -> Result<Vec<(Vertex, Basis)>, SelfTestError> {
    let Some(ig) = &re.inflation else { return Ok(Vec::new()) };
    chain_order(ig)
        .into_iter()
        .map(|v| Ok((v, *re.deflation_settings.get(&v).ok_or(SimError::MissingSetting(v))?)))
        .collect()
}

/// Measure every chain vertex with the device's deflation observable and
/// keep the given outcomes. Returns the state left on the power vertices
/// and the probability of the outcome string.
pub fn deflate_physical(
    state: &StateVector,
    re: &ReferenceExperiment,
    assignment: &ObservableAssignment,
    outcomes: &BTreeMap<Vertex, u8>,
) -> Result<(StateVector, f64), SelfTestError> {
    let mut s = state.clone();
    let mut prob = 1.0;
    for (v, basis) in chain_settings(re)? {
        let x = *outcomes.get(&v).ok_or(SelfTestError::MissingOutcome(v))?;
        let (next, p) = deflate_step(&s, v, &assignment.local(v, basis), x)?;
        s = next;
        prob *= p;
    }
    Ok((s, prob))
}

/// Sample a chain outcome string from the Born distribution.
pub fn sample_outcomes(
    state: &StateVector,
    re: &ReferenceExperiment,
    assignment: &ObservableAssignment,
    seed: u64,
) -> Result<BTreeMap<Vertex, u8>, SelfTestError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = state.clone();
    let mut out = BTreeMap::new();
    for (v, basis) in chain_settings(re)? {
        let op = assignment.local(v, basis);
        let x = match deflate_step(&s, v, &op, 0) {
            Ok((next, p)) if rng.gen::<f64>() < p => {
                s = next;
                0
            }
            _ => {
                s = deflate_step(&s, v, &op, 1)?.0;
                1
            }
        };
        out.insert(v, x);
    }
    Ok(out)
}

/// Per-vertex extraction circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Circuit {
    /// `H`, controlled-𝓩, `H`, controlled-𝓧.
    Standard,
    /// `H`, controlled-𝓩, `H`, controlled-𝓨, then `S` on the ancilla.
    YVariant,
    /// `H`, controlled-𝓩, `H`, controlled-𝓨: `Y` simply takes the place of
    /// `X`, for a vertex whose deflated state carries an `S` rotation.
    YForX,
    /// `H`, controlled-𝓧, controlled-𝓨, `S`, `H`, controlled-𝓧 (centre of
    /// the line of three).
    Center,
}

impl Circuit {
    /// The two device bases the circuit uses.
    pub fn bases(self) -> [Basis; 2] {
        match self {
            Circuit::Standard => [Basis::X, Basis::Z],
            Circuit::YVariant | Circuit::YForX => [Basis::Y, Basis::Z],
            Circuit::Center => [Basis::X, Basis::Y],
        }
    }
}

pub fn circuit_for(re: &ReferenceExperiment, u: Vertex) -> Circuit {
    match (&re.kind, &re.anchor) {
        (ReKind::Re0, Anchor::Line { vc, .. }) if *vc == u => Circuit::Center,
        (ReKind::Re0, Anchor::Line { vc, .. }) if re.graph.has_edge(*vc, u) => Circuit::YVariant,
        (ReKind::Re3, Anchor::Pair { vl, .. }) if *vl == u && re.d == 1 => {
            if re.pair_only {
                Circuit::YForX
            } else {
                Circuit::YVariant
            }
        }
        _ => Circuit::Standard,
    }
}

/// Apply the SWAP-type isometry: one `|0⟩` ancilla per power vertex (in
/// target-graph order, least significant) in front of the physical
/// register.
pub fn swap_isometry(
    state: &StateVector,
    re: &ReferenceExperiment,
    assignment: &ObservableAssignment,
) -> Result<StateVector, SelfTestError> {
    let target = re.target_graph();
    let power = target.vertices();
    let present = power.iter().filter(|&&u| state.qubit(u).is_ok()).count();
    if present != power.len() {
        return Err(SelfTestError::AncillaMismatch { expected: power.len(), got: present });
    }
    let k = power.len();
    let mut joint = StateVector::zero(power.to_vec())?.tensor(state)?;
    for (a, &u) in power.iter().enumerate() {
        let q = k + state.qubit(u)?;
        let obs = |b: Basis| key_observable(re, assignment, u, b);
        let c = |s: &StateVector, op: Op2| s.apply_controlled(a, &[(q, op)]);
        joint = match circuit_for(re, u) {
            Circuit::Standard => {
                let s = joint.apply_local(a, &gates::HADAMARD);
                let s = c(&s, obs(Basis::Z)?).apply_local(a, &gates::HADAMARD);
                c(&s, obs(Basis::X)?)
            }
            Circuit::YVariant => {
                let s = joint.apply_local(a, &gates::HADAMARD);
                let s = c(&s, obs(Basis::Z)?).apply_local(a, &gates::HADAMARD);
                c(&s, obs(Basis::Y)?).apply_local(a, &gates::S)
            }
            Circuit::YForX => {
                let s = joint.apply_local(a, &gates::HADAMARD);
                let s = c(&s, obs(Basis::Z)?).apply_local(a, &gates::HADAMARD);
                c(&s, obs(Basis::Y)?)
            }
            Circuit::Center => {
                let (x, y) = (obs(Basis::X)?, obs(Basis::Y)?);
                let s = joint.apply_local(a, &gates::HADAMARD);
                let s = c(&c(&s, x), y).apply_local(a, &gates::S).apply_local(a, &gates::HADAMARD);
                c(&s, x)
            }
        };
    }
    Ok(joint)
}

/// `(⟨t| ⊗ 1)|joint⟩` for a joint state whose `t.n()` least significant
/// qubits are the ancillas.
pub fn partial_overlap(joint: &StateVector, t: &StateVector) -> Result<StateVector, SelfTestError> {
    let k = t.n();
    let dim = 1usize << k;
    let amps: Vec<C> = joint
        .amplitudes()
        .chunks_exact(dim)
        .map(|block| block.iter().zip(t.amplitudes()).map(|(a, b)| b.conj() * a).sum())
        .collect();
    Ok(StateVector::from_raw(joint.vertices()[k..].to_vec(), amps)?)
}

/// Distance from `joint` to the closest `t ⊗ junk`, minimized over the
/// junk state and global phase: `√(2 − 2‖(⟨t|⊗1)|joint⟩‖)`.
fn product_distance(joint: &StateVector, t: &StateVector) -> Result<(f64, StateVector), SelfTestError> {
    let junk = partial_overlap(joint, t)?;
    let overlap = junk.norm_sqr().sqrt();
    Ok(((2.0 - 2.0 * overlap).max(0.0).sqrt(), junk))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub probability: f64,
    pub corrections: BTreeMap<Vertex, u8>,
    /// `‖(⟨G^(x)| ⊗ 1)Φ(Ψ′)‖²`.
    pub fidelity: f64,
    /// Distance of `Φ(Ψ′)` to the nearest `|G^(x)⟩ ⊗ |junk⟩`.
    pub delta: f64,
    /// Same distance for `Φ(𝓞_u Ψ′)` against `O_u|G^(x)⟩ ⊗ |junk⟩`, keyed
    /// `"<vertex>:<basis>"`.
    pub per_observable: BTreeMap<String, f64>,
}

/// Ancilla operator a device observable should map to under the circuit.
/// Every circuit maps a Pauli to itself except `YForX`, where the device's
/// `Y` stands in for `X`.
pub fn ancilla_image(circuit: Circuit, basis: Basis) -> Op2 {
    match (circuit, basis) {
        (Circuit::YForX, Basis::Y) => gates::X,
        (_, b) => super::ideal_observable(b),
    }
}

/// Deflate, apply the isometry and measure how far the result is from the
/// corrected target state times junk.
pub fn delta_equivalence(
    phys: &StateVector,
    re: &ReferenceExperiment,
    assignment: &ObservableAssignment,
    outcomes: &BTreeMap<Vertex, u8>,
) -> Result<DeltaReport, SelfTestError> {
    let (deflated, probability) = deflate_physical(phys, re, assignment, outcomes)?;
    let corrections = x_e_corrections(re, outcomes)?;
    let t = target_state(re, &corrections)?;
    let joint = swap_isometry(&deflated, re, assignment)?;
    let (delta, junk) = product_distance(&joint, &t)?;
    let fidelity = junk.norm_sqr();
    let junk = if fidelity > 1e-300 { junk.scaled(1.0 / fidelity.sqrt()) } else { junk };

    let mut per_observable = BTreeMap::new();
    for &u in re.target_graph().vertices() {
        let circuit = circuit_for(re, u);
        for basis in circuit.bases() {
            let op = key_observable(re, assignment, u, basis)?;
            let moved = deflated.apply_local(deflated.qubit(u)?, &op);
            let image = swap_isometry(&moved, re, assignment)?;
            let tq = t.qubit(u)?;
            let expected = t.apply_local(tq, &ancilla_image(circuit, basis)).tensor(&junk)?;
            let overlap = expected.inner(&image)?.norm();
            per_observable.insert(format!("{u}:{basis}"), (2.0 - 2.0 * overlap).max(0.0).sqrt());
        }
    }
    Ok(DeltaReport { probability, corrections, fidelity, delta, per_observable })
}

/// Distribution over `Z`-strings equivalent to independent depolarizing
/// errors on a graph state: `X_v` acts as `Z^{N(v)}`, `Y_v` as
/// `Z^{N(v)} Z_v`. Indexed by bit masks in vertex order.
fn z_string_distribution(g: &Graph, noise: NoiseSpec) -> Vec<f64> {
    let n = g.n();
    let mut q = vec![0.0; 1 << n];
    q[0] = 1.0;
    let (stay, flip) = (1.0 - 0.75 * noise.p, 0.25 * noise.p);
    for (i, &v) in g.vertices().iter().enumerate() {
        let nb: usize = g.neighbors(v).expect("vertex").iter().map(|&w| 1 << g.index_of(w).expect("vertex")).sum();
        let masks = [nb, 1 << i, nb ^ (1 << i)];
        let mut next = q.iter().map(|w| w * stay).collect::<Vec<_>>();
        for (s, &w) in q.iter().enumerate() {
            if w != 0.0 {
                masks.iter().for_each(|m| next[s ^ m] += w * flip);
            }
        }
        q = next;
    }
    q
}

/// δ for the depolarized graph state. The noisy state is a mixture of
/// `Z^s|G⟩`; each component is deflated and mapped separately and the
/// ancilla fidelity is averaged with weights `q(s)·p_s(x)`.
pub fn delta_depolarized(
    re: &ReferenceExperiment,
    assignment: &ObservableAssignment,
    noise: NoiseSpec,
    outcomes: &BTreeMap<Vertex, u8>,
) -> Result<DeltaReport, SelfTestError> {
    let ideal = prepare_graph_state(&re.graph)?;
    let corrections = x_e_corrections(re, outcomes)?;
    let t = target_state(re, &corrections)?;
    let q = z_string_distribution(&re.graph, noise);
    let (mut weight, mut fid) = (0.0, 0.0);
    for (s, &qs) in q.iter().enumerate() {
        if qs < 1e-15 {
            continue;
        }
        let mut psi = ideal.clone();
        for i in (0..re.graph.n()).filter(|i| s >> i & 1 == 1) {
            psi = psi.apply_local(i, &gates::Z);
        }
        let (deflated, p) = match deflate_physical(&psi, re, assignment, outcomes) {
            Ok(r) => r,
            Err(SelfTestError::ZeroProbability) => continue,
            Err(e) => return Err(e),
        };
        let joint = swap_isometry(&deflated, re, assignment)?;
        weight += qs * p;
        fid += qs * p * partial_overlap(&joint, &t)?.norm_sqr();
    }
    if weight < 1e-14 {
        return Err(SelfTestError::ZeroProbability);
    }
    let fidelity = fid / weight;
    Ok(DeltaReport {
        probability: weight,
        corrections,
        fidelity,
        delta: (2.0 - 2.0 * fidelity.sqrt()).max(0.0).sqrt(),
        per_observable: BTreeMap::new(),
    })
}
