//! Self-testing checks on a (simulated) physical experiment: ε-simulation,
//! local anticommutation, deflation corrections, the SWAP isometry and the
//! robustness bounds.

mod bounds;
mod isometry;

pub use bounds::{
    bound_params, constant_c, general_bound, robustness_bound, table_bound, Bound, BoundKind, BoundParams,
};
pub use isometry::{
    ancilla_image, circuit_for, deflate_physical, delta_depolarized, delta_equivalence, partial_overlap, sample_outcomes, swap_isometry,
    target_state, x_e_corrections, Circuit, DeltaReport,
};

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{compile, solve_gf2, Solution};
use crate::experiments::{input_view, Anchor, Basis, ExperimentError, Measurement, ReKind, ReferenceExperiment};
use crate::experiments::ViewToken;
use crate::graph::{Graph, Vertex};
use crate::pauli::PauliError;
use crate::simulator::{chain_order, gates, prepare_graph_state, NoiseSpec, Op2, SimError, StateVector};

#[derive(Debug, Error)]
pub enum SelfTestError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("no measured value for submeasurement {0}")]
    MissingLabel(String),
    #[error("observable for vertex {vertex} ({basis}) must be Hermitian and square to one")]
    NotObservable { vertex: Vertex, basis: Basis },
    #[error("no measurement gives vertex {vertex} the {basis} setting")]
    MissingView { vertex: Vertex, basis: Basis },
    #[error("expected {expected} power vertices in the state, found {got}")]
    AncillaMismatch { expected: usize, got: usize },
    #[error("missing outcome for chain vertex {0}")]
    MissingOutcome(Vertex),
    #[error("outcome branch has zero probability")]
    ZeroProbability,
    #[error("no robustness bound for {0}")]
    UnsupportedKind(String),
    #[error("unknown bound kind {0:?}")]
    UnknownKind(String),
    #[error("epsilon must be a non-negative number, got {0}")]
    NegativeEpsilon(f64),
    #[error("invalid bound parameters: {0}")]
    BadParams(String),
    #[error("{branches} outcome branches exceed the cap of {max}")]
    TooManyBranches { branches: u64, max: u64 },
}

/// Ideal single-qubit observable for a measurement basis.
pub fn ideal_observable(b: Basis) -> Op2 {
    match b {
        Basis::X => gates::X,
        Basis::Y => gates::Y,
        Basis::Z => gates::Z,
        Basis::Rz => gates::scale(&gates::add(&gates::X, &gates::Y), FRAC_1_SQRT_2),
    }
}

/// Hermitian with `O² = 1`, up to rounding.
pub fn is_observable(op: &Op2) -> bool {
    let adj = gates::adjoint(op);
    let sq = gates::matmul(op, op);
    (0..2).all(|i| {
        (0..2).all(|j| (adj[i][j] - op[i][j]).norm() < 1e-9 && (sq[i][j] - gates::ID[i][j]).norm() < 1e-9)
    })
}

/// Which observable each device applies, keyed by its input view. Lookups
/// fall back from the exact view to the vertex's basis, then to the ideal
/// Pauli.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableAssignment {
    by_view: BTreeMap<ViewToken, Op2>,
    by_vertex: BTreeMap<(Vertex, Basis), Op2>,
}

impl ObservableAssignment {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn is_ideal(&self) -> bool {
        self.by_view.is_empty() && self.by_vertex.is_empty()
    }

    /// Override the observable for one exact view.
    pub fn set_view(&mut self, view: ViewToken, op: Op2) -> Result<(), SelfTestError> {
        if !is_observable(&op) {
            return Err(SelfTestError::NotObservable { vertex: view.vertex, basis: view.own });
        }
        self.by_view.insert(view, op);
        Ok(())
    }

    /// Override the observable for every view in which `v` gets `basis`.
    pub fn set_local(&mut self, v: Vertex, basis: Basis, op: Op2) -> Result<(), SelfTestError> {
        if !is_observable(&op) {
            return Err(SelfTestError::NotObservable { vertex: v, basis });
        }
        self.by_vertex.insert((v, basis), op);
        Ok(())
    }

    pub fn observable(&self, view: &ViewToken) -> Op2 {
        self.by_view.get(view).copied().unwrap_or_else(|| self.local(view.vertex, view.own))
    }

    /// View-independent observable of `v` for `basis`.
    pub fn local(&self, v: Vertex, basis: Basis) -> Op2 {
        self.by_vertex.get(&(v, basis)).copied().unwrap_or_else(|| ideal_observable(basis))
    }
}

/// Canned dishonest devices for regression tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Adversary {
    /// Answers the `Z` question at `vertex` with the negated `X` answer, so
    /// its two observables commute.
    SignFlip { vertex: Vertex },
    /// `Z` at `vertex` tilted towards `X` by `theta`.
    Rotated { vertex: Vertex, theta: f64 },
    /// Ideal observables on `|+⟩^{⊗n}` instead of the graph state.
    ProductState,
}

impl Adversary {
    pub fn assignment(&self) -> ObservableAssignment {
        let mut a = ObservableAssignment::ideal();
        match *self {
            Adversary::SignFlip { vertex } => {
                a.set_local(vertex, Basis::Z, gates::scale(&gates::X, -1.0)).expect("observable");
            }
            Adversary::Rotated { vertex, theta } => {
                let op = gates::add(&gates::scale(&gates::Z, theta.cos()), &gates::scale(&gates::X, theta.sin()));
                a.set_local(vertex, Basis::Z, op).expect("observable");
            }
            Adversary::ProductState => {}
        }
        a
    }

    pub fn state(&self, re: &ReferenceExperiment) -> Result<StateVector, SelfTestError> {
        match self {
            Adversary::ProductState => {
                let empty = Graph::new(re.graph.vertices().iter().copied(), []).expect("vertices are distinct");
                Ok(prepare_graph_state(&empty)?)
            }
            _ => Ok(prepare_graph_state(&re.graph)?),
        }
    }
}

/// A physical experiment: shared state plus observables. `state: None`
/// means the ideal graph state.
#[derive(Debug, Clone, Default)]
pub struct Device {
    pub state: Option<StateVector>,
    pub assignment: ObservableAssignment,
}

impl Device {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn adversary(re: &ReferenceExperiment, a: Adversary) -> Result<Self, SelfTestError> {
        Ok(Device { state: Some(a.state(re)?), assignment: a.assignment() })
    }

    pub fn is_ideal(&self) -> bool {
        self.state.is_none() && self.assignment.is_ideal()
    }

    fn state_for(&self, re: &ReferenceExperiment) -> Result<StateVector, SelfTestError> {
        match &self.state {
            Some(s) => Ok(s.clone()),
            None => Ok(prepare_graph_state(&re.graph)?),
        }
    }
}

fn apply_ops(state: &StateVector, ops: &[(Vertex, Op2)]) -> Result<StateVector, SelfTestError> {
    let mut s = state.clone();
    for (v, op) in ops {
        let q = s.qubit(*v)?;
        s = s.apply_local(q, op);
    }
    Ok(s)
}

/// Local observables a submeasurement multiplies together.
fn submeasurement_ops(
    re: &ReferenceExperiment,
    m: &Measurement,
    support: impl IntoIterator<Item = Vertex>,
    assignment: &ObservableAssignment,
) -> Result<Vec<(Vertex, Op2)>, SelfTestError> {
    support
        .into_iter()
        .map(|v| Ok((v, assignment.observable(&input_view(re, m, v)?))))
        .collect()
}

fn labelled_ops(
    re: &ReferenceExperiment,
    label: &str,
    assignment: &ObservableAssignment,
) -> Result<Option<(Vec<(Vertex, Op2)>, f64)>, SelfTestError> {
    match re.find(label) {
        Some((m, s)) => Ok(Some((submeasurement_ops(re, m, s.support.iter().copied(), assignment)?, s.target))),
        None => Ok(None),
    }
}

/// Correlations the device produces, one per submeasurement label.
/// Depolarizing noise shrinks each product by `(1-p)` per non-trivial
/// factor, since every traceless observable is an eigenoperator of the
/// channel.
pub fn physical_correlations(
    re: &ReferenceExperiment,
    state: &StateVector,
    assignment: &ObservableAssignment,
    noise: NoiseSpec,
) -> Result<BTreeMap<String, f64>, SelfTestError> {
    let mut out = BTreeMap::new();
    for (m, s) in re.submeasurements() {
        let ops = submeasurement_ops(re, m, s.support.iter().copied(), assignment)?;
        let weight = ops.iter().filter(|(_, op)| (op[0][0] + op[1][1]).norm() < 1e-9).count();
        let value = state.inner(&apply_ops(state, &ops)?)?.re * noise.shrink(weight);
        out.insert(s.label.clone(), value);
    }
    Ok(out)
}

/// Ideal correlations from the stabilizer tableau, shrunk by depolarizing
/// noise. Works at any size.
pub fn reference_correlations(
    re: &ReferenceExperiment,
    noise: NoiseSpec,
) -> Result<BTreeMap<String, f64>, SelfTestError> {
    let tab = re.tableau();
    let mut out = BTreeMap::new();
    for (m, s) in re.submeasurements() {
        let mut value = 0.0;
        for (w, p) in &re.correlator(m, s).terms {
            value += w * noise.shrink(p.weight()) * f64::from(tab.expectation(p)?);
        }
        out.insert(s.label.clone(), value);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    /// Largest `|target − measured|`.
    pub epsilon: f64,
    pub worst: Option<String>,
    pub deviations: BTreeMap<String, f64>,
}

/// How closely `measured` reproduces the experiment's targets.
pub fn check_simulation(
    measured: &BTreeMap<String, f64>,
    re: &ReferenceExperiment,
) -> Result<Simulation, SelfTestError> {
    let mut deviations = BTreeMap::new();
    let mut worst: Option<(String, f64)> = None;
    for (_, s) in re.submeasurements() {
        let value = measured.get(&s.label).ok_or_else(|| SelfTestError::MissingLabel(s.label.clone()))?;
        let dev = (s.target - value).abs();
        if worst.as_ref().is_none_or(|(_, w)| dev > *w) {
            worst = Some((s.label.clone(), dev));
        }
        deviations.insert(s.label.clone(), dev);
    }
    Ok(Simulation { epsilon: worst.as_ref().map_or(0.0, |w| w.1), worst: worst.map(|w| w.0), deviations })
}

fn generator_labels(u: Vertex) -> [String; 2] {
    [format!("f_{u}"), format!("g_{u}")]
}

/// Measurement defining the device's `basis` observable at power vertex
/// `u`: its own generator for `X`, a neighbour's generator for `Z`, else
/// the first measurement giving `u` that basis.
pub fn key_measurement(
    re: &ReferenceExperiment,
    u: Vertex,
    basis: Basis,
) -> Result<&Measurement, SelfTestError> {
    let with_label = |labels: &[String]| {
        re.measurements.iter().find(|m| {
            m.settings.get(&u).is_some_and(|s| s.basis() == basis)
                && m.submeasurements.iter().any(|s| labels.contains(&s.label))
        })
    };
    let preferred = match basis {
        Basis::X => with_label(&generator_labels(u)),
        Basis::Z => {
            let target = re.target_graph();
            let labels: Vec<String> = target
                .neighbors(u)
                .map(|ns| ns.iter().flat_map(|&v| generator_labels(v)).collect())
                .unwrap_or_default();
            with_label(&labels)
        }
        _ => None,
    };
    preferred
        .or_else(|| re.measurements.iter().find(|m| m.settings.get(&u).is_some_and(|s| s.basis() == basis)))
        .ok_or(SelfTestError::MissingView { vertex: u, basis })
}

/// Device observable of power vertex `u` for `basis`, in its key view.
pub fn key_observable(
    re: &ReferenceExperiment,
    assignment: &ObservableAssignment,
    u: Vertex,
    basis: Basis,
) -> Result<Op2, SelfTestError> {
    let m = key_measurement(re, u, basis)?;
    Ok(assignment.observable(&input_view(re, m, u)?))
}

/// The observable pair whose anticommutator is checked at `u`, as local
/// operator lists. The vertex-pair experiment pairs `v_l` with the middle
/// chain vertex.
fn anticommuting_pair(
    re: &ReferenceExperiment,
    assignment: &ObservableAssignment,
    u: Vertex,
) -> Result<(Vec<(Vertex, Op2)>, Vec<(Vertex, Op2)>), SelfTestError> {
    let (ba, bb) = match (&re.kind, &re.anchor) {
        (ReKind::Re0, Anchor::Line { vc, .. }) if *vc == u => (Basis::X, Basis::Y),
        (ReKind::Re0, Anchor::Line { vc, .. }) if re.graph.has_edge(*vc, u) => (Basis::Y, Basis::Z),
        (ReKind::Re3, Anchor::Pair { vl, .. }) if *vl == u && re.d == 1 => (Basis::Y, Basis::Z),
        _ => (Basis::X, Basis::Z),
    };
    let mut a = vec![(u, key_observable(re, assignment, u, ba)?)];
    let mut b = vec![(u, key_observable(re, assignment, u, bb)?)];
    if let (ReKind::Re3, Anchor::Pair { vl, vm, .. }) = (&re.kind, &re.anchor) {
        if *vl == u {
            // v_m's X observable as seen from each of v_l's key views.
            for (ops, basis) in [(&mut a, ba), (&mut b, bb)] {
                let m = key_measurement(re, u, basis)?;
                let view = input_view(re, m, *vm)?;
                let op = if view.own == Basis::X { assignment.observable(&view) } else { assignment.local(*vm, Basis::X) };
                ops.push((*vm, op));
            }
        }
    }
    Ok((a, b))
}

/// A relation from the derivation, evaluated on the device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptResidual {
    pub name: String,
    pub labels: Vec<String>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnticommutationReport {
    /// `‖{A_u, B_u}|Ψ⟩‖` per power vertex.
    pub residuals: BTreeMap<Vertex, f64>,
    pub scripts: Vec<ScriptResidual>,
}

/// Vertex the anticommutation derivation starts from.
pub fn anchor_vertex(re: &ReferenceExperiment) -> Vertex {
    match &re.anchor {
        Anchor::Line { vc, .. } => *vc,
        Anchor::OddCycle { cycle } => cycle[0],
        Anchor::Star { leaves, .. } => leaves[0],
        Anchor::Pair { vr, .. } => *vr,
        Anchor::Honeycomb { center, .. } => *center,
        Anchor::Circle { .. } => re.graph.vertices()[0],
    }
}

fn chain_residual(
    state: &StateVector,
    steps: &[(Vec<(Vertex, Op2)>, f64)],
    expected: f64,
) -> Result<f64, SelfTestError> {
    let mut s = state.clone();
    for (ops, _) in steps {
        s = apply_ops(&s, ops)?;
    }
    Ok(s.add_scaled(C::new(-expected, 0.0), state)?.norm_sqr().sqrt())
}

/// Anticommutator residual at every power vertex plus the relations the
/// derivation strings together: the paradox chain (the parity
/// certificate), the sum-of-squares value for the vertex-pair experiment,
/// and one hop per edge of a BFS tree from the anchor.
pub fn verify_anticommutation(
    re: &ReferenceExperiment,
    assignment: &ObservableAssignment,
    state: &StateVector,
) -> Result<AnticommutationReport, SelfTestError> {
    let target = re.target_graph();
    let mut residuals = BTreeMap::new();
    for &u in target.vertices() {
        let (a, b) = anticommuting_pair(re, assignment, u)?;
        let ab = apply_ops(&apply_ops(state, &b)?, &a)?;
        let ba = apply_ops(&apply_ops(state, &a)?, &b)?;
        residuals.insert(u, ab.add_scaled(C::new(1.0, 0.0), &ba)?.norm_sqr().sqrt());
    }

    let mut scripts = Vec::new();
    let sys = compile(re)?;
    if let Solution::Infeasible { certificate } = solve_gf2(&sys) {
        let labels: Vec<String> = certificate.iter().map(|&i| sys.constraints[i].label.clone()).collect();
        let mut steps = Vec::new();
        for l in &labels {
            steps.push(labelled_ops(re, l, assignment)?.ok_or_else(|| SelfTestError::MissingLabel(l.clone()))?);
        }
        let expected: f64 = steps.iter().map(|(_, t)| t).product();
        scripts.push(ScriptResidual { name: "paradox".into(), residual: chain_residual(state, &steps, expected)?, labels });
    }

    if re.kind == ReKind::Re3 {
        let labels: Vec<String> = (1..=4).map(|i| format!("I_{i}")).collect();
        let mut values = Vec::new();
        for l in &labels {
            let (ops, _) = labelled_ops(re, l, assignment)?.ok_or_else(|| SelfTestError::MissingLabel(l.clone()))?;
            values.push(state.inner(&apply_ops(state, &ops)?)?.re);
        }
        let sign = if re.d % 2 == 0 { 1.0 } else { -1.0 };
        let sos = 4.0 + SQRT_2 * (sign * (values[0] - values[1]) - values[2] - values[3]);
        scripts.push(ScriptResidual { name: "sum-of-squares".into(), labels, residual: sos });
    }

    // Propagation hops along a BFS tree of the target graph.
    let start = anchor_vertex(re);
    let mut seen = std::collections::BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(w) = queue.pop_front() {
        for &u in target.neighbors(w).map_err(ExperimentError::from)? {
            if !seen.insert(u) {
                continue;
            }
            queue.push_back(u);
            let find = |v: Vertex| generator_labels(v).into_iter().find(|l| re.find(l).is_some());
            if let (Some(lw), Some(lu)) = (find(w), find(u)) {
                let xw = labelled_ops(re, &lw, assignment)?.expect("found");
                let xu = labelled_ops(re, &lu, assignment)?.expect("found");
                let steps = [xu.clone(), xw.clone(), xu, xw];
                scripts.push(ScriptResidual {
                    name: format!("hop {w}->{u}"),
                    labels: vec![lw, lu],
                    residual: chain_residual(state, &steps, 1.0)?,
                });
            }
        }
    }
    Ok(AnticommutationReport { residuals, scripts })
}

/// Largest number of outcome branches `OutcomeSelection::All` enumerates.
pub const MAX_BRANCHES: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeSelection {
    /// One branch sampled from the Born distribution.
    Seed(u64),
    /// Every branch with non-zero probability.
    All,
    Given(BTreeMap<Vertex, u8>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestConfig {
    pub epsilon_threshold: f64,
    pub fidelity_slack: f64,
    pub noise: NoiseSpec,
    pub outcomes: OutcomeSelection,
}

impl Default for SelfTestConfig {
    fn default() -> Self {
        SelfTestConfig {
            epsilon_threshold: 1e-6,
            fidelity_slack: 1e-6,
            noise: NoiseSpec::ideal(),
            outcomes: OutcomeSelection::Seed(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    /// Chain outcomes in canonical chain order.
    pub outcomes: String,
    pub probability: f64,
    pub corrections: BTreeMap<Vertex, u8>,
    pub fidelity: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub kind: ReKind,
    pub d: usize,
    pub epsilon: f64,
    pub deviations: BTreeMap<String, f64>,
    pub anticommutator_norms: BTreeMap<Vertex, f64>,
    pub scripts: Vec<ScriptResidual>,
    pub delta_bound: Option<f64>,
    /// Worst δ over the evaluated branches.
    pub delta_measured: Option<f64>,
    /// Worst ancilla fidelity over the evaluated branches.
    pub isometry_fidelity: Option<f64>,
    pub branches: Vec<BranchReport>,
    /// Why the dense checks did not run, if they did not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub verdict: Verdict,
}

fn outcome_string(re: &ReferenceExperiment, outcomes: &BTreeMap<Vertex, u8>) -> String {
    re.inflation
        .as_ref()
        .map(|ig| chain_order(ig).iter().map(|v| if outcomes.get(v) == Some(&1) { '1' } else { '0' }).collect())
        .unwrap_or_default()
}

/// Number of chain outcome strings, refusing more than [`MAX_BRANCHES`].
pub fn branch_count(re: &ReferenceExperiment) -> Result<u64, SelfTestError> {
    let chain = re.inflation.as_ref().map_or(0, |ig| ig.chain_vertices().len());
    let count = 1u64.checked_shl(chain as u32).filter(|&c| c >> chain == 1).unwrap_or(u64::MAX);
    if count > MAX_BRANCHES {
        return Err(SelfTestError::TooManyBranches { branches: count, max: MAX_BRANCHES });
    }
    Ok(count)
}

fn branches(
    re: &ReferenceExperiment,
    state: &StateVector,
    assignment: &ObservableAssignment,
    selection: &OutcomeSelection,
) -> Result<Vec<BTreeMap<Vertex, u8>>, SelfTestError> {
    let chain = re.inflation.as_ref().map(chain_order).unwrap_or_default();
    match selection {
        OutcomeSelection::Given(o) => Ok(vec![o.clone()]),
        OutcomeSelection::Seed(seed) => Ok(vec![sample_outcomes(state, re, assignment, *seed)?]),
        OutcomeSelection::All => {
            let count = branch_count(re)?;
            Ok((0..count)
                .map(|bits| chain.iter().enumerate().map(|(i, &v)| (v, (bits >> i & 1) as u8)).collect())
                .collect())
        }
    }
}

/// Full pipeline: ε from the correlations (measured, or computed from the
/// device), anticommutation, and deflation + isometry on the selected
/// outcome branches.
pub fn run_selftest(
    re: &ReferenceExperiment,
    device: &Device,
    measured: Option<&BTreeMap<String, f64>>,
    config: &SelfTestConfig,
) -> Result<SelfTestReport, SelfTestError> {
    if config.outcomes == OutcomeSelection::All {
        branch_count(re)?;
    }
    let computed;
    let measured = match measured {
        Some(m) => m,
        None if device.is_ideal() => {
            computed = reference_correlations(re, config.noise)?;
            &computed
        }
        None => {
            computed = physical_correlations(re, &device.state_for(re)?, &device.assignment, config.noise)?;
            &computed
        }
    };
    let sim = check_simulation(measured, re)?;
    let delta_bound = match bound_params(re) {
        Ok((kind, params)) => Some(robustness_bound(kind, &params, sim.epsilon)?.table),
        Err(SelfTestError::UnsupportedKind(_)) => None,
        Err(e) => return Err(e),
    };
    let mut report = SelfTestReport {
        kind: re.kind,
        d: re.d,
        epsilon: sim.epsilon,
        deviations: sim.deviations,
        anticommutator_norms: BTreeMap::new(),
        scripts: Vec::new(),
        delta_bound,
        delta_measured: None,
        isometry_fidelity: None,
        branches: Vec::new(),
        skipped: None,
        verdict: Verdict::Fail,
    };
    match dense_checks(re, device, config, &mut report) {
        Ok(()) => {}
        Err(SelfTestError::Sim(e @ SimError::TooLarge { .. })) => report.skipped = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    let pass = report.epsilon <= config.epsilon_threshold
        && report.isometry_fidelity.is_some_and(|f| f >= 1.0 - config.fidelity_slack);
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}

fn dense_checks(
    re: &ReferenceExperiment,
    device: &Device,
    config: &SelfTestConfig,
    report: &mut SelfTestReport,
) -> Result<(), SelfTestError> {
    let state = device.state_for(re)?;
    let anti = verify_anticommutation(re, &device.assignment, &state)?;
    report.anticommutator_norms = anti.residuals;
    report.scripts = anti.scripts;

    let noisy = config.noise.p > 0.0;
    if noisy && device.state.is_some() {
        return Err(SelfTestError::BadParams("depolarizing noise is modelled on the ideal graph state only".into()));
    }
    let mut worst_delta: f64 = 0.0;
    let mut worst_fidelity: f64 = 1.0;
    let given = matches!(config.outcomes, OutcomeSelection::Given(_));
    for outcomes in branches(re, &state, &device.assignment, &config.outcomes)? {
        let result = if noisy {
            delta_depolarized(re, &device.assignment, config.noise, &outcomes)
        } else {
            delta_equivalence(&state, re, &device.assignment, &outcomes)
        };
        let d = match result {
            Ok(d) => d,
            Err(SelfTestError::ZeroProbability) | Err(SelfTestError::Sim(SimError::ZeroProbability { .. }))
                if !given =>
            {
                continue
            }
            Err(e) => return Err(e),
        };
        worst_delta = worst_delta.max(d.delta);
        worst_fidelity = worst_fidelity.min(d.fidelity);
        report.branches.push(BranchReport {
            outcomes: outcome_string(re, &outcomes),
            probability: d.probability,
            corrections: d.corrections,
            fidelity: d.fidelity,
            delta: d.delta,
        });
    }
    if !report.branches.is_empty() {
        report.delta_measured = Some(worst_delta);
        report.isometry_fidelity = Some(worst_fidelity);
    }
    Ok(())
}
