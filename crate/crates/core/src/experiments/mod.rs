//! Reference experiments: measurement settings, submeasurements with their
//! ideal targets, deflation settings and the d-LHV* input views.

mod builders;
mod honeycomb;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, InflatedGraph, Vertex};
use crate::pauli::{tableau_from_graph, Pauli, PauliError, PauliString, StabilizerTableau};

pub use builders::{
    build_auto, build_re0, build_re1, build_re2, build_re3, build_re4_circle, re0_target_graph,
};
pub use honeycomb::{build_re5_honeycomb, honeycomb_torus, tripoint_star};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("{0:?} is not an induced line of three")]
    NotALine((Vertex, Vertex, Vertex)),
    #[error("cycle {0:?} is not an induced odd cycle")]
    BadCycle(Vec<Vertex>),
    #[error("invalid star: {0}")]
    BadStar(String),
    #[error("({0},{1}) is not an edge")]
    NotAnEdge(Vertex, Vertex),
    #[error("circle RE needs 6d+3 = {expected} vertices, got {got}")]
    CircleLength { expected: usize, got: usize },
    #[error("torus {rows}x{cols} too small for d={d}: {reason}")]
    TorusTooSmall { rows: usize, cols: usize, d: usize, reason: String },
    #[error("no reference experiment applies: {0}")]
    NoApplicableSubgraph(String),
    #[error("submeasurement {label} disagrees with its measurement at vertex {vertex}")]
    InconsistentSubmeasurement { label: String, vertex: Vertex },
    #[error("{label}: target {stored} but the stabilizer oracle gives {oracle}")]
    TargetMismatch { label: String, stored: f64, oracle: f64 },
    #[error("measurement {0} misses a setting for vertex {1}")]
    MissingSetting(String, Vertex),
    #[error("unknown setting {0:?}")]
    BadSetting(String),
}

/// Local measurement basis. `Rz` is the Clifford observable `(X+Y)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
    Rz,
}

impl Basis {
    pub fn pauli(self) -> Option<Pauli> {
        match self {
            Basis::X => Some(Pauli::X),
            Basis::Y => Some(Pauli::Y),
            Basis::Z => Some(Pauli::Z),
            Basis::Rz => None,
        }
    }

    fn from_pauli(p: Pauli) -> Option<Basis> {
        match p {
            Pauli::I => None,
            Pauli::X => Some(Basis::X),
            Pauli::Y => Some(Basis::Y),
            Pauli::Z => Some(Basis::Z),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
            Basis::Rz => "Rz",
        })
    }
}

impl FromStr for Basis {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X" => Ok(Basis::X),
            "Y" => Ok(Basis::Y),
            "Z" => Ok(Basis::Z),
            "Rz" => Ok(Basis::Rz),
            _ => Err(ExperimentError::BadSetting(s.into())),
        }
    }
}

/// Input delivered to one vertex. A marginal input is sent and broadcast
/// like any other, but its outcome is discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Setting {
    Measure(Basis),
    Marginal(Basis),
}

impl Setting {
    pub fn basis(self) -> Basis {
        match self {
            Setting::Measure(b) | Setting::Marginal(b) => b,
        }
    }

    pub fn is_marginal(self) -> bool {
        matches!(self, Setting::Marginal(_))
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Measure(b) => write!(f, "{b}"),
            Setting::Marginal(b) => write!(f, "Marginal({b})"),
        }
    }
}

impl TryFrom<String> for Setting {
    type Error = ExperimentError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        match s.strip_prefix("Marginal(").and_then(|r| r.strip_suffix(')')) {
            Some(inner) => Ok(Setting::Marginal(inner.parse()?)),
            None => Ok(Setting::Measure(s.parse()?)),
        }
    }
}

impl From<Setting> for String {
    fn from(s: Setting) -> String {
        s.to_string()
    }
}

/// A product of outcomes over `support`, with its ideal expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submeasurement {
    pub label: String,
    pub support: BTreeSet<Vertex>,
    pub target: f64,
    /// Sign of the defining stabilizer product relative to the measured
    /// tensor (`+1` when the product is exactly the tensor).
    pub product_sign: i8,
}

impl Submeasurement {
    pub fn is_deterministic(&self) -> bool {
        (self.target.abs() - 1.0).abs() < 1e-12
    }
}

/// One setting per vertex plus the submeasurements read off it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    pub settings: BTreeMap<Vertex, Setting>,
    pub submeasurements: Vec<Submeasurement>,
}

impl Measurement {
    pub fn basis(&self, v: Vertex) -> Basis {
        self.settings[&v].basis()
    }

    /// Vertices whose outcome enters at least one submeasurement.
    pub fn support(&self) -> BTreeSet<Vertex> {
        self.settings.iter().filter(|(_, s)| !s.is_marginal()).map(|(&v, _)| v).collect()
    }
}

/// Weighted sum of Hermitian Pauli tensors; `Rz` factors expand into their
/// `X` and `Y` halves.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlator {
    pub terms: Vec<(f64, PauliString)>,
}

impl Correlator {
    pub fn tableau_value(&self, t: &StabilizerTableau) -> Result<f64, PauliError> {
        self.terms.iter().try_fold(0.0, |acc, (w, p)| Ok(acc + w * t.expectation(p)? as f64))
    }

    pub fn max_weight(&self) -> usize {
        self.terms.iter().map(|(_, p)| p.weight()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReKind {
    #[serde(rename = "RE0")]
    Re0,
    #[serde(rename = "RE1")]
    Re1,
    #[serde(rename = "RE2")]
    Re2,
    #[serde(rename = "RE3")]
    Re3,
    #[serde(rename = "RE4")]
    Re4,
    #[serde(rename = "RE5")]
    Re5,
}

impl fmt::Display for ReKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = *self as u8;
        write!(f, "RE{n}")
    }
}

impl FromStr for ReKind {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RE0" | "0" => Ok(ReKind::Re0),
            "RE1" | "1" => Ok(ReKind::Re1),
            "RE2" | "2" => Ok(ReKind::Re2),
            "RE3" | "3" => Ok(ReKind::Re3),
            "RE4" | "4" => Ok(ReKind::Re4),
            "RE5" | "5" => Ok(ReKind::Re5),
            _ => Err(ExperimentError::BadSetting(s.into())),
        }
    }
}

/// The distinguished subgraph an experiment is built around.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Anchor {
    Line { vl: Vertex, vc: Vertex, vr: Vertex },
    OddCycle { cycle: Vec<Vertex> },
    Star { center: Vertex, leaves: Vec<Vertex> },
    Pair { vl: Vertex, vr: Vertex, vm: Vertex },
    Circle { n: usize },
    Honeycomb { rows: usize, cols: usize, center: Vertex, corner: Vertex },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceExperiment {
    pub kind: ReKind,
    /// Communication distance.
    pub d: usize,
    /// Graph of the state the devices share.
    pub graph: Graph,
    /// Inflation structure for the deflation-based experiments (RE 1–3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation: Option<InflatedGraph>,
    pub anchor: Anchor,
    pub measurements: Vec<Measurement>,
    /// Preparation measurements on chain vertices.
    #[serde(default)]
    pub deflation_settings: BTreeMap<Vertex, Basis>,
    /// Vertex-pair experiment on a bare edge: deflation uses `Y` next to
    /// `v_m` and the isometry uses `Y` at `v_l` when `d = 1`.
    #[serde(default)]
    pub pair_only: bool,
}

impl Serialize for Basis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Basis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical description of everything a device at `vertex` learns before
/// answering: its own input and the inputs within communication distance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ViewToken {
    pub vertex: Vertex,
    pub own: Basis,
    pub around: Vec<(Vertex, Basis)>,
}

impl fmt::Display for ViewToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.vertex, self.own)?;
        if !self.around.is_empty() {
            f.write_str("|")?;
            for (i, (w, b)) in self.around.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{w}{b}")?;
            }
        }
        Ok(())
    }
}

/// Input view of `u` in measurement `m`. Marginal inputs are delivered like
/// any other, so only the basis matters.
pub fn input_view(re: &ReferenceExperiment, m: &Measurement, u: Vertex) -> Result<ViewToken, ExperimentError> {
    let ball = re.graph.neighborhood(u, re.d)?;
    let basis = |v: Vertex| {
        m.settings.get(&v).map(|s| s.basis()).ok_or_else(|| ExperimentError::MissingSetting(m.label.clone(), v))
    };
    Ok(ViewToken {
        vertex: u,
        own: basis(u)?,
        around: ball.into_iter().map(|w| Ok((w, basis(w)?))).collect::<Result<_, ExperimentError>>()?,
    })
}

impl ReferenceExperiment {
    pub fn tableau(&self) -> StabilizerTableau {
        tableau_from_graph(&self.graph)
    }

    /// Base graph whose state the experiment certifies after deflation.
    pub fn target_graph(&self) -> Graph {
        match (&self.kind, &self.inflation, &self.anchor) {
            (_, Some(ig), _) => ig.base.clone(),
            (ReKind::Re0, None, Anchor::Line { vc, .. }) => re0_target_graph(&self.graph, *vc),
            _ => self.graph.clone(),
        }
    }

    pub fn submeasurements(&self) -> impl Iterator<Item = (&Measurement, &Submeasurement)> {
        self.measurements.iter().flat_map(|m| m.submeasurements.iter().map(move |s| (m, s)))
    }

    pub fn find(&self, label: &str) -> Option<(&Measurement, &Submeasurement)> {
        self.submeasurements().find(|(_, s)| s.label == label)
    }

    /// Observable measured by a submeasurement.
    pub fn correlator(&self, m: &Measurement, s: &Submeasurement) -> Correlator {
        correlator_of(&self.graph, m, &s.support)
    }

    /// Re-derive every target with the stabilizer oracle and check that each
    /// submeasurement only reads measured vertices.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let tab = self.tableau();
        for m in &self.measurements {
            for &v in self.graph.vertices() {
                if !m.settings.contains_key(&v) {
                    return Err(ExperimentError::MissingSetting(m.label.clone(), v));
                }
            }
            let mut covered = BTreeSet::new();
            for s in &m.submeasurements {
                for &v in &s.support {
                    if m.settings.get(&v).is_none_or(|st| st.is_marginal()) {
                        return Err(ExperimentError::InconsistentSubmeasurement {
                            label: s.label.clone(),
                            vertex: v,
                        });
                    }
                }
                covered.extend(s.support.iter().copied());
                let oracle = self.correlator(m, s).tableau_value(&tab)?;
                if (oracle - s.target).abs() > 1e-12 {
                    return Err(ExperimentError::TargetMismatch {
                        label: s.label.clone(),
                        stored: s.target,
                        oracle,
                    });
                }
            }
            if covered != m.support() {
                let v = *covered.symmetric_difference(&m.support()).next().expect("differs");
                return Err(ExperimentError::InconsistentSubmeasurement { label: m.label.clone(), vertex: v });
            }
        }
        Ok(())
    }
}

pub(crate) fn correlator_of(g: &Graph, m: &Measurement, support: &BTreeSet<Vertex>) -> Correlator {
    let mut terms = vec![(1.0, PauliString::identity(g.n()))];
    for &v in support {
        let q = g.index_of(v).expect("support inside graph");
        let b = m.basis(v);
        terms = match b.pauli() {
            Some(p) => terms
                .into_iter()
                .map(|(w, t)| (w, t.mul(&PauliString::single(g.n(), q, p))))
                .collect(),
            None => terms
                .into_iter()
                .flat_map(|(w, t)| {
                    [Pauli::X, Pauli::Y].map(|p| (w * std::f64::consts::FRAC_1_SQRT_2, t.mul(&PauliString::single(g.n(), q, p))))
                })
                .collect(),
        };
    }
    Correlator { terms }
}

/// Incremental construction of measurements from stabilizer products.
pub(crate) struct Builder {
    pub graph: Graph,
    pub tab: StabilizerTableau,
    pub measurements: Vec<Measurement>,
}

impl Builder {
    pub fn new(graph: &Graph) -> Self {
        Builder { graph: graph.clone(), tab: tableau_from_graph(graph), measurements: Vec::new() }
    }

    /// Letters of a Hermitian product as vertex → basis, plus its sign.
    pub fn letters(&self, p: &PauliString) -> Result<(BTreeMap<Vertex, Basis>, i8), ExperimentError> {
        let sign = p.sign().ok_or_else(|| PauliError::NonHermitian(p.to_string()))?;
        let mut out = BTreeMap::new();
        for q in p.support() {
            out.insert(self.graph.vertices()[q], Basis::from_pauli(p.get(q)).expect("support"));
        }
        Ok((out, sign))
    }

    /// Measurement carrying a single submeasurement defined by `product`;
    /// every other vertex receives `pad(v)` as a marginal input.
    pub fn single(
        &mut self,
        label: &str,
        product: &PauliString,
        pad: impl Fn(Vertex, &BTreeMap<Vertex, Basis>) -> Basis,
    ) -> Result<(), ExperimentError> {
        let (letters, sign) = self.letters(product)?;
        self.single_letters(label, letters, sign, pad)
    }

    pub fn single_letters(
        &mut self,
        label: &str,
        letters: BTreeMap<Vertex, Basis>,
        sign: i8,
        pad: impl Fn(Vertex, &BTreeMap<Vertex, Basis>) -> Basis,
    ) -> Result<(), ExperimentError> {
        let mut bases = letters.clone();
        for &v in self.graph.vertices() {
            if !bases.contains_key(&v) {
                bases.insert(v, pad(v, &letters));
            }
        }
        let support: BTreeSet<Vertex> = letters.keys().copied().collect();
        self.multi(label, bases, vec![(label.to_string(), support, sign)])
    }

    /// Measurement with explicit bases and several submeasurement supports.
    pub fn multi(
        &mut self,
        label: &str,
        bases: BTreeMap<Vertex, Basis>,
        subs: Vec<(String, BTreeSet<Vertex>, i8)>,
    ) -> Result<(), ExperimentError> {
        let covered: BTreeSet<Vertex> = subs.iter().flat_map(|(_, s, _)| s.iter().copied()).collect();
        let settings = bases
            .iter()
            .map(|(&v, &b)| (v, if covered.contains(&v) { Setting::Measure(b) } else { Setting::Marginal(b) }))
            .collect();
        let mut m = Measurement { label: label.to_string(), settings, submeasurements: Vec::new() };
        for (sl, support, sign) in subs {
            let target = correlator_of(&self.graph, &m, &support).tableau_value(&self.tab)?;
            m.submeasurements.push(Submeasurement { label: sl, support, target, product_sign: sign });
        }
        self.measurements.push(m);
        Ok(())
    }

    /// Submeasurement entry for a product that must agree with `bases`.
    pub fn sub_for(
        &self,
        label: String,
        product: &PauliString,
        bases: &BTreeMap<Vertex, Basis>,
    ) -> Result<(String, BTreeSet<Vertex>, i8), ExperimentError> {
        let (letters, sign) = self.letters(product)?;
        for (v, b) in &letters {
            if bases.get(v) != Some(b) {
                return Err(ExperimentError::InconsistentSubmeasurement { label, vertex: *v });
            }
        }
        Ok((label, letters.keys().copied().collect(), sign))
    }
}
