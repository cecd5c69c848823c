//! Versioned JSON artifacts exchanged by the command-line tool.
//!
//! Every file is an envelope `{"format", "version", "kind", "data"}`;
//! readers refuse other versions and kinds.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::adversary::{Enumeration, Solution};
use crate::experiments::{ReKind, ReferenceExperiment};
use crate::graph::{Graph, InflatedGraph};
use crate::selftest::{Bound, BoundParams, SelfTestReport};

pub const FORMAT: &str = "inflst";
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON")]
    Json(#[from] serde_json::Error),
    #[error("not an {FORMAT} artifact (missing \"format\"/\"version\" envelope)")]
    NoEnvelope,
    #[error("unsupported schema version {found} (this build reads version {SCHEMA_VERSION})")]
    UnsupportedVersion { found: Value },
    #[error("expected a {expected} artifact, found {found:?}")]
    WrongKind { expected: &'static str, found: String },
}

/// A payload type with a fixed `kind` tag.
pub trait Artifact: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

impl Artifact for Graph {
    const KIND: &'static str = "graph";
}

impl Artifact for InflatedGraph {
    const KIND: &'static str = "inflated-graph";
}

impl Artifact for ReferenceExperiment {
    const KIND: &'static str = "reference-experiment";
}

impl Artifact for SelfTestReport {
    const KIND: &'static str = "selftest-report";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Tableau,
    Dense,
}

/// Correlations of every submeasurement, from a simulation or a lab.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub kind: ReKind,
    pub d: usize,
    pub noise: f64,
    pub backend: Backend,
    pub values: BTreeMap<String, f64>,
}

impl Artifact for Correlations {
    const KIND: &'static str = "correlations";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhvVerdict {
    /// No d-LHV* strategy reproduces the deterministic correlations.
    Infeasible,
    /// The parity constraints alone admit a classical strategy, but the
    /// non-deterministic terms still separate classical from quantum.
    ParityInconclusive,
    Feasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvReport {
    pub kind: ReKind,
    pub d: usize,
    pub variables: usize,
    pub constraints: usize,
    pub verdict: LhvVerdict,
    /// The correlations are out of reach of every d-LHV* model: either the
    /// parity system is infeasible or the exhaustive classical value falls
    /// short of the quantum one.
    pub nonlocal: bool,
    pub solution: Solution,
    /// Labels of the certificate rows, when infeasible.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificate_labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<Enumeration>,
    /// Why the exhaustive search did not run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_skipped: Option<String>,
}

impl Artifact for LhvReport {
    const KIND: &'static str = "lhv-report";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub params: BoundParams,
    pub rows: Vec<Bound>,
}

impl Artifact for BoundTable {
    const KIND: &'static str = "bound-table";
}

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    format: &'static str,
    version: u64,
    kind: &'static str,
    data: &'a T,
}

/// Pretty-printed envelope with a trailing newline. Output is deterministic:
/// every map in the payloads is ordered.
pub fn to_json<T: Artifact>(value: &T) -> String {
    let env = EnvelopeOut { format: FORMAT, version: SCHEMA_VERSION, kind: T::KIND, data: value };
    let mut s = serde_json::to_string_pretty(&env).expect("artifacts serialize");
    s.push('\n');
    s
}

pub fn from_json<T: Artifact>(text: &str) -> Result<T, IoError> {
    let mut v: Value = serde_json::from_str(text)?;
    let obj = v.as_object_mut().ok_or(IoError::NoEnvelope)?;
    if obj.get("format").and_then(Value::as_str) != Some(FORMAT) {
        return Err(IoError::NoEnvelope);
    }
    match obj.get("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(IoError::UnsupportedVersion { found: other.clone() }),
        None => return Err(IoError::NoEnvelope),
    }
    let kind = obj.get("kind").and_then(Value::as_str).unwrap_or_default();
    if kind != T::KIND {
        return Err(IoError::WrongKind { expected: T::KIND, found: kind.into() });
    }
    Ok(serde_json::from_value(obj.remove("data").unwrap_or(Value::Null))?)
}
