//! Closed-form robustness bounds δ(ε).

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{anchor_vertex, SelfTestError};
use crate::experiments::{Anchor, ReKind, ReferenceExperiment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Re0,
    Re1,
    Re2TwoLeaf,
    Re2Star,
    Re3,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] = [BoundKind::Re0, BoundKind::Re1, BoundKind::Re2TwoLeaf, BoundKind::Re2Star, BoundKind::Re3];

    fn name(self) -> &'static str {
        match self {
            BoundKind::Re0 => "re0",
            BoundKind::Re1 => "re1",
            BoundKind::Re2TwoLeaf => "re2-two-leaf",
            BoundKind::Re2Star => "re2-star",
            BoundKind::Re3 => "re3",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = SelfTestError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        BoundKind::ALL.into_iter().find(|k| k.name() == lower).ok_or_else(|| SelfTestError::UnknownKind(s.into()))
    }
}

/// Graph parameters entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundParams {
    /// `|V|`.
    pub vertices: usize,
    /// `|E|`.
    pub edges: usize,
    /// `m`, vertices on the odd cycle (RE1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<usize>,
    /// `|N(v_c)|` (RE2 star).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_degree: Option<usize>,
    /// `l`, largest distance from the first certified vertex.
    pub distance: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub kind: BoundKind,
    pub epsilon: f64,
    pub c: f64,
    /// Tabulated closed form.
    pub table: f64,
    /// `(√ε/2)(2|V| + |E|)(c + 4l)`.
    pub general: f64,
}

fn re3_c() -> f64 {
    (8.0 * SQRT_2).sqrt() * (1.0 + SQRT_2)
}

/// Number of measurement relations behind the first anticommutation.
pub fn constant_c(kind: BoundKind, params: &BoundParams) -> Result<f64, SelfTestError> {
    Ok(match kind {
        BoundKind::Re0 => 4.0,
        BoundKind::Re1 => {
            let m = params.circle.ok_or_else(|| SelfTestError::BadParams("RE1 needs the cycle length m".into()))?;
            3.0 * m as f64 + 1.0
        }
        BoundKind::Re2TwoLeaf => 6.0,
        BoundKind::Re2Star => {
            let n = params
                .center_degree
                .ok_or_else(|| SelfTestError::BadParams("RE2 star needs |N(v_c)|".into()))?;
            4.0 + 4.0 * n as f64
        }
        BoundKind::Re3 => re3_c(),
    })
}

fn check_epsilon(epsilon: f64) -> Result<(), SelfTestError> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(SelfTestError::NegativeEpsilon(epsilon));
    }
    Ok(())
}

/// Tabulated δ(ε) for `|V| = vertices`.
pub fn table_bound(kind: BoundKind, vertices: usize, epsilon: f64) -> Result<f64, SelfTestError> {
    check_epsilon(epsilon)?;
    let v = vertices as f64;
    let poly = match kind {
        BoundKind::Re0 | BoundKind::Re2Star => 2.0 * v * v + 6.0 * v + 6.0,
        BoundKind::Re1 => 3.5 * v * v + 7.5 * v + 2.0,
        BoundKind::Re2TwoLeaf => 2.0 * v * v + 7.0 * v + 8.0,
        BoundKind::Re3 => 2.0 * v * v + 4.0 * v + 1.0 + (2.0 + v) * (2.0 * SQRT_2).sqrt() * (1.0 + SQRT_2),
    };
    Ok(epsilon.sqrt() * v * poly)
}

pub fn general_bound(kind: BoundKind, params: &BoundParams, epsilon: f64) -> Result<f64, SelfTestError> {
    check_epsilon(epsilon)?;
    let c = constant_c(kind, params)?;
    let size = 2.0 * params.vertices as f64 + params.edges as f64;
    Ok(epsilon.sqrt() / 2.0 * size * (c + 4.0 * params.distance as f64))
}

pub fn robustness_bound(kind: BoundKind, params: &BoundParams, epsilon: f64) -> Result<Bound, SelfTestError> {
    Ok(Bound {
        kind,
        epsilon,
        c: constant_c(kind, params)?,
        table: table_bound(kind, params.vertices, epsilon)?,
        general: general_bound(kind, params, epsilon)?,
    })
}

/// Bound kind and parameters of an experiment, measured on the graph the
/// devices share.
pub fn bound_params(re: &ReferenceExperiment) -> Result<(BoundKind, BoundParams), SelfTestError> {
    let g = &re.graph;
    let distance = g
        .distances(anchor_vertex(re))
        .map_err(crate::experiments::ExperimentError::from)?
        .into_values()
        .max()
        .unwrap_or(0);
    let mut params = BoundParams { vertices: g.n(), edges: g.edge_count(), circle: None, center_degree: None, distance };
    let kind = match (&re.kind, &re.anchor) {
        (ReKind::Re0, _) => BoundKind::Re0,
        (ReKind::Re1, Anchor::OddCycle { cycle }) => {
            params.circle = Some(cycle.len());
            BoundKind::Re1
        }
        (ReKind::Re2, Anchor::Star { leaves, .. }) if leaves.len() == 2 => BoundKind::Re2TwoLeaf,
        (ReKind::Re2, Anchor::Star { leaves, .. }) => {
            params.center_degree = Some(leaves.len());
            BoundKind::Re2Star
        }
        (ReKind::Re3, _) => BoundKind::Re3,
        (kind, _) => return Err(SelfTestError::UnsupportedKind(kind.to_string())),
    };
    Ok((kind, params))
}
