//! The pipeline behind each `inflst` subcommand, free of file and process
//! handling so that tests and fixtures go through the same code.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::adversary::{self, AdversaryError, Solution};
use crate::experiments::{
    build_auto, build_re0, build_re1, build_re2, build_re3, build_re4_circle, build_re5_honeycomb, ExperimentError,
    ReferenceExperiment,
};
use crate::graph::{inflate, Graph, InflatedGraph};
use crate::io::{Backend, BoundTable, Correlations, IoError, LhvReport, LhvVerdict};
use crate::selftest::{
    bound_params, physical_correlations, reference_correlations, robustness_bound, run_selftest, BoundKind,
    BoundParams, Device, ObservableAssignment, OutcomeSelection, SelfTestConfig, SelfTestError, SelfTestReport,
};
use crate::simulator::{dense_limit, prepare_graph_state, NoiseSpec, SimError, StateVector, MAX_DENSE_LIMIT};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    SelfTest(#[from] SelfTestError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("{0}")]
    Invalid(String),
}

/// Numeric knobs shared by the subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub noise: f64,
    pub dense_limit: usize,
    pub outcomes: OutcomeSelection,
    pub epsilon_threshold: f64,
    pub fidelity_slack: f64,
    pub max_vars: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let st = SelfTestConfig::default();
        RunConfig {
            d: 1,
            noise: 0.0,
            dense_limit: crate::simulator::DEFAULT_DENSE_LIMIT,
            outcomes: st.outcomes,
            epsilon_threshold: st.epsilon_threshold,
            fidelity_slack: st.fidelity_slack,
            max_vars: adversary::DEFAULT_MAX_VARS,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CommandError> {
        let bad = |m: String| Err(CommandError::Invalid(m));
        if !(0.0..=1.0).contains(&self.noise) {
            return bad(format!("noise p = {} outside [0, 1]", self.noise));
        }
        if !(1..=MAX_DENSE_LIMIT).contains(&self.dense_limit) {
            return bad(format!("dense limit {} outside 1..={MAX_DENSE_LIMIT}", self.dense_limit));
        }
        for (name, v) in [("epsilon threshold", self.epsilon_threshold), ("fidelity slack", self.fidelity_slack)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a finite non-negative number, got {v}"));
            }
        }
        if self.max_vars > adversary::HARD_MAX_VARS {
            return bad(format!("max vars {} above the hard cap {}", self.max_vars, adversary::HARD_MAX_VARS));
        }
        Ok(())
    }

    pub fn selftest_config(&self) -> Result<SelfTestConfig, CommandError> {
        self.validate()?;
        Ok(SelfTestConfig {
            epsilon_threshold: self.epsilon_threshold,
            fidelity_slack: self.fidelity_slack,
            noise: NoiseSpec::new(self.noise)?,
            outcomes: self.outcomes.clone(),
        })
    }
}

/// Parses `seed:N`, a bare integer, or `all`.
pub fn parse_outcomes(s: &str) -> Result<OutcomeSelection, CommandError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("all") {
        return Ok(OutcomeSelection::All);
    }
    s.strip_prefix("seed:")
        .unwrap_or(s)
        .parse()
        .map(OutcomeSelection::Seed)
        .map_err(|_| CommandError::Invalid(format!("bad outcome selection {s:?}: expected seed:N or all")))
}

/// Which experiment `gen-re` builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindChoice {
    Auto,
    Re0,
    Re1,
    Re2,
    Re3,
    Re4,
}

impl FromStr for KindChoice {
    type Err = CommandError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "auto" => KindChoice::Auto,
            "re0" | "0" => KindChoice::Re0,
            "re1" | "1" => KindChoice::Re1,
            "re2" | "2" => KindChoice::Re2,
            "re3" | "3" => KindChoice::Re3,
            "re4" | "4" => KindChoice::Re4,
            _ => return Err(CommandError::Invalid(format!("unknown experiment kind {s:?} (auto, re0..re4)"))),
        })
    }
}

impl fmt::Display for KindChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KindChoice::Auto => "auto",
            KindChoice::Re0 => "re0",
            KindChoice::Re1 => "re1",
            KindChoice::Re2 => "re2",
            KindChoice::Re3 => "re3",
            KindChoice::Re4 => "re4",
        };
        f.write_str(s)
    }
}

pub fn cmd_inflate(g: &Graph, d: usize) -> InflatedGraph {
    inflate(g, d)
}

fn none_found(what: &str) -> CommandError {
    ExperimentError::NoApplicableSubgraph(format!("graph has no {what}")).into()
}

/// Builds and oracle-validates an experiment on `g`.
pub fn cmd_gen_re(g: &Graph, d: usize, kind: KindChoice) -> Result<ReferenceExperiment, CommandError> {
    let re = match kind {
        KindChoice::Auto => build_auto(g, d)?,
        KindChoice::Re0 => {
            let line = g.find_line_of_three().ok_or_else(|| none_found("induced line of three"))?;
            build_re0(g, line)?
        }
        KindChoice::Re1 => {
            let cycle = g.find_odd_cycle().ok_or_else(|| none_found("induced odd cycle"))?;
            build_re1(&inflate(g, d), &cycle)?
        }
        KindChoice::Re2 => {
            let (center, leaves) = g.find_induced_star().ok_or_else(|| none_found("induced star"))?;
            build_re2(&inflate(g, d), center, &leaves)?
        }
        KindChoice::Re3 => {
            let (a, b) = g.edges().next().ok_or_else(|| none_found("edge"))?;
            build_re3(&inflate(g, d), a, b)?
        }
        KindChoice::Re4 => {
            if *g != Graph::cycle(g.n() as u32) {
                return Err(none_found("circle shape: RE4 needs the cycle on vertices 1..n"));
            }
            build_re4_circle(g.n(), d)?
        }
    };
    re.validate()?;
    Ok(re)
}

pub fn cmd_gen_honeycomb(rows: usize, cols: usize, d: usize) -> Result<ReferenceExperiment, CommandError> {
    let re = build_re5_honeycomb(rows, cols, d)?;
    re.validate()?;
    Ok(re)
}

/// Correlations of the ideal graph state under depolarizing noise. The
/// dense simulator is used up to the dense limit (and its state returned),
/// the stabilizer tableau above it.
pub fn cmd_simulate(
    re: &ReferenceExperiment,
    noise: f64,
) -> Result<(Correlations, Option<StateVector>), CommandError> {
    let noise = NoiseSpec::new(noise)?;
    let (backend, values, state) = if re.graph.n() <= dense_limit()? {
        let state = prepare_graph_state(&re.graph)?;
        let values = physical_correlations(re, &state, &ObservableAssignment::ideal(), noise)?;
        (Backend::Dense, values, Some(state))
    } else {
        (Backend::Tableau, reference_correlations(re, noise)?, None)
    };
    Ok((Correlations { kind: re.kind, d: re.d, noise: noise.p, backend, values }, state))
}

/// Parity-system verdict plus, when small enough, the exhaustive classical
/// value. With `generators_only` only the `f_u`/`g_u` constraints are kept.
pub fn cmd_lhv_check(
    re: &ReferenceExperiment,
    generators_only: bool,
    max_vars: usize,
) -> Result<(LhvReport, adversary::ParitySystem), CommandError> {
    let mut sys = adversary::compile(re)?;
    if generators_only {
        sys = sys.restrict(|c| c.label.starts_with("f_") || c.label.starts_with("g_"));
    }
    let solution = adversary::solve_gf2(&sys);
    let has_soft = !generators_only && re.submeasurements().any(|(_, s)| !s.is_deterministic());
    let enumerated = if generators_only { adversary::enumerate_system(&sys, max_vars) } else { adversary::enumerate(re, max_vars) };
    let (enumeration, enumeration_skipped) = match enumerated {
        Ok(e) => (Some(e), None),
        Err(e @ AdversaryError::TooManyVariables { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let (verdict, certificate_labels) = match &solution {
        Solution::Infeasible { certificate } => {
            (LhvVerdict::Infeasible, certificate.iter().map(|&i| sys.constraints[i].label.clone()).collect())
        }
        Solution::Feasible { .. } if has_soft => (LhvVerdict::ParityInconclusive, Vec::new()),
        Solution::Feasible { .. } => (LhvVerdict::Feasible, Vec::new()),
    };
    let nonlocal = verdict == LhvVerdict::Infeasible
        || enumeration.as_ref().is_some_and(|e| e.classical_value < e.quantum_value - 1e-9);
    let report = LhvReport {
        kind: re.kind,
        d: re.d,
        variables: sys.variables.len(),
        constraints: sys.constraints.len(),
        verdict,
        nonlocal,
        solution,
        certificate_labels,
        enumeration,
        enumeration_skipped,
    };
    Ok((report, sys))
}

/// Self-test of the ideal device, or of lab correlations when given.
pub fn cmd_selftest(
    re: &ReferenceExperiment,
    correlations: Option<&Correlations>,
    config: &RunConfig,
) -> Result<SelfTestReport, CommandError> {
    let st = config.selftest_config()?;
    if let Some(c) = correlations {
        if c.kind != re.kind || c.d != re.d {
            return Err(CommandError::Invalid(format!(
                "correlations are for {} d={}, experiment is {} d={}",
                c.kind, c.d, re.kind, re.d
            )));
        }
    }
    Ok(run_selftest(re, &Device::ideal(), correlations.map(|c| &c.values), &st)?)
}

/// Robustness bounds for one kind, or all five when `kind` is `None`.
pub fn cmd_bounds(kind: Option<BoundKind>, params: BoundParams, epsilon: f64) -> Result<BoundTable, CommandError> {
    let kinds = kind.map_or(BoundKind::ALL.to_vec(), |k| vec![k]);
    let rows = kinds.into_iter().map(|k| robustness_bound(k, &params, epsilon)).collect::<Result<_, _>>()?;
    Ok(BoundTable { params, rows })
}

/// Bound row for the kind and parameters of an existing experiment.
pub fn cmd_bounds_for(re: &ReferenceExperiment, epsilon: f64) -> Result<BoundTable, CommandError> {
    let (kind, params) = bound_params(re)?;
    cmd_bounds(Some(kind), params, epsilon)
}
