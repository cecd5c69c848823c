//! Deterministic d-LHV* strategies: one output bit per (vertex, input
//! view). Deterministic submeasurements become GF(2) parity constraints.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::{input_view, ExperimentError, ReferenceExperiment, ViewToken};

/// Default and hard caps on brute-forced variables (after peeling and
/// merging).
pub const DEFAULT_MAX_VARS: usize = 24;
pub const HARD_MAX_VARS: usize = 40;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{vars} free variables after peeling exceed the limit of {max}")]
    TooManyVariables { vars: usize, max: usize },
}

/// `Σ vars ≡ parity (mod 2)`, from one deterministic submeasurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub vars: Vec<usize>,
    pub parity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParitySystem {
    pub variables: Vec<ViewToken>,
    pub constraints: Vec<Constraint>,
}

/// Any submeasurement as a term `target · Π (-1)^{bits}` of a Bell-type
/// functional; deterministic terms are also parity constraints.
#[derive(Debug, Clone, PartialEq)]
struct Term {
    vars: Vec<usize>,
    target: f64,
}

fn deterministic(target: f64) -> bool {
    (target.abs() - 1.0).abs() < 1e-9
}

fn intern(vars: &mut Vec<ViewToken>, index: &mut BTreeMap<ViewToken, usize>, t: ViewToken) -> usize {
    *index.entry(t.clone()).or_insert_with(|| {
        vars.push(t);
        vars.len() - 1
    })
}

fn terms_of(re: &ReferenceExperiment) -> Result<(Vec<ViewToken>, Vec<(String, Term)>), ExperimentError> {
    let mut vars = Vec::new();
    let mut index = BTreeMap::new();
    let mut out = Vec::new();
    for (m, s) in re.submeasurements() {
        let mut ids = Vec::with_capacity(s.support.len());
        for &u in &s.support {
            ids.push(intern(&mut vars, &mut index, input_view(re, m, u)?));
        }
        ids.sort_unstable();
        out.push((s.label.clone(), Term { vars: ids, target: s.target }));
    }
    Ok((vars, out))
}

/// Parity system of all deterministic submeasurements.
pub fn compile(re: &ReferenceExperiment) -> Result<ParitySystem, ExperimentError> {
    let (all_vars, terms) = terms_of(re)?;
    // Keep only variables used by deterministic constraints.
    let mut remap = BTreeMap::new();
    let mut variables = Vec::new();
    let mut constraints = Vec::new();
    for (label, t) in terms.into_iter().filter(|(_, t)| deterministic(t.target)) {
        let vars = t
            .vars
            .iter()
            .map(|&v| {
                *remap.entry(v).or_insert_with(|| {
                    variables.push(all_vars[v].clone());
                    variables.len() - 1
                })
            })
            .collect();
        constraints.push(Constraint { label, vars, parity: t.target < 0.0 });
    }
    Ok(ParitySystem { variables, constraints })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Solution {
    /// Bit per variable satisfying every constraint.
    Feasible { assignment: Vec<bool> },
    /// Constraint indices whose sum is `0 = 1`.
    Infeasible { certificate: Vec<usize> },
}

type Bits = Vec<u64>;

fn bits(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn flip(b: &mut Bits, i: usize) {
    b[i / 64] ^= 1 << (i % 64);
}

fn get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn xor_into(a: &mut Bits, b: &Bits) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x ^= y);
}

impl ParitySystem {
    pub fn satisfied_by(&self, c: &Constraint, assignment: &[bool]) -> bool {
        c.vars.iter().filter(|&&v| assignment[v]).count() % 2 == c.parity as usize
    }

    pub fn check_assignment(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.variables.len() && self.constraints.iter().all(|c| self.satisfied_by(c, assignment))
    }

    /// True if the listed constraints sum to `0 = 1`.
    pub fn check_certificate(&self, certificate: &[usize]) -> bool {
        let mut row = bits(self.variables.len());
        let mut parity = false;
        for &i in certificate {
            let Some(c) = self.constraints.get(i) else { return false };
            for &v in &c.vars {
                flip(&mut row, v);
            }
            parity ^= c.parity;
        }
        parity && row.iter().all(|&w| w == 0)
    }

    /// Subsystem with only the listed constraints.
    pub fn restrict(&self, keep: impl Fn(&Constraint) -> bool) -> ParitySystem {
        ParitySystem { variables: self.variables.clone(), constraints: self.constraints.iter().filter(|c| keep(c)).cloned().collect() }
    }

    /// XOR clauses in the extended DIMACS format (`x` lines, variables
    /// 1-based, a negated first literal meaning even parity).
    pub fn to_dimacs_xor(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "c parity system: {} views, {} constraints", self.variables.len(), self.constraints.len());
        for (i, v) in self.variables.iter().enumerate() {
            let _ = writeln!(out, "c var {} {}", i + 1, v);
        }
        let _ = writeln!(out, "p cnf {} {}", self.variables.len(), self.constraints.len());
        for c in &self.constraints {
            let _ = writeln!(out, "c {}", c.label);
            if c.vars.is_empty() {
                // Empty clause: unsatisfiable if odd, trivially true otherwise.
                let _ = writeln!(out, "{}", if c.parity { "0" } else { "x1 -1 0" });
                continue;
            }
            let mut lits: Vec<String> = c.vars.iter().map(|v| (v + 1).to_string()).collect();
            if !c.parity {
                lits[0] = format!("-{}", lits[0]);
            }
            let _ = writeln!(out, "x{} 0", lits.join(" "));
        }
        out
    }
}

/// Gaussian elimination over GF(2). The answer is verified before it is
/// returned.
pub fn solve_gf2(sys: &ParitySystem) -> Solution {
    let nv = sys.variables.len();
    let nc = sys.constraints.len();
    // Row: (variable bits, parity, constraint combination).
    let mut rows: Vec<(Bits, bool, Bits)> = sys
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut r = bits(nv);
            for &v in &c.vars {
                flip(&mut r, v);
            }
            let mut comb = bits(nc);
            flip(&mut comb, i);
            (r, c.parity, comb)
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..nv {
        let Some(p) = (rank..rows.len()).find(|&r| get(&rows[r].0, col)) else { continue };
        rows.swap(rank, p);
        let (pr, pp, pc) = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && get(&row.0, col) {
                xor_into(&mut row.0, &pr);
                row.1 ^= pp;
                xor_into(&mut row.2, &pc);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if let Some((_, _, comb)) = rows[rank..].iter().find(|(_, parity, _)| *parity) {
        let certificate: Vec<usize> = (0..nc).filter(|&i| get(comb, i)).collect();
        debug_assert!(sys.check_certificate(&certificate));
        assert!(sys.check_certificate(&certificate), "elimination produced an invalid certificate");
        return Solution::Infeasible { certificate };
    }
    let mut assignment = vec![false; nv];
    for (r, &col) in pivots.iter().enumerate() {
        assignment[col] = rows[r].1;
    }
    assert!(sys.check_assignment(&assignment), "elimination produced an invalid assignment");
    Solution::Feasible { assignment }
}

/// Result of brute force over all deterministic strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    /// Some strategy satisfies every deterministic constraint.
    pub feasible: bool,
    pub constraints: usize,
    /// Largest number of deterministic constraints satisfied at once.
    pub best_satisfied: usize,
    pub best_fraction: f64,
    /// Maximum of `Σ target · (classical product)` over strategies, against
    /// the ideal quantum value `Σ target²`.
    pub classical_value: f64,
    pub quantum_value: f64,
    /// Constraints removed because one of their variables occurs nowhere
    /// else; `free_variables` were enumerated after merging.
    pub peeled: usize,
    /// Views folded into an equivalent one (same terms).
    pub merged: usize,
    pub free_variables: usize,
}

/// Exhaustive search over the view variables of `re`, including the
/// non-deterministic (`±1/√2`) submeasurements in the Bell value.
pub fn enumerate(re: &ReferenceExperiment, max_vars: usize) -> Result<Enumeration, AdversaryError> {
    let (vars, terms) = terms_of(re)?;
    enumerate_terms(vars.len(), terms.into_iter().map(|(_, t)| t).collect(), max_vars)
}

/// Exhaustive search over a bare parity system.
pub fn enumerate_system(sys: &ParitySystem, max_vars: usize) -> Result<Enumeration, AdversaryError> {
    let terms = sys
        .constraints
        .iter()
        .map(|c| Term { vars: c.vars.clone(), target: if c.parity { -1.0 } else { 1.0 } })
        .collect();
    enumerate_terms(sys.variables.len(), terms, max_vars)
}

fn enumerate_terms(nv: usize, mut terms: Vec<Term>, max_vars: usize) -> Result<Enumeration, AdversaryError> {
    let max = max_vars.min(HARD_MAX_VARS);
    let constraints = terms.iter().filter(|t| deterministic(t.target)).count();
    let quantum_value = terms.iter().map(|t| t.target * t.target).sum();

    // A variable in exactly one term lets that term take its best value
    // whatever the rest does.
    let (mut peeled_det, mut peeled_value, mut peeled) = (0, 0.0, 0);
    loop {
        let mut count = vec![0usize; nv];
        for t in &terms {
            t.vars.iter().for_each(|&v| count[v] += 1);
        }
        let Some(i) = terms.iter().position(|t| t.vars.iter().any(|&v| count[v] == 1)) else { break };
        let t = terms.swap_remove(i);
        peeled += 1;
        peeled_value += t.target.abs();
        if deterministic(t.target) {
            peeled_det += 1;
        }
    }
    // Views occurring in exactly the same terms only matter through their
    // XOR, so each such class collapses to one variable.
    let mut occurs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, t) in terms.iter().enumerate() {
        t.vars.iter().for_each(|&v| occurs.entry(v).or_default().push(i));
    }
    let mut class: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (&v, ts) in &occurs {
        class.entry(ts.clone()).or_insert(v);
    }
    let merged = occurs.len() - class.len();
    for t in &mut terms {
        t.vars.retain(|v| class[&occurs[v]] == *v);
    }
    let mut free: Vec<usize> = class.into_values().collect();
    free.sort_unstable();
    if free.len() > max {
        return Err(AdversaryError::TooManyVariables { vars: free.len(), max });
    }
    let pos: BTreeMap<usize, usize> = free.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks: Vec<(u64, f64, bool)> = terms
        .iter()
        .map(|t| (t.vars.iter().fold(0u64, |m, v| m ^ (1 << pos[v])), t.target, deterministic(t.target)))
        .collect();

    let total = 1u64 << free.len();
    let chunk = (total / 256).max(1);
    let (best_det, best_value) = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut best = (0usize, f64::NEG_INFINITY);
            for a in c * chunk..((c + 1) * chunk).min(total) {
                let mut det = 0;
                let mut value = 0.0;
                for &(m, target, is_det) in &masks {
                    let odd = (a & m).count_ones() % 2 == 1;
                    let product = if odd { -1.0 } else { 1.0 };
                    value += target * product;
                    if is_det && (target < 0.0) == odd {
                        det += 1;
                    }
                }
                best.0 = best.0.max(det);
                best.1 = best.1.max(value);
            }
            best
        })
        .reduce(|| (0, f64::NEG_INFINITY), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let best_satisfied = best_det + peeled_det;
    Ok(Enumeration {
        feasible: best_satisfied == constraints,
        constraints,
        best_satisfied,
        best_fraction: if constraints == 0 { 1.0 } else { best_satisfied as f64 / constraints as f64 },
        classical_value: best_value + peeled_value,
        quantum_value,
        peeled,
        merged,
        free_variables: free.len(),
    })
}
