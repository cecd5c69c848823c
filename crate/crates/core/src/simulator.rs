//! Dense state vectors for small graph states.
//!
//! Qubit `i` is the `i`-th vertex of the state's vertex list and bit `i` of
//! an amplitude index, so qubit 0 is the least significant bit.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{Read, Write};

use num_complex::Complex64 as C;
use rayon::prelude::*;
use thiserror::Error;

use crate::experiments::{Basis, Correlator};
use crate::graph::{Graph, InflatedGraph, Vertex};
use crate::pauli::{Pauli, PauliString};

/// Environment variable overriding the dense qubit limit.
pub const DENSE_LIMIT_ENV: &str = "INFLST_DENSE_LIMIT";
pub const DEFAULT_DENSE_LIMIT: usize = 16;
pub const MAX_DENSE_LIMIT: usize = 24;

const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{n} qubits exceed the dense limit of {limit} (set {DENSE_LIMIT_ENV}, at most {MAX_DENSE_LIMIT})")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid {DENSE_LIMIT_ENV}={0:?}: expected an integer in 1..={MAX_DENSE_LIMIT}")]
    BadLimit(String),
    #[error("operator acts on {got} qubits, state has {expected}")]
    UniverseMismatch { expected: usize, got: usize },
    #[error("vertex {0} is not part of the state")]
    UnknownVertex(Vertex),
    #[error("projection onto {0} is not supported")]
    UnsupportedProjection(Basis),
    #[error("outcome {outcome} at vertex {vertex} has zero probability")]
    ZeroProbability { vertex: Vertex, outcome: u8 },
    #[error("no outcome given for chain vertex {0}")]
    MissingOutcome(Vertex),
    #[error("no deflation setting for chain vertex {0}")]
    MissingSetting(Vertex),
    #[error("state dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("depolarizing probability {0} outside [0, 1]")]
    BadNoise(f64),
    #[error("amplitude vector has length {0}, not a power of two matching the vertex count")]
    BadLength(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("amplitude dump: {0}")]
    Io(String),
}

/// Current dense limit: [`DEFAULT_DENSE_LIMIT`] unless overridden through
/// [`DENSE_LIMIT_ENV`].
pub fn dense_limit() -> Result<usize, SimError> {
    match std::env::var(DENSE_LIMIT_ENV) {
        Err(_) => Ok(DEFAULT_DENSE_LIMIT),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if (1..=MAX_DENSE_LIMIT).contains(&n) => Ok(n),
            _ => Err(SimError::BadLimit(s)),
        },
    }
}

fn check_size(n: usize) -> Result<(), SimError> {
    let limit = dense_limit()?;
    if n > limit {
        return Err(SimError::TooLarge { n, limit });
    }
    Ok(())
}

/// Per-qubit depolarizing noise applied before every measurement.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct NoiseSpec {
    pub p: f64,
}

impl NoiseSpec {
    pub fn new(p: f64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::BadNoise(p));
        }
        Ok(NoiseSpec { p })
    }

    pub fn ideal() -> Self {
        NoiseSpec { p: 0.0 }
    }

    /// Factor by which an observable on `weight` qubits shrinks.
    pub fn shrink(&self, weight: usize) -> f64 {
        (1.0 - self.p).powi(weight as i32)
    }
}

/// A 2×2 operator on one qubit, row major.
pub type Op2 = [[C; 2]; 2];

pub mod gates {
    use super::{Op2, C};
    use std::f64::consts::FRAC_1_SQRT_2;

    const O: C = C::new(0.0, 0.0);
    const L: C = C::new(1.0, 0.0);
    const I: C = C::new(0.0, 1.0);
    const H: C = C::new(FRAC_1_SQRT_2, 0.0);

    pub const ID: Op2 = [[L, O], [O, L]];
    pub const X: Op2 = [[O, L], [L, O]];
    pub const Y: Op2 = [[O, C::new(0.0, -1.0)], [I, O]];
    pub const Z: Op2 = [[L, O], [O, C::new(-1.0, 0.0)]];
    pub const HADAMARD: Op2 = [[H, H], [H, C::new(-FRAC_1_SQRT_2, 0.0)]];
    pub const S: Op2 = [[L, O], [O, I]];

    pub fn pauli(p: crate::pauli::Pauli) -> Op2 {
        use crate::pauli::Pauli;
        match p {
            Pauli::I => ID,
            Pauli::X => X,
            Pauli::Y => Y,
            Pauli::Z => Z,
        }
    }

    pub fn matmul(a: &Op2, b: &Op2) -> Op2 {
        let mut out = [[O; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    pub fn scale(a: &Op2, s: f64) -> Op2 {
        a.map(|row| row.map(|c| c * s))
    }

    pub fn add(a: &Op2, b: &Op2) -> Op2 {
        let mut out = *a;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += b[i][j];
            }
        }
        out
    }

    pub fn adjoint(a: &Op2) -> Op2 {
        [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
    }
}

/// Eigenvector of `basis` with eigenvalue `(-1)^outcome`.
fn eigenvector(basis: Basis, outcome: u8) -> Result<[C; 2], SimError> {
    let s = if outcome == 0 { 1.0 } else { -1.0 };
    let h = FRAC_1_SQRT_2;
    match basis {
        Basis::X => Ok([C::new(h, 0.0), C::new(s * h, 0.0)]),
        Basis::Y => Ok([C::new(h, 0.0), C::new(0.0, s * h)]),
        Basis::Z if outcome == 0 => Ok([C::new(1.0, 0.0), C::new(0.0, 0.0)]),
        Basis::Z => Ok([C::new(0.0, 0.0), C::new(1.0, 0.0)]),
        Basis::Rz => Err(SimError::UnsupportedProjection(basis)),
    }
}

/// Bit masks and phase describing the action of a Pauli string on basis
/// states: `P|b⟩ = phase · (-1)^{|b ∧ sign_mask|} |b ⊕ flip⟩`.
struct PauliAction {
    flip: usize,
    sign_mask: usize,
    phase: C,
}

impl PauliAction {
    fn new(p: &PauliString) -> Self {
        let mut flip = 0;
        let mut sign_mask = 0;
        let mut ys = 0;
        for q in 0..p.n() {
            match p.get(q) {
                Pauli::I => {}
                Pauli::X => flip |= 1 << q,
                Pauli::Z => sign_mask |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    sign_mask |= 1 << q;
                    ys += 1;
                }
            }
        }
        let coefficient = C::i().powu(p.coefficient_power() as u32);
        PauliAction { flip, sign_mask, phase: coefficient * C::i().powu(ys) }
    }

    fn apply(&self, b: usize) -> (usize, C) {
        let odd = (b & self.sign_mask).count_ones() % 2 == 1;
        (b ^ self.flip, if odd { -self.phase } else { self.phase })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    vertices: Vec<Vertex>,
    amps: Vec<C>,
}

impl StateVector {
    /// Wrap raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(vertices: Vec<Vertex>, amps: Vec<C>) -> Result<Self, SimError> {
        check_size(vertices.len())?;
        if amps.len() != 1 << vertices.len() {
            return Err(SimError::BadLength(amps.len()));
        }
        let s = StateVector { vertices, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// `|0…0⟩` on the given vertices.
    pub fn zero(vertices: Vec<Vertex>) -> Result<Self, SimError> {
        check_size(vertices.len())?;
        let mut amps = vec![C::new(0.0, 0.0); 1 << vertices.len()];
        amps[0] = C::new(1.0, 0.0);
        Ok(StateVector { vertices, amps })
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn qubit(&self, v: Vertex) -> Result<usize, SimError> {
        self.vertices.iter().position(|&w| w == v).ok_or(SimError::UnknownVertex(v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_universe(&self, p: &PauliString) -> Result<(), SimError> {
        if p.n() != self.n() {
            return Err(SimError::UniverseMismatch { expected: self.n(), got: p.n() });
        }
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩` for a Hermitian Pauli string (the real part otherwise).
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64, SimError> {
        self.check_universe(p)?;
        let action = PauliAction::new(p);
        let term = |b: usize| {
            let (out, ph) = action.apply(b);
            (self.amps[out].conj() * ph * self.amps[b]).re
        };
        Ok(if self.amps.len() >= PAR_THRESHOLD {
            (0..self.amps.len()).into_par_iter().map(term).sum()
        } else {
            (0..self.amps.len()).map(term).sum()
        })
    }

    /// Expectation of a correlator under depolarizing noise; each term
    /// shrinks by `(1-p)` per qubit in its support.
    pub fn expectation(&self, obs: &Correlator, noise: NoiseSpec) -> Result<f64, SimError> {
        obs.terms
            .iter()
            .map(|(w, p)| Ok(w * noise.shrink(p.weight()) * self.expectation_pauli(p)?))
            .sum()
    }

    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector, SimError> {
        self.check_universe(p)?;
        let action = PauliAction::new(p);
        let mut out = vec![C::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let (t, ph) = action.apply(b);
            out[t] = ph * a;
        }
        Ok(StateVector { vertices: self.vertices.clone(), amps: out })
    }

    /// Apply a one-qubit operator to qubit `q`.
    pub fn apply_local(&self, q: usize, op: &Op2) -> StateVector {
        let mut out = self.amps.clone();
        let bit = 1 << q;
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                out[b] = op[0][0] * a0 + op[0][1] * a1;
                out[b | bit] = op[1][0] * a0 + op[1][1] * a1;
            }
        }
        StateVector { vertices: self.vertices.clone(), amps: out }
    }

    /// Apply `⊗ ops` on the branch where qubit `control` is 1.
    pub fn apply_controlled(&self, control: usize, ops: &[(usize, Op2)]) -> StateVector {
        let mut branch = self.clone();
        for (q, op) in ops {
            branch = branch.apply_local(*q, op);
        }
        let bit = 1 << control;
        let amps = (0..self.amps.len())
            .map(|b| if b & bit == 0 { self.amps[b] } else { branch.amps[b] })
            .collect();
        StateVector { vertices: self.vertices.clone(), amps }
    }

    /// Controlled-Z between two qubits.
    pub fn apply_cz(&self, a: usize, b: usize) -> StateVector {
        let mask = (1 << a) | (1 << b);
        let amps = self.amps.iter().enumerate().map(|(i, &x)| if i & mask == mask { -x } else { x }).collect();
        StateVector { vertices: self.vertices.clone(), amps }
    }

    /// Born probability and renormalized state after projecting `v` onto
    /// the `(-1)^outcome` eigenspace of `basis`; the qubit stays in place.
    pub fn project(&self, v: Vertex, basis: Basis, outcome: u8) -> Result<(StateVector, f64), SimError> {
        let q = self.qubit(v)?;
        let e = eigenvector(basis, outcome)?;
        let projector: Op2 = [[e[0] * e[0].conj(), e[0] * e[1].conj()], [e[1] * e[0].conj(), e[1] * e[1].conj()]];
        let mut s = self.apply_local(q, &projector);
        let prob = s.norm_sqr();
        if prob < 1e-14 {
            return Err(SimError::ZeroProbability { vertex: v, outcome });
        }
        let scale = 1.0 / prob.sqrt();
        s.amps.iter_mut().for_each(|a| *a *= scale);
        Ok((s, prob))
    }

    /// Measure `v` and remove it from the state.
    pub fn measure_out(&self, v: Vertex, basis: Basis, outcome: u8) -> Result<(StateVector, f64), SimError> {
        let e = eigenvector(basis, outcome)?;
        let (s, prob) = self.contract_out(v, e)?;
        if prob < 1e-14 {
            return Err(SimError::ZeroProbability { vertex: v, outcome });
        }
        Ok((s.scaled(1.0 / prob.sqrt()), prob))
    }

    /// `(⟨e|_v ⊗ 1)|ψ⟩` with `v` removed, unnormalized, and its squared norm.
    pub fn contract_out(&self, v: Vertex, e: [C; 2]) -> Result<(StateVector, f64), SimError> {
        let q = self.qubit(v)?;
        let low = (1 << q) - 1;
        let amps: Vec<C> = (0..self.amps.len() / 2)
            .map(|r| {
                let b0 = (r & low) | ((r & !low) << 1);
                e[0].conj() * self.amps[b0] + e[1].conj() * self.amps[b0 | 1 << q]
            })
            .collect();
        let mut vertices = self.vertices.clone();
        vertices.remove(q);
        let s = StateVector { vertices, amps };
        let prob = s.norm_sqr();
        Ok((s, prob))
    }

    pub fn scaled(mut self, factor: f64) -> StateVector {
        self.amps.iter_mut().for_each(|a| *a *= factor);
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C, SimError> {
        if self.amps.len() != other.amps.len() {
            return Err(SimError::DimensionMismatch(self.amps.len(), other.amps.len()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Linear combination `self + w·other` (same register).
    pub fn add_scaled(&self, w: C, other: &StateVector) -> Result<StateVector, SimError> {
        if self.amps.len() != other.amps.len() {
            return Err(SimError::DimensionMismatch(self.amps.len(), other.amps.len()));
        }
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| a + w * b).collect();
        Ok(StateVector { vertices: self.vertices.clone(), amps })
    }

    /// Unnormalized vector on the given register.
    pub fn from_raw(vertices: Vec<Vertex>, amps: Vec<C>) -> Result<Self, SimError> {
        check_size(vertices.len())?;
        if amps.len() != 1 << vertices.len() {
            return Err(SimError::BadLength(amps.len()));
        }
        Ok(StateVector { vertices, amps })
    }

    /// `self ⊗ other`, with `self`'s qubits least significant.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, SimError> {
        check_size(self.n() + other.n())?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for b in &other.amps {
            amps.extend(self.amps.iter().map(|a| a * b));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend(&other.vertices);
        Ok(StateVector { vertices, amps })
    }

    /// Reorder qubits so that the vertex list equals `order`.
    pub fn permuted(&self, order: &[Vertex]) -> Result<StateVector, SimError> {
        if order.len() != self.n() {
            return Err(SimError::DimensionMismatch(order.len(), self.n()));
        }
        let src: Vec<usize> = order.iter().map(|&v| self.qubit(v)).collect::<Result<_, _>>()?;
        let mut amps = vec![C::new(0.0, 0.0); self.amps.len()];
        for (b, a) in amps.iter_mut().enumerate() {
            let mut old = 0;
            for (new_q, &old_q) in src.iter().enumerate() {
                old |= (b >> new_q & 1) << old_q;
            }
            *a = self.amps[old];
        }
        Ok(StateVector { vertices: order.to_vec(), amps })
    }

    /// Little-endian `(re, im)` f64 pairs, one per amplitude.
    pub fn write_dump(&self, mut w: impl Write) -> Result<(), SimError> {
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes()).map_err(|e| SimError::Io(e.to_string()))?;
            w.write_all(&a.im.to_le_bytes()).map_err(|e| SimError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_dump(vertices: Vec<Vertex>, mut r: impl Read) -> Result<StateVector, SimError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| SimError::Io(e.to_string()))?;
        if bytes.len() % 16 != 0 {
            return Err(SimError::BadLength(bytes.len() / 16));
        }
        let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
        let amps = bytes.chunks_exact(16).map(|c| C::new(f(&c[..8]), f(&c[8..]))).collect();
        StateVector::from_amplitudes(vertices, amps)
    }
}

/// `Π CZ |+⟩^V`, one qubit per vertex in the graph's vertex order.
pub fn prepare_graph_state(g: &Graph) -> Result<StateVector, SimError> {
    let n = g.n();
    check_size(n)?;
    let masks: Vec<usize> = g
        .edges()
        .map(|(a, b)| (1 << g.index_of(a).expect("edge")) | (1 << g.index_of(b).expect("edge")))
        .collect();
    let amp = (1u64 << n) as f64;
    let amp = 1.0 / amp.sqrt();
    let f = |b: usize| {
        let odd = masks.iter().filter(|&&m| b & m == m).count() % 2 == 1;
        C::new(if odd { -amp } else { amp }, 0.0)
    };
    let amps = if n >= 14 { (0..1usize << n).into_par_iter().map(f).collect() } else { (0..1usize << n).map(f).collect() };
    Ok(StateVector { vertices: g.vertices().to_vec(), amps })
}

/// Chain vertices in canonical order: by base edge, then position.
pub fn chain_order(ig: &InflatedGraph) -> Vec<Vertex> {
    ig.chains.values().flatten().copied().collect()
}

/// Measure out every chain vertex in canonical order with the given bases
/// and outcomes; returns the state on the power vertices and the joint
/// probability.
pub fn deflate(
    s: &StateVector,
    ig: &InflatedGraph,
    settings: &BTreeMap<Vertex, Basis>,
    outcomes: &BTreeMap<Vertex, u8>,
) -> Result<(StateVector, f64), SimError> {
    let mut state = s.clone();
    let mut prob = 1.0;
    for v in chain_order(ig) {
        let basis = *settings.get(&v).ok_or(SimError::MissingSetting(v))?;
        let outcome = *outcomes.get(&v).ok_or(SimError::MissingOutcome(v))?;
        let (next, p) = state.measure_out(v, basis, outcome)?;
        state = next;
        prob *= p;
    }
    Ok((state, prob))
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, SimError> {
    if a.amps.len() != b.amps.len() {
        return Err(SimError::DimensionMismatch(a.amps.len(), b.amps.len()));
    }
    let overlap: C = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr().min(1.0))
}

/// Dense density matrix for small systems (explicit noise channels).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    vertices: Vec<Vertex>,
    /// Row-major `2^n × 2^n`.
    rho: Vec<C>,
}

/// Largest system the density-matrix backend accepts.
pub const DENSITY_LIMIT: usize = 10;

impl DensityMatrix {
    pub fn from_pure(s: &StateVector) -> Result<Self, SimError> {
        if s.n() > DENSITY_LIMIT {
            return Err(SimError::TooLarge { n: s.n(), limit: DENSITY_LIMIT });
        }
        let dim = s.amps.len();
        let mut rho = vec![C::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                rho[i * dim + j] = s.amps[i] * s.amps[j].conj();
            }
        }
        Ok(DensityMatrix { vertices: s.vertices.clone(), rho })
    }

    fn dim(&self) -> usize {
        1 << self.vertices.len()
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    /// `σ ρ σ†` for a one-qubit operator on qubit `q`.
    fn conjugate(&self, q: usize, op: &Op2) -> Vec<C> {
        let dim = self.dim();
        let bit = 1 << q;
        let (mut left, mut out) = (self.rho.clone(), self.rho.clone());
        for j in 0..dim {
            for i in (0..dim).filter(|i| i & bit == 0) {
                let (a0, a1) = (self.rho[i * dim + j], self.rho[(i | bit) * dim + j]);
                left[i * dim + j] = op[0][0] * a0 + op[0][1] * a1;
                left[(i | bit) * dim + j] = op[1][0] * a0 + op[1][1] * a1;
            }
        }
        let adj = gates::adjoint(op);
        for i in 0..dim {
            for j in (0..dim).filter(|j| j & bit == 0) {
                let (a0, a1) = (left[i * dim + j], left[i * dim + (j | bit)]);
                out[i * dim + j] = a0 * adj[0][0] + a1 * adj[1][0];
                out[i * dim + (j | bit)] = a0 * adj[0][1] + a1 * adj[1][1];
            }
        }
        out
    }

    /// Depolarizing channel `ρ ↦ (1-p)ρ + p·(I/2 ⊗ Tr_q ρ)` on every qubit.
    pub fn depolarize(&self, noise: NoiseSpec) -> DensityMatrix {
        let mut cur = self.clone();
        for q in 0..self.n() {
            let mut next: Vec<C> = cur.rho.iter().map(|a| a * (1.0 - noise.p * 0.75)).collect();
            for op in [gates::X, gates::Y, gates::Z] {
                for (acc, v) in next.iter_mut().zip(cur.conjugate(q, &op)) {
                    *acc += v * (noise.p / 4.0);
                }
            }
            cur.rho = next;
        }
        cur
    }

    /// `Tr(Pρ)`.
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64, SimError> {
        if p.n() != self.n() {
            return Err(SimError::UniverseMismatch { expected: self.n(), got: p.n() });
        }
        let dim = self.dim();
        let action = PauliAction::new(p);
        Ok((0..dim)
            .map(|c| {
                let (r, ph) = action.apply(c);
                (ph * self.rho[c * dim + r]).re
            })
            .sum())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_pure(&self, psi: &StateVector) -> Result<f64, SimError> {
        let dim = self.dim();
        if psi.amps.len() != dim {
            return Err(SimError::DimensionMismatch(psi.amps.len(), dim));
        }
        let mut acc = C::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += psi.amps[i].conj() * self.rho[i * dim + j] * psi.amps[j];
            }
        }
        Ok(acc.re)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.rho[i * self.dim() + i].re).sum()
    }
}
