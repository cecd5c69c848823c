//! Dense-matrix oracles shared by the integration tests. Deliberately
//! naive: Kronecker products and explicit graph-state amplitudes.
#![allow(dead_code)]

use inflated_selftest::{Graph, Pauli, PauliString};
pub use num_complex::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub fn single(p: Pauli) -> Mat {
    let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
    match p {
        Pauli::I => vec![vec![o, z], vec![z, o]],
        Pauli::X => vec![vec![z, o], vec![o, z]],
        Pauli::Y => vec![vec![z, -i], vec![i, z]],
        Pauli::Z => vec![vec![o, z], vec![z, -o]],
    }
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![C::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// Coefficient `i^c` read off the printed prefix.
pub fn coefficient(p: &PauliString) -> C {
    let s = p.to_string();
    if s.starts_with("+i") {
        C::new(0.0, 1.0)
    } else if s.starts_with("-i") {
        C::new(0.0, -1.0)
    } else if s.starts_with('-') {
        C::new(-1.0, 0.0)
    } else {
        C::new(1.0, 0.0)
    }
}

/// Dense matrix with qubit 0 as the least significant index bit.
pub fn dense(p: &PauliString) -> Mat {
    let mut m = vec![vec![coefficient(p)]];
    for q in (0..p.n()).rev() {
        m = kron(&m, &single(p.get(q)));
    }
    m
}

pub fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < tol)
}

/// `|G⟩ = Π CZ |+⟩^n` amplitudes, qubit index = position in `g.vertices()`.
pub fn graph_state(g: &Graph) -> Vec<C> {
    let n = g.n();
    let norm = (1u64 << n) as f64;
    let edges: Vec<(usize, usize)> =
        g.edges().map(|(a, b)| (g.index_of(a).unwrap(), g.index_of(b).unwrap())).collect();
    (0..1usize << n)
        .map(|b| {
            let odd = edges.iter().filter(|&&(i, j)| b >> i & 1 == 1 && b >> j & 1 == 1).count() % 2;
            C::new(if odd == 1 { -1.0 } else { 1.0 } / norm.sqrt(), 0.0)
        })
        .collect()
}

/// `⟨ψ|P|ψ⟩` by applying the Pauli bitwise (no matrices).
pub fn expect(psi: &[C], p: &PauliString) -> f64 {
    let c = coefficient(p);
    let mut acc = C::new(0.0, 0.0);
    for (b, amp) in psi.iter().enumerate() {
        // P|b⟩ = c · Π_q σ_q |b_q⟩
        let mut phase = c;
        let mut out = b;
        for q in 0..p.n() {
            let bit = b >> q & 1;
            match p.get(q) {
                Pauli::I => {}
                Pauli::X => out ^= 1 << q,
                Pauli::Y => {
                    out ^= 1 << q;
                    phase *= if bit == 0 { C::new(0.0, 1.0) } else { C::new(0.0, -1.0) };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        acc += psi[out].conj() * phase * amp;
    }
    acc.re
}
