mod common;

use common::*;
use inflated_selftest::pauli::*;
use inflated_selftest::{inflate, Graph};
use proptest::prelude::*;

fn ps(s: &str) -> PauliString {
    s.parse().unwrap()
}

#[test]
fn single_qubit_table() {
    // Y = iXZ ⇒ XZ = −iY, ZX = iY, XY = iZ, YZ = iX, ZY = −iX, YX = −iZ
    let cases = [
        ("X", "Z", "-iY"),
        ("Z", "X", "+iY"),
        ("X", "Y", "+iZ"),
        ("Y", "X", "-iZ"),
        ("Y", "Z", "+iX"),
        ("Z", "Y", "-iX"),
        ("X", "X", "+I"),
        ("Y", "Y", "+I"),
        ("Z", "Z", "+I"),
        ("I", "Y", "+Y"),
    ];
    for (a, b, want) in cases {
        assert_eq!(ps(a).mul(&ps(b)).to_string(), want, "{a}·{b}");
        assert!(close(&dense(&ps(a).mul(&ps(b))), &matmul(&dense(&ps(a)), &dense(&ps(b))), 1e-12));
    }
}

#[test]
fn commutation_basics() {
    assert!(!ps("X").commutes_with(&ps("Z")));
    assert!(ps("XX").commutes_with(&ps("ZZ")));
    assert!(commutes(&ps("XX"), &ps("Z")).is_err());
    assert!(multiply(&ps("XX"), &ps("Z")).is_err());
}

#[test]
fn text_roundtrip() {
    for s in ["+XIZZY", "-YY", "+iZ", "-iXYZ", "+"] {
        assert_eq!(ps(s).to_string(), s);
        let json = serde_json::to_string(&ps(s)).unwrap();
        assert_eq!(serde_json::from_str::<PauliString>(&json).unwrap(), ps(s));
    }
    assert_eq!(ps("-XY").to_bits_json()["phase"], 2);
    assert!("XQ".parse::<PauliString>().is_err());
}

#[test]
fn generators_on_small_graphs() {
    let t = Graph::triangle();
    assert_eq!(generator(&t, 1).unwrap().to_string(), "+XZZ");
    let p = Graph::path(3);
    assert_eq!(generator(&p, 2).unwrap().to_string(), "+ZXZ");
    let lone = Graph::new([7], []).unwrap();
    assert_eq!(generator(&lone, 7).unwrap().to_string(), "+X");
    assert!(generator(&t, 9).is_err());

    let prod = generator(&t, 1).unwrap().mul(&generator(&t, 2).unwrap());
    let dense_prod = matmul(&dense(&generator(&t, 1).unwrap()), &dense(&generator(&t, 2).unwrap()));
    assert!(close(&dense(&prod), &dense_prod, 1e-12));

    let tab = tableau_from_graph(&t);
    let gens: Vec<String> = tab.generators().iter().map(|g| g.to_string()).collect();
    assert_eq!(gens, ["+XZZ", "+ZXZ", "+ZZX"]);
    assert_eq!(tableau_from_graph(&lone).generators()[0].to_string(), "+X");
    assert_eq!(tableau_from_graph(&inflate(&t, 1).graph).n(), 9);
}

#[test]
fn inflated_generator_examples() {
    // Fig. 3-like graph: power vertex 4 joined to 1 and 3.
    let g = Graph::new([1, 2, 3, 4], [(1, 2), (2, 3), (1, 4), (3, 4)]).unwrap();
    let ig = inflate(&g, 2);
    let f = inflated_generator(&ig, 4).unwrap();
    let idx = |v| ig.graph.index_of(v).unwrap();
    assert_eq!(f.get(idx(4)), Pauli::X);
    assert_eq!(f.get(idx(1)), Pauli::Z);
    assert_eq!(f.get(idx(3)), Pauli::Z);
    for v in [1, 3] {
        let chain = ig.chain_from(4, v);
        assert_eq!(f.get(idx(chain[1])), Pauli::X);
        assert_eq!(f.get(idx(chain[3])), Pauli::X);
        assert_eq!(f.get(idx(chain[0])), Pauli::I);
    }
    assert_eq!(f.weight(), 7);
    assert_eq!(f.sign(), Some(1));

    let d0 = inflate(&g, 0);
    assert_eq!(inflated_generator(&d0, 2).unwrap(), generator(&g, 2).unwrap());

    let tri = inflate(&Graph::triangle(), 1);
    let f1 = inflated_generator(&tri, 1).unwrap();
    assert_eq!(f1.weight(), 5);
    assert!(inflated_generator(&tri, tri.chain_vertices()[0]).is_err());
}

#[test]
fn h_operator_examples() {
    let ig = inflate(&Graph::star(3), 1);
    let all: Vec<u32> = ig.base.neighbors(1).unwrap().iter().copied().collect();
    assert!(h_operator(&ig, 1, &all).unwrap().is_identity_up_to_phase());
    let g1 = generator(&ig.graph, 1).unwrap();
    assert_eq!(h_operator(&ig, 1, &[]).unwrap(), g1.mul(&inflated_generator(&ig, 1).unwrap()));
    let h = h_operator(&ig, 1, &[2]).unwrap();
    let idx = |v| ig.graph.index_of(v).unwrap();
    for leaf in [3, 4] {
        let c = ig.chain_from(1, leaf);
        assert_eq!(h.get(idx(c[0])), Pauli::Z);
        assert_eq!(h.get(idx(c[1])), Pauli::X);
        assert_eq!(h.get(idx(leaf)), Pauli::Z);
    }
    assert_eq!(h.weight(), 6);
}

#[test]
fn tableau_expectations_match_dense() {
    let t = Graph::triangle();
    let tab = tableau_from_graph(&t);
    let psi = graph_state(&t);
    for s in ["+XZZ", "+XII", "-XZZ", "+YYX", "-YYX", "+ZZZ", "+YXY"] {
        let p = ps(s);
        assert!((tab.expectation(&p).unwrap() as f64 - expect(&psi, &p)).abs() < 1e-10, "{s}");
    }
    assert!(tab.expectation(&ps("+iXZZ")).is_err());
    assert!(StabilizerTableau::new(vec![ps("X"), ps("Z")]).is_err());
    assert!(StabilizerTableau::new(vec![ps("XI"), ps("XI")]).is_err());
}

fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(v, k)| {
        let letters: Vec<Pauli> =
            v.into_iter().map(|c| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][c as usize]).collect();
        PauliString::from_paulis(&letters).times_i(k)
    })
}

fn arb_triple() -> impl Strategy<Value = (PauliString, PauliString, PauliString)> {
    (1usize..=6).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn multiply_is_associative_and_phase_exact((a, b, c) in arb_triple()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        if a.n() <= 4 {
            prop_assert!(close(&dense(&a.mul(&b)), &matmul(&dense(&a), &dense(&b)), 1e-12));
        }
    }

    #[test]
    fn commutes_agrees_with_products((a, b, _c) in arb_triple()) {
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        prop_assert_eq!(a.commutes_with(&b), ab == ba);
        prop_assert!(a.commutes_with(&b) || ab == ba.negate());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn commutes_agrees_with_dense((a, b, _c) in (1usize..=4).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))) {
        let comm = close(&matmul(&dense(&a), &dense(&b)), &matmul(&dense(&b), &dense(&a)), 1e-12);
        prop_assert_eq!(a.commutes_with(&b), comm);
    }

    #[test]
    fn inflated_elements_are_stabilizers(seed in 0u64..64, d in 0usize..=3) {
        // small connected graphs by edge mask on 4 vertices
        let all = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
        let edges: Vec<_> = all.iter().enumerate().filter(|(i, _)| seed >> i & 1 == 1).map(|(_, e)| *e).collect();
        let g = Graph::new([1, 2, 3, 4], edges).unwrap();
        let ig = inflate(&g, d);
        let tab = tableau_from_graph(&ig.graph);
        for &u in ig.power() {
            let f = inflated_generator(&ig, u).unwrap();
            for &v in ig.graph.vertices() {
                prop_assert!(f.commutes_with(&generator(&ig.graph, v).unwrap()));
            }
            prop_assert_eq!(tab.expectation(&f).unwrap(), 1);
        }
    }
}
