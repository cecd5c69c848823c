use inflated_selftest::adversary::*;
use inflated_selftest::experiments::*;
use inflated_selftest::{inflate, Graph};
use proptest::prelude::*;

fn toy(nv: usize, constraints: &[(&[usize], bool)]) -> ParitySystem {
    ParitySystem {
        variables: (0..nv).map(|i| ViewToken { vertex: i as u32 + 1, own: Basis::X, around: vec![] }).collect(),
        constraints: constraints
            .iter()
            .enumerate()
            .map(|(i, (vars, parity))| Constraint { label: format!("c{i}"), vars: vars.to_vec(), parity: *parity })
            .collect(),
    }
}

fn infeasible(sys: &ParitySystem) -> bool {
    matches!(solve_gf2(sys), Solution::Infeasible { .. })
}

fn triangle_re1(d: usize) -> ReferenceExperiment {
    build_re1(&inflate(&Graph::triangle(), d), &[1, 2, 3]).unwrap()
}

#[test]
fn triangle_d1_constraint_count() {
    let sys = compile(&triangle_re1(1)).unwrap();
    assert_eq!(sys.constraints.len(), 10);
    let f = sys.constraints.iter().filter(|c| c.label.starts_with("f_")).count();
    let cw = sys.constraints.iter().filter(|c| c.label.starts_with("C_") && c.label != "C_Vc").count();
    assert_eq!((f, cw), (3, 6));
    // Shared views: fewer variables than total support size.
    let occurrences: usize = sys.constraints.iter().map(|c| c.vars.len()).sum();
    assert!(sys.variables.len() < occurrences);
}

#[test]
fn contradictory_pair() {
    let sys = toy(1, &[(&[0], false), (&[0], true)]);
    assert_eq!(solve_gf2(&sys), Solution::Infeasible { certificate: vec![0, 1] });
    let e = enumerate_system(&sys, 24).unwrap();
    assert!(!e.feasible);
    assert_eq!(e.best_satisfied, 1);
    assert_eq!(e.best_fraction, 0.5);
}

#[test]
fn generators_only_is_feasible() {
    let sys = compile(&triangle_re1(1)).unwrap().restrict(|c| c.label.starts_with("f_"));
    assert_eq!(sys.constraints.len(), 3);
    match solve_gf2(&sys) {
        Solution::Feasible { assignment } => assert!(assignment.iter().all(|b| !b)),
        other => panic!("{other:?}"),
    }
    let e = enumerate_system(&sys, 24).unwrap();
    assert!(e.feasible);
    assert_eq!(e.best_fraction, 1.0);
}

#[test]
fn one_variable_toy_matches_hand_count() {
    // x = 1, x = 1, x = 0: best is two of three.
    let sys = toy(1, &[(&[0], true), (&[0], true), (&[0], false)]);
    assert!(infeasible(&sys));
    // Three terms share one variable, so nothing is peeled.
    let e = enumerate_system(&sys, 24).unwrap();
    assert_eq!((e.best_satisfied, e.peeled, e.free_variables), (2, 0, 1));
    assert_eq!(e.classical_value, 1.0);
    assert_eq!(e.quantum_value, 3.0);
}

#[test]
fn minimal_instances_are_infeasible() {
    let mut res = vec![build_re0(&Graph::path(3), (1, 2, 3)).unwrap()];
    for d in 0..=2 {
        res.push(triangle_re1(d));
        res.push(build_re2(&inflate(&Graph::star(3), d), 1, &[2, 3, 4]).unwrap());
        res.push(build_re2(&inflate(&Graph::star(2), d), 1, &[2, 3]).unwrap());
    }
    res.push(build_re4_circle(3, 0).unwrap());
    res.push(build_re4_circle(9, 1).unwrap());
    for re in &res {
        let sys = compile(re).unwrap();
        match solve_gf2(&sys) {
            Solution::Infeasible { certificate } => assert!(sys.check_certificate(&certificate)),
            other => panic!("{} d={}: {other:?}", re.kind, re.d),
        }
    }
}

#[test]
fn honeycomb_is_infeasible() {
    let re = build_re5_honeycomb(6, 10, 1).unwrap();
    let sys = compile(&re).unwrap();
    assert!(infeasible(&sys));
}

#[test]
fn exhaustive_agrees_on_small_experiments() {
    let res = [
        build_re0(&Graph::path(3), (1, 2, 3)).unwrap(),
        triangle_re1(0),
        triangle_re1(1),
        build_re2(&inflate(&Graph::star(3), 1), 1, &[2, 3, 4]).unwrap(),
        build_re2(&inflate(&Graph::star(2), 1), 1, &[2, 3]).unwrap(),
        build_re4_circle(3, 0).unwrap(),
    ];
    for re in &res {
        let e = enumerate(re, DEFAULT_MAX_VARS).unwrap();
        assert!(!e.feasible, "{}", re.kind);
        assert!(e.best_fraction < 1.0);
        assert_eq!(e.constraints, compile(re).unwrap().constraints.len());
    }
}

#[test]
fn vertex_pair_is_parity_inconclusive() {
    for d in 1..=3 {
        let re = build_re3(&inflate(&Graph::pair(), d), 1, 2).unwrap();
        let sys = compile(&re).unwrap();
        assert!(sys.constraints.iter().all(|c| c.label.starts_with("f_") || c.label.starts_with("P_")));
        assert!(!infeasible(&sys), "d={d}");
        // The 1/√2 terms still separate classical from quantum.
        let e = enumerate(&re, DEFAULT_MAX_VARS).unwrap();
        assert!(e.feasible);
        assert!(e.classical_value < e.quantum_value - 0.5, "{e:?}");
        assert!((e.classical_value - (2.0 + 2f64.sqrt())).abs() < 1e-9, "{e:?}");
    }
}

#[test]
fn too_many_variables_is_an_error() {
    let re = build_re5_honeycomb(6, 10, 1).unwrap();
    assert!(matches!(enumerate(&re, DEFAULT_MAX_VARS), Err(AdversaryError::TooManyVariables { .. })));
}

#[test]
fn dimacs_export() {
    let sys = toy(2, &[(&[0, 1], false), (&[1], true), (&[], false)]);
    let text = sys.to_dimacs_xor();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('c')).collect();
    assert_eq!(lines, ["p cnf 2 3", "x-1 2 0", "x2 0", "x1 -1 0"]);
    assert!(text.contains("c var 1 1:X"));
}

#[test]
fn equivalent_views_are_merged() {
    // x0 and x1 always occur together: only their XOR matters.
    let sys = toy(3, &[(&[0, 1], true), (&[0, 1, 2], false), (&[2], true)]);
    let e = enumerate_system(&sys, 24).unwrap();
    assert_eq!((e.merged, e.free_variables), (1, 2));
    assert!(e.feasible);
    let e = enumerate(&triangle_re1(1), DEFAULT_MAX_VARS).unwrap();
    assert!(e.free_variables <= DEFAULT_MAX_VARS);
}

#[test]
fn solution_json_is_tagged() {
    let s = serde_json::to_value(Solution::Infeasible { certificate: vec![0, 1] }).unwrap();
    assert_eq!(s["verdict"], "infeasible");
}

fn arb_system() -> impl Strategy<Value = ParitySystem> {
    (1usize..=10).prop_flat_map(|nv| {
        prop::collection::vec((prop::collection::btree_set(0..nv, 0..=3), any::<bool>()), 0..14).prop_map(move |cs| {
            let owned: Vec<(Vec<usize>, bool)> = cs.into_iter().map(|(s, p)| (s.into_iter().collect(), p)).collect();
            let refs: Vec<(&[usize], bool)> = owned.iter().map(|(v, p)| (v.as_slice(), *p)).collect();
            toy(nv, &refs)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn solver_and_enumeration_agree(sys in arb_system()) {
        let e = enumerate_system(&sys, DEFAULT_MAX_VARS).unwrap();
        match solve_gf2(&sys) {
            Solution::Feasible { assignment } => {
                prop_assert!(e.feasible);
                prop_assert!(sys.check_assignment(&assignment));
            }
            Solution::Infeasible { certificate } => {
                prop_assert!(!e.feasible);
                prop_assert!(sys.check_certificate(&certificate));
            }
        }
    }

    #[test]
    fn adding_constraints_keeps_infeasibility(sys in arb_system(), extra in prop::collection::vec((0usize..10, any::<bool>()), 1..4)) {
        let mut bigger = sys.clone();
        let nv = sys.variables.len();
        for (i, (v, p)) in extra.into_iter().enumerate() {
            bigger.constraints.push(Constraint { label: format!("e{i}"), vars: vec![v % nv], parity: p });
        }
        if infeasible(&sys) {
            prop_assert!(infeasible(&bigger));
        }
    }
}
