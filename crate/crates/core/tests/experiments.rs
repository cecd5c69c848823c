mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;

use common::*;
use inflated_selftest::experiments::*;
use inflated_selftest::pauli::{Pauli, PauliString};
use inflated_selftest::{inflate, Graph, InflatedGraph};

fn small_experiments() -> Vec<ReferenceExperiment> {
    let mut out = vec![
        build_re0(&Graph::path(3), (1, 2, 3)).unwrap(),
        build_re0(&Graph::path(4), (1, 2, 3)).unwrap(),
        build_re0(&Graph::star(3), (2, 1, 3)).unwrap(),
        build_re1(&inflate(&Graph::triangle(), 1), &[1, 2, 3]).unwrap(),
        build_re1(&inflate(&Graph::cycle(5), 0), &[1, 2, 3, 4, 5]).unwrap(),
        build_re2(&inflate(&Graph::star(3), 1), 1, &[2, 3, 4]).unwrap(),
        build_re2(&inflate(&Graph::star(2), 1), 1, &[2, 3]).unwrap(),
        build_re2(&inflate(&Graph::star(2), 2), 1, &[2, 3]).unwrap(),
        build_re3(&inflate(&Graph::path(3), 1), 1, 2).unwrap(),
        build_re4_circle(9, 1).unwrap(),
    ];
    for d in 1..=4 {
        out.push(build_re3(&inflate(&Graph::pair(), d), 1, 2).unwrap());
    }
    out
}

/// Expectation of a measurement's submeasurement on the dense graph state,
/// expanding `Rz = (X + Y)/√2` by linearity.
fn dense_value(psi: &[C], g: &Graph, m: &Measurement, s: &Submeasurement) -> f64 {
    let mut terms = vec![(1.0, Vec::new())];
    for &v in &s.support {
        let choices: Vec<(f64, Pauli)> = match m.basis(v) {
            Basis::X => vec![(1.0, Pauli::X)],
            Basis::Y => vec![(1.0, Pauli::Y)],
            Basis::Z => vec![(1.0, Pauli::Z)],
            Basis::Rz => vec![(FRAC_1_SQRT_2, Pauli::X), (FRAC_1_SQRT_2, Pauli::Y)],
        };
        terms = terms
            .into_iter()
            .flat_map(|(w, ops): (f64, Vec<(u32, Pauli)>)| {
                choices.iter().map(move |&(cw, p)| {
                    let mut ops = ops.clone();
                    ops.push((v, p));
                    (w * cw, ops)
                })
            })
            .collect();
    }
    terms
        .into_iter()
        .map(|(w, ops)| w * expect(psi, &PauliString::on_graph(g, &ops).unwrap()))
        .sum()
}

#[test]
fn experiments_validate() {
    for re in small_experiments() {
        re.validate().unwrap_or_else(|e| panic!("{} d={}: {e}", re.kind, re.d));
    }
}

#[test]
fn measurements_are_the_stated_products() {
    for re in small_experiments() {
        for (m, s) in re.submeasurements() {
            assert_eq!(s.product_sign, 1, "{} {} {}", re.kind, m.label, s.label);
        }
    }
}

#[test]
fn dense_state_agrees_with_stored_targets() {
    for re in small_experiments().into_iter().filter(|re| re.graph.n() <= 12) {
        let psi = graph_state(&re.graph);
        for (m, s) in re.submeasurements() {
            let v = dense_value(&psi, &re.graph, m, s);
            assert!((v - s.target).abs() < 1e-9, "{} {}: dense {v} stored {}", re.kind, s.label, s.target);
        }
    }
}

fn targets(re: &ReferenceExperiment) -> BTreeMap<String, f64> {
    re.submeasurements().map(|(_, s)| (s.label.clone(), s.target)).collect()
}

#[test]
fn odd_cycle_targets() {
    let t = targets(&build_re1(&inflate(&Graph::triangle(), 1), &[1, 2, 3]).unwrap());
    assert_eq!(t.len(), 10);
    for u in 1..=3 {
        assert_eq!(t[&format!("f_{u}")], 1.0);
        assert_eq!(t[&format!("C_{u}^X")], 1.0);
        assert_eq!(t[&format!("C_{u}^Z")], 1.0);
    }
    assert_eq!(t["C_Vc"], -1.0);
}

#[test]
fn star_targets() {
    let t = targets(&build_re2(&inflate(&Graph::star(3), 2), 1, &[2, 3, 4]).unwrap());
    assert_eq!(t["f~_1"], 1.0);
    for c in ["C_2,3", "C_2,4", "C_3,4"] {
        assert_eq!(t[c], -1.0);
    }
    let t = targets(&build_re2(&inflate(&Graph::star(2), 1), 1, &[2, 3]).unwrap());
    assert_eq!((t["C_2"], t["C_3"], t["C_1"], t["C_2^X"], t["C_2^Y"]), (1.0, 1.0, -1.0, 1.0, 1.0));
}

#[test]
fn star_uses_y_next_to_the_centre() {
    let ig = inflate(&Graph::star(3), 1);
    let re = build_re2(&ig, 1, &[2, 3, 4]).unwrap();
    let nn = ig.graph.neighbors(1).unwrap();
    let (m, _) = re.find("f~_1").unwrap();
    for v in nn {
        assert_eq!(m.settings[v], Setting::Marginal(Basis::Y));
    }
    let (m, _) = re.find("f_2").unwrap();
    assert!(m.settings.values().all(|s| s.basis() == Basis::X || !s.is_marginal()));
}

/// Map exchanging the two arms of an inflated two-leaf star.
fn swap_arms(ig: &InflatedGraph) -> BTreeMap<u32, u32> {
    let mut map: BTreeMap<u32, u32> = ig.graph.vertices().iter().map(|&v| (v, v)).collect();
    map.insert(2, 3);
    map.insert(3, 2);
    for (a, b) in ig.chain_from(1, 2).into_iter().zip(ig.chain_from(1, 3)) {
        map.insert(a, b);
        map.insert(b, a);
    }
    map
}

#[test]
fn two_leaf_correlators_are_mirror_images() {
    for d in 1..=3 {
        let ig = inflate(&Graph::star(2), d);
        let re = build_re2(&ig, 1, &[2, 3]).unwrap();
        let map = swap_arms(&ig);
        let (m2, s2) = re.find("C_2").unwrap();
        let (m3, s3) = re.find("C_3").unwrap();
        let mirrored: BTreeSet<u32> = s2.support.iter().map(|v| map[v]).collect();
        assert_eq!(mirrored, s3.support, "d={d}");
        for v in &s2.support {
            assert_eq!(m2.basis(*v), m3.basis(map[v]), "d={d} vertex {v}");
        }
    }
}

#[test]
fn pair_targets() {
    for d in 1..=4 {
        let t = targets(&build_re3(&inflate(&Graph::pair(), d), 1, 2).unwrap());
        let s = if d % 2 == 0 { 1.0 } else { -1.0 };
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(t["I_1"], -s * FRAC_1_SQRT_2), "d={d}");
        assert!(close(t["I_2"], s * FRAC_1_SQRT_2), "d={d}");
        assert!(close(t["I_3"], FRAC_1_SQRT_2), "d={d}");
        assert!(close(t["I_4"], FRAC_1_SQRT_2), "d={d}");
        assert_eq!(t["P_1"], -s, "d={d}");
        assert_eq!(t["P_2"], s, "d={d}");
    }
}

#[test]
fn pair_uses_y_next_to_the_middle_vertex() {
    let ig = inflate(&Graph::pair(), 2);
    let re = build_re3(&ig, 1, 2).unwrap();
    let chain = ig.chain_from(1, 2);
    let vm = chain[1];
    assert_eq!(re.anchor, Anchor::Pair { vl: 1, vr: 2, vm });
    for m in &re.measurements {
        assert_eq!(m.basis(chain[0]), Basis::Y, "{}", m.label);
        assert_eq!(m.basis(chain[2]), Basis::Y, "{}", m.label);
    }
    assert!(re.pair_only);
    assert_eq!(re.deflation_settings[&chain[0]], Basis::Y);
    assert_eq!(re.deflation_settings[&chain[1]], Basis::X);
    assert_eq!(re.deflation_settings[&chain[2]], Basis::Y);
    assert_eq!(re.deflation_settings[&chain[3]], Basis::X);

    let re = build_re3(&inflate(&Graph::path(3), 2), 1, 2).unwrap();
    assert!(!re.pair_only);
    assert!(re.deflation_settings.values().all(|&b| b == Basis::X));
}

#[test]
fn line_of_three_measurements() {
    let re = build_re0(&Graph::path(3), (1, 2, 3)).unwrap();
    let (m, s) = re.find("M_2").unwrap();
    assert_eq!(s.target, -1.0);
    assert_eq!([m.basis(1), m.basis(2), m.basis(3)], [Basis::Y, Basis::X, Basis::Y]);
    let (m, _) = re.find("M_1").unwrap();
    assert_eq!([m.basis(1), m.basis(2), m.basis(3)], [Basis::Y, Basis::Y, Basis::Z]);
    assert_eq!(re0_target_graph(&Graph::path(3), 2), Graph::path(3));
    // Edges inside N(v_c) are removed.
    let g = Graph::new(1..=4, [(1, 2), (2, 3), (2, 4), (3, 4)]).unwrap();
    assert_eq!(re0_target_graph(&g, 2).edge_count(), 3);
    assert!(build_re0(&Graph::triangle(), (1, 2, 3)).is_err());
}

#[test]
fn auto_selection_precedence() {
    let kind = |g: &Graph, d| build_auto(g, d).unwrap().kind;
    assert_eq!(kind(&Graph::triangle(), 1), ReKind::Re1);
    assert_eq!(kind(&Graph::cycle(5), 0), ReKind::Re1);
    assert_eq!(kind(&Graph::star(3), 1), ReKind::Re2);
    assert_eq!(kind(&Graph::path(3), 1), ReKind::Re2);
    assert_eq!(kind(&Graph::pair(), 2), ReKind::Re3);
    let disconnected = Graph::new(1..=3, [(1, 2)]).unwrap();
    assert!(matches!(build_auto(&disconnected, 1), Err(ExperimentError::NoApplicableSubgraph(_))));
}

#[test]
fn circle_experiment_shape() {
    assert!(matches!(build_re4_circle(10, 1), Err(ExperimentError::CircleLength { expected: 9, got: 10 })));
    for d in 0..=2 {
        let n = 6 * d + 3;
        let re = build_re4_circle(n, d).unwrap();
        re.validate().unwrap();
        // 2d+1 odd-cycle blocks of 10 plus three measurements per vertex.
        assert_eq!(re.submeasurements().count(), (2 * d + 1) * 10 + 3 * n);
        for (_, s) in re.submeasurements() {
            assert_eq!(s.product_sign, 1);
            assert_eq!(s.target.abs(), 1.0);
        }
    }
}

#[test]
fn honeycomb_torus_is_cubic_and_bipartite() {
    let g = honeycomb_torus(6, 10).unwrap();
    assert_eq!(g.n(), 60);
    assert_eq!(g.edge_count(), 90);
    assert!(g.vertices().iter().all(|&v| g.degree(v) == 3));
    assert!(g.find_odd_cycle().is_none());
    assert!(honeycomb_torus(5, 10).is_err());
}

#[test]
fn tripoint_star_is_an_induced_inflated_claw() {
    let star = tripoint_star(6, 10, 1, 1).unwrap();
    assert_eq!(star.base.n(), 4);
    assert_eq!(star.base.degree(1), 3);
    let dist = star.graph.distances(1).unwrap();
    for &leaf in star.base.neighbors(1).unwrap() {
        assert_eq!(dist[&leaf], 3);
    }
}

#[test]
fn honeycomb_experiment() {
    assert!(matches!(build_re5_honeycomb(6, 8, 1), Err(ExperimentError::TorusTooSmall { .. })));
    let re = build_re5_honeycomb(6, 10, 1).unwrap();
    re.validate().unwrap();
    let (m, _) = re.find("Malt1:g_1").unwrap();
    // 30 vertices per sublattice, each with g_v and f_v.
    assert_eq!(m.submeasurements.len(), 60);
    for (_, s) in re.submeasurements() {
        assert_eq!(s.product_sign, 1, "{}", s.label);
        assert_eq!(s.target.abs(), 1.0, "{}", s.label);
    }
    // Off-star vertices next to an on-star X read Z.
    let star = re.inflation.as_ref().unwrap();
    let on_star: BTreeSet<u32> = star.power().iter().copied().chain(star.chain_vertices()).collect();
    let (m, _) = re.find("f_1").unwrap();
    for &v in re.graph.vertices() {
        if on_star.contains(&v) {
            continue;
        }
        let next_to_x = re.graph.neighbors(v).unwrap().iter().any(|w| on_star.contains(w) && m.basis(*w) == Basis::X);
        if next_to_x {
            assert_eq!(m.basis(v), Basis::Z, "vertex {v}");
        }
    }
}

#[test]
fn views_follow_communication_distance() {
    let re = build_re0(&Graph::path(3), (1, 2, 3)).unwrap();
    let (m, _) = re.find("M_2").unwrap();
    let view = input_view(&re, m, 1).unwrap();
    assert!(view.around.is_empty());
    assert_eq!(view.to_string(), "1:Y");

    let re = build_re1(&inflate(&Graph::triangle(), 1), &[1, 2, 3]).unwrap();
    let (mx, _) = re.find("C_1^X").unwrap();
    let (mz, _) = re.find("C_1^Z").unwrap();
    // The marginal input at vertex 1 is only seen by its chain neighbours.
    for &v in re.graph.vertices() {
        let differs = input_view(&re, mx, v).unwrap() != input_view(&re, mz, v).unwrap();
        let near = v == 1 || re.graph.has_edge(1, v);
        assert_eq!(differs, near, "vertex {v}");
    }
}

#[test]
fn experiment_json_roundtrip() {
    for re in small_experiments() {
        let json = serde_json::to_string(&re).unwrap();
        let back: ReferenceExperiment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, re);
    }
}
