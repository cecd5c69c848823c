use std::fs;
use std::path::PathBuf;

use inflated_selftest::adversary::{compile, Solution};
use inflated_selftest::commands::*;
use inflated_selftest::experiments::{Anchor, ReKind, ReferenceExperiment};
use inflated_selftest::io::*;
use inflated_selftest::selftest::{BoundKind, BoundParams, OutcomeSelection, Verdict};
use inflated_selftest::{inflate, Graph, InflatedGraph};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn golden_cases() -> Vec<(&'static str, Graph, usize, KindChoice)> {
    vec![
        ("triangle_d1", Graph::triangle(), 1, KindChoice::Auto),
        ("triangle_d2", Graph::triangle(), 2, KindChoice::Auto),
        ("claw_d1", Graph::star(3), 1, KindChoice::Auto),
        ("claw_d2", Graph::star(3), 2, KindChoice::Auto),
        ("pair_d1", Graph::pair(), 1, KindChoice::Auto),
        ("pair_d2", Graph::pair(), 2, KindChoice::Auto),
        ("circle9_re4_d1", Graph::cycle(9), 1, KindChoice::Re4),
    ]
}

/// Set `UPDATE_GOLDEN=1` to rewrite the fixtures after an intended change.
#[test]
fn golden_fixtures_regenerate_byte_identically() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let dir = fixtures();
    let graphs = [
        ("triangle", Graph::triangle()),
        ("claw", Graph::star(3)),
        ("pair", Graph::pair()),
        ("circle9", Graph::cycle(9)),
    ];
    let mut files: Vec<(String, String)> =
        graphs.into_iter().map(|(n, g)| (format!("{n}.graph.json"), to_json(&g))).collect();
    for (name, g, d, kind) in golden_cases() {
        files.push((format!("{name}.re.json"), to_json(&cmd_gen_re(&g, d, kind).unwrap())));
    }
    for (file, text) in files {
        let path = dir.join(&file);
        if update {
            fs::create_dir_all(&dir).unwrap();
            fs::write(&path, &text).unwrap();
        }
        let stored = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{file}: {e} (run with UPDATE_GOLDEN=1)"));
        assert!(stored == text, "{file} differs from the regenerated artifact");
    }
}

#[test]
fn golden_experiments_parse_back_and_validate() {
    for (name, _, d, _) in golden_cases() {
        let text = fs::read_to_string(fixtures().join(format!("{name}.re.json"))).unwrap();
        let re: ReferenceExperiment = from_json(&text).unwrap();
        assert_eq!(re.d, d);
        re.validate().unwrap();
        assert_eq!(to_json(&re), text);
    }
}

fn round_trip<T: Artifact + PartialEq + std::fmt::Debug>(value: &T) {
    let back: T = from_json(&to_json(value)).unwrap();
    assert_eq!(&back, value);
}

#[test]
fn every_artifact_round_trips() {
    let g = Graph::triangle();
    round_trip(&g);
    round_trip(&inflate(&g, 2));
    let re = cmd_gen_re(&g, 1, KindChoice::Auto).unwrap();
    round_trip(&re);
    round_trip(&cmd_simulate(&re, 0.01).unwrap().0);
    round_trip(&cmd_lhv_check(&re, false, 24).unwrap().0);
    let report = cmd_selftest(&re, None, &RunConfig::default()).unwrap();
    round_trip(&report);
    let params = BoundParams { vertices: 9, edges: 9, circle: Some(3), center_degree: Some(3), distance: 4 };
    round_trip(&cmd_bounds(None, params, 1e-4).unwrap());
    let pair = cmd_gen_re(&Graph::pair(), 2, KindChoice::Auto).unwrap();
    round_trip(&pair);
    round_trip(&cmd_simulate(&pair, 0.003).unwrap().0);
    round_trip(&cmd_lhv_check(&pair, false, 24).unwrap().0);
}

#[test]
fn envelope_is_checked() {
    let text = to_json(&Graph::pair());
    assert!(text.contains("\"version\": 1"));
    let v2 = text.replace("\"version\": 1", "\"version\": 2");
    assert!(matches!(from_json::<Graph>(&v2), Err(IoError::UnsupportedVersion { .. })));
    let no_version = text.replace("\"version\": 1,", "");
    assert!(matches!(from_json::<Graph>(&no_version), Err(IoError::NoEnvelope)));
    let stringly = text.replace("\"version\": 1", "\"version\": \"1\"");
    assert!(matches!(from_json::<Graph>(&stringly), Err(IoError::UnsupportedVersion { .. })));
    assert!(matches!(from_json::<InflatedGraph>(&text), Err(IoError::WrongKind { .. })));
    assert!(matches!(from_json::<Graph>(r#"{"vertices":[1],"edges":[]}"#), Err(IoError::NoEnvelope)));
    assert!(matches!(from_json::<Graph>("[1, 2"), Err(IoError::Json(_))));
    // Payload validation still applies inside the envelope.
    let dangling = text.replace("[\n        1,\n        2\n      ]", "[\n        1,\n        7\n      ]");
    assert_ne!(dangling, text);
    assert!(matches!(from_json::<Graph>(&dangling), Err(IoError::Json(_))));
}

#[test]
fn run_config_validation() {
    assert!(RunConfig::default().validate().is_ok());
    for bad in [
        RunConfig { noise: -0.1, ..RunConfig::default() },
        RunConfig { noise: 1.5, ..RunConfig::default() },
        RunConfig { dense_limit: 25, ..RunConfig::default() },
        RunConfig { dense_limit: 0, ..RunConfig::default() },
        RunConfig { epsilon_threshold: f64::NAN, ..RunConfig::default() },
        RunConfig { fidelity_slack: -1.0, ..RunConfig::default() },
        RunConfig { max_vars: 41, ..RunConfig::default() },
    ] {
        assert!(matches!(bad.validate(), Err(CommandError::Invalid(_))), "{bad:?}");
    }
}

#[test]
fn outcome_selection_parsing() {
    assert_eq!(parse_outcomes("all").unwrap(), OutcomeSelection::All);
    assert_eq!(parse_outcomes("seed:7").unwrap(), OutcomeSelection::Seed(7));
    assert_eq!(parse_outcomes("12").unwrap(), OutcomeSelection::Seed(12));
    assert!(parse_outcomes("seed:x").is_err());
    assert!("re9".parse::<KindChoice>().is_err());
    assert_eq!("RE2".parse::<KindChoice>().unwrap(), KindChoice::Re2);
}

#[test]
fn inflate_examples() {
    let ig = cmd_inflate(&Graph::triangle(), 1);
    assert_eq!((ig.graph.n(), ig.graph.edge_count()), (9, 9));
    assert_eq!(cmd_inflate(&Graph::triangle(), 0).graph, Graph::triangle());
}

#[test]
fn gen_re_kind_selection() {
    let kind = |g: &Graph, k| cmd_gen_re(g, 1, k).map(|re| re.kind);
    assert_eq!(kind(&Graph::triangle(), KindChoice::Auto).unwrap(), ReKind::Re1);
    assert_eq!(kind(&Graph::pair(), KindChoice::Auto).unwrap(), ReKind::Re3);
    let re = cmd_gen_re(&Graph::path(3), 1, KindChoice::Auto).unwrap();
    assert_eq!(re.kind, ReKind::Re2);
    assert!(matches!(re.anchor, Anchor::Star { ref leaves, .. } if leaves.len() == 2));
    assert_eq!(kind(&Graph::path(3), KindChoice::Re0).unwrap(), ReKind::Re0);
    assert_eq!(kind(&Graph::path(3), KindChoice::Re3).unwrap(), ReKind::Re3);
    assert_eq!(kind(&Graph::cycle(9), KindChoice::Re4).unwrap(), ReKind::Re4);

    let disconnected = Graph::new([1, 2, 3], [(1, 2)]).unwrap();
    let single = Graph::new([1], []).unwrap();
    for g in [&disconnected, &single] {
        assert!(matches!(cmd_gen_re(g, 1, KindChoice::Auto), Err(CommandError::Experiment(_))));
    }
    assert!(cmd_gen_re(&Graph::pair(), 1, KindChoice::Re1).is_err());
    assert!(cmd_gen_re(&Graph::triangle(), 1, KindChoice::Re0).is_err());
    assert!(cmd_gen_re(&Graph::cycle(7), 1, KindChoice::Re4).is_err());
    assert!(cmd_gen_re(&Graph::path(9), 1, KindChoice::Re4).is_err());
}

#[test]
fn simulate_reproduces_targets_and_shrinks() {
    for (g, d) in [(Graph::triangle(), 1), (Graph::star(3), 1), (Graph::pair(), 2)] {
        let re = cmd_gen_re(&g, d, KindChoice::Auto).unwrap();
        let (ideal, state) = cmd_simulate(&re, 0.0).unwrap();
        assert_eq!(ideal.backend, Backend::Dense);
        assert!(state.is_some());
        let (noisy, _) = cmd_simulate(&re, 0.01).unwrap();
        for (_, s) in re.submeasurements() {
            assert!((ideal.values[&s.label] - s.target).abs() < 1e-12, "{}", s.label);
            // Every factor of the measured product is traceless.
            let shrunk = s.target * 0.99f64.powi(s.support.len() as i32);
            assert!((noisy.values[&s.label] - shrunk).abs() < 1e-12, "{}", s.label);
        }
    }
    assert!(cmd_simulate(&cmd_gen_re(&Graph::pair(), 1, KindChoice::Auto).unwrap(), 1.5).is_err());
}

#[test]
fn simulate_uses_tableau_above_dense_limit() {
    let re = cmd_gen_honeycomb(6, 10, 1).unwrap();
    assert_eq!(re.kind, ReKind::Re5);
    let (c, state) = cmd_simulate(&re, 0.0).unwrap();
    assert_eq!(c.backend, Backend::Tableau);
    assert!(state.is_none());
    for (_, s) in re.submeasurements() {
        assert_eq!(c.values[&s.label], s.target);
    }
}

#[test]
fn lhv_check_verdicts() {
    let tri = cmd_gen_re(&Graph::triangle(), 1, KindChoice::Auto).unwrap();
    let (r, sys) = cmd_lhv_check(&tri, false, 24).unwrap();
    assert_eq!(r.verdict, LhvVerdict::Infeasible);
    assert!(r.nonlocal);
    let Solution::Infeasible { certificate } = &r.solution else { panic!() };
    assert!(sys.check_certificate(certificate));
    assert_eq!(r.certificate_labels.len(), certificate.len());
    let e = r.enumeration.unwrap();
    assert!(!e.feasible && e.best_fraction < 1.0);

    let (g, _) = cmd_lhv_check(&tri, true, 24).unwrap();
    assert_eq!(g.verdict, LhvVerdict::Feasible);
    assert!(!g.nonlocal);
    assert_eq!(g.constraints, 3);

    let pair = cmd_gen_re(&Graph::pair(), 1, KindChoice::Auto).unwrap();
    let (p, _) = cmd_lhv_check(&pair, false, 24).unwrap();
    assert_eq!(p.verdict, LhvVerdict::ParityInconclusive);
    let e = p.enumeration.unwrap();
    assert!(e.classical_value < e.quantum_value);
    assert!(p.nonlocal);

    // A tiny variable budget skips the search but keeps the GF(2) verdict.
    let (s, _) = cmd_lhv_check(&tri, false, 2).unwrap();
    assert!(s.enumeration.is_none() && s.enumeration_skipped.is_some());
    assert_eq!(s.verdict, LhvVerdict::Infeasible);
    assert_eq!(compile(&tri).unwrap().constraints.len(), 10);
}

#[test]
fn selftest_examples() {
    let re = cmd_gen_re(&Graph::triangle(), 1, KindChoice::Auto).unwrap();
    let ideal = cmd_selftest(&re, None, &RunConfig::default()).unwrap();
    assert_eq!((ideal.epsilon, ideal.delta_measured, ideal.verdict), (0.0, Some(0.0), Verdict::Pass));

    let all = RunConfig { outcomes: OutcomeSelection::All, ..RunConfig::default() };
    let report = cmd_selftest(&re, None, &all).unwrap();
    assert_eq!(report.branches.len(), 64);
    assert!(report.branches.iter().all(|b| (b.fidelity - 1.0).abs() < 1e-9));

    let (corr, _) = cmd_simulate(&re, 0.01).unwrap();
    let noisy = RunConfig { noise: 0.01, ..RunConfig::default() };
    let report = cmd_selftest(&re, Some(&corr), &noisy).unwrap();
    assert!(report.epsilon > 0.0);
    assert!(report.delta_measured.unwrap() <= report.delta_bound.unwrap());
    assert_eq!(report.verdict, Verdict::Fail);

    let loose = RunConfig { epsilon_threshold: 0.1, fidelity_slack: 0.1, ..noisy };
    assert_eq!(cmd_selftest(&re, Some(&corr), &loose).unwrap().verdict, Verdict::Pass);

    let other = cmd_simulate(&cmd_gen_re(&Graph::pair(), 1, KindChoice::Auto).unwrap(), 0.0).unwrap().0;
    assert!(matches!(cmd_selftest(&re, Some(&other), &RunConfig::default()), Err(CommandError::Invalid(_))));
}

#[test]
fn bounds_examples() {
    let params = BoundParams { vertices: 3, edges: 2, circle: Some(3), center_degree: Some(2), distance: 1 };
    let t = cmd_bounds(Some(BoundKind::Re0), params, 1e-4).unwrap();
    assert!((t.rows[0].table - 1.26).abs() < 1e-12);
    let zero = cmd_bounds(None, params, 0.0).unwrap();
    assert_eq!(zero.rows.len(), 5);
    assert!(zero.rows.iter().all(|b| b.table == 0.0 && b.general == 0.0));
    // The general bound grows with the listed constant c.
    let mut rows = cmd_bounds(None, params, 1e-4).unwrap().rows;
    rows.sort_by(|a, b| a.c.total_cmp(&b.c));
    assert!(rows.windows(2).all(|w| w[0].general <= w[1].general));

    let missing = BoundParams { circle: None, ..params };
    assert!(cmd_bounds(Some(BoundKind::Re1), missing, 1e-4).is_err());
    assert!(cmd_bounds(None, params, -1.0).is_err());

    let re = cmd_gen_re(&Graph::pair(), 1, KindChoice::Auto).unwrap();
    let row = cmd_bounds_for(&re, 1e-6).unwrap();
    assert_eq!(row.rows[0].kind, BoundKind::Re3);
    assert!((row.rows[0].c - (8.0 * 2f64.sqrt()).sqrt() * (1.0 + 2f64.sqrt())).abs() < 1e-12);
}
