use std::collections::{BTreeMap, BTreeSet};

use super::{Anchor, Basis, Builder, ExperimentError, ReKind, ReferenceExperiment};
use crate::graph::{canonical, inflate, Graph, InflatedGraph, Vertex};
use crate::pauli::{generator, h_operator, inflated_generator, PauliString};

type Bases = BTreeMap<Vertex, Basis>;

fn pad_x(_: Vertex, _: &Bases) -> Basis {
    Basis::X
}

fn product(ops: &[PauliString]) -> PauliString {
    ops.iter().skip(1).fold(ops[0].clone(), |acc, p| acc.mul(p))
}

/// Graph carried by the ancillas after the line-of-three isometry: the
/// edges inside `N(v_c)` are dropped, all others kept.
pub fn re0_target_graph(g: &Graph, vc: Vertex) -> Graph {
    let n = g.neighbors(vc).expect("centre in graph");
    let edges: Vec<_> = g.edges().filter(|(a, b)| !(n.contains(a) && n.contains(b))).collect();
    Graph::new(g.vertices().to_vec(), edges).expect("subgraph")
}

/// Line of three vertices on the bare graph (no communication).
pub fn build_re0(g: &Graph, line: (Vertex, Vertex, Vertex)) -> Result<ReferenceExperiment, ExperimentError> {
    let (vl, vc, vr) = line;
    if !(g.has_edge(vl, vc) && g.has_edge(vc, vr)) || g.has_edge(vl, vr) || vl == vr {
        return Err(ExperimentError::NotALine(line));
    }
    let mut b = Builder::new(g);
    for &u in g.vertices() {
        b.single(&format!("g_{u}"), &generator(g, u)?, pad_x)?;
    }
    let gc = generator(g, vc)?;
    for &v in g.neighbors(vc)? {
        b.single(&format!("M_{v}"), &gc.mul(&generator(g, v)?), pad_x)?;
    }
    let mc = product(&[generator(g, vl)?, gc.clone(), generator(g, vr)?]).negate();
    b.single(&format!("M_{vc}"), &mc, pad_x)?;
    Ok(ReferenceExperiment {
        kind: ReKind::Re0,
        d: 0,
        graph: g.clone(),
        inflation: None,
        anchor: Anchor::Line { vl, vc, vr },
        measurements: b.measurements,
        deflation_settings: BTreeMap::new(),
        pair_only: false,
    })
}

fn x_deflation(ig: &InflatedGraph) -> BTreeMap<Vertex, Basis> {
    ig.chain_vertices().into_iter().map(|v| (v, Basis::X)).collect()
}

fn check_odd_cycle(g: &Graph, cycle: &[Vertex]) -> Result<(), ExperimentError> {
    let bad = || ExperimentError::BadCycle(cycle.to_vec());
    let set: BTreeSet<Vertex> = cycle.iter().copied().collect();
    if cycle.len() < 3 || cycle.len() % 2 == 0 || set.len() != cycle.len() {
        return Err(bad());
    }
    for (i, &a) in cycle.iter().enumerate() {
        for (j, &b) in cycle.iter().enumerate().skip(i + 1) {
            let adjacent = j == i + 1 || (i == 0 && j == cycle.len() - 1);
            if g.has_edge(a, b) != adjacent {
                return Err(bad());
            }
        }
    }
    Ok(())
}

/// Odd-cycle measurements on `ig`, labelled with `prefix`.
pub(crate) fn add_re1(b: &mut Builder, ig: &InflatedGraph, cycle: &[Vertex], prefix: &str) -> Result<(), ExperimentError> {
    check_odd_cycle(&ig.base, cycle)?;
    let f: BTreeMap<Vertex, PauliString> =
        ig.power().iter().map(|&u| Ok((u, inflated_generator(ig, u)?))).collect::<Result<_, ExperimentError>>()?;
    for &u in ig.power() {
        b.single(&format!("{prefix}f_{u}"), &f[&u], pad_x)?;
    }
    let all: Vec<PauliString> = cycle.iter().map(|v| f[v].clone()).collect();
    b.single(&format!("{prefix}C_Vc"), &product(&all).negate(), pad_x)?;
    for &w in cycle {
        let mut ops = vec![h_operator(ig, w, cycle)?];
        ops.extend(cycle.iter().filter(|&&v| v != w).map(|v| f[v].clone()));
        let c = product(&ops);
        for (tag, basis) in [("X", Basis::X), ("Z", Basis::Z)] {
            b.single(&format!("{prefix}C_{w}^{tag}"), &c, |v, _| if v == w { basis } else { Basis::X })?;
        }
    }
    Ok(())
}

/// Odd induced cycle of the base graph.
pub fn build_re1(ig: &InflatedGraph, cycle: &[Vertex]) -> Result<ReferenceExperiment, ExperimentError> {
    let mut b = Builder::new(&ig.graph);
    add_re1(&mut b, ig, cycle, "")?;
    Ok(ReferenceExperiment {
        kind: ReKind::Re1,
        d: ig.d,
        graph: ig.graph.clone(),
        inflation: Some(ig.clone()),
        anchor: Anchor::OddCycle { cycle: cycle.to_vec() },
        measurements: b.measurements,
        deflation_settings: x_deflation(ig),
        pair_only: false,
    })
}

/// Star measurements on `ig` (which may be embedded in a larger host);
/// `pad` chooses marginal inputs given whether the measurement asks the
/// nearest neighbours of the centre for `Y`.
pub(crate) fn add_re2(
    b: &mut Builder,
    ig: &InflatedGraph,
    center: Vertex,
    leaves: &[Vertex],
    pad: &dyn Fn(Vertex, &Bases, bool) -> Basis,
) -> Result<(), ExperimentError> {
    let bad = |m: &str| ExperimentError::BadStar(m.to_string());
    if leaves.len() < 2 {
        return Err(bad("fewer than two leaves"));
    }
    for (i, &a) in leaves.iter().enumerate() {
        if !ig.base.has_edge(center, a) {
            return Err(bad(&format!("{a} is not a neighbour of {center}")));
        }
        for &c in &leaves[i + 1..] {
            if ig.base.has_edge(a, c) || a == c {
                return Err(bad(&format!("leaves {a} and {c} are adjacent")));
            }
        }
    }
    let f = |u: Vertex| inflated_generator(ig, u);
    let gc = generator(&ig.graph, center)?;
    for &u in ig.power() {
        b.single(&format!("f_{u}"), &f(u)?, |v, l| pad(v, l, false))?;
    }
    let ypad = |v: Vertex, l: &Bases| pad(v, l, true);
    b.single(&format!("f~_{center}"), &f(center)?, ypad)?;
    if leaves.len() >= 3 {
        let v3 = &leaves[..3];
        for (i, &vi) in v3.iter().enumerate() {
            for &vj in &v3[i + 1..] {
                let c = product(&[gc.clone(), f(vi)?, f(vj)?, h_operator(ig, center, &[vi, vj])?]).negate();
                b.single(&format!("C_{vi},{vj}"), &c, ypad)?;
            }
        }
    } else {
        let (v1, v2) = (leaves[0], leaves[1]);
        let c1 = product(&[gc.clone(), f(v1)?, h_operator(ig, center, &[v1])?]);
        let c2 = product(&[gc.clone(), h_operator(ig, center, &[v2])?, f(v2)?]);
        let cc = product(&[gc.clone(), f(v1)?, f(v2)?]).negate();
        let c22 = product(&[f(v1)?, f(v2)?, h_operator(ig, center, &[])?]);
        b.single(&format!("C_{v1}"), &c1, ypad)?;
        b.single(&format!("C_{v2}"), &c2, ypad)?;
        b.single(&format!("C_{center}"), &cc, ypad)?;
        for (tag, basis) in [("X", Basis::X), ("Y", Basis::Y)] {
            b.single(&format!("C_2^{tag}"), &c22, |v, l| if v == center { basis } else { pad(v, l, true) })?;
        }
    }
    Ok(())
}

/// Induced star: three leaves give the pairwise paradox, two leaves the
/// two-leaf variant.
pub fn build_re2(ig: &InflatedGraph, center: Vertex, leaves: &[Vertex]) -> Result<ReferenceExperiment, ExperimentError> {
    let used: Vec<Vertex> = leaves.iter().copied().take(3).collect();
    let nn: BTreeSet<Vertex> = ig.graph.neighbors(center)?.clone();
    let mut b = Builder::new(&ig.graph);
    add_re2(&mut b, ig, center, &used, &|v, _, y| if y && nn.contains(&v) { Basis::Y } else { Basis::X })?;
    Ok(ReferenceExperiment {
        kind: ReKind::Re2,
        d: ig.d,
        graph: ig.graph.clone(),
        inflation: Some(ig.clone()),
        anchor: Anchor::Star { center, leaves: used },
        measurements: b.measurements,
        deflation_settings: x_deflation(ig),
        pair_only: false,
    })
}

/// Vertex pair `(v_l, v_r)` with the CHSH-like correlators around the
/// middle chain vertex `v_m`.
pub fn build_re3(ig: &InflatedGraph, vl: Vertex, vr: Vertex) -> Result<ReferenceExperiment, ExperimentError> {
    if !ig.base.has_edge(vl, vr) {
        return Err(ExperimentError::NotAnEdge(vl, vr));
    }
    let d = ig.d;
    if d == 0 {
        return Err(ExperimentError::NoApplicableSubgraph("vertex pair needs d >= 1".into()));
    }
    let chain = ig.chain_from(vl, vr);
    let pos = |r: usize| if r == 0 { vl } else { chain[r - 1] };
    let vm = pos(d);
    // Y next to v_m (v_l itself when d = 1).
    let ynb: BTreeSet<Vertex> = [d - 1, d + 1].into_iter().map(pos).collect();
    let letter = |r: usize| if r == d - 1 || r == d + 1 { Basis::Y } else { Basis::X };
    let block = |odd: bool, left: bool| -> Bases {
        (1..=2 * d)
            .filter(|&r| r != d && (r % 2 == 1) == odd && (r <= d) == left)
            .map(|r| (pos(r), letter(r)))
            .collect()
    };
    let s_op = |u: Vertex| -> Result<Bases, ExperimentError> {
        let mut out = Bases::new();
        for &w in ig.base.neighbors(u)? {
            if w == vl || w == vr {
                continue;
            }
            out.insert(w, Basis::Z);
            let c = ig.chain_from(u, w);
            out.extend((1..=d).map(|s| (c[2 * s - 1], Basis::X)));
        }
        Ok(out)
    };
    let o_l = if d == 1 { Basis::Y } else { Basis::X };
    let merge = |parts: Vec<Bases>| -> Result<Bases, ExperimentError> {
        let mut out = Bases::new();
        for p in parts {
            for (v, b) in p {
                if out.insert(v, b).is_some_and(|old| old != b) {
                    return Err(ExperimentError::InconsistentSubmeasurement { label: "RE3 tensor".into(), vertex: v });
                }
            }
        }
        Ok(out)
    };
    let one = |v: Vertex, b: Basis| Bases::from([(v, b)]);
    let (sl, sr) = (s_op(vl)?, s_op(vr)?);
    let forms: [(&str, Bases); 4] = [
        ("1", merge(vec![one(vl, Basis::Z), block(true, true), block(true, false), one(vr, Basis::X), sr.clone()])?),
        ("2", merge(vec![one(vl, o_l), block(false, true), block(false, false), one(vr, Basis::Z), sl.clone()])?),
        ("3", merge(vec![one(vl, o_l), block(false, true), block(true, false), one(vr, Basis::X), sl.clone(), sr.clone()])?),
        ("4", merge(vec![one(vl, Basis::Z), block(true, true), block(false, false), one(vr, Basis::Z)])?),
    ];

    let gm = generator(&ig.graph, vm)?.negate();
    let pow = |k: usize| (0..k).fold(PauliString::identity(ig.graph.n()), |acc, _| acc.mul(&gm));
    let products = [pow(d + 1).mul(&inflated_generator(ig, vr)?), pow(d).mul(&inflated_generator(ig, vl)?)];

    let pad = |v: Vertex, _: &Bases| if ynb.contains(&v) { Basis::Y } else { Basis::X };
    let mut b = Builder::new(&ig.graph);
    for &u in ig.power() {
        if u != vl && u != vr {
            b.single(&format!("f_{u}"), &inflated_generator(ig, u)?, pad)?;
        }
    }
    for (i, (tag, letters)) in forms.iter().enumerate().take(2) {
        let mut l = letters.clone();
        l.insert(vm, Basis::X);
        let tensor = tensor_of(&b, &l);
        let p = &products[i];
        let sign = if p.tensor() == tensor { p.sign().expect("Hermitian") } else { 0 };
        b.single_letters(&format!("P_{tag}"), l, sign, pad)?;
    }
    for (tag, letters) in &forms {
        let mut l = letters.clone();
        l.insert(vm, Basis::Rz);
        b.single_letters(&format!("I_{tag}"), l, 1, pad)?;
    }

    let pair_only = ig.base.n() == 2;
    let deflation = ig
        .chain_vertices()
        .into_iter()
        .map(|v| (v, if pair_only && ynb.contains(&v) { Basis::Y } else { Basis::X }))
        .collect();
    Ok(ReferenceExperiment {
        kind: ReKind::Re3,
        d,
        graph: ig.graph.clone(),
        inflation: Some(ig.clone()),
        anchor: Anchor::Pair { vl, vr, vm },
        measurements: b.measurements,
        deflation_settings: deflation,
        pair_only,
    })
}

fn tensor_of(b: &Builder, letters: &Bases) -> PauliString {
    let ops: Vec<_> = letters
        .iter()
        .filter_map(|(&v, &basis)| basis.pauli().map(|p| (v, p)))
        .collect();
    PauliString::on_graph(&b.graph, &ops).expect("vertices of the graph")
}

/// Shift `k` of the circle viewed as an inflated triangle.
pub(crate) fn circle_shift(circle: &Graph, n: usize, d: usize, k: usize) -> Result<InflatedGraph, ExperimentError> {
    let step = 2 * d + 1;
    let power: Vec<Vertex> = (0..3).map(|i| (1 + k + i * step) as Vertex).collect();
    let base = Graph::new(power.clone(), [(power[0], power[1]), (power[1], power[2]), (power[0], power[2])])?;
    let wrap = |x: i64| (x.rem_euclid(n as i64) + 1) as Vertex;
    let mut chains = BTreeMap::new();
    for (a, bb) in base.edges() {
        let forward = ((bb as i64 - a as i64).rem_euclid(n as i64)) as usize == step;
        let dir = if forward { 1 } else { -1 };
        let chain = (1..=2 * d as i64).map(|s| wrap(a as i64 - 1 + dir * s)).collect();
        chains.insert(canonical(a, bb), chain);
    }
    Ok(InflatedGraph::embed(base, d, circle.clone(), chains)?)
}

/// Odd circle with `6d+3` vertices, self-tested directly.
pub fn build_re4_circle(n_base: usize, d: usize) -> Result<ReferenceExperiment, ExperimentError> {
    let n = 6 * d + 3;
    if n_base != n {
        return Err(ExperimentError::CircleLength { expected: n, got: n_base });
    }
    let circle = Graph::cycle(n as u32);
    let step = 2 * d + 1;
    let mut b = Builder::new(&circle);
    let shifts: Vec<InflatedGraph> = (0..step).map(|k| circle_shift(&circle, n, d, k)).collect::<Result<_, _>>()?;
    for (k, ig) in shifts.iter().enumerate() {
        add_re1(&mut b, ig, ig.power(), &format!("s{k}/"))?;
    }
    let dist = |a: Vertex, c: Vertex| {
        let x = (a as i64 - c as i64).rem_euclid(n as i64) as usize;
        x.min(n - x)
    };
    let alt = |du: usize, own: Basis, other: Basis| if du % 2 == 0 { own } else { other };
    for &u in circle.vertices() {
        let ig = &shifts[(u as usize - 1) % step];
        let f = inflated_generator(ig, u)?;
        let far: Vec<Vertex> = ig.base.neighbors(u)?.iter().copied().collect();
        let near = |w: Vertex| far.iter().map(|&v| dist(v, w)).min().expect("two base neighbours");
        let mx: Bases = circle
            .vertices()
            .iter()
            .map(|&w| {
                let du = dist(u, w);
                let b = if du <= d { alt(du, Basis::X, Basis::Z) } else if near(w) == 0 { Basis::Z } else { Basis::X };
                (w, b)
            })
            .collect();
        let mz: Bases = circle
            .vertices()
            .iter()
            .map(|&w| {
                let du = dist(u, w);
                let b = if du <= d { Basis::X } else { alt(near(w), Basis::Z, Basis::X) };
                (w, b)
            })
            .collect();
        let malt: Bases = circle
            .vertices()
            .iter()
            .map(|&w| {
                let du = dist(u, w);
                (w, if du <= d { alt(du, Basis::X, Basis::Z) } else { alt(near(w), Basis::Z, Basis::X) })
            })
            .collect();
        for (tag, bases) in [("M~X", mx), ("M~Z", mz)] {
            let label = format!("{tag}_{u}");
            let sub = b.sub_for(format!("{label}:f_{u}"), &f, &bases)?;
            b.multi(&label, bases, vec![sub])?;
        }
        let label = format!("Malt_{u}");
        let sub = b.sub_for(format!("{label}:g_{u}"), &generator(&circle, u)?, &malt)?;
        b.multi(&label, malt, vec![sub])?;
    }
    Ok(ReferenceExperiment {
        kind: ReKind::Re4,
        d,
        graph: circle,
        inflation: None,
        anchor: Anchor::Circle { n },
        measurements: b.measurements,
        deflation_settings: BTreeMap::new(),
        pair_only: false,
    })
}

/// Pick an experiment for `g` at distance `d`: odd cycle, then star, then
/// vertex pair.
pub fn build_auto(g: &Graph, d: usize) -> Result<ReferenceExperiment, ExperimentError> {
    if !g.is_connected() || g.n() < 2 {
        return Err(ExperimentError::NoApplicableSubgraph("graph must be connected with at least two vertices".into()));
    }
    let ig = inflate(g, d);
    if let Some(cycle) = g.find_odd_cycle() {
        return build_re1(&ig, &cycle);
    }
    if let Some((center, leaves)) = g.find_induced_star() {
        return build_re2(&ig, center, &leaves);
    }
    let (a, b) = g.edges().next().expect("connected graph with two vertices has an edge");
    build_re3(&ig, a, b)
}
