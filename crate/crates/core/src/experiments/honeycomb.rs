use std::collections::{BTreeMap, BTreeSet};

use super::builders::add_re2;
use super::{Anchor, Basis, Builder, ExperimentError, ReKind, ReferenceExperiment};
use crate::graph::{canonical, Graph, GraphError, InflatedGraph, Vertex};
use crate::pauli::{generator, inflated_generator};

/// Honeycomb lattice on a `rows × cols` torus in brick-wall layout: vertex
/// `(r, c)` has id `r·cols + c + 1`, horizontal edges wrap, and `(r, c)` is
/// joined to `(r+1, c)` when `r + c` is even.
pub fn honeycomb_torus(rows: usize, cols: usize) -> Result<Graph, ExperimentError> {
    if rows < 2 || cols < 4 || rows % 2 == 1 || cols % 2 == 1 {
        return Err(ExperimentError::TorusTooSmall {
            rows,
            cols,
            d: 0,
            reason: "rows must be even and >= 2, cols even and >= 4".into(),
        });
    }
    let id = |r: usize, c: usize| ((r % rows) * cols + (c % cols) + 1) as Vertex;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            edges.push((id(r, c), id(r, c + 1)));
            if (r + c) % 2 == 0 {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Ok(Graph::new(1..=(rows * cols) as Vertex, edges)?)
}

/// Sublattice of a brick-wall vertex: `true` when `r + c` is even.
fn sublattice_a(v: Vertex, cols: usize) -> bool {
    let i = v as usize - 1;
    (i / cols + i % cols) % 2 == 0
}

/// Neighbours of a brick-wall vertex in clockwise order.
fn clockwise(rows: usize, cols: usize, v: Vertex) -> [Vertex; 3] {
    let i = v as usize - 1;
    let (r, c) = (i / cols, i % cols);
    let id = |r: usize, c: usize| ((r % rows) * cols + (c % cols) + 1) as Vertex;
    let (left, right) = (id(r, c + cols - 1), id(r, c + 1));
    if sublattice_a(v, cols) {
        [right, id(r + 1, c), left]
    } else {
        [left, id(r + rows - 1, c), right]
    }
}

/// The tripoint star around `center` on the `rows × cols` torus: three
/// straight zigzag arms of length `2d+1`, related by rotation, viewed as
/// a `d`-inflated claw embedded in the lattice. Errors if the star is not
/// an induced subgraph.
pub fn tripoint_star(rows: usize, cols: usize, center: Vertex, d: usize) -> Result<InflatedGraph, ExperimentError> {
    let g = honeycomb_torus(rows, cols)?;
    let too_small = |reason: String| ExperimentError::TorusTooSmall { rows, cols, d, reason };
    if !g.contains(center) {
        return Err(GraphError::UnknownVertex(center).into());
    }
    let mut used = BTreeSet::from([center]);
    let mut arms = Vec::new();
    for first in clockwise(rows, cols, center) {
        let mut arm = vec![first];
        let mut prev = center;
        while arm.len() < 2 * d + 1 {
            let cur = *arm.last().expect("non-empty");
            let around = clockwise(rows, cols, cur);
            let from = around.iter().position(|&w| w == prev).expect("adjacent");
            // Turn one way on odd steps and the other way on even steps.
            let step = if arm.len() % 2 == 1 { 1 } else { 2 };
            prev = cur;
            arm.push(around[(from + step) % 3]);
        }
        for &v in &arm {
            if !used.insert(v) {
                return Err(too_small(format!("tripoint star around {center} overlaps itself")));
            }
        }
        arms.push(arm);
    }
    let leaves: Vec<Vertex> = arms.iter().map(|a| a[2 * d]).collect();
    let base = Graph::new(
        std::iter::once(center).chain(leaves.iter().copied()),
        leaves.iter().map(|&l| (center, l)),
    )?;
    let mut chains = BTreeMap::new();
    for arm in &arms {
        let leaf = arm[2 * d];
        let mut chain: Vec<Vertex> = arm[..2 * d].to_vec();
        if canonical(center, leaf).0 != center {
            chain.reverse();
        }
        chains.insert(canonical(center, leaf), chain);
    }
    if g.induced(&used).edge_count() != used.len() - 1 {
        return Err(too_small(format!("tripoint star around {center} is not induced")));
    }
    Ok(InflatedGraph::embed(base, d, g, chains)?)
}

/// Honeycomb cluster on a torus: the two alternating measurements, the
/// star experiment on the tripoint star around vertex 1, and the two mixed
/// measurements at one of its corners.
pub fn build_re5_honeycomb(rows: usize, cols: usize, d: usize) -> Result<ReferenceExperiment, ExperimentError> {
    let g = honeycomb_torus(rows, cols)?;
    let too_small = |reason: String| ExperimentError::TorusTooSmall { rows, cols, d, reason };
    // Neighbourhoods of radius 3d+1 must look like the infinite lattice,
    // whose k-th shell has 3k vertices.
    let k = 3 * d + 1;
    let expected = 3 * k * (k + 1) / 2;
    for &v in g.vertices() {
        let got = g.neighborhood(v, k)?.len();
        if got != expected {
            return Err(too_small(format!("neighbourhood of radius {k} around {v} has {got} vertices, expected {expected}")));
        }
    }
    let stars: BTreeMap<Vertex, InflatedGraph> = g
        .vertices()
        .iter()
        .map(|&v| {
            tripoint_star(rows, cols, v, d).map(|s| (v, s))
        })
        .collect::<Result<_, _>>()?;

    let mut b = Builder::new(&g);
    for (tag, a_letter, b_letter, on_a) in [("Malt1", Basis::X, Basis::Z, true), ("Malt2", Basis::Z, Basis::X, false)] {
        let bases: BTreeMap<Vertex, Basis> = g
            .vertices()
            .iter()
            .map(|&v| (v, if sublattice_a(v, cols) { a_letter } else { b_letter }))
            .collect();
        let mut subs = Vec::new();
        for &v in g.vertices().iter().filter(|&&v| sublattice_a(v, cols) == on_a) {
            subs.push(b.sub_for(format!("{tag}:g_{v}"), &generator(&g, v)?, &bases)?);
            subs.push(b.sub_for(format!("{tag}:f_{v}"), &inflated_generator(&stars[&v], v)?, &bases)?);
        }
        b.multi(tag, bases, subs)?;
    }

    let center: Vertex = 1;
    let star = &stars[&center];
    let on_star: BTreeSet<Vertex> = star.power().iter().copied().chain(star.chain_vertices()).collect();
    let nn: BTreeSet<Vertex> = g.neighbors(center)?.clone();
    // Off-star vertices next to the star always read Z (in particular
    // whenever an on-star neighbour reads X), all others X. Keeping these
    // inputs fixed across measurements keeps the views of the star equal.
    let next_to_star: BTreeSet<Vertex> = on_star
        .iter()
        .flat_map(|&v| g.neighbors(v).expect("vertex of g").iter().copied())
        .filter(|w| !on_star.contains(w))
        .collect();
    let embed_pad = |v: Vertex, _: &BTreeMap<Vertex, Basis>, on: &dyn Fn(Vertex) -> Basis| {
        if on_star.contains(&v) {
            on(v)
        } else if next_to_star.contains(&v) {
            Basis::Z
        } else {
            Basis::X
        }
    };
    let leaves: Vec<Vertex> = star.base.neighbors(center)?.iter().copied().collect();
    add_re2(&mut b, star, center, &leaves, &|v, letters, y| {
        embed_pad(v, letters, &|w| if y && nn.contains(&w) { Basis::Y } else { Basis::X })
    })?;

    let v0 = leaves[0];
    let star_dist = |v: Vertex| -> Option<usize> {
        if v == center {
            return Some(0);
        }
        star.chain_label(v).ok().map(|l| if l.edge.0 == center { l.r } else { 2 * d + 1 - l.r }).or_else(|| {
            star.base.contains(v).then_some(2 * d + 1)
        })
    };
    let on_v0_arm = |v: Vertex| v == v0 || star.chain_from(center, v0).contains(&v);
    let alt = |du: usize, own: Basis, other: Basis| if du % 2 == 0 { own } else { other };
    let f_v0 = inflated_generator(star, v0)?;
    for (tag, near_v0, near_c) in [
        ("M~X", (Basis::X, Basis::Z), (Basis::Z, Basis::X)),
        ("M~Z", (Basis::X, Basis::X), (Basis::Z, Basis::X)),
    ] {
        let alternate_c = tag == "M~Z";
        let alternate_v0 = tag == "M~X";
        let on = |w: Vertex| -> Basis {
            let Some(r) = star_dist(w) else { return Basis::X };
            let from_v0 = if on_v0_arm(w) { Some(2 * d + 1 - r) } else { None };
            match from_v0 {
                Some(p) if p <= d => if alternate_v0 { alt(p, near_v0.0, near_v0.1) } else { near_v0.0 },
                _ if r == 0 => near_c.0,
                _ if r <= d => if alternate_c { alt(r, near_c.0, near_c.1) } else { near_c.1 },
                _ => Basis::X,
            }
        };
        let empty = BTreeMap::new();
        let bases: BTreeMap<Vertex, Basis> = g.vertices().iter().map(|&v| (v, embed_pad(v, &empty, &on))).collect();
        let label = format!("{tag}_{v0}");
        let sub = b.sub_for(format!("{label}:f_{v0}"), &f_v0, &bases)?;
        b.multi(&label, bases, vec![sub])?;
    }

    Ok(ReferenceExperiment {
        kind: ReKind::Re5,
        d,
        graph: g,
        inflation: Some(star.clone()),
        anchor: Anchor::Honeycomb { rows, cols, center, corner: v0 },
        measurements: b.measurements,
        deflation_settings: BTreeMap::new(),
        pair_only: false,
    })
}
