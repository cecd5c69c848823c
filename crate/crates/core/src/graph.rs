//! Undirected graphs, d-inflation and the induced-subgraph searches used to
//! pick a reference experiment.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex identifier. Inflation allocates fresh ids above the base maximum.
pub type Vertex = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex {0}")]
    DuplicateVertex(Vertex),
    #[error("edge ({0},{1}) references an undeclared vertex")]
    DanglingEdge(Vertex, Vertex),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("unknown vertex {0}")]
    UnknownVertex(Vertex),
    #[error("vertex {0} is a power vertex, not a chain vertex")]
    NotChainVertex(Vertex),
    #[error("vertex {0} is a chain vertex, not a power vertex")]
    NotPowerVertex(Vertex),
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
}

/// Simple undirected graph with a canonical (sorted) vertex order.
///
/// Edges are stored with the smaller id first; that endpoint is the "left"
/// end of the edge's chain after inflation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    vertices: Vec<Vertex>,
    edges: BTreeSet<(Vertex, Vertex)>,
    adj: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<Vertex>,
    edges: Vec<[Vertex; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;
    fn try_from(g: GraphJson) -> Result<Self, GraphError> {
        Graph::new(g.vertices, g.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
            vertices: g.vertices,
        }
    }
}

/// Canonical orientation of an edge: smaller id first.
pub fn canonical(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Graph {
    pub fn new(
        vertices: impl IntoIterator<Item = Vertex>,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        let mut vs = Vec::new();
        let mut adj = BTreeMap::new();
        for v in vertices {
            if adj.insert(v, BTreeSet::new()).is_some() {
                return Err(GraphError::DuplicateVertex(v));
            }
            vs.push(v);
        }
        vs.sort_unstable();
        let mut es = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !adj.contains_key(&a) || !adj.contains_key(&b) {
                return Err(GraphError::DanglingEdge(a, b));
            }
            es.insert(canonical(a, b));
            adj.get_mut(&a).unwrap().insert(b);
            adj.get_mut(&b).unwrap().insert(a);
        }
        Ok(Graph { vertices: vs, edges: es, adj })
    }

    /// Path graph on `1..=n`.
    pub fn path(n: u32) -> Self {
        Graph::new(1..=n, (1..n).map(|i| (i, i + 1))).expect("path is valid")
    }

    /// Cycle graph on `1..=n` (n ≥ 3).
    pub fn cycle(n: u32) -> Self {
        Graph::new(1..=n, (1..=n).map(|i| (i, i % n + 1))).expect("cycle is valid")
    }

    /// Star with center 1 and leaves `2..=leaves+1`.
    pub fn star(leaves: u32) -> Self {
        Graph::new(1..=leaves + 1, (2..=leaves + 1).map(|i| (1, i))).expect("star is valid")
    }

    pub fn triangle() -> Self {
        Graph::cycle(3)
    }

    pub fn pair() -> Self {
        Graph::path(2)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.edges.contains(&canonical(a, b))
    }

    /// Position of `v` in the canonical vertex order (its qubit index).
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn neighbors(&self, v: Vertex) -> Result<&BTreeSet<Vertex>, GraphError> {
        self.adj.get(&v).ok_or(GraphError::UnknownVertex(v))
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj.get(&v).map_or(0, |s| s.len())
    }

    /// BFS distances from `u` (unreachable vertices are absent).
    pub fn distances(&self, u: Vertex) -> Result<BTreeMap<Vertex, usize>, GraphError> {
        self.neighbors(u)?;
        let mut dist = BTreeMap::from([(u, 0usize)]);
        let mut queue = VecDeque::from([u]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            for &w in &self.adj[&v] {
                if !dist.contains_key(&w) {
                    dist.insert(w, dv + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// Vertices at distance `1..=radius` from `u`.
    pub fn neighborhood(&self, u: Vertex, radius: usize) -> Result<BTreeSet<Vertex>, GraphError> {
        Ok(self
            .distances(u)?
            .into_iter()
            .filter(|&(_, d)| d >= 1 && d <= radius)
            .map(|(v, _)| v)
            .collect())
    }

    pub fn is_connected(&self) -> bool {
        match self.vertices.first() {
            None => true,
            Some(&v) => self.distances(v).map(|d| d.len()) == Ok(self.n()),
        }
    }

    /// Shortest induced odd cycle; ties broken by the lexicographically
    /// smallest vertex list (starting at its minimum vertex).
    pub fn find_odd_cycle(&self) -> Option<Vec<Vertex>> {
        let max_len = self.n();
        let mut len = self.odd_girth()?;
        while len <= max_len {
            for &s in &self.vertices {
                let mut path = vec![s];
                if self.induced_cycle_from(&mut path, len) {
                    return Some(path);
                }
            }
            len += 2;
        }
        None
    }

    /// Length of the shortest odd cycle, `None` for bipartite graphs. An
    /// edge between two vertices at equal BFS depth closes an odd walk.
    fn odd_girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &s in &self.vertices {
            let dist = self.distances(s).expect("own vertex");
            for (a, b) in self.edges() {
                if let (Some(&da), Some(&db)) = (dist.get(&a), dist.get(&b)) {
                    if da == db {
                        best = Some(best.map_or(2 * da + 1, |x| x.min(2 * da + 1)));
                    }
                }
            }
        }
        best
    }

    fn induced_cycle_from(&self, path: &mut Vec<Vertex>, len: usize) -> bool {
        let s = path[0];
        let k = path.len();
        let last = *path.last().unwrap();
        for &w in &self.adj[&last] {
            if w <= s || path.contains(&w) {
                continue;
            }
            let closing = k + 1 == len;
            if closing && (!self.has_edge(w, s) || w < path[1]) {
                continue;
            }
            let chord = path[..k - 1]
                .iter()
                .enumerate()
                .any(|(i, &p)| self.has_edge(w, p) && !(closing && i == 0));
            if chord {
                continue;
            }
            path.push(w);
            if closing || self.induced_cycle_from(path, len) {
                return true;
            }
            path.pop();
        }
        false
    }

    /// A center with at least two pairwise non-adjacent neighbours; centers
    /// are ranked by degree (descending) then id. Leaves: a greedy pass in
    /// ascending id order is started from each neighbour in turn and the
    /// largest result kept (earliest start on ties). Starting at a leaf of
    /// any non-adjacent pair already yields two, so no star is missed.
    pub fn find_induced_star(&self) -> Option<(Vertex, Vec<Vertex>)> {
        let mut centers: Vec<Vertex> = self.vertices.clone();
        centers.sort_by_key(|&v| (std::cmp::Reverse(self.degree(v)), v));
        centers.into_iter().find_map(|c| {
            let nb = &self.adj[&c];
            let mut best: Vec<Vertex> = Vec::new();
            for &start in nb {
                let mut leaves = vec![start];
                for &w in nb {
                    if w != start && leaves.iter().all(|&l| !self.has_edge(l, w)) {
                        leaves.push(w);
                    }
                }
                leaves.sort_unstable();
                if leaves.len() > best.len() {
                    best = leaves;
                }
            }
            (best.len() >= 2).then_some((c, best))
        })
    }

    /// Induced path of three vertices `(v_l, v_c, v_r)`, lexicographically
    /// smallest by `(v_c, v_l, v_r)`.
    pub fn find_line_of_three(&self) -> Option<(Vertex, Vertex, Vertex)> {
        for &c in &self.vertices {
            let nb: Vec<Vertex> = self.adj[&c].iter().copied().collect();
            for (i, &l) in nb.iter().enumerate() {
                for &r in &nb[i + 1..] {
                    if !self.has_edge(l, r) {
                        return Some((l, c, r));
                    }
                }
            }
        }
        None
    }

    /// Induced subgraph on `keep`.
    pub fn induced(&self, keep: &BTreeSet<Vertex>) -> Graph {
        Graph::new(
            keep.iter().copied(),
            self.edges().filter(|(a, b)| keep.contains(a) && keep.contains(b)),
        )
        .expect("subgraph of a valid graph")
    }
}

/// Chain position bookkeeping for a vertex inside an inflated edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLabel {
    pub edge: (Vertex, Vertex),
    /// Position `1..=2d` counted from the edge's canonical first endpoint.
    pub r: usize,
    pub parity: Parity,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A graph together with a d-inflation structure: power vertices (the base
/// graph) joined by chains of `2d` vertices.
///
/// [`inflate`] produces a pure inflation. [`InflatedGraph::embed`] describes
/// an inflated base graph sitting inside a larger host graph (used for the
/// circle shifts and the honeycomb tripoint star), in which case the vertex
/// and edge counts refer to the host.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InflatedJson", into = "InflatedJson")]
pub struct InflatedGraph {
    pub base: Graph,
    pub d: usize,
    pub graph: Graph,
    /// Chain vertices per canonical base edge, ordered `r = 1..=2d`.
    pub chains: BTreeMap<(Vertex, Vertex), Vec<Vertex>>,
    labels: BTreeMap<Vertex, ChainLabel>,
}

#[derive(Serialize, Deserialize)]
struct InflatedJson {
    base: Graph,
    d: usize,
    graph: Graph,
    #[serde(with = "chain_table")]
    chains: BTreeMap<(Vertex, Vertex), Vec<Vertex>>,
}

impl TryFrom<InflatedJson> for InflatedGraph {
    type Error = GraphError;
    fn try_from(j: InflatedJson) -> Result<Self, GraphError> {
        InflatedGraph::from_parts(j.base, j.d, j.graph, j.chains)
    }
}

impl From<InflatedGraph> for InflatedJson {
    fn from(ig: InflatedGraph) -> Self {
        InflatedJson { base: ig.base, d: ig.d, graph: ig.graph, chains: ig.chains }
    }
}

mod chain_table {
    use super::Vertex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Row {
        edge: [Vertex; 2],
        chain: Vec<Vertex>,
    }

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<(Vertex, Vertex), Vec<Vertex>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(&(a, b), c)| Row { edge: [a, b], chain: c.clone() })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(Vertex, Vertex), Vec<Vertex>>, D::Error> {
        Ok(Vec::<Row>::deserialize(d)?
            .into_iter()
            .map(|r| ((r.edge[0], r.edge[1]), r.chain))
            .collect())
    }
}

/// Replace every edge of `g` by a chain of `2d` fresh vertices.
///
/// Chain ids are allocated consecutively above `max(V)`, edge by edge in
/// canonical order.
pub fn inflate(g: &Graph, d: usize) -> InflatedGraph {
    let mut next = g.vertices().last().map_or(0, |&m| m + 1);
    let mut vertices: Vec<Vertex> = g.vertices().to_vec();
    let mut edges = Vec::new();
    let mut chains = BTreeMap::new();
    for (a, b) in g.edges() {
        let chain: Vec<Vertex> = (0..2 * d as u32).map(|i| next + i).collect();
        next += 2 * d as u32;
        let mut prev = a;
        for &c in &chain {
            vertices.push(c);
            edges.push((prev, c));
            prev = c;
        }
        edges.push((prev, b));
        chains.insert((a, b), chain);
    }
    let graph = Graph::new(vertices, edges).expect("inflation of a valid graph");
    InflatedGraph::from_parts(g.clone(), d, graph, chains).expect("inflation is consistent")
}

impl InflatedGraph {
    /// Validate and assemble an inflation embedded in `graph`.
    pub fn embed(
        base: Graph,
        d: usize,
        graph: Graph,
        chains: BTreeMap<(Vertex, Vertex), Vec<Vertex>>,
    ) -> Result<Self, GraphError> {
        Self::from_parts(base, d, graph, chains)
    }

    fn from_parts(
        base: Graph,
        d: usize,
        graph: Graph,
        chains: BTreeMap<(Vertex, Vertex), Vec<Vertex>>,
    ) -> Result<Self, GraphError> {
        let bad = |m: String| GraphError::InvalidEmbedding(m);
        for &v in base.vertices() {
            if !graph.contains(v) {
                return Err(bad(format!("power vertex {v} missing from host")));
            }
        }
        let mut labels = BTreeMap::new();
        for (a, b) in base.edges() {
            let chain = chains
                .get(&(a, b))
                .ok_or_else(|| bad(format!("no chain for edge ({a},{b})")))?;
            if chain.len() != 2 * d {
                return Err(bad(format!("chain of ({a},{b}) has length {}", chain.len())));
            }
            let mut walk = vec![a];
            walk.extend(chain);
            walk.push(b);
            for w in walk.windows(2) {
                if !graph.has_edge(w[0], w[1]) {
                    return Err(bad(format!("chain of ({a},{b}) is not a path in the host")));
                }
            }
            for (i, &c) in chain.iter().enumerate() {
                if base.contains(c) {
                    return Err(bad(format!("chain vertex {c} is also a power vertex")));
                }
                let r = i + 1;
                let label = ChainLabel {
                    edge: (a, b),
                    r,
                    parity: if r % 2 == 1 { Parity::Odd } else { Parity::Even },
                    side: if r <= d { Side::Left } else { Side::Right },
                };
                if labels.insert(c, label).is_some() {
                    return Err(bad(format!("chain vertex {c} used twice")));
                }
            }
        }
        if chains.len() != base.edge_count() {
            return Err(bad("chains do not match base edges".into()));
        }
        Ok(InflatedGraph { base, d, graph, chains, labels })
    }

    pub fn power(&self) -> &[Vertex] {
        self.base.vertices()
    }

    pub fn is_power(&self, v: Vertex) -> bool {
        self.base.contains(v)
    }

    pub fn is_chain(&self, v: Vertex) -> bool {
        self.labels.contains_key(&v)
    }

    /// All chain vertices in canonical order (by edge, then position).
    pub fn chain_vertices(&self) -> Vec<Vertex> {
        self.chains.values().flatten().copied().collect()
    }

    pub fn chain_label(&self, v: Vertex) -> Result<ChainLabel, GraphError> {
        if let Some(l) = self.labels.get(&v) {
            Ok(*l)
        } else if self.base.contains(v) {
            Err(GraphError::NotChainVertex(v))
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    /// The chain from `u` towards base neighbour `v`, ordered outward from
    /// `u` (position 1 is adjacent to `u`).
    pub fn chain_from(&self, u: Vertex, v: Vertex) -> Vec<Vertex> {
        let (a, b) = canonical(u, v);
        let chain = &self.chains[&(a, b)];
        if u == a {
            chain.clone()
        } else {
            chain.iter().rev().copied().collect()
        }
    }

    /// The vertex `2s_{(u,v)}` style lookup: position `r` counted from `u`.
    pub fn chain_vertex(&self, u: Vertex, v: Vertex, r: usize) -> Vertex {
        self.chain_from(u, v)[r - 1]
    }

    /// Remove chains and reconnect their endpoints.
    pub fn contract(&self) -> Graph {
        let keep: BTreeSet<Vertex> = self.base.vertices().iter().copied().collect();
        let mut edges: Vec<(Vertex, Vertex)> = self
            .graph
            .edges()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b))
            .collect();
        if self.d > 0 {
            edges.extend(self.chains.keys().copied());
        }
        Graph::new(keep, edges).expect("contraction of a valid graph")
    }
}
