//! Finite simple graphs, the edge-replacement constructions built on them,
//! and the structural validators (root-swap automorphisms, tree
//! decompositions, the non-uniform replacement classifier).

mod constructions;
mod iso;
mod replacement;
mod treedec;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use constructions::{
    clique_mixed_subdivision, disjoint_union, flower, generalized_theta, replace_edges, replace_edges_nonuniform,
    semidirect_product, subdivide, Parity, Subdivision,
};
pub use iso::{canonical_form, find_isomorphism, find_root_swap, is_isomorphic};
pub use replacement::{classify_theorem12, ReplacementClass, ReplacementSpec};
pub use treedec::{odd_theta_decomposition, TreeDecomposition, TreeDecompositionError};

pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("loop at vertex {0}")]
    Loop(Vertex),
    #[error("duplicate edge {0}-{1}")]
    MultiEdge(Vertex, Vertex),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("roots must be distinct, got {0} twice")]
    EqualRoots(Vertex),
    #[error("no automorphism swaps roots {0} and {1}")]
    NoRootSwap(Vertex, Vertex),
    #[error("more than one path of length 1 would create a multi-edge between the roots")]
    DuplicateDirectPath,
    #[error("path length {length} violates the requested {parity} parity")]
    Parity { length: usize, parity: &'static str },
    #[error("path length must be at least 1")]
    ZeroLength,
    #[error("{0} needs at least one length")]
    EmptyLengths(&'static str),
    #[error("cycle length {0} is below 3")]
    ShortCycle(usize),
    #[error("per-edge subdivision map does not cover the edge set exactly: {0}")]
    SubdivisionMismatch(String),
    #[error("replacement spec does not match the host edges: {0}")]
    SpecMismatch(String),
    #[error("invalid replacement spec: {0}")]
    InvalidSpec(String),
    #[error("vertex set I is not independent: edge {0}-{1} lies inside it")]
    NotIndependent(Vertex, Vertex),
    #[error("vertex a = {0} belongs to I")]
    AnchorInIndependentSet(Vertex),
    #[error("subdivision parameter must be at least 1")]
    ZeroSubdivision,
    #[error("{0} needs at least {1} paths")]
    TooFewPaths(&'static str, usize),
}

/// A finite simple graph on vertices `0..n`. Edges are stored normalized
/// (`u < v`) and sorted, so two graphs with the same edge set compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[Vertex; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;
    fn try_from(json: GraphJson) -> Result<Self, Self::Error> {
        Graph::new(json.n, json.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson { n: g.n, edges: g.edges.iter().map(|&(u, v)| [u, v]).collect() }
    }
}

impl Graph {
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::Loop(u));
            }
            let e = (u.min(v), u.max(v));
            if !set.insert(e) {
                return Err(GraphError::MultiEdge(e.0, e.1));
            }
        }
        Ok(Graph { n, edges: set.into_iter().collect() })
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, edges: Vec::new() }
    }

    pub fn complete(h: usize) -> Self {
        let edges = (0..h).flat_map(|u| (u + 1..h).map(move |v| (u, v))).collect();
        Graph { n: h, edges }
    }

    /// Path with `length` edges on vertices `0..=length`, in order.
    pub fn path(length: usize) -> Self {
        Graph { n: length + 1, edges: (0..length).map(|i| (i, i + 1)).collect() }
    }

    pub fn cycle(length: usize) -> Result<Self, GraphError> {
        if length < 3 {
            return Err(GraphError::ShortCycle(length));
        }
        Graph::new(length, (0..length).map(|i| (i, (i + 1) % length)))
    }

    pub fn star(leaves: usize) -> Self {
        Graph { n: leaves + 1, edges: (1..=leaves).map(|v| (0, v)).collect() }
    }

    /// Complete multipartite graph with the given part sizes; parts occupy
    /// consecutive vertex ranges.
    pub fn complete_multipartite(parts: &[usize]) -> Self {
        let mut part_of = Vec::new();
        for (p, &size) in parts.iter().enumerate() {
            part_of.extend(std::iter::repeat_n(p, size));
        }
        let n = part_of.len();
        let edges =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| part_of[u] != part_of[v]).collect();
        Graph { n, edges }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn adjacency(&self) -> Vec<Vec<Vertex>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Two-coloring if one exists.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let adj = self.adjacency();
        let mut color: Vec<Option<bool>> = vec![None; self.n];
        for start in 0..self.n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(false);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let cu = color[u].expect("colored on push");
                for &w in &adj[u] {
                    match color[w] {
                        None => {
                            color[w] = Some(!cu);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cu => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap_or(false)).collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    pub fn n_components(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Acyclic (a forest), not necessarily connected.
    pub fn is_forest(&self) -> bool {
        self.n_edges() + self.n_components() == self.n
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.n_components() == 1 && self.is_forest()
    }

    pub fn is_independent(&self, set: &BTreeSet<Vertex>) -> Result<(), GraphError> {
        for &v in set {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        match self.edges.iter().find(|(u, v)| set.contains(u) && set.contains(v)) {
            Some(&(u, v)) => Err(GraphError::NotIndependent(u, v)),
            None => Ok(()),
        }
    }

    /// Graph with `perm[v]` as the new label of `v`.
    pub fn relabel(&self, perm: &[Vertex]) -> Graph {
        assert_eq!(perm.len(), self.n, "permutation length mismatch");
        Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
            .expect("relabeling by a permutation keeps the graph simple")
    }

    /// Same vertex set with one edge removed.
    pub fn without_edge(&self, u: Vertex, v: Vertex) -> Graph {
        let e = (u.min(v), u.max(v));
        Graph { n: self.n, edges: self.edges.iter().copied().filter(|&f| f != e).collect() }
    }

    /// Deletes `v` and its edges; later vertices shift down by one.
    pub fn without_vertex(&self, v: Vertex) -> Graph {
        let shift = |u: Vertex| if u > v { u - 1 } else { u };
        let edges = self.edges.iter().filter(|&&(a, b)| a != v && b != v).map(|&(a, b)| (shift(a), shift(b)));
        Graph::new(self.n - 1, edges).expect("deleting a vertex keeps the graph simple")
    }
}

/// A graph with an ordered pair of distinct roots that some automorphism
/// swaps. The swap is checked on construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RootedGraphJson", into = "RootedGraphJson")]
pub struct RootedGraph {
    graph: Graph,
    roots: (Vertex, Vertex),
}

#[derive(Serialize, Deserialize)]
struct RootedGraphJson {
    n: usize,
    edges: Vec<[Vertex; 2]>,
    roots: [Vertex; 2],
}

impl TryFrom<RootedGraphJson> for RootedGraph {
    type Error = GraphError;
    fn try_from(json: RootedGraphJson) -> Result<Self, Self::Error> {
        let graph = Graph::try_from(GraphJson { n: json.n, edges: json.edges })?;
        RootedGraph::new(graph, json.roots[0], json.roots[1])
    }
}

impl From<RootedGraph> for RootedGraphJson {
    fn from(r: RootedGraph) -> Self {
        let GraphJson { n, edges } = r.graph.into();
        RootedGraphJson { n, edges, roots: [r.roots.0, r.roots.1] }
    }
}

impl RootedGraph {
    pub fn new(graph: Graph, r1: Vertex, r2: Vertex) -> Result<Self, GraphError> {
        for r in [r1, r2] {
            if r >= graph.n_vertices() {
                return Err(GraphError::VertexOutOfRange { vertex: r, n: graph.n_vertices() });
            }
        }
        if r1 == r2 {
            return Err(GraphError::EqualRoots(r1));
        }
        if find_root_swap(&graph, r1, r2).is_none() {
            return Err(GraphError::NoRootSwap(r1, r2));
        }
        Ok(RootedGraph { graph, roots: (r1, r2) })
    }

    /// Path of `length` edges rooted at its ends.
    pub fn path(length: usize) -> Result<Self, GraphError> {
        if length == 0 {
            return Err(GraphError::ZeroLength);
        }
        RootedGraph::new(Graph::path(length), 0, length)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn roots(&self) -> (Vertex, Vertex) {
        self.roots
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }
}
