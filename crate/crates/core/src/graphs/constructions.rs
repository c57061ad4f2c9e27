//! Graph constructors. New vertices are numbered deterministically: host
//! vertices keep their labels and fresh vertices follow in per-edge blocks,
//! visited in sorted edge order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, ReplacementSpec, RootedGraph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Any,
}

impl Parity {
    fn admits(self, length: usize) -> bool {
        match self {
            Parity::Even => length.is_multiple_of(2),
            Parity::Odd => length % 2 == 1,
            Parity::Any => true,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Any => "any",
        }
    }
}

/// Accumulates edges while handing out fresh vertex labels.
struct Builder {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder { n, edges: Vec::new() }
    }

    fn fresh(&mut self) -> Vertex {
        self.n += 1;
        self.n - 1
    }

    /// Path of `length` edges from `from` to `to` through fresh vertices.
    fn path(&mut self, from: Vertex, to: Vertex, length: usize) {
        debug_assert!(length >= 1);
        let mut prev = from;
        for _ in 1..length {
            let v = self.fresh();
            self.edges.push((prev, v));
            prev = v;
        }
        self.edges.push((prev, to));
    }

    fn finish(self) -> Result<Graph, GraphError> {
        Graph::new(self.n, self.edges)
    }
}

/// Internally disjoint paths of the given lengths between roots `0` and `1`.
/// Internal vertices follow path by path in input order.
pub fn generalized_theta(lengths: &[usize], parity: Parity) -> Result<RootedGraph, GraphError> {
    if lengths.is_empty() {
        return Err(GraphError::EmptyLengths("generalized theta"));
    }
    if lengths.contains(&0) {
        return Err(GraphError::ZeroLength);
    }
    if lengths.iter().filter(|&&l| l == 1).count() > 1 {
        return Err(GraphError::DuplicateDirectPath);
    }
    if let Some(&length) = lengths.iter().find(|&&l| !parity.admits(l)) {
        return Err(GraphError::Parity { length, parity: parity.name() });
    }
    let mut b = Builder::new(2);
    for &l in lengths {
        b.path(0, 1, l);
    }
    RootedGraph::new(b.finish()?, 0, 1)
}

/// Cycles of the given lengths sharing only the hub vertex `0`.
pub fn flower(cycle_lengths: &[usize]) -> Result<Graph, GraphError> {
    if cycle_lengths.is_empty() {
        return Err(GraphError::EmptyLengths("flower"));
    }
    if let Some(&l) = cycle_lengths.iter().find(|&&l| l < 3) {
        return Err(GraphError::ShortCycle(l));
    }
    let mut b = Builder::new(1);
    for &l in cycle_lengths {
        b.path(0, 0, l);
    }
    b.finish()
}

/// How many new vertices to insert on each edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subdivision {
    Uniform(usize),
    PerEdge(BTreeMap<(Vertex, Vertex), usize>),
}

pub fn subdivide(h: &Graph, times: &Subdivision) -> Result<Graph, GraphError> {
    let counts: Vec<usize> = match times {
        Subdivision::Uniform(t) => vec![*t; h.n_edges()],
        Subdivision::PerEdge(map) => {
            let normalized: BTreeMap<(Vertex, Vertex), usize> =
                map.iter().map(|(&(u, v), &t)| ((u.min(v), u.max(v)), t)).collect();
            if normalized.len() != map.len() {
                return Err(GraphError::SubdivisionMismatch("an edge is listed twice".into()));
            }
            for e in normalized.keys() {
                if !h.has_edge(e.0, e.1) {
                    return Err(GraphError::SubdivisionMismatch(format!("{}-{} is not an edge", e.0, e.1)));
                }
            }
            h.edges()
                .iter()
                .map(|e| {
                    normalized
                        .get(e)
                        .copied()
                        .ok_or_else(|| GraphError::SubdivisionMismatch(format!("edge {}-{} missing", e.0, e.1)))
                })
                .collect::<Result<_, _>>()?
        }
    };
    let mut b = Builder::new(h.n_vertices());
    for (&(u, v), &t) in h.edges().iter().zip(&counts) {
        b.path(u, v, t + 1);
    }
    b.finish()
}

/// Replaces every edge `uv` of `h` (in sorted order, `u < v`) by a fresh copy
/// of `gadget` with its first root on `u` and second root on `v`.
pub fn replace_edges(h: &Graph, gadget: &RootedGraph) -> Result<Graph, GraphError> {
    let (r1, r2) = gadget.roots();
    let inner: Vec<Vertex> = (0..gadget.graph().n_vertices()).filter(|&x| x != r1 && x != r2).collect();
    let mut b = Builder::new(h.n_vertices());
    for &(u, v) in h.edges() {
        let mut image = vec![usize::MAX; gadget.graph().n_vertices()];
        image[r1] = u;
        image[r2] = v;
        for &x in &inner {
            image[x] = b.fresh();
        }
        b.edges.extend(gadget.graph().edges().iter().map(|&(x, y)| (image[x], image[y])));
    }
    b.finish()
}

/// Replaces every edge by the parallel paths its spec lists, shortest
/// lengths first.
pub fn replace_edges_nonuniform(h: &Graph, spec: &ReplacementSpec) -> Result<Graph, GraphError> {
    let per_edge = spec.lengths_for(h)?;
    let mut b = Builder::new(h.n_vertices());
    for (&(u, v), lengths) in h.edges().iter().zip(per_edge) {
        for (&k, &count) in lengths {
            for _ in 0..count {
                b.path(u, v, k);
            }
        }
    }
    b.finish()
}

/// Glues `v(H2)` copies of `H1` along the independent set `I`, puts `H2` on
/// the copies of `a`, and subdivides each `H2`-edge `2k-1` times.
///
/// Labels: `I` first (ascending), then each copy's remaining `H1` vertices
/// copy by copy, then the subdivision vertices per `H2`-edge in sorted order.
pub fn semidirect_product(
    h1: &Graph,
    shared: &BTreeSet<Vertex>,
    anchor: Vertex,
    h2: &Graph,
    k: usize,
) -> Result<Graph, GraphError> {
    if anchor >= h1.n_vertices() {
        return Err(GraphError::VertexOutOfRange { vertex: anchor, n: h1.n_vertices() });
    }
    h1.is_independent(shared)?;
    if shared.contains(&anchor) {
        return Err(GraphError::AnchorInIndependentSet(anchor));
    }
    if k == 0 {
        return Err(GraphError::ZeroSubdivision);
    }
    let private: Vec<Vertex> = (0..h1.n_vertices()).filter(|v| !shared.contains(v)).collect();
    let mut b = Builder::new(0);
    let mut shared_label = BTreeMap::new();
    for &s in shared {
        shared_label.insert(s, b.fresh());
    }
    let mut anchor_copy = Vec::with_capacity(h2.n_vertices());
    for _ in 0..h2.n_vertices() {
        let mut label = vec![usize::MAX; h1.n_vertices()];
        for (&s, &l) in &shared_label {
            label[s] = l;
        }
        for &p in &private {
            label[p] = b.fresh();
        }
        anchor_copy.push(label[anchor]);
        b.edges.extend(h1.edges().iter().map(|&(x, y)| (label[x], label[y])));
    }
    for &(x, y) in h2.edges() {
        b.path(anchor_copy[x], anchor_copy[y], 2 * k);
    }
    b.finish()
}

/// Subdivision of `K_h` where edges at one distinguished vertex become paths
/// of length `l2` and all other edges paths of length `2*l1`, realized as the
/// semidirect product of a path of length `l2` (shared end, anchor at the
/// other end) with `K_{h-1}`.
pub fn clique_mixed_subdivision(h: usize, l1: usize, l2: usize) -> Result<Graph, GraphError> {
    if h < 2 {
        return Err(GraphError::EmptyLengths("clique subdivision with h >= 2"));
    }
    if l2 == 0 {
        return Err(GraphError::ZeroLength);
    }
    semidirect_product(&Graph::path(l2), &BTreeSet::from([0]), l2, &Graph::complete(h - 1), l1)
}

pub fn disjoint_union(g1: &Graph, g2: &Graph) -> Graph {
    let shift = g1.n_vertices();
    let edges = g1.edges().iter().copied().chain(g2.edges().iter().map(|&(u, v)| (u + shift, v + shift)));
    Graph::new(shift + g2.n_vertices(), edges).expect("disjoint union of simple graphs is simple")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::is_isomorphic;

    fn k3() -> Graph {
        Graph::complete(3)
    }

    #[test]
    fn theta_examples() {
        let c4 = generalized_theta(&[2, 2], Parity::Even).unwrap();
        assert_eq!(c4.graph().n_vertices(), 4);
        assert_eq!(c4.graph().n_edges(), 4);
        assert!(is_isomorphic(c4.graph(), &Graph::cycle(4).unwrap()));
        // roots are the opposite, non-adjacent pair
        assert!(!c4.graph().has_edge(0, 1));

        let p2 = generalized_theta(&[2], Parity::Even).unwrap();
        assert_eq!(p2.graph(), &Graph::new(3, [(0, 2), (2, 1)]).unwrap());

        let odd = generalized_theta(&[1, 3], Parity::Odd).unwrap();
        assert_eq!(odd.graph(), &Graph::new(4, [(0, 1), (0, 2), (2, 3), (3, 1)]).unwrap());
    }

    #[test]
    fn theta_errors() {
        assert_eq!(generalized_theta(&[1, 1], Parity::Any), Err(GraphError::DuplicateDirectPath));
        assert_eq!(generalized_theta(&[2, 3], Parity::Even), Err(GraphError::Parity { length: 3, parity: "even" }));
        assert_eq!(generalized_theta(&[2], Parity::Odd), Err(GraphError::Parity { length: 2, parity: "odd" }));
        assert!(generalized_theta(&[], Parity::Any).is_err());
        assert_eq!(generalized_theta(&[0, 2], Parity::Any), Err(GraphError::ZeroLength));
    }

    #[test]
    fn flower_examples() {
        assert!(is_isomorphic(&flower(&[3]).unwrap(), &k3()));
        let bowtie = flower(&[3, 3]).unwrap();
        assert_eq!((bowtie.n_vertices(), bowtie.n_edges()), (5, 6));
        assert_eq!(bowtie.degrees()[0], 4);
        let f = flower(&[4, 6]).unwrap();
        assert_eq!((f.n_vertices(), f.n_edges()), (9, 10));
        assert_eq!(flower(&[3, 2]), Err(GraphError::ShortCycle(2)));
    }

    #[test]
    fn subdivide_examples() {
        let c6 = subdivide(&k3(), &Subdivision::Uniform(1)).unwrap();
        assert!(is_isomorphic(&c6, &Graph::cycle(6).unwrap()));
        assert_eq!(subdivide(&k3(), &Subdivision::Uniform(0)).unwrap(), k3());
        let map = BTreeMap::from([((0, 1), 1), ((1, 2), 0), ((0, 2), 0)]);
        let c4 = subdivide(&k3(), &Subdivision::PerEdge(map)).unwrap();
        assert!(is_isomorphic(&c4, &Graph::cycle(4).unwrap()));
    }

    #[test]
    fn subdivide_rejects_partial_maps() {
        let partial = BTreeMap::from([((0, 1), 1)]);
        assert!(matches!(subdivide(&k3(), &Subdivision::PerEdge(partial)), Err(GraphError::SubdivisionMismatch(_))));
        let extra = BTreeMap::from([((0, 1), 1), ((1, 2), 0), ((0, 2), 0), ((0, 3), 0)]);
        assert!(subdivide(&k3(), &Subdivision::PerEdge(extra)).is_err());
    }

    #[test]
    fn replace_edges_examples() {
        let theta22 = generalized_theta(&[2, 2], Parity::Even).unwrap();
        let c4 = replace_edges(&Graph::complete(2), &theta22).unwrap();
        assert!(is_isomorphic(&c4, &Graph::cycle(4).unwrap()));

        let p2 = generalized_theta(&[2], Parity::Even).unwrap();
        let c6 = replace_edges(&k3(), &p2).unwrap();
        assert_eq!(c6, subdivide(&k3(), &Subdivision::Uniform(1)).unwrap());

        let two_c4 = replace_edges(&Graph::path(2), &theta22).unwrap();
        assert_eq!((two_c4.n_vertices(), two_c4.n_edges()), (7, 8));
        assert_eq!(two_c4.degrees()[1], 4);
    }

    #[test]
    fn semidirect_examples() {
        let edge = Graph::complete(2);
        let f = semidirect_product(&edge, &BTreeSet::from([0]), 1, &Graph::complete(2), 1).unwrap();
        assert!(is_isomorphic(&f, &Graph::cycle(4).unwrap()));

        // empty I: disjoint H1 copies plus the subdivided H2 on the anchors
        let f = semidirect_product(&edge, &BTreeSet::new(), 1, &Graph::complete(2), 1).unwrap();
        assert_eq!((f.n_vertices(), f.n_edges()), (5, 4));
        assert!(is_isomorphic(&f, &Graph::path(4)));
    }

    #[test]
    fn semidirect_errors() {
        let p2 = Graph::path(2);
        let k2 = Graph::complete(2);
        assert_eq!(semidirect_product(&p2, &BTreeSet::from([0, 1]), 2, &k2, 1), Err(GraphError::NotIndependent(0, 1)));
        assert_eq!(
            semidirect_product(&p2, &BTreeSet::from([0]), 0, &k2, 1),
            Err(GraphError::AnchorInIndependentSet(0))
        );
        assert_eq!(semidirect_product(&p2, &BTreeSet::from([0]), 2, &k2, 0), Err(GraphError::ZeroSubdivision));
    }

    #[test]
    fn clique_mixed_subdivision_matches_direct_subdivision() {
        for (h, l1, l2) in [(3, 1, 1), (3, 1, 2), (4, 1, 2), (3, 2, 3), (4, 2, 1)] {
            let built = clique_mixed_subdivision(h, l1, l2).unwrap();
            // vertex 0 of K_h is the distinguished one
            let map: BTreeMap<_, _> = Graph::complete(h)
                .edges()
                .iter()
                .map(|&(u, v)| ((u, v), if u == 0 { l2 - 1 } else { 2 * l1 - 1 }))
                .collect();
            let direct = subdivide(&Graph::complete(h), &Subdivision::PerEdge(map)).unwrap();
            assert!(is_isomorphic(&built, &direct), "h={h} l1={l1} l2={l2}");
        }
        assert!(is_isomorphic(&clique_mixed_subdivision(3, 1, 1).unwrap(), &Graph::cycle(4).unwrap()));
    }

    #[test]
    fn disjoint_union_examples() {
        let k2 = Graph::complete(2);
        let u = disjoint_union(&k2, &k2);
        assert_eq!((u.n_vertices(), u.n_edges()), (4, 2));
        let u = disjoint_union(&Graph::cycle(4).unwrap(), &Graph::cycle(6).unwrap());
        assert_eq!((u.n_vertices(), u.n_edges()), (10, 10));
        assert_eq!(disjoint_union(&k3(), &Graph::empty(0)), k3());
    }
}
