use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Graph, GraphError, RootedGraph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeDecompositionError {
    #[error("bag graph is not a tree")]
    NotATree,
    #[error("bag {bag} holds vertex {vertex}, which is not in the graph")]
    UnknownVertex { bag: usize, vertex: Vertex },
    #[error("tree edge refers to missing bag {0}")]
    UnknownBag(usize),
    #[error("vertex {0} is in no bag")]
    VertexUncovered(Vertex),
    #[error("edge {0}-{1} is in no bag")]
    EdgeUncovered(Vertex, Vertex),
    #[error("bags containing vertex {0} do not form a subtree")]
    Disconnected(Vertex),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<Vertex>>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(0).saturating_sub(1)
    }

    /// Checks the tree shape and the three decomposition axioms against `g`.
    pub fn validate(&self, g: &Graph) -> Result<(), TreeDecompositionError> {
        let b = self.bags.len();
        for &(x, y) in &self.tree_edges {
            for i in [x, y] {
                if i >= b {
                    return Err(TreeDecompositionError::UnknownBag(i));
                }
            }
        }
        let bag_tree = Graph::new(b, self.tree_edges.iter().copied()).map_err(|_| TreeDecompositionError::NotATree)?;
        if !bag_tree.is_tree() {
            return Err(TreeDecompositionError::NotATree);
        }
        for (i, bag) in self.bags.iter().enumerate() {
            if let Some(&v) = bag.iter().find(|&&v| v >= g.n_vertices()) {
                return Err(TreeDecompositionError::UnknownVertex { bag: i, vertex: v });
            }
        }
        for v in 0..g.n_vertices() {
            if !self.bags.iter().any(|bag| bag.contains(&v)) {
                return Err(TreeDecompositionError::VertexUncovered(v));
            }
        }
        for &(u, v) in g.edges() {
            if !self.bags.iter().any(|bag| bag.contains(&u) && bag.contains(&v)) {
                return Err(TreeDecompositionError::EdgeUncovered(u, v));
            }
        }
        // the bags holding v induce a subtree iff they span |bags|-1 tree edges
        for v in 0..g.n_vertices() {
            let holding = self.bags.iter().filter(|bag| bag.contains(&v)).count();
            let internal = self
                .tree_edges
                .iter()
                .filter(|&&(x, y)| self.bags[x].contains(&v) && self.bags[y].contains(&v))
                .count();
            if internal + 1 != holding {
                return Err(TreeDecompositionError::Disconnected(v));
            }
        }
        Ok(())
    }
}

/// Builds the odd theta graph with the given path lengths together with the
/// star-shaped decomposition into trees `T0, .., T(k-1)`.
///
/// `T0` hangs `k` arms off `s`: one of length `l_k` ending at `t`, and for
/// each `i < k` one of length `(l_i - l_k)/2` ending at `x_i` (so `x_i = s`
/// when `l_i = l_k`). `T_i` is a path of length `(l_i + l_k)/2` from `t` to
/// `x_i`. Roots are `s = 0` and `t = 1`; bag `i` is `V(T_i)`, and bag 0 is the
/// center of the star.
pub fn odd_theta_decomposition(lengths: &[usize]) -> Result<(RootedGraph, TreeDecomposition), GraphError> {
    if lengths.len() < 2 {
        return Err(GraphError::TooFewPaths("odd theta decomposition", 2));
    }
    if let Some(&length) = lengths.iter().find(|&&l| l % 2 == 0) {
        return Err(GraphError::Parity { length, parity: "odd" });
    }
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let k = sorted.len();
    let shortest = sorted[k - 1];
    if k >= 2 && sorted[k - 2] == 1 {
        return Err(GraphError::DuplicateDirectPath);
    }

    let (s, t) = (0, 1);
    let mut n = 2;
    let mut edges = Vec::new();
    let mut bags: Vec<BTreeSet<Vertex>> = vec![BTreeSet::from([s, t])];

    let mut walk = |from: Vertex, to: Option<Vertex>, length: usize, bag: &mut BTreeSet<Vertex>| {
        let mut prev = from;
        for step in 0..length {
            let next = match to {
                Some(end) if step + 1 == length => end,
                _ => {
                    n += 1;
                    n - 1
                }
            };
            edges.push((prev, next));
            bag.insert(next);
            prev = next;
        }
        prev
    };

    let mut center = bags.pop().expect("center bag");
    walk(s, Some(t), shortest, &mut center);
    let ends: Vec<Vertex> = sorted[..k - 1].iter().map(|&l| walk(s, None, (l - shortest) / 2, &mut center)).collect();
    bags.push(center);
    for (i, &l) in sorted[..k - 1].iter().enumerate() {
        let mut bag = BTreeSet::from([t]);
        walk(t, Some(ends[i]), (l + shortest) / 2, &mut bag);
        bags.push(bag);
    }

    let graph = Graph::new(n, edges)?;
    let theta = RootedGraph::new(graph, s, t)?;
    let tree_edges = (1..k).map(|i| (0, i)).collect();
    Ok((theta, TreeDecomposition { bags, tree_edges }))
}
