use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, Vertex};

/// For every host edge, the multiset of path lengths that replaces it
/// (`length -> count`). Edges are kept in the order they were given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct ReplacementSpec {
    edges: Vec<(Vertex, Vertex)>,
    lengths: Vec<BTreeMap<usize, usize>>,
}

#[derive(Serialize, Deserialize)]
struct LengthCount {
    k: usize,
    count: usize,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    edges: Vec<[Vertex; 2]>,
    lengths: Vec<Vec<LengthCount>>,
}

impl TryFrom<SpecJson> for ReplacementSpec {
    type Error = GraphError;
    fn try_from(json: SpecJson) -> Result<Self, Self::Error> {
        if json.edges.len() != json.lengths.len() {
            return Err(GraphError::InvalidSpec(format!(
                "{} edges but {} length lists",
                json.edges.len(),
                json.lengths.len()
            )));
        }
        let mut lengths = Vec::with_capacity(json.lengths.len());
        for list in json.lengths {
            let mut map = BTreeMap::new();
            for LengthCount { k, count } in list {
                *map.entry(k).or_insert(0) += count;
            }
            lengths.push(map);
        }
        ReplacementSpec::new(json.edges.iter().map(|e| (e[0], e[1])).collect(), lengths)
    }
}

impl From<ReplacementSpec> for SpecJson {
    fn from(spec: ReplacementSpec) -> Self {
        SpecJson {
            edges: spec.edges.iter().map(|&(u, v)| [u, v]).collect(),
            lengths: spec
                .lengths
                .iter()
                .map(|m| m.iter().map(|(&k, &count)| LengthCount { k, count }).collect())
                .collect(),
        }
    }
}

fn binom2(h: usize) -> usize {
    h * h.saturating_sub(1) / 2
}

impl ReplacementSpec {
    pub fn new(edges: Vec<(Vertex, Vertex)>, lengths: Vec<BTreeMap<usize, usize>>) -> Result<Self, GraphError> {
        if edges.len() != lengths.len() {
            return Err(GraphError::InvalidSpec(format!("{} edges but {} length lists", edges.len(), lengths.len())));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut norm_edges = Vec::with_capacity(edges.len());
        let mut norm_lengths = Vec::with_capacity(lengths.len());
        for (&(u, v), map) in edges.iter().zip(lengths) {
            if u == v {
                return Err(GraphError::Loop(u));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(GraphError::MultiEdge(e.0, e.1));
            }
            let map: BTreeMap<usize, usize> = map.into_iter().filter(|&(_, c)| c > 0).collect();
            if map.is_empty() {
                return Err(GraphError::InvalidSpec(format!("edge {}-{} has no paths", e.0, e.1)));
            }
            if map.contains_key(&0) {
                return Err(GraphError::ZeroLength);
            }
            if map.get(&1).copied().unwrap_or(0) > 1 {
                return Err(GraphError::InvalidSpec(format!("edge {}-{} has more than one length-1 path", e.0, e.1)));
            }
            norm_edges.push(e);
            norm_lengths.push(map);
        }
        Ok(ReplacementSpec { edges: norm_edges, lengths: norm_lengths })
    }

    /// The same multiset on every edge of `host`.
    pub fn uniform(host: &Graph, lengths: &BTreeMap<usize, usize>) -> Result<Self, GraphError> {
        ReplacementSpec::new(host.edges().to_vec(), vec![lengths.clone(); host.n_edges()])
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn lengths(&self) -> &[BTreeMap<usize, usize>] {
        &self.lengths
    }

    /// Per-length totals `sum_e h_e(k)`.
    pub fn class_totals(&self) -> BTreeMap<usize, usize> {
        let mut totals = BTreeMap::new();
        for map in &self.lengths {
            for (&k, &c) in map {
                *totals.entry(k).or_insert(0) += c;
            }
        }
        totals
    }

    /// `alpha_k = sum_e h_e(k) / C(h, 2)` for a host on `h` vertices.
    pub fn alphas(&self, h: usize) -> BTreeMap<usize, BigRational> {
        let denom = BigInt::from(binom2(h).max(1));
        self.class_totals()
            .into_iter()
            .map(|(k, total)| (k, BigRational::new(BigInt::from(total), denom.clone())))
            .collect()
    }

    /// Edge count of the replaced graph.
    pub fn total_edges(&self) -> usize {
        self.class_totals().iter().map(|(&k, &c)| k * c).sum()
    }

    pub fn all_even(&self) -> bool {
        self.class_totals().keys().all(|k| k % 2 == 0)
    }

    /// The length multisets aligned with `host.edges()`, after checking that
    /// the spec covers exactly the host's edges.
    pub fn lengths_for<'a>(&'a self, host: &Graph) -> Result<Vec<&'a BTreeMap<usize, usize>>, GraphError> {
        if self.edges.len() != host.n_edges() {
            return Err(GraphError::SpecMismatch(format!(
                "spec has {} edges, host has {}",
                self.edges.len(),
                host.n_edges()
            )));
        }
        let index: BTreeMap<_, _> = self.edges.iter().zip(&self.lengths).collect();
        host.edges()
            .iter()
            .map(|e| {
                index
                    .get(e)
                    .copied()
                    .ok_or_else(|| GraphError::SpecMismatch(format!("host edge {}-{} not in spec", e.0, e.1)))
            })
            .collect()
    }
}

/// Which clause of the non-uniform replacement theorem applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplacementClass {
    /// Every even class total is a multiple of `C(h,2)`; carries the
    /// (integral) `alpha` per path length.
    Divisible {
        alphas: BTreeMap<usize, BigRational>,
    },
    /// Exactly one nonzero length class, with total at least `C(h,2)`.
    SingleLength {
        length: usize,
        total: usize,
    },
    NotCovered(NotCovered),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotCovered {
    /// A path of odd length appears.
    OddLength { length: usize },
    /// The class of paths of length `2k` is the first whose total is not a
    /// multiple of `C(h,2)`.
    NotDivisible { k: usize, total: usize, modulus: usize },
}

impl ReplacementClass {
    pub fn is_covered(&self) -> bool {
        !matches!(self, ReplacementClass::NotCovered(_))
    }
}

/// Decides which clause covers `spec` on `host`. Divisibility wins when both
/// clauses hold.
pub fn classify_theorem12(host: &Graph, spec: &ReplacementSpec) -> Result<ReplacementClass, GraphError> {
    spec.lengths_for(host)?;
    let totals = spec.class_totals();
    if let Some(&length) = totals.keys().find(|&&k| k % 2 == 1) {
        return Ok(ReplacementClass::NotCovered(NotCovered::OddLength { length }));
    }
    let modulus = binom2(host.n_vertices());
    if modulus == 0 {
        // no edges at all
        return Ok(ReplacementClass::Divisible { alphas: BTreeMap::new() });
    }
    let first_bad = totals.iter().find(|(_, &total)| total % modulus != 0);
    match first_bad {
        None => Ok(ReplacementClass::Divisible { alphas: spec.alphas(host.n_vertices()) }),
        Some((&length, &total)) => {
            if totals.len() == 1 && total >= modulus {
                Ok(ReplacementClass::SingleLength { length, total })
            } else {
                Ok(ReplacementClass::NotCovered(NotCovered::NotDivisible { k: length / 2, total, modulus }))
            }
        }
    }
}
