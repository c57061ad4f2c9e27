//! Homomorphism densities `t_H(W)` over step graphons, exact or in floating
//! point, plus pinned densities, gradients, Sidorenko/KNRS deficits and the
//! Hölder-type lower bound for non-uniform path replacements.

mod engine;
mod holder;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{Graph, GraphError, Vertex};
use crate::rational::{format_rational, to_f64, Scalar};
use crate::stepgraphon::StepGraphon;

pub use engine::{brute_force, contract, ContractOptions, EliminationOrder, Factor};
pub use holder::{holder_lower_bound, pair_weight_grid, PairWeights};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("vertex {0} is pinned or opened twice")]
    PinCollision(Vertex),
    #[error("vertex {0} is not in the pattern graph")]
    VertexOutOfRange(Vertex),
    #[error("step {step} out of range for {n} steps")]
    StepOutOfRange { step: usize, n: usize },
    #[error("elimination needs a factor of arity {arity}, above the cap of {cap}")]
    ArityOverflow { arity: usize, cap: usize },
    #[error("brute force would enumerate {maps:e} maps (limit 1e7)")]
    BruteForceTooLarge { maps: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Eliminate,
    Bruteforce,
}

/// A density together with the number of pattern vertices it is normalized
/// over.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityValue {
    pub value: Number,
    pub v_h: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Number::Exact(_) => Mode::Exact,
            Number::Float(_) => Mode::Float,
        }
    }
}

impl DensityValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let value = match &self.value {
            Number::Exact(r) => serde_json::Value::String(format_rational(r)),
            Number::Float(x) => serde_json::json!(x),
        };
        serde_json::json!({
            "mode": self.value.mode(),
            "value": value,
            "vH": self.v_h,
        })
    }
}

/// Density of `h` in `w`; with pins, the sum runs over maps extending the
/// pins and is normalized by the unpinned vertices only.
pub fn hom_density(
    h: &Graph,
    w: &StepGraphon,
    mode: Mode,
    strategy: Strategy,
    pins: &[(Vertex, usize)],
) -> Result<DensityValue, DensityError> {
    hom_density_with(h, w, mode, strategy, pins, ContractOptions::default())
}

pub fn hom_density_with(
    h: &Graph,
    w: &StepGraphon,
    mode: Mode,
    strategy: Strategy,
    pins: &[(Vertex, usize)],
    options: ContractOptions,
) -> Result<DensityValue, DensityError> {
    let n = w.n_steps();
    let value = match mode {
        Mode::Exact => {
            Number::Exact(evaluate(h, n, w.values(), pins, strategy, ContractOptions { exact: true, ..options })?)
        }
        Mode::Float => Number::Float(evaluate(
            h,
            n,
            w.float_values(),
            pins,
            strategy,
            ContractOptions { exact: false, ..options },
        )?),
    };
    Ok(DensityValue { value, v_h: h.n_vertices() })
}

fn evaluate<S: Scalar>(
    h: &Graph,
    n: usize,
    weights: &[S],
    pins: &[(Vertex, usize)],
    strategy: Strategy,
    options: ContractOptions,
) -> Result<S, DensityError> {
    match strategy {
        Strategy::Eliminate => Ok(contract(h, n, weights, pins, &[], options)?.table.swap_remove(0)),
        Strategy::Bruteforce => brute_force(h, n, weights, pins),
    }
}

/// Unpinned density over a raw row-major grid.
pub fn density_of<S: Scalar>(h: &Graph, n: usize, weights: &[S]) -> Result<S, DensityError> {
    let options = ContractOptions { exact: false, ..ContractOptions::default() };
    Ok(contract(h, n, weights, &[], &[], options)?.table.swap_remove(0))
}

pub fn exact_density(h: &Graph, w: &StepGraphon) -> Result<BigRational, DensityError> {
    Ok(contract(h, w.n_steps(), w.values(), &[], &[], ContractOptions::default())?.table.swap_remove(0))
}

pub fn float_density(h: &Graph, w: &StepGraphon) -> Result<f64, DensityError> {
    density_of(h, w.n_steps(), w.float_values())
}

/// Partial derivatives of `t_H` with respect to the grid entries, with
/// `A[u][v]` and `A[v][u]` treated as one variable: off-diagonal entries
/// collect both orientations, diagonal entries one.
pub fn density_gradient(h: &Graph, w: &StepGraphon) -> Result<Vec<f64>, DensityError> {
    gradient_of(h, w.n_steps(), w.float_values(), true)
}

/// Gradient over a raw grid. With `tied = false` each ordered entry is its
/// own variable (the Frobenius gradient of the symmetric extension), which
/// halves the off-diagonal entries of the tied version.
pub fn gradient_of(h: &Graph, n: usize, weights: &[f64], tied: bool) -> Result<Vec<f64>, DensityError> {
    let mut grad = vec![0.0; n * n];
    let scale = 1.0 / (n * n) as f64;
    let options = ContractOptions { exact: false, ..ContractOptions::default() };
    for &(i, j) in h.edges() {
        let rest = h.without_edge(i, j);
        let kernel = contract(&rest, n, weights, &[], &[i, j], options)?;
        for u in 0..n {
            for v in 0..n {
                let both = kernel.get(n, &[u, v]) + kernel.get(n, &[v, u]);
                grad[u * n + v] += if u == v {
                    kernel.get(n, &[u, u]) * scale
                } else if tied {
                    both * scale
                } else {
                    both * scale / 2.0
                };
            }
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    /// `t_{K2}(W)^{e(H)}`
    Sidorenko,
    /// `d^{e(H)}`
    Knrs(BigRational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deficit {
    pub value: f64,
    pub exact: Option<BigRational>,
    pub density: f64,
    pub baseline: f64,
}

/// `t_H(W)` minus the chosen baseline; negative means the inequality fails
/// at `W`.
pub fn deficit(h: &Graph, w: &StepGraphon, baseline: &Baseline, mode: Mode) -> Result<Deficit, DensityError> {
    let e = h.n_edges() as i32;
    match mode {
        Mode::Exact => {
            let t = exact_density(h, w)?;
            let base = match baseline {
                Baseline::Sidorenko => num_traits::pow(w.edge_density(), e as usize),
                Baseline::Knrs(d) => num_traits::pow(d.clone(), e as usize),
            };
            let gap = &t - &base;
            Ok(Deficit { value: to_f64(&gap), exact: Some(gap), density: to_f64(&t), baseline: to_f64(&base) })
        }
        Mode::Float => {
            let t = float_density(h, w)?;
            let base = match baseline {
                Baseline::Sidorenko => to_f64(&w.edge_density()).powi(e),
                Baseline::Knrs(d) => to_f64(d).powi(e),
            };
            Ok(Deficit { value: t - base, exact: None, density: t, baseline: base })
        }
    }
}

/// Sidorenko deficit over a raw float grid.
pub fn sidorenko_deficit_of(h: &Graph, n: usize, weights: &[f64]) -> Result<f64, DensityError> {
    let t = density_of(h, n, weights)?;
    let edge: f64 = weights.iter().sum::<f64>() / (n * n) as f64;
    Ok(t - edge.powi(h.n_edges() as i32))
}

/// Evaluates many `(graph, graphon)` pairs, possibly in parallel; results
/// come back in input order.
pub fn hom_density_batch(pairs: &[(&Graph, &StepGraphon)], mode: Mode) -> Vec<Result<DensityValue, DensityError>> {
    pairs.par_iter().map(|(h, w)| hom_density(h, w, mode, Strategy::Eliminate, &[])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use num_traits::Zero;

    fn bipartite2() -> StepGraphon {
        StepGraphon::from_graph(&Graph::complete(2))
    }

    #[test]
    fn worked_examples() {
        let half = StepGraphon::constant(3, ratio(1, 2)).unwrap();
        let k3 = Graph::complete(3);
        assert_eq!(exact_density(&k3, &half).unwrap(), ratio(1, 8));
        let c4 = Graph::cycle(4).unwrap();
        assert_eq!(exact_density(&c4, &bipartite2()).unwrap(), ratio(1, 8));
        let pinned =
            hom_density(&Graph::complete(2), &bipartite2(), Mode::Exact, Strategy::Eliminate, &[(0, 0), (1, 1)])
                .unwrap();
        assert_eq!(pinned.value, Number::Exact(ratio(1, 1)));
        assert_eq!(pinned.v_h, 2);
    }

    #[test]
    fn strategies_and_modes_agree() {
        let c5 = StepGraphon::from_graph(&Graph::cycle(5).unwrap());
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)]).unwrap();
        let a = hom_density(&g, &c5, Mode::Exact, Strategy::Eliminate, &[]).unwrap();
        let b = hom_density(&g, &c5, Mode::Exact, Strategy::Bruteforce, &[]).unwrap();
        let c = hom_density(&g, &c5, Mode::Float, Strategy::Eliminate, &[]).unwrap();
        assert_eq!(a, b);
        assert!((a.to_f64() - c.to_f64()).abs() < 1e-15);
    }

    #[test]
    fn density_json_shape() {
        let d = DensityValue { value: Number::Exact(ratio(1, 8)), v_h: 4 };
        assert_eq!(d.to_json().to_string(), r#"{"mode":"exact","vH":4,"value":"1/8"}"#);
        let f = DensityValue { value: Number::Float(0.125), v_h: 4 };
        assert_eq!(f.to_json()["value"], serde_json::json!(0.125));
    }

    #[test]
    fn k2_gradient_is_constant() {
        let w = StepGraphon::constant(3, ratio(1, 3)).unwrap();
        let g = density_gradient(&Graph::complete(2), &w).unwrap();
        for u in 0..3 {
            for v in 0..3 {
                let expect = if u == v { 1.0 / 9.0 } else { 2.0 / 9.0 };
                assert!((g[u * 3 + v] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn c4_deficit_on_bipartite_graphon() {
        let c4 = Graph::cycle(4).unwrap();
        let d = deficit(&c4, &bipartite2(), &Baseline::Sidorenko, Mode::Exact).unwrap();
        assert_eq!(d.exact, Some(ratio(1, 16)));
        let f = deficit(&c4, &bipartite2(), &Baseline::Sidorenko, Mode::Float).unwrap();
        assert!((f.value - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn tree_deficit_is_exactly_zero_on_regular_graphons() {
        let w = StepGraphon::from_graph(&Graph::cycle(5).unwrap());
        for tree in [Graph::path(4), Graph::star(3), Graph::new(6, [(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)]).unwrap()] {
            let d = deficit(&tree, &w, &Baseline::Knrs(ratio(2, 5)), Mode::Exact).unwrap();
            assert_eq!(d.exact, Some(BigRational::zero()));
        }
    }

    #[test]
    fn batch_preserves_order() {
        let w = bipartite2();
        let graphs = [Graph::cycle(4).unwrap(), Graph::complete(2), Graph::complete(3)];
        let pairs: Vec<_> = graphs.iter().map(|g| (g, &w)).collect();
        let out: Vec<f64> = hom_density_batch(&pairs, Mode::Exact).into_iter().map(|r| r.unwrap().to_f64()).collect();
        assert_eq!(out, vec![0.125, 0.5, 0.0]);
    }
}
