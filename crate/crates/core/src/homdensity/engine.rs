//! Sum-product contraction of a graph against a symmetric weight grid by
//! variable elimination. A variable is one vertex of `H` ranging over the
//! `n` steps; each edge is a binary factor; eliminating a vertex sums it out
//! and multiplies by `1/n`, so the final value is a normalized density.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DensityError;
use crate::graphs::{Graph, Vertex};
use crate::rational::Scalar;

/// Largest table the float path will allocate (entries).
const FLOAT_TABLE_LIMIT: usize = 1 << 26;

/// Vertex order for elimination plus the arity of the product factor formed
/// at each step (eliminated vertex and its neighbors at that time).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationOrder {
    pub order: Vec<Vertex>,
    pub arities: Vec<usize>,
}

impl EliminationOrder {
    /// Greedy min-fill over the vertices in `eliminate`, breaking ties by
    /// smaller current degree and then smaller index. Vertices of `graph`
    /// outside `eliminate` and outside `ignore` stay in the interaction graph
    /// but are never eliminated; `ignore` vertices are dropped entirely.
    pub fn min_fill(graph: &Graph, eliminate: &BTreeSet<Vertex>, ignore: &BTreeSet<Vertex>) -> Self {
        let n = graph.n_vertices();
        let mut nbrs: Vec<BTreeSet<Vertex>> = vec![BTreeSet::new(); n];
        for &(u, v) in graph.edges() {
            if ignore.contains(&u) || ignore.contains(&v) {
                continue;
            }
            nbrs[u].insert(v);
            nbrs[v].insert(u);
        }
        let mut remaining = eliminate.clone();
        let mut order = Vec::with_capacity(remaining.len());
        let mut arities = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let best = remaining
                .iter()
                .copied()
                .min_by_key(|&v| {
                    let around: Vec<Vertex> = nbrs[v].iter().copied().collect();
                    let mut fill = 0;
                    for (i, &a) in around.iter().enumerate() {
                        for &b in &around[i + 1..] {
                            if !nbrs[a].contains(&b) {
                                fill += 1;
                            }
                        }
                    }
                    (fill, around.len(), v)
                })
                .expect("non-empty");
            let around: Vec<Vertex> = nbrs[best].iter().copied().collect();
            for (i, &a) in around.iter().enumerate() {
                for &b in &around[i + 1..] {
                    nbrs[a].insert(b);
                    nbrs[b].insert(a);
                }
            }
            for &a in &around {
                nbrs[a].remove(&best);
            }
            nbrs[best].clear();
            remaining.remove(&best);
            order.push(best);
            arities.push(around.len() + 1);
        }
        EliminationOrder { order, arities }
    }

    pub fn max_arity(&self) -> usize {
        self.arities.iter().copied().max().unwrap_or(0)
    }

    /// Induced width of the order.
    pub fn width(&self) -> usize {
        self.max_arity().saturating_sub(1)
    }
}

/// A table over `scope`; entry index is `sum_i x[scope[i]] * n^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor<S> {
    pub scope: Vec<Vertex>,
    pub table: Vec<S>,
}

impl<S: Scalar> Factor<S> {
    fn constant(value: S) -> Self {
        Factor { scope: Vec::new(), table: vec![value] }
    }

    /// Entry for an assignment of `scope`, given in scope order.
    pub fn get(&self, n: usize, assignment: &[usize]) -> &S {
        debug_assert_eq!(assignment.len(), self.scope.len());
        let mut idx = 0;
        let mut stride = 1;
        for &x in assignment {
            idx += x * stride;
            stride *= n;
        }
        &self.table[idx]
    }
}

/// Multiplies `factors` into one table over `target` (every factor scope must
/// be inside `target ∪ {summed}`), summing out `summed` if given and scaling
/// the sum by `scale`.
fn combine<S: Scalar>(n: usize, factors: &[Factor<S>], target: &[Vertex], summed: Option<(Vertex, &S)>) -> Factor<S> {
    let mut full: Vec<Vertex> = target.to_vec();
    if let Some((v, _)) = summed {
        full.push(v);
    }
    let pos = |x: Vertex| full.iter().position(|&y| y == x).expect("variable in scope");
    // stride of each factor along each position of `full`
    let strides: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| {
            let mut s = vec![0; full.len()];
            let mut stride = 1;
            for &x in &f.scope {
                s[pos(x)] = stride;
                stride *= n;
            }
            s
        })
        .collect();
    let out_len = n.pow(target.len() as u32);
    let inner = if summed.is_some() { n } else { 1 };
    let mut table = Vec::with_capacity(out_len);
    let mut assign = vec![0usize; full.len()];
    let mut base_idx = vec![0usize; factors.len()];
    for out in 0..out_len {
        // decode the target part of the assignment
        let mut rest = out;
        for slot in assign.iter_mut().take(target.len()) {
            *slot = rest % n;
            rest /= n;
        }
        for (fi, s) in strides.iter().enumerate() {
            base_idx[fi] = (0..target.len()).map(|p| assign[p] * s[p]).sum();
        }
        let mut acc = S::zero();
        for x in 0..inner {
            let mut prod: Option<S> = None;
            for (fi, f) in factors.iter().enumerate() {
                let mut idx = base_idx[fi];
                if summed.is_some() {
                    idx += x * strides[fi][full.len() - 1];
                }
                let entry = &f.table[idx];
                prod = Some(match prod {
                    None => entry.clone(),
                    Some(p) => p.mul_ref(entry),
                });
            }
            acc.add_assign_ref(&prod.unwrap_or_else(S::one));
        }
        if let Some((_, scale)) = summed {
            acc = acc.mul_ref(scale);
        }
        table.push(acc);
    }
    Factor { scope: target.to_vec(), table }
}

/// Settings for [`contract`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractOptions {
    /// Refuse orders whose largest product factor exceeds this arity when
    /// working in exact arithmetic.
    pub max_exact_arity: usize,
    pub exact: bool,
}

impl Default for ContractOptions {
    fn default() -> Self {
        ContractOptions { max_exact_arity: 9, exact: true }
    }
}

/// Contracts `h` against `weights` (row-major `n x n`) with some vertices
/// pinned to steps and `outputs` left open. The result is a factor over
/// `outputs` (in the given order); every other unpinned vertex is summed out
/// with weight `1/n`.
pub fn contract<S: Scalar>(
    h: &Graph,
    n: usize,
    weights: &[S],
    pins: &[(Vertex, usize)],
    outputs: &[Vertex],
    options: ContractOptions,
) -> Result<Factor<S>, DensityError> {
    assert_eq!(weights.len(), n * n, "weight grid must be n x n");
    let v_h = h.n_vertices();
    let mut pinned = vec![None; v_h];
    for &(v, step) in pins {
        if v >= v_h {
            return Err(DensityError::VertexOutOfRange(v));
        }
        if step >= n {
            return Err(DensityError::StepOutOfRange { step, n });
        }
        if pinned[v].is_some() {
            return Err(DensityError::PinCollision(v));
        }
        pinned[v] = Some(step);
    }
    let mut seen_out = BTreeSet::new();
    for &v in outputs {
        if v >= v_h {
            return Err(DensityError::VertexOutOfRange(v));
        }
        if pinned[v].is_some() || !seen_out.insert(v) {
            return Err(DensityError::PinCollision(v));
        }
    }

    let mut scalar = S::one();
    let mut factors: Vec<Factor<S>> = Vec::new();
    for &(u, v) in h.edges() {
        match (pinned[u], pinned[v]) {
            (Some(a), Some(b)) => scalar = scalar.mul_ref(&weights[a * n + b]),
            (Some(a), None) | (None, Some(a)) => {
                let free = if pinned[u].is_some() { v } else { u };
                let table = (0..n).map(|x| weights[a * n + x].clone()).collect();
                factors.push(Factor { scope: vec![free], table });
            }
            (None, None) => {
                let mut table = Vec::with_capacity(n * n);
                for y in 0..n {
                    for x in 0..n {
                        table.push(weights[x * n + y].clone());
                    }
                }
                factors.push(Factor { scope: vec![u, v], table });
            }
        }
    }

    let pinned_set: BTreeSet<Vertex> = pins.iter().map(|&(v, _)| v).collect();
    let eliminate: BTreeSet<Vertex> = (0..v_h).filter(|v| !pinned_set.contains(v) && !seen_out.contains(v)).collect();
    let order = EliminationOrder::min_fill(h, &eliminate, &pinned_set);
    check_arity(&order, outputs.len(), n, options)?;

    let inv_n = S::recip_of(n);
    for &v in &order.order {
        let (touching, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.scope.contains(&v));
        factors = rest;
        if touching.is_empty() {
            // an isolated variable integrates to 1
            continue;
        }
        let target: Vec<Vertex> = touching
            .iter()
            .flat_map(|f| f.scope.iter().copied())
            .filter(|&x| x != v)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        factors.push(combine(n, &touching, &target, Some((v, &inv_n))));
    }

    factors.push(Factor::constant(scalar));
    Ok(combine(n, &factors, outputs, None))
}

fn check_arity(
    order: &EliminationOrder,
    n_outputs: usize,
    n: usize,
    options: ContractOptions,
) -> Result<(), DensityError> {
    let arity = order.max_arity().max(n_outputs);
    if options.exact {
        if arity > options.max_exact_arity {
            return Err(DensityError::ArityOverflow { arity, cap: options.max_exact_arity });
        }
    } else if (n as f64).powi(arity as i32) > FLOAT_TABLE_LIMIT as f64 {
        return Err(DensityError::ArityOverflow { arity, cap: arity - 1 });
    }
    Ok(())
}

/// Normalized sum over every map `V(h) -> [n]` extending `pins`, by direct
/// enumeration.
pub fn brute_force<S: Scalar>(h: &Graph, n: usize, weights: &[S], pins: &[(Vertex, usize)]) -> Result<S, DensityError> {
    let v_h = h.n_vertices();
    let mut assign = vec![0usize; v_h];
    let mut is_pinned = vec![false; v_h];
    for &(v, step) in pins {
        if v >= v_h {
            return Err(DensityError::VertexOutOfRange(v));
        }
        if step >= n {
            return Err(DensityError::StepOutOfRange { step, n });
        }
        if is_pinned[v] {
            return Err(DensityError::PinCollision(v));
        }
        is_pinned[v] = true;
        assign[v] = step;
    }
    let free: Vec<Vertex> = (0..v_h).filter(|&v| !is_pinned[v]).collect();
    let total = (n as f64).powi(free.len() as i32);
    if total > 1e7 {
        return Err(DensityError::BruteForceTooLarge { maps: total });
    }
    let mut sum = S::zero();
    let count = n.pow(free.len() as u32);
    for code in 0..count {
        let mut rest = code;
        for &v in &free {
            assign[v] = rest % n;
            rest /= n;
        }
        let mut prod = S::one();
        for &(u, v) in h.edges() {
            prod = prod.mul_ref(&weights[assign[u] * n + assign[v]]);
        }
        sum.add_assign_ref(&prod);
    }
    let mut scale = S::one();
    let inv_n = S::recip_of(n);
    for _ in 0..free.len() {
        scale = scale.mul_ref(&inv_n);
    }
    Ok(sum.mul_ref(&scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use num_rational::BigRational;

    fn grid(rows: &[&[i64]], den: i64) -> Vec<BigRational> {
        rows.iter().flat_map(|r| r.iter().map(|&x| ratio(x, den))).collect()
    }

    #[test]
    fn min_fill_on_a_cycle_has_width_two() {
        let c6 = Graph::cycle(6).unwrap();
        let all: BTreeSet<_> = (0..6).collect();
        let order = EliminationOrder::min_fill(&c6, &all, &BTreeSet::new());
        assert_eq!(order.order.len(), 6);
        assert_eq!(order.width(), 2);
        assert_eq!(order.order[0], 0);
    }

    #[test]
    fn min_fill_on_a_tree_has_width_one() {
        let t = Graph::star(5);
        let all: BTreeSet<_> = (0..6).collect();
        assert_eq!(EliminationOrder::min_fill(&t, &all, &BTreeSet::new()).width(), 1);
    }

    #[test]
    fn c4_on_bipartite_two_step() {
        let w = grid(&[&[0, 1], &[1, 0]], 1);
        let c4 = Graph::cycle(4).unwrap();
        let f = contract(&c4, 2, &w, &[], &[], ContractOptions::default()).unwrap();
        assert_eq!(f.table, vec![ratio(1, 8)]);
        assert_eq!(brute_force(&c4, 2, &w, &[]).unwrap(), ratio(1, 8));
    }

    #[test]
    fn outputs_give_the_two_step_kernel() {
        // path 0-1-2 with ends open: (1/n) A^2
        let w = grid(&[&[0, 1, 1], &[1, 0, 0], &[1, 0, 1]], 1);
        let f = contract(&Graph::path(2), 3, &w, &[], &[0, 2], ContractOptions::default()).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let expect: BigRational =
                    (0..3).map(|z| &w[x * 3 + z] * &w[z * 3 + y]).sum::<BigRational>() * ratio(1, 3);
                assert_eq!(f.get(3, &[x, y]), &expect);
            }
        }
    }

    #[test]
    fn pins_and_errors() {
        let w = grid(&[&[0, 1], &[1, 0]], 1);
        let k2 = Graph::complete(2);
        let f = contract(&k2, 2, &w, &[(0, 0), (1, 1)], &[], ContractOptions::default()).unwrap();
        assert_eq!(f.table, vec![ratio(1, 1)]);
        assert_eq!(
            contract(&k2, 2, &w, &[(0, 0), (0, 1)], &[], ContractOptions::default()),
            Err(DensityError::PinCollision(0))
        );
        assert_eq!(
            contract(&k2, 2, &w, &[(0, 2)], &[], ContractOptions::default()),
            Err(DensityError::StepOutOfRange { step: 2, n: 2 })
        );
        assert_eq!(brute_force(&k2, 2, &w, &[(5, 0)]), Err(DensityError::VertexOutOfRange(5)));
    }

    #[test]
    fn arity_cap_is_enforced_in_exact_mode() {
        let k5 = Graph::complete(5);
        let w = vec![ratio(1, 2); 4];
        let tight = ContractOptions { max_exact_arity: 3, exact: true };
        assert!(matches!(contract(&k5, 2, &w, &[], &[], tight), Err(DensityError::ArityOverflow { .. })));
        assert_eq!(contract(&k5, 2, &w, &[], &[], ContractOptions::default()).unwrap().table, vec![ratio(1, 1024)]);
    }

    #[test]
    fn isolated_vertices_integrate_to_one() {
        let g = Graph::new(4, [(0, 1)]).unwrap();
        let w = grid(&[&[1, 0], &[0, 0]], 1);
        let f = contract(&g, 2, &w, &[], &[], ContractOptions::default()).unwrap();
        assert_eq!(f.table, vec![ratio(1, 4)]);
        let open = contract(&g, 2, &w, &[], &[3], ContractOptions::default()).unwrap();
        assert_eq!(open.table, vec![ratio(1, 4), ratio(1, 4)]);
    }

    #[test]
    fn brute_force_refuses_huge_enumerations() {
        let g = Graph::empty(12);
        let w = vec![1.0; 16];
        assert!(matches!(brute_force(&g, 4, &w, &[]), Err(DensityError::BruteForceTooLarge { .. })));
    }
}
