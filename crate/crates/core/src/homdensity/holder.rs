use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::{contract, density_of, ContractOptions, DensityError, DensityValue, Number};
use crate::graphs::{Graph, ReplacementSpec};
use crate::stepgraphon::StepGraphon;

/// The combined pair weight `E(x,y) = prod_k W^k(x,y)^{alpha_k}`, exact when
/// every exponent is an integer and in floating point otherwise. Zero
/// exponents contribute a factor of one.
pub fn pair_weight_grid(host: &Graph, spec: &ReplacementSpec, w: &StepGraphon) -> Result<PairWeights, DensityError> {
    spec.lengths_for(host)?;
    let alphas = spec.alphas(host.n_vertices());
    let n = w.n_steps();
    let integral = alphas.values().all(|a| a.is_integer());
    if integral {
        let mut grid = vec![BigRational::one(); n * n];
        for (&k, alpha) in &alphas {
            let power = alpha.to_integer().to_usize().expect("small exponent");
            if power == 0 {
                continue;
            }
            let wk = w.kernel_power(k);
            for (g, x) in grid.iter_mut().zip(wk.values()) {
                *g *= num_traits::pow(x.clone(), power);
            }
        }
        Ok(PairWeights::Exact(grid))
    } else {
        let mut grid = vec![1.0f64; n * n];
        for (&k, alpha) in &alphas {
            let a = crate::rational::to_f64(alpha);
            if a == 0.0 {
                continue;
            }
            let wk = w.kernel_power(k);
            for (g, x) in grid.iter_mut().zip(wk.float_values()) {
                *g *= x.powf(a);
            }
        }
        Ok(PairWeights::Float(grid))
    }
}

/// A pair-weight grid in either arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum PairWeights {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Lower bound on `t_{H'}(W)` obtained by spreading the replacement paths
/// evenly over all vertex pairs of the host: the density of the complete
/// graph on `V(H)` with pair weights [`pair_weight_grid`].
pub fn holder_lower_bound(host: &Graph, spec: &ReplacementSpec, w: &StepGraphon) -> Result<DensityValue, DensityError> {
    let h = host.n_vertices();
    let clique = Graph::complete(h);
    let n = w.n_steps();
    let value = match pair_weight_grid(host, spec, w)? {
        PairWeights::Exact(grid) => {
            Number::Exact(contract(&clique, n, &grid, &[], &[], ContractOptions::default())?.table.swap_remove(0))
        }
        PairWeights::Float(grid) => Number::Float(density_of(&clique, n, &grid)?),
    };
    Ok(DensityValue { value, v_h: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::replace_edges_nonuniform;
    use crate::homdensity::{exact_density, float_density};
    use crate::rational::ratio;
    use std::collections::BTreeMap;

    #[test]
    fn uniform_spec_on_triangle_is_c6_density() {
        let k3 = Graph::complete(3);
        let spec = ReplacementSpec::uniform(&k3, &BTreeMap::from([(2, 1)])).unwrap();
        let w = StepGraphon::constant(3, ratio(1, 3)).unwrap();
        let bound = holder_lower_bound(&k3, &spec, &w).unwrap();
        assert_eq!(bound.value, Number::Exact(num_traits::pow(ratio(1, 3), 6)));
        let c5 = StepGraphon::from_graph(&Graph::cycle(5).unwrap());
        let replaced = replace_edges_nonuniform(&k3, &spec).unwrap();
        assert_eq!(
            holder_lower_bound(&k3, &spec, &c5).unwrap().value,
            Number::Exact(exact_density(&replaced, &c5).unwrap())
        );
    }

    #[test]
    fn fractional_exponents_go_to_float() {
        let p = Graph::path(2);
        let spec =
            ReplacementSpec::new(p.edges().to_vec(), vec![BTreeMap::from([(2, 1)]), BTreeMap::from([(4, 1)])]).unwrap();
        let c5 = StepGraphon::from_graph(&Graph::cycle(5).unwrap());
        let bound = holder_lower_bound(&p, &spec, &c5).unwrap();
        assert!(matches!(bound.value, Number::Float(_)));
        let t = float_density(&replace_edges_nonuniform(&p, &spec).unwrap(), &c5).unwrap();
        assert!(t >= bound.to_f64() * (1.0 - 1e-12));
    }
}
