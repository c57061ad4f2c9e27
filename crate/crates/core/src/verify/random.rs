use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::graphs::Graph;
use crate::stepgraphon::{circulant, mixture, random_regular_graph, StepGraphon};

const DENOMINATORS: [i64; 6] = [2, 3, 4, 5, 6, 8];

fn small_rational<R: Rng>(rng: &mut R) -> BigRational {
    let q = *DENOMINATORS.choose(rng).unwrap();
    BigRational::new(BigInt::from(rng.gen_range(0..=q)), BigInt::from(q))
}

/// Symmetric grid with entries `k/q` for small `q`.
pub fn random_rational_graphon<R: Rng>(n: usize, rng: &mut R) -> StepGraphon {
    let mut values = vec![BigRational::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let x = small_rational(rng);
            values[i * n + j] = x.clone();
            values[j * n + i] = x;
        }
    }
    StepGraphon::new(n, values).expect("entries are in [0, 1]")
}

/// Graph on `n` vertices with each edge present with probability 1/2.
pub fn random_graph<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.gen_bool(0.5)).collect();
    Graph::new(n, edges).expect("distinct pairs")
}

/// Random recursive tree on `n` vertices.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    Graph::new(n, (1..n).map(|v| (rng.gen_range(0..v), v))).expect("tree edges are distinct")
}

/// Weighted sum of symmetrized permutation matrices `(P + P^T)/2`; every
/// row sums to the total weight.
fn birkhoff<R: Rng>(n: usize, rng: &mut R) -> StepGraphon {
    let terms = rng.gen_range(1..=3);
    let den = 8 * terms as i64;
    let mut values = vec![BigRational::zero(); n * n];
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..terms {
        perm.shuffle(rng);
        let weight = BigRational::new(BigInt::from(rng.gen_range(0..=8)), BigInt::from(den));
        let half = &weight / BigInt::from(2);
        for i in 0..n {
            values[i * n + perm[i]] += &half;
            values[perm[i] * n + i] += &half;
        }
    }
    StepGraphon::new(n, values).expect("weights sum to at most 1")
}

/// A random regular step graphon with rational entries: a permuted
/// circulant, a random regular graph, a Birkhoff-type sum, a constant, or a
/// mixture of two of these.
pub fn random_regular_graphon<R: Rng>(n: usize, rng: &mut R) -> StepGraphon {
    match rng.gen_range(0..5) {
        4 => {
            let weight = BigRational::new(BigInt::from(rng.gen_range(1..4)), BigInt::from(4));
            let rest = BigRational::from_integer(1.into()) - &weight;
            let a = simple_regular(n, rng);
            let b = simple_regular(n, rng);
            mixture(&[(weight, a), (rest, b)]).expect("weights sum to one")
        }
        kind => simple_regular_kind(n, kind, rng),
    }
}

fn simple_regular<R: Rng>(n: usize, rng: &mut R) -> StepGraphon {
    let kind = rng.gen_range(0..4);
    simple_regular_kind(n, kind, rng)
}

fn simple_regular_kind<R: Rng>(n: usize, kind: usize, rng: &mut R) -> StepGraphon {
    match kind {
        0 => {
            let mut profile = vec![BigRational::zero(); n];
            for k in 0..=n / 2 {
                let x = small_rational(rng);
                profile[(n - k) % n] = x.clone();
                profile[k] = x;
            }
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            circulant(&profile).expect("profile is symmetric").permute(&perm)
        }
        1 => {
            let degrees: Vec<usize> = (1..n).filter(|d| (n * d).is_multiple_of(2)).collect();
            match degrees.choose(rng) {
                Some(&deg) => {
                    StepGraphon::from_graph(&random_regular_graph(n, deg, rng.gen()).expect("degree is feasible"))
                }
                None => StepGraphon::constant(n, small_rational(rng)).expect("in range"),
            }
        }
        2 => birkhoff(n, rng),
        _ => StepGraphon::constant(n, small_rational(rng)).expect("in range"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::trial_rng;

    #[test]
    fn regular_generator_is_regular() {
        for seed in 0..200 {
            let mut rng = trial_rng(seed, 0);
            let n = rng.gen_range(1..=6);
            let w = random_regular_graphon(n, &mut rng);
            assert!(w.regularity(0.0).degree.is_some(), "seed {seed}: {:?}", w.to_json());
        }
    }

    #[test]
    fn trees_are_trees() {
        for seed in 0..20 {
            let mut rng = trial_rng(seed, 3);
            assert!(random_tree(1 + seed as usize % 7, &mut rng).is_tree());
        }
    }
}
