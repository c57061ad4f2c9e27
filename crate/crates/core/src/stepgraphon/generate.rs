//! Fixture graphons: constants, circulants, random regular graphs, convex
//! mixtures and pointwise-dense noise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GraphonError, StepGraphon};
use crate::graphs::Graph;
use crate::rational::format_rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("no simple {deg}-regular graph on {n} vertices")]
    InfeasibleDegree { n: usize, deg: usize },
    #[error("circulant profile must satisfy profile[k] = profile[n-k]; index {0} breaks it")]
    AsymmetricProfile(usize),
    #[error("mixture weights must be nonnegative and sum to 1, got sum {0}")]
    BadWeights(String),
    #[error("mixture needs at least one component")]
    EmptyMixture,
    #[error("{0} must lie in [0, 1], got {1}")]
    OutOfUnit(&'static str, String),
    #[error("random regular graph did not converge after {0} restarts")]
    NoConvergence(usize),
    #[error(transparent)]
    Graphon(#[from] GraphonError),
}

fn in_unit(name: &'static str, x: &BigRational) -> Result<(), GenerateError> {
    if x.is_negative() || x > &BigRational::one() {
        return Err(GenerateError::OutOfUnit(name, format_rational(x)));
    }
    Ok(())
}

/// All entries `d`.
pub fn constant(n: usize, d: &BigRational) -> Result<StepGraphon, GenerateError> {
    in_unit("d", d)?;
    Ok(StepGraphon::constant(n, d.clone())?)
}

/// `values[i][j] = profile[(i - j) mod n]`; regular with degree `mean(profile)`.
pub fn circulant(profile: &[BigRational]) -> Result<StepGraphon, GenerateError> {
    let n = profile.len();
    if let Some(k) = (1..n).find(|&k| profile[k] != profile[n - k]) {
        return Err(GenerateError::AsymmetricProfile(k));
    }
    let values = (0..n).flat_map(|i| (0..n).map(move |j| profile[(n + i - j) % n].clone())).collect();
    Ok(StepGraphon::new(n, values)?)
}

/// A random simple `deg`-regular graph: a random pairing of half-edges,
/// then double-edge switches on loops and repeated pairs until simple.
pub fn random_regular_graph(n: usize, deg: usize, seed: u64) -> Result<Graph, GenerateError> {
    if n == 0 || deg >= n || (n * deg) % 2 == 1 {
        return Err(GenerateError::InfeasibleDegree { n, deg });
    }
    const RESTARTS: usize = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RESTARTS {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, deg)).collect();
        stubs.shuffle(&mut rng);
        let mut pairs: Vec<(usize, usize)> = stubs.chunks(2).map(|c| (c[0], c[1])).collect();
        if repair(&mut pairs, &mut rng) {
            return Ok(Graph::new(n, pairs).expect("repaired pairing is simple"));
        }
    }
    Err(GenerateError::NoConvergence(RESTARTS))
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn repair(pairs: &mut [(usize, usize)], rng: &mut ChaCha8Rng) -> bool {
    let m = pairs.len();
    if m == 0 {
        return true;
    }
    let mut counts = std::collections::BTreeMap::<(usize, usize), usize>::new();
    for &(u, v) in pairs.iter() {
        *counts.entry(key(u, v)).or_default() += 1;
    }
    let bad = |p: (usize, usize), counts: &std::collections::BTreeMap<(usize, usize), usize>| {
        p.0 == p.1 || counts[&key(p.0, p.1)] > 1
    };
    for _ in 0..200 * m + 1000 {
        let Some(i) = (0..m).find(|&i| bad(pairs[i], &counts)) else {
            return true;
        };
        let j = rng.gen_range(0..m);
        if j == i {
            continue;
        }
        let (a, b) = pairs[i];
        let (c, e) = if rng.gen_bool(0.5) { pairs[j] } else { (pairs[j].1, pairs[j].0) };
        let (x, y) = ((a, c), (b, e));
        if x.0 == x.1 || y.0 == y.1 || key(x.0, x.1) == key(y.0, y.1) {
            continue;
        }
        if counts.get(&key(x.0, x.1)).is_some_and(|&c| c > 0) || counts.get(&key(y.0, y.1)).is_some_and(|&c| c > 0) {
            continue;
        }
        for p in [pairs[i], pairs[j]] {
            *counts.get_mut(&key(p.0, p.1)).unwrap() -= 1;
        }
        pairs[i] = x;
        pairs[j] = y;
        for p in [x, y] {
            *counts.entry(key(p.0, p.1)).or_default() += 1;
        }
    }
    false
}

/// 0/1 graphon of a random `deg`-regular graph; `deg/n`-regular.
pub fn regular_graph(n: usize, deg: usize, seed: u64) -> Result<StepGraphon, GenerateError> {
    Ok(StepGraphon::from_graph(&random_regular_graph(n, deg, seed)?))
}

/// `sum_i weight_i * W_i`. Regular inputs give a regular output.
pub fn mixture(parts: &[(BigRational, StepGraphon)]) -> Result<StepGraphon, GenerateError> {
    let (_, first) = parts.first().ok_or(GenerateError::EmptyMixture)?;
    let n = first.n_steps();
    let total: BigRational = parts.iter().map(|(w, _)| w.clone()).sum();
    if parts.iter().any(|(w, _)| w.is_negative()) || !total.is_one() {
        return Err(GenerateError::BadWeights(format_rational(&total)));
    }
    let mut values = vec![BigRational::zero(); n * n];
    for (weight, w) in parts {
        if w.n_steps() != n {
            return Err(GraphonError::StepMismatch(n, w.n_steps()).into());
        }
        for (acc, x) in values.iter_mut().zip(w.values()) {
            *acc += weight * x;
        }
    }
    Ok(StepGraphon::new(n, values)?)
}

/// Entries `d + (1 - d) * noise * u` with `u` uniform on `{0, 1/1000, .., 1}`,
/// symmetric, so every entry is in `[d, 1]` and the graphon is `d`-locally
/// dense.
pub fn pointwise_dense(
    n: usize,
    d: &BigRational,
    noise: &BigRational,
    seed: u64,
) -> Result<StepGraphon, GenerateError> {
    in_unit("d", d)?;
    in_unit("noise", noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = (BigRational::one() - d) * noise;
    let mut values = vec![BigRational::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let u = BigRational::new(BigInt::from(rng.gen_range(0..=1000u32)), BigInt::from(1000));
            let x = d + &spread * u;
            values[i * n + j] = x.clone();
            values[j * n + i] = x;
        }
    }
    Ok(StepGraphon::new(n, values)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Constant {
        n: usize,
        #[serde(with = "crate::rational::serde_pq")]
        d: BigRational,
    },
    Circulant {
        profile: Vec<String>,
    },
    RegularGraph {
        n: usize,
        deg: usize,
    },
    /// Equal-weight mixture of random regular graphs with the given degrees.
    Mixture {
        n: usize,
        degrees: Vec<usize>,
    },
    PointwiseDense {
        n: usize,
        #[serde(with = "crate::rational::serde_pq")]
        d: BigRational,
        #[serde(with = "crate::rational::serde_pq")]
        noise: BigRational,
    },
}

pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<StepGraphon, GenerateError> {
    match spec {
        GeneratorSpec::Constant { n, d } => constant(*n, d),
        GeneratorSpec::Circulant { profile } => {
            let profile = profile
                .iter()
                .map(|p| crate::rational::parse_rational(p).map_err(GraphonError::from))
                .collect::<Result<Vec<_>, _>>()?;
            circulant(&profile)
        }
        GeneratorSpec::RegularGraph { n, deg } => regular_graph(*n, *deg, seed),
        GeneratorSpec::Mixture { n, degrees } => {
            if degrees.is_empty() {
                return Err(GenerateError::EmptyMixture);
            }
            let weight = BigRational::new(BigInt::one(), BigInt::from(degrees.len()));
            let parts = degrees
                .iter()
                .enumerate()
                .map(|(i, &deg)| Ok((weight.clone(), regular_graph(*n, deg, seed.wrapping_add(i as u64))?)))
                .collect::<Result<Vec<_>, GenerateError>>()?;
            mixture(&parts)
        }
        GeneratorSpec::PointwiseDense { n, d, noise } => pointwise_dense(*n, d, noise, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn constant_example() {
        let w = constant(4, &ratio(1, 3)).unwrap();
        assert!(w.values().iter().all(|x| x == &ratio(1, 3)));
        assert_eq!(w.regularity(0.0).degree, Some(ratio(1, 3)));
        assert!(constant(2, &ratio(4, 3)).is_err());
    }

    #[test]
    fn circulant_c5() {
        let profile: Vec<_> = [0, 1, 0, 0, 1].iter().map(|&k| ratio(k, 1)).collect();
        let w = circulant(&profile).unwrap();
        assert_eq!(w, StepGraphon::from_graph(&Graph::cycle(5).unwrap()));
        assert_eq!(w.regularity(0.0).degree, Some(ratio(2, 5)));
        let lopsided: Vec<_> = [0, 1, 0, 0, 0].iter().map(|&k| ratio(k, 1)).collect();
        assert_eq!(circulant(&lopsided), Err(GenerateError::AsymmetricProfile(1)));
    }

    #[test]
    fn regular_graph_example() {
        let g = random_regular_graph(8, 3, 1).unwrap();
        assert!(g.degrees().iter().all(|&k| k == 3));
        let w = regular_graph(8, 3, 1).unwrap();
        assert_eq!(w.regularity(0.0).degree, Some(ratio(3, 8)));
        assert!(g.adjacency().iter().collect::<std::collections::BTreeSet<_>>().len() > 1);
    }

    #[test]
    fn regular_graph_many_seeds_and_sizes() {
        for n in 2..=12 {
            for deg in 0..n {
                if n * deg % 2 == 1 {
                    continue;
                }
                for seed in 0..5 {
                    let g = random_regular_graph(n, deg, seed).unwrap();
                    assert!(g.degrees().iter().all(|&k| k == deg), "n={n} deg={deg} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn regular_graph_rejects_infeasible_degrees() {
        assert_eq!(random_regular_graph(5, 3, 0), Err(GenerateError::InfeasibleDegree { n: 5, deg: 3 }));
        assert_eq!(random_regular_graph(4, 4, 0), Err(GenerateError::InfeasibleDegree { n: 4, deg: 4 }));
    }

    #[test]
    fn regular_graph_is_deterministic() {
        assert_eq!(random_regular_graph(10, 4, 9).unwrap(), random_regular_graph(10, 4, 9).unwrap());
    }

    #[test]
    fn mixture_of_regular_graphons_is_regular() {
        let a = regular_graph(6, 2, 3).unwrap();
        let b = constant(6, &ratio(1, 2)).unwrap();
        let w = mixture(&[(ratio(1, 4), a), (ratio(3, 4), b)]).unwrap();
        assert_eq!(w.regularity(0.0).degree, Some(ratio(1, 4) * ratio(1, 3) + ratio(3, 8)));
        assert!(matches!(mixture(&[(ratio(1, 2), w.clone())]), Err(GenerateError::BadWeights(_))));
        assert_eq!(mixture(&[]), Err(GenerateError::EmptyMixture));
    }

    #[test]
    fn pointwise_dense_entries_lie_above_d() {
        let d = ratio(3, 10);
        let w = pointwise_dense(5, &d, &ratio(1, 1), 4).unwrap();
        assert!(w.values().iter().all(|x| x >= &d && x <= &ratio(1, 1)));
        assert!(w.values().iter().any(|x| x != &d));
    }

    #[test]
    fn spec_json_dispatch() {
        let spec: GeneratorSpec = serde_json::from_str(r#"{"kind":"constant","n":2,"d":"1/3"}"#).unwrap();
        assert_eq!(generate(&spec, 0).unwrap(), constant(2, &ratio(1, 3)).unwrap());
        let spec: GeneratorSpec = serde_json::from_str(r#"{"kind":"mixture","n":6,"degrees":[1,3]}"#).unwrap();
        assert_eq!(generate(&spec, 2).unwrap().regularity(0.0).degree, Some(ratio(1, 3)));
    }
}
