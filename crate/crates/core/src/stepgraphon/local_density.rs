//! Checking `int_{SxS} W >= d * lambda(S)^2` over fractional sets `S`,
//! written as the box quadratic `q(s) = s^T A s / n^2 - d (sum s / n)^2`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GraphonError, StepGraphon};
use crate::rational::{format_rational, from_f64, to_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    /// The empty set; both sides vanish.
    Trivial,
    Corners,
    Grid,
    Descent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Enumerate all `2^n` corners when `n` is at most this.
    pub corner_limit: usize,
    /// Scan the full grid when `n` is at most this.
    pub grid_limit: usize,
    /// Grid spacing is `1 / grid_denominator`.
    pub grid_denominator: usize,
    pub starts: usize,
    pub step: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            corner_limit: 20,
            grid_limit: 3,
            grid_denominator: 16,
            starts: 1000,
            step: 0.1,
            iterations: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDensityReport {
    #[serde(with = "crate::rational::serde_pq")]
    pub target_d: BigRational,
    /// Smallest value of `q` found; never positive because `q(0) = 0`.
    pub deficit: f64,
    /// `q(witness)` in exact arithmetic.
    #[serde(with = "crate::rational::serde_pq")]
    pub exact_deficit: BigRational,
    pub witness: Vec<f64>,
    pub method: SearchMethod,
    /// A negative exact deficit: the witness set breaks the bound.
    pub certified_violation: bool,
    pub status: String,
}

/// `q(s)` in exact arithmetic.
pub fn quadratic_form_exact(w: &StepGraphon, d: &BigRational, s: &[BigRational]) -> BigRational {
    let n = w.n_steps();
    assert_eq!(s.len(), n, "witness length must match the step count");
    let mut quad = BigRational::zero();
    for i in 0..n {
        if s[i].is_zero() {
            continue;
        }
        let row: BigRational = (0..n).filter(|&j| !s[j].is_zero()).map(|j| w.value(i, j) * &s[j]).sum();
        quad += row * &s[i];
    }
    let mass: BigRational = s.iter().sum();
    let n2 = BigRational::from_integer(BigInt::from(n * n));
    (quad - d * &mass * &mass) / n2
}

fn quadratic_form(a: &[f64], n: usize, d: f64, s: &[f64]) -> f64 {
    let mut quad = 0.0;
    for i in 0..n {
        if s[i] == 0.0 {
            continue;
        }
        let row: f64 = (0..n).map(|j| a[i * n + j] * s[j]).sum();
        quad += s[i] * row;
    }
    let mass: f64 = s.iter().sum();
    (quad - d * mass * mass) / (n * n) as f64
}

struct Candidate {
    value: f64,
    witness: Vec<f64>,
    method: SearchMethod,
}

impl Candidate {
    fn better(self, other: Candidate) -> Candidate {
        if other.value < self.value {
            other
        } else {
            self
        }
    }
}

/// Walks every 0/1 vector in Gray-code order, updating `s^T A s` in `O(n)`
/// per flip.
fn best_corner(a: &[f64], n: usize, d: f64) -> Candidate {
    let mut inside = vec![false; n];
    let mut row = vec![0.0; n];
    let (mut quad, mut mass) = (0.0f64, 0usize);
    let mut best = (0.0f64, 0u64);
    let mut code = 0u64;
    for step in 1..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        if inside[v] {
            quad -= 2.0 * row[v] - a[v * n + v];
            mass -= 1;
        } else {
            quad += 2.0 * row[v] + a[v * n + v];
            mass += 1;
        }
        let sign = if inside[v] { -1.0 } else { 1.0 };
        inside[v] = !inside[v];
        for j in 0..n {
            row[j] += sign * a[j * n + v];
        }
        code ^= 1 << v;
        let m = mass as f64;
        let value = (quad - d * m * m) / (n * n) as f64;
        if value < best.0 {
            best = (value, code);
        }
    }
    Candidate {
        value: best.0,
        witness: (0..n).map(|i| if best.1 >> i & 1 == 1 { 1.0 } else { 0.0 }).collect(),
        method: SearchMethod::Corners,
    }
}

fn best_grid(a: &[f64], n: usize, d: f64, den: usize) -> Candidate {
    let mut best = Candidate { value: 0.0, witness: vec![0.0; n], method: SearchMethod::Grid };
    let points = (den + 1).pow(n as u32);
    let mut s = vec![0.0; n];
    for index in 0..points {
        let mut rest = index;
        for x in s.iter_mut() {
            *x = (rest % (den + 1)) as f64 / den as f64;
            rest /= den + 1;
        }
        let value = quadratic_form(a, n, d, &s);
        if value < best.value {
            best = Candidate { value, witness: s.clone(), method: SearchMethod::Grid };
        }
    }
    best
}

fn descend(a: &[f64], n: usize, d: f64, budget: &SearchBudget, start: usize) -> Candidate {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    rng.set_stream(start as u64);
    let mut s: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let mut best = Candidate { value: quadratic_form(a, n, d, &s), witness: s.clone(), method: SearchMethod::Descent };
    let scale = 2.0 / (n * n) as f64;
    let mut grad = vec![0.0; n];
    for _ in 0..budget.iterations {
        let mass: f64 = s.iter().sum();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| a[i * n + j] * s[j]).sum();
            grad[i] = scale * (row - d * mass);
        }
        for i in 0..n {
            s[i] = (s[i] - budget.step * grad[i]).clamp(0.0, 1.0);
        }
        let value = quadratic_form(a, n, d, &s);
        if value < best.value {
            best = Candidate { value, witness: s.clone(), method: SearchMethod::Descent };
        }
    }
    best
}

/// Searches for a fractional set that breaks `d`-local density.
///
/// A negative result is rechecked exactly and is a certified violation. A
/// zero result only says that no violating set was found.
pub fn local_density_deficit(w: &StepGraphon, d: &BigRational, budget: &SearchBudget) -> LocalDensityReport {
    let n = w.n_steps();
    let a = w.float_values();
    let df = to_f64(d);

    let mut best = Candidate { value: 0.0, witness: vec![0.0; n], method: SearchMethod::Trivial };
    if n <= budget.corner_limit {
        best = best.better(best_corner(a, n, df));
    }
    if n <= budget.grid_limit && budget.grid_denominator > 0 {
        best = best.better(best_grid(a, n, df, budget.grid_denominator));
    }
    let descent =
        (0..budget.starts).into_par_iter().map(|start| descend(a, n, df, budget, start)).reduce_with(Candidate::better);
    if let Some(found) = descent {
        best = best.better(found);
    }

    let exact_witness: Vec<BigRational> = best.witness.iter().map(|&x| from_f64(x)).collect();
    let mut exact = quadratic_form_exact(w, d, &exact_witness);
    if exact.is_positive() {
        // float noise picked a set that is not actually below the bound
        best = Candidate { value: 0.0, witness: vec![0.0; n], method: SearchMethod::Trivial };
        exact = BigRational::zero();
    }
    let certified_violation = exact.is_negative();
    let status = if certified_violation {
        format!("not {}-locally dense (certified witness)", format_rational(d))
    } else {
        "no violation found (evidence, not proof)".to_string()
    };
    LocalDensityReport {
        target_d: d.clone(),
        deficit: to_f64(&exact),
        exact_deficit: exact,
        witness: best.witness,
        method: best.method,
        certified_violation,
        status,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReiherCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub pass: bool,
}

/// `(1/n^2) sum f_i f_j A_ij` against `d (sum f_i / n)^2`.
pub fn weighted_reiher_check(
    w: &StepGraphon,
    d: &BigRational,
    f: &[BigRational],
    tol: f64,
) -> Result<ReiherCheck, GraphonError> {
    let n = w.n_steps();
    if f.len() != n {
        return Err(GraphonError::Shape { expected: n, got: f.len() });
    }
    let one = BigRational::one();
    if let Some(i) = f.iter().position(|x| x.is_negative() || x > &one) {
        return Err(GraphonError::OutOfRange(i, i, format_rational(&f[i])));
    }
    let gap = quadratic_form_exact(w, d, f);
    let n2 = BigRational::from_integer(BigInt::from(n * n));
    let mass: BigRational = f.iter().sum();
    let rhs = d * &mass * &mass / n2;
    let lhs = &rhs + &gap;
    let pass = to_f64(&gap) >= -tol;
    Ok(ReiherCheck { lhs, rhs, pass })
}
