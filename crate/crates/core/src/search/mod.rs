//! Projected-gradient search for Sidorenko violations over `d`-regular step
//! graphons with a fixed number of steps.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::Graph;
use crate::homdensity::{deficit, gradient_of, sidorenko_deficit_of, Baseline, DensityError, Mode};
use crate::rational::{rationalize, to_f64};
use crate::stepgraphon::{GraphonError, StepGraphon};

/// Projection stops once row sums and symmetry are within this.
pub const PROJECTION_TOL: f64 = 1e-10;
/// A deficit below this, confirmed exactly, is reported as a violation.
pub const VIOLATION_TOL: f64 = 1e-8;
/// Largest denominator used when rationalizing a float witness.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("projection did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("target degree {0} is outside [0, 1]")]
    DegreeOutOfRange(f64),
    #[error("expected a {n}x{n} grid, got {got} values")]
    Shape { n: usize, got: usize },
    #[error("the pattern graph is not bipartite")]
    NotBipartite,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Graphon(#[from] GraphonError),
}

const MAX_PROJECTION_ITERATIONS: usize = 200_000;

/// Closed-form projection onto symmetric matrices with every row sum `c`.
fn project_affine(a: &[f64], n: usize, c: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n * n).map(|k| 0.5 * (a[k] + a[(k % n) * n + k / n])).collect();
    let b: Vec<f64> = (0..n).map(|i| x[i * n..(i + 1) * n].iter().sum::<f64>() - c).collect();
    let mean = b.iter().sum::<f64>() / (2 * n) as f64;
    let u: Vec<f64> = b.iter().map(|bi| (bi - mean) / n as f64).collect();
    for i in 0..n {
        for j in 0..n {
            x[i * n + j] -= u[i] + u[j];
        }
    }
    x
}

fn affine_residual(x: &[f64], n: usize, c: f64) -> f64 {
    let mut r = 0.0f64;
    for i in 0..n {
        r = r.max((x[i * n..(i + 1) * n].iter().sum::<f64>() - c).abs());
        for j in i + 1..n {
            r = r.max((x[i * n + j] - x[j * n + i]).abs());
        }
    }
    r
}

/// Dykstra's alternating projection onto `{symmetric, row sums n*d}` and the
/// box `[0, 1]`, as a raw row-major grid.
pub fn project_regular_grid(a: &[f64], n: usize, d: f64) -> Result<Vec<f64>, SearchError> {
    if !(0.0..=1.0).contains(&d) {
        return Err(SearchError::DegreeOutOfRange(d));
    }
    if a.len() != n * n {
        return Err(SearchError::Shape { n, got: a.len() });
    }
    let c = n as f64 * d;
    let mut x = a.to_vec();
    let mut p = vec![0.0; n * n];
    let mut q = vec![0.0; n * n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_PROJECTION_ITERATIONS {
        let shifted: Vec<f64> = x.iter().zip(&p).map(|(x, p)| x + p).collect();
        let y = project_affine(&shifted, n, c);
        for k in 0..n * n {
            p[k] = shifted[k] - y[k];
        }
        let shifted: Vec<f64> = y.iter().zip(&q).map(|(y, q)| y + q).collect();
        for k in 0..n * n {
            x[k] = shifted[k].clamp(0.0, 1.0);
            q[k] = shifted[k] - x[k];
        }
        residual = affine_residual(&x, n, c);
        if residual <= PROJECTION_TOL {
            for i in 0..n {
                for j in 0..i {
                    x[i * n + j] = x[j * n + i];
                }
            }
            return Ok(x);
        }
    }
    Err(SearchError::NoConvergence { iterations: MAX_PROJECTION_ITERATIONS, residual })
}

/// Nearest `d`-regular step graphon to `a` in Frobenius distance, up to the
/// projection tolerance.
pub fn project_regular(a: &[f64], n: usize, d: f64) -> Result<StepGraphon, SearchError> {
    let x = project_regular_grid(a, n, d)?;
    Ok(StepGraphon::from_f64(n, &x)?)
}

/// Rounds every entry to a nearby fraction, then restores the row sums
/// exactly and mixes toward the constant `d` just enough to stay in `[0, 1]`.
/// The result is exactly `d`-regular.
pub fn rationalize_regular(a: &[f64], n: usize, d: &BigRational) -> Result<StepGraphon, SearchError> {
    if a.len() != n * n {
        return Err(SearchError::Shape { n, got: a.len() });
    }
    let mut x: Vec<BigRational> = vec![BigRational::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let r = rationalize(0.5 * (a[i * n + j] + a[j * n + i]), MAX_DENOMINATOR);
            x[i * n + j] = r.clone();
            x[j * n + i] = r;
        }
    }
    let nn = BigRational::from_integer(BigInt::from(n));
    let c = &nn * d;
    let b: Vec<BigRational> = (0..n).map(|i| x[i * n..(i + 1) * n].iter().sum::<BigRational>() - &c).collect();
    let mean = b.iter().sum::<BigRational>() / (BigRational::from_integer(BigInt::from(2)) * &nn);
    let u: Vec<BigRational> = b.iter().map(|bi| (bi - &mean) / &nn).collect();
    for i in 0..n {
        for j in 0..n {
            x[i * n + j] -= &u[i] + &u[j];
        }
    }
    let one = BigRational::one();
    let mut eps = BigRational::zero();
    for v in &x {
        let need = if v.is_negative() {
            -v / (d - v)
        } else if v > &one {
            (v - &one) / (v - d)
        } else {
            continue;
        };
        if need > eps {
            eps = need;
        }
    }
    if eps.is_positive() {
        let keep = &one - &eps;
        for v in x.iter_mut() {
            *v = &keep * &*v + &eps * d;
        }
    }
    Ok(StepGraphon::new(n, x)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub starts: usize,
    pub iterations: usize,
    pub step: f64,
    /// Backtracking shrink factor.
    pub armijo: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { starts: 32, iterations: 500, step: 0.05, armijo: 0.5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Rationalized, exactly regular best point.
    #[serde(rename = "best_W")]
    pub best_w: StepGraphon,
    /// Sidorenko deficit at `best_w`.
    pub best_deficit: f64,
    #[serde(with = "crate::rational::serde_pq_opt")]
    pub exact_deficit: Option<BigRational>,
    /// Deficit at the float point before rationalization.
    pub float_deficit: f64,
    /// Objective after each accepted step of the best start.
    pub trace: Vec<f64>,
    pub best_start: usize,
    pub starts: usize,
    pub seed: u64,
    pub counterexample: bool,
}

impl SearchResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,deficit\n");
        for (i, x) in self.trace.iter().enumerate() {
            out.push_str(&format!("{i},{x:e}\n"));
        }
        out
    }
}

struct Run {
    grid: Vec<f64>,
    value: f64,
    trace: Vec<f64>,
}

fn objective(h: &Graph, n: usize, a: &[f64]) -> Result<f64, SearchError> {
    Ok(sidorenko_deficit_of(h, n, a)?)
}

/// Gradient of `t_H - t_{K2}^{e(H)}` with each ordered entry its own
/// variable, matching the Frobenius geometry of the projection.
fn objective_gradient(h: &Graph, n: usize, a: &[f64]) -> Result<Vec<f64>, SearchError> {
    let mut g = gradient_of(h, n, a, false)?;
    let e = h.n_edges() as i32;
    if e > 0 {
        let t2: f64 = a.iter().sum::<f64>() / (n * n) as f64;
        let scale = e as f64 * t2.powi(e - 1) / (n * n) as f64;
        for x in g.iter_mut() {
            *x -= scale;
        }
    }
    Ok(g)
}

fn descend(h: &Graph, n: usize, d: f64, config: &SearchConfig, start: usize) -> Result<Run, SearchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(start as u64);
    let init: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>()).collect();
    let mut x = project_regular_grid(&init, n, d)?;
    let mut value = objective(h, n, &x)?;
    let mut trace = vec![value];
    for _ in 0..config.iterations {
        let g = objective_gradient(h, n, &x)?;
        let mut alpha = config.step;
        let mut accepted = None;
        for _ in 0..40 {
            let moved: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x - alpha * g).collect();
            let cand = project_regular_grid(&moved, n, d)?;
            let dist2: f64 = cand.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist2 == 0.0 {
                break;
            }
            let cv = objective(h, n, &cand)?;
            if cv <= value - 1e-4 * dist2 / alpha {
                accepted = Some((cand, cv));
                break;
            }
            alpha *= config.armijo;
        }
        match accepted {
            Some((cand, cv)) => {
                x = cand;
                value = cv;
                trace.push(value);
            }
            None => break,
        }
    }
    Ok(Run { grid: x, value, trace })
}

/// Minimizes the Sidorenko deficit of `h` over `d`-regular graphons on `n`
/// steps from `config.starts` random starts. The best point is rationalized
/// and its deficit recomputed exactly; only an exactly confirmed deficit
/// below `-1e-8` counts as a counterexample.
pub fn search_counterexample(
    h: &Graph,
    n: usize,
    d: &BigRational,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    if !h.is_bipartite() {
        return Err(SearchError::NotBipartite);
    }
    if n == 0 {
        return Err(SearchError::NonPositive("n"));
    }
    if config.starts == 0 {
        return Err(SearchError::NonPositive("starts"));
    }
    if !(config.step > 0.0) {
        return Err(SearchError::NonPositive("step"));
    }
    let df = to_f64(d);
    if d.is_negative() || d > &BigRational::one() {
        return Err(SearchError::DegreeOutOfRange(df));
    }
    let runs: Vec<Run> =
        (0..config.starts).into_par_iter().map(|s| descend(h, n, df, config, s)).collect::<Result<_, _>>()?;
    let (best_start, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|a, b| if b.1.value < a.1.value { b } else { a })
        .expect("at least one start");

    let best_w = rationalize_regular(&best.grid, n, d)?;
    let (best_deficit, exact_deficit) = match deficit(h, &best_w, &Baseline::Sidorenko, Mode::Exact) {
        Ok(found) => (found.value, found.exact),
        Err(DensityError::ArityOverflow { .. }) => {
            (deficit(h, &best_w, &Baseline::Sidorenko, Mode::Float)?.value, None)
        }
        Err(e) => return Err(e.into()),
    };
    let counterexample = exact_deficit.as_ref().is_some_and(|x| to_f64(x) < -VIOLATION_TOL);
    Ok(SearchResult {
        best_w,
        best_deficit,
        exact_deficit,
        float_deficit: best.value,
        trace: best.trace,
        best_start,
        starts: config.starts,
        seed: config.seed,
        counterexample,
    })
}
