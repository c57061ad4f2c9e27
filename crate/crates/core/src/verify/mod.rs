//! Randomized verification suites. Every suite is a pure function of
//! `(trials, seed)`: trial `i` draws from a ChaCha stream keyed by the seed
//! and `i`, trials may run in parallel, and results are merged in trial
//! order.

mod random;
mod suites;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::Graph;
use crate::stepgraphon::StepGraphon;

pub use random::{random_graph, random_rational_graphon, random_regular_graphon, random_tree};
pub use suites::{
    family_catalog, finite_difference_gradient, gradient_relative_error, local_density_budget, replacement_selection,
    FamilyInstance, ReplacementSelection,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("unknown suite `{name}` (expected one of: {})", Suite::ALL.map(|s| s.id()).join(", "))]
    UnknownSuite { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// `t_{H'}(W) = t_H(W^F)` for edge replacement by a rooted gadget.
    Lemma31,
    /// Elimination against brute-force enumeration.
    Oracle,
    /// Counting kernels of even thetas, and Hadamard products with
    /// pointwise-dense graphons, are locally dense.
    LocalDensity,
    /// Sidorenko deficits of the constructed families on regular graphons.
    Sidorenko,
    /// KNRS deficits of flowers on pointwise-dense graphons.
    Flower,
    /// Replaced graphs against the Hölder lower bound.
    Holder,
    /// Density gradient against central finite differences.
    Gradient,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Lemma31,
        Suite::Oracle,
        Suite::LocalDensity,
        Suite::Sidorenko,
        Suite::Flower,
        Suite::Holder,
        Suite::Gradient,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::Lemma31 => "lemma31",
            Suite::Oracle => "oracle",
            Suite::LocalDensity => "local_density",
            Suite::Sidorenko => "sidorenko",
            Suite::Flower => "flower",
            Suite::Holder => "holder",
            Suite::Gradient => "gradient",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.id() == s)
            .ok_or_else(|| VerifyError::UnknownSuite { name: s.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: usize,
    pub label: String,
    pub inputs: serde_json::Value,
    pub lhs: String,
    pub rhs: String,
    /// `lhs - rhs` for inequalities, `-|lhs - rhs|` for identities.
    pub gap: f64,
    /// Smallest failing instance found by deleting steps, then vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimized: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    /// Individual comparisons; a trial may check several.
    pub checks: usize,
    pub seed: u64,
    /// Worst observed gap; negative means violation.
    pub min_gap: Option<f64>,
    pub max_gap: Option<f64>,
    pub failures: Vec<Failure>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn without_runtime(mut self) -> Self {
        self.runtime_ms = None;
        self
    }
}

/// The RNG for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// What one trial found.
#[derive(Debug, Default)]
pub(crate) struct Outcome {
    pub gaps: Vec<f64>,
    pub failures: Vec<Failure>,
}

impl Outcome {
    pub fn pass(gap: f64) -> Self {
        Outcome { gaps: vec![gap], failures: vec![] }
    }

    pub fn merge(mut self, other: Outcome) -> Self {
        self.gaps.extend(other.gaps);
        self.failures.extend(other.failures);
        self
    }
}

pub(crate) fn run_trials<F>(suite: Suite, trials: usize, seed: u64, trial: F) -> SuiteReport
where
    F: Fn(usize, &mut ChaCha8Rng) -> Outcome + Sync,
{
    let start = Instant::now();
    let outcomes: Vec<Outcome> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            trial(i, &mut rng)
        })
        .collect();
    let mut checks = 0;
    let mut min_gap: Option<f64> = None;
    let mut max_gap: Option<f64> = None;
    let mut failures = Vec::new();
    for outcome in outcomes {
        for gap in outcome.gaps {
            checks += 1;
            min_gap = Some(min_gap.map_or(gap, |m| m.min(gap)));
            max_gap = Some(max_gap.map_or(gap, |m| m.max(gap)));
        }
        failures.extend(outcome.failures);
    }
    SuiteReport {
        suite: suite.id().to_string(),
        trials,
        checks,
        seed,
        min_gap,
        max_gap,
        failures,
        notes: Vec::new(),
        runtime_ms: Some(start.elapsed().as_millis() as u64),
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> SuiteReport {
    match suite {
        Suite::Lemma31 => suites::verify_counting_identity(trials, seed),
        Suite::Oracle => suites::verify_oracle(trials, seed),
        Suite::LocalDensity => suites::verify_local_density(trials, seed),
        Suite::Sidorenko => suites::verify_sidorenko_families(trials, seed),
        Suite::Flower => suites::verify_flower_knrs(trials, seed),
        Suite::Holder => suites::verify_holder(trials, seed),
        Suite::Gradient => suites::verify_gradient(trials, seed),
    }
}

pub use suites::{
    verify_counting_identity, verify_flower_knrs, verify_gradient, verify_holder, verify_local_density, verify_oracle,
    verify_sidorenko_families,
};

/// Shrinks a failing `(H, W)` pair: first drops steps of `W` while the
/// instance still fails, then vertices of `H`.
pub fn minimize_failure<F>(h: &Graph, w: &StepGraphon, still_fails: F) -> (Graph, StepGraphon)
where
    F: Fn(&Graph, &StepGraphon) -> bool,
{
    let (mut h, mut w) = (h.clone(), w.clone());
    'steps: while w.n_steps() > 1 {
        for drop in 0..w.n_steps() {
            let keep: Vec<usize> = (0..w.n_steps()).filter(|&i| i != drop).collect();
            let smaller = w.restrict(&keep).expect("sub-grid of a graphon is a graphon");
            if still_fails(&h, &smaller) {
                w = smaller;
                continue 'steps;
            }
        }
        break;
    }
    'vertices: while h.n_vertices() > 1 {
        for v in 0..h.n_vertices() {
            let smaller = h.without_vertex(v);
            if still_fails(&smaller, &w) {
                h = smaller;
                continue 'vertices;
            }
        }
        break;
    }
    (h, w)
}

pub(crate) fn instance_json(h: &Graph, w: &StepGraphon) -> serde_json::Value {
    serde_json::json!({ "graph": h, "graphon": w.to_json() })
}

/// One CSV line per report, sorted by suite id.
pub fn reports_to_csv(reports: &[SuiteReport]) -> String {
    let mut rows: Vec<&SuiteReport> = reports.iter().collect();
    rows.sort_by(|a, b| a.suite.cmp(&b.suite));
    let mut out = String::from("suite,trials,failures,min_gap,max_gap,runtime_ms\n");
    let cell = |x: Option<f64>| x.map(|g| format!("{g:e}")).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.suite,
            r.trials,
            r.failures.len(),
            cell(r.min_gap),
            cell(r.max_gap),
            r.runtime_ms.map(|t| t.to_string()).unwrap_or_default()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn suite_ids_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.id().parse::<Suite>().unwrap(), suite);
        }
        assert!("lemma99".parse::<Suite>().is_err());
    }

    #[test]
    fn trial_streams_differ_and_repeat() {
        use rand::Rng;
        let a: u64 = trial_rng(7, 0).gen();
        let b: u64 = trial_rng(7, 1).gen();
        assert_ne!(a, b);
        assert_eq!(a, trial_rng(7, 0).gen::<u64>());
    }

    #[test]
    fn minimizer_shrinks_steps_then_vertices() {
        // "fails" whenever the graph has an edge and some step has a zero on
        // its diagonal; the smallest such instance is K2 on one zero step
        let h = Graph::complete(4);
        let w = StepGraphon::from_graph(&Graph::cycle(5).unwrap());
        let fails =
            |h: &Graph, w: &StepGraphon| h.n_edges() > 0 && (0..w.n_steps()).any(|i| w.value(i, i) == &ratio(0, 1));
        let (h, w) = minimize_failure(&h, &w, fails);
        assert_eq!(w.n_steps(), 1);
        assert_eq!(h.n_vertices(), 2);
        assert_eq!(h.n_edges(), 1);
    }

    #[test]
    fn csv_is_sorted_with_stable_columns() {
        let report = |suite: &str| SuiteReport {
            suite: suite.into(),
            trials: 3,
            checks: 3,
            seed: 1,
            min_gap: Some(0.0),
            max_gap: Some(0.5),
            failures: vec![],
            notes: vec![],
            runtime_ms: None,
        };
        assert_eq!(reports_to_csv(&[]), "suite,trials,failures,min_gap,max_gap,runtime_ms\n");
        let csv = reports_to_csv(&[report("oracle"), report("holder")]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "holder,3,0,0e0,5e-1,");
        assert!(lines[2].starts_with("oracle,"));
    }
}
