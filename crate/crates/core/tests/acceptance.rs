//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use sidlab::graphs::{classify_theorem12, Graph, ReplacementClass, ReplacementSpec};
use sidlab::rational::{ratio, to_f64};
use sidlab::search::{search_counterexample, SearchConfig};
use sidlab::stepgraphon::{local_density_deficit, SearchBudget, StepGraphon};
use sidlab::verify::{
    family_catalog, replacement_selection, verify_counting_identity, verify_flower_knrs, verify_gradient,
    verify_holder, verify_local_density, verify_oracle, verify_sidorenko_families, SuiteReport,
};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn suite_outcome(report: &SuiteReport, extra: impl FnOnce() -> Result<String, String>) -> Outcome {
    if !report.passed() {
        return Outcome {
            pass: false,
            detail: format!("{} failures, first: {:?}", report.failures.len(), report.failures[0]),
        };
    }
    match extra() {
        Ok(more) => Outcome {
            pass: true,
            detail: format!("{} checks, min gap {:e}{more}", report.checks, report.min_gap.unwrap_or(0.0)),
        },
        Err(why) => Outcome { pass: false, detail: why },
    }
}

fn criterion(id: usize, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = outcome.pass && in_time;
    println!(
        "criterion {id} [{}] {name}: {} ({:.1}s of {}s)",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn counting_identity() -> Outcome {
    let report = verify_counting_identity(200, SEED);
    suite_outcome(&report, || {
        if report.trials == 200 && report.max_gap == Some(0.0) {
            Ok(String::from(", all exact"))
        } else {
            Err(format!("unexpected report shape: {report:?}"))
        }
    })
}

fn oracle() -> Outcome {
    let report = verify_oracle(200, SEED);
    suite_outcome(&report, || Ok(String::new()))
}

fn local_density() -> Outcome {
    // 100 trials: the 50 even ones are (regular W, even theta) pairs
    let report = verify_local_density(100, SEED);
    let trap = StepGraphon::new(2, vec![ratio(8, 10), ratio(5, 100), ratio(5, 100), ratio(35, 100)]).unwrap();
    suite_outcome(&report, || {
        let found = local_density_deficit(&trap, &ratio(3, 10), &SearchBudget::default());
        let fractional = found.witness.iter().any(|&x| x > 0.0 && x < 1.0);
        // the optimum is -3/160 at (1/2, 1)
        let near_optimum = (to_f64(&found.exact_deficit) + 3.0 / 160.0).abs() < 1e-9;
        if found.certified_violation && fractional && found.exact_deficit < ratio(0, 1) && near_optimum {
            Ok(format!(", 2x2 instance flagged at {:e} with witness {:?}", found.deficit, found.witness))
        } else {
            Err(format!("2x2 instance not flagged: {found:?}"))
        }
    })
}

fn sidorenko_families() -> Outcome {
    let report = verify_sidorenko_families(100, SEED);
    let catalog = family_catalog(SEED);
    suite_outcome(&report, || {
        let mut counts = BTreeMap::new();
        for inst in &catalog {
            *counts.entry(inst.family).or_insert(0) += 1;
        }
        let needed =
            ["c6", "theta_replacement", "clique_subdivision", "semidirect", "odd_theta", "subdivision", "tree"];
        if let Some(missing) = needed.iter().find(|f| !counts.contains_key(*f)) {
            return Err(format!("family {missing} missing from the catalog"));
        }
        if report.checks != 100 * catalog.len() {
            return Err(format!("{} checks for {} instances", report.checks, catalog.len()));
        }
        Ok(format!(", {} instances x 100 regular graphons, trees exact", catalog.len()))
    })
}

fn flowers() -> Outcome {
    let report = verify_flower_knrs(100, SEED);
    suite_outcome(&report, || Ok(String::new()))
}

fn holder() -> Outcome {
    let report = verify_holder(50, SEED);
    suite_outcome(&report, || Ok(String::from(", uniform complete hosts equal exactly")))
}

fn gradient() -> Outcome {
    let report = verify_gradient(20, SEED);
    suite_outcome(&report, || Ok(format!(", worst error {:e}", 1e-6 - report.min_gap.unwrap_or(0.0))))
}

fn search_controls() -> Outcome {
    let config = SearchConfig { seed: SEED, ..SearchConfig::default() };
    let mut details = Vec::new();
    for (name, h) in [("C4", Graph::cycle(4).unwrap()), ("C6", Graph::cycle(6).unwrap())] {
        match search_counterexample(&h, 4, &ratio(1, 2), &config) {
            Ok(r) if r.best_deficit >= 0.0 && !r.counterexample => {
                details.push(format!("{name} best {:e}", r.best_deficit));
            }
            Ok(r) => return Outcome { pass: false, detail: format!("{name} reported {:e}", r.best_deficit) },
            Err(e) => return Outcome { pass: false, detail: format!("{name}: {e}") },
        }
    }
    Outcome { pass: true, detail: details.join(", ") }
}

fn spec(host: &Graph, per_edge: &[&[(usize, usize)]]) -> ReplacementSpec {
    let lengths = per_edge.iter().map(|e| e.iter().copied().collect()).collect();
    ReplacementSpec::new(host.edges().to_vec(), lengths).unwrap()
}

fn classifier() -> Outcome {
    let k3 = Graph::complete(3);
    let mut problems = Vec::new();
    // sum h(2) = 3, C(3,2) = 3
    match classify_theorem12(&k3, &spec(&k3, &[&[(2, 1)], &[(2, 1)], &[(2, 1)]])).unwrap() {
        ReplacementClass::Divisible { .. } => {}
        other => problems.push(format!("K3 {{2:1}}^3 gave {other:?}")),
    }
    // totals 1, 1, 1 over three classes: none divisible by 3
    match classify_theorem12(&k3, &spec(&k3, &[&[(2, 1)], &[(4, 1)], &[(6, 1)]])).unwrap() {
        ReplacementClass::NotCovered(cert) => {
            let text = format!("{cert:?}");
            if !text.contains("k: 1") {
                problems.push(format!("certificate does not name k=1: {text}"));
            }
        }
        other => problems.push(format!("K3 2,4,6 gave {other:?}")),
    }
    // one class with total 3: both clauses apply, divisibility wins
    match classify_theorem12(&k3, &spec(&k3, &[&[(4, 1)], &[(4, 1)], &[(4, 1)]])).unwrap() {
        ReplacementClass::Divisible { .. } => {}
        other => problems.push(format!("K3 {{4:1}}^3 gave {other:?}")),
    }
    let selection = replacement_selection(SEED, 24);
    for (host, spec, class) in &selection.accepted {
        if !classify_theorem12(host, spec).unwrap().is_covered() || !class.is_covered() {
            problems.push(format!("uncovered instance selected: {spec:?}"));
        }
    }
    let suite_members = family_catalog(SEED).into_iter().filter(|i| i.family == "nonuniform_replacement").count();
    if suite_members == 0 || selection.rejected.is_empty() {
        problems
            .push(format!("selection not exercised: {suite_members} members, {} rejected", selection.rejected.len()));
    }
    if problems.is_empty() {
        Outcome {
            pass: true,
            detail: format!(
                "3 worked cases match; {suite_members} suite members all covered, {} candidates excluded",
                selection.rejected.len()
            ),
        }
    } else {
        Outcome { pass: false, detail: problems.join("; ") }
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "counting-kernel identity", secs(60), counting_identity),
        criterion(2, "elimination equals brute force", secs(120), oracle),
        criterion(3, "local density of theta kernels", secs(300), local_density),
        criterion(4, "Sidorenko family deficits", secs(600), sidorenko_families),
        criterion(5, "flowers are KNRS", secs(120), flowers),
        criterion(6, "Hölder lower bound", secs(180), holder),
        criterion(7, "gradient vs finite differences", secs(60), gradient),
        criterion(8, "search negative controls", secs(300), search_controls),
        criterion(9, "non-uniform replacement classifier", secs(60), classifier),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
