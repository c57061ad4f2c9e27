use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use sidlab::graphs::{
    clique_mixed_subdivision, flower, generalized_theta, odd_theta_decomposition, replace_edges,
    replace_edges_nonuniform, semidirect_product, subdivide, Graph, Parity, ReplacementSpec, Subdivision,
};
use sidlab::homdensity::{deficit, hom_density, Baseline, Mode, Strategy};
use sidlab::rational::{format_rational, parse_rational, parse_rational_or_decimal};
use sidlab::search::{search_counterexample, SearchConfig, SearchError};
use sidlab::stepgraphon::{local_density_deficit, SearchBudget, StepGraphon};
use sidlab::verify::{reports_to_csv, run_suite, Suite, SuiteReport};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Format(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Format(_) => 3,
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

fn format_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Format(msg.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "sidlab", version, about = "Sidorenko-type inequalities on step graphons")]
struct Cli {
    /// Worker threads for suites and batches.
    #[arg(long, global = true, env = "SIDLAB_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a graph from one of the named families.
    Construct(ConstructArgs),
    /// Homomorphism density of a graph in a step graphon.
    Density(DensityArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Search for a Sidorenko counterexample among regular graphons.
    Search(SearchArgs),
    /// Aggregate suite reports.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Path,
    Cycle,
    Complete,
    Star,
    Multipartite,
    Theta,
    OddTheta,
    Flower,
    Subdivide,
    Replace,
    ReplaceSpec,
    CliqueSubdivision,
    Semidirect,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
    Any,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Size parameter: path length, cycle length, clique order or star leaves.
    #[arg(long)]
    size: Option<usize>,
    /// Path or cycle lengths, or part sizes.
    #[arg(long, value_delimiter = ',')]
    lengths: Vec<usize>,
    #[arg(long, value_enum, default_value = "any")]
    parity: ParityArg,
    /// Host graph JSON.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Second graph for semidirect products.
    #[arg(long)]
    other: Option<PathBuf>,
    /// Replacement spec JSON.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Subdivision vertices per edge, or the semidirect subdivision count.
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    l1: Option<usize>,
    #[arg(long)]
    l2: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    shared: Vec<usize>,
    #[arg(long)]
    anchor: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Eliminate,
    Bruteforce,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Eliminate => Strategy::Eliminate,
            StrategyArg::Bruteforce => Strategy::Bruteforce,
        }
    }
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long, required_unless_present = "batch")]
    graph: Option<PathBuf>,
    #[arg(long, required_unless_present = "batch")]
    graphon: Option<PathBuf>,
    /// JSON list of {"graph", "graphon"} pairs; each entry is a path relative
    /// to the batch file or an inline object.
    #[arg(long, conflicts_with_all = ["graph", "graphon"])]
    batch: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "eliminate")]
    strategy: StrategyArg,
    /// Pin a vertex to a step, as `vertex:step`.
    #[arg(long = "pin")]
    pins: Vec<String>,
    /// Also report the deficit against `sidorenko` or `knrs:<d>`.
    #[arg(long)]
    baseline: Option<String>,
    /// Also check that the graphon is d-locally dense.
    #[arg(long)]
    local_dense: Option<String>,
    /// Accept decimals in numeric inputs.
    #[arg(long)]
    float: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite id, or `all`. Repeatable.
    #[arg(long = "suite", required = true)]
    suites: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock runtime in the report; the output is then no longer
    /// reproducible byte for byte.
    #[arg(long)]
    record_runtime: bool,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Write the per-iteration trace of the best start as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    float: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ReportArgs {
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn header(command: &str, seed: Option<u64>, config: Value) -> Value {
    json!({
        "tool": "sidlab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config": config,
    })
}

/// Prepends the header to a JSON object.
fn with_header(header: Value, body: Value) -> Value {
    let mut out = Map::new();
    out.insert("header".into(), header);
    match body {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| format_err(format!("{}: {e}", path.display())))
}

fn parse_graph(value: Value, origin: &str) -> Result<Graph, CliError> {
    serde_json::from_value(value).map_err(|e| format_err(format!("{origin}: not a graph: {e}")))
}

fn read_graph(path: &Path) -> Result<Graph, CliError> {
    parse_graph(read_json(path)?, &path.display().to_string())
}

fn read_graphon(path: &Path, float: bool) -> Result<StepGraphon, CliError> {
    StepGraphon::from_json(&read_json(path)?, float).map_err(|e| format_err(format!("{}: {e}", path.display())))
}

fn number(text: &str, float: bool) -> Result<sidlab::rational::BigRational, CliError> {
    let parsed = if float { parse_rational_or_decimal(text) } else { parse_rational(text) };
    parsed.map_err(|e| usage(format!("`{text}`: {e}")))
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(out: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    emit_text(out, &text)
}

fn need<T: Copy>(value: Option<T>, flag: &str, family: Family) -> Result<T, CliError> {
    value.ok_or_else(|| usage(format!("--family {family:?} needs --{flag}").to_lowercase()))
}

fn need_path<'a>(value: &'a Option<PathBuf>, flag: &str, family: Family) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| usage(format!("--family {family:?} needs --{flag}").to_lowercase()))
}

fn need_lengths(args: &ConstructArgs) -> Result<&[usize], CliError> {
    if args.lengths.is_empty() {
        return Err(usage(format!("--family {:?} needs --lengths", args.family).to_lowercase()));
    }
    Ok(&args.lengths)
}

fn construct(args: &ConstructArgs) -> Result<u8, CliError> {
    let parity = match args.parity {
        ParityArg::Even => Parity::Even,
        ParityArg::Odd => Parity::Odd,
        ParityArg::Any => Parity::Any,
    };
    let f = args.family;
    let graph_err = |e: sidlab::graphs::GraphError| usage(e);
    let body = match f {
        Family::Path => json!(Graph::path(need(args.size, "size", f)?)),
        Family::Cycle => json!(Graph::cycle(need(args.size, "size", f)?).map_err(graph_err)?),
        Family::Complete => json!(Graph::complete(need(args.size, "size", f)?)),
        Family::Star => json!(Graph::star(need(args.size, "size", f)?)),
        Family::Multipartite => json!(Graph::complete_multipartite(need_lengths(args)?)),
        Family::Theta => json!(generalized_theta(need_lengths(args)?, parity).map_err(graph_err)?),
        Family::OddTheta => {
            let (theta, dec) = odd_theta_decomposition(need_lengths(args)?).map_err(graph_err)?;
            let mut value = json!(theta);
            value["decomposition"] = json!(dec);
            value
        }
        Family::Flower => json!(flower(need_lengths(args)?).map_err(graph_err)?),
        Family::Subdivide => {
            let host = read_graph(need_path(&args.graph, "graph", f)?)?;
            json!(subdivide(&host, &Subdivision::Uniform(need(args.l, "l", f)?)).map_err(graph_err)?)
        }
        Family::Replace => {
            let host = read_graph(need_path(&args.graph, "graph", f)?)?;
            let theta = generalized_theta(need_lengths(args)?, parity).map_err(graph_err)?;
            json!(replace_edges(&host, &theta).map_err(graph_err)?)
        }
        Family::ReplaceSpec => {
            let host = read_graph(need_path(&args.graph, "graph", f)?)?;
            let path = need_path(&args.spec, "spec", f)?;
            let spec: ReplacementSpec = serde_json::from_value(read_json(path)?)
                .map_err(|e| format_err(format!("{}: not a replacement spec: {e}", path.display())))?;
            json!(replace_edges_nonuniform(&host, &spec).map_err(graph_err)?)
        }
        Family::CliqueSubdivision => {
            json!(clique_mixed_subdivision(need(args.h, "h", f)?, need(args.l1, "l1", f)?, need(args.l2, "l2", f)?)
                .map_err(graph_err)?)
        }
        Family::Semidirect => {
            let h1 = read_graph(need_path(&args.graph, "graph", f)?)?;
            let h2 = read_graph(need_path(&args.other, "other", f)?)?;
            let shared: BTreeSet<usize> = args.shared.iter().copied().collect();
            json!(semidirect_product(&h1, &shared, need(args.anchor, "anchor", f)?, &h2, need(args.l, "l", f)?)
                .map_err(graph_err)?)
        }
    };
    let config = json!({
        "family": format!("{f:?}").to_lowercase(),
        "size": args.size,
        "lengths": args.lengths,
        "parity": format!("{:?}", args.parity).to_lowercase(),
        "l": args.l,
        "h": args.h,
        "l1": args.l1,
        "l2": args.l2,
        "shared": args.shared,
        "anchor": args.anchor,
    });
    emit(args.out.as_deref(), &with_header(header("construct", None, config), body))?;
    Ok(0)
}

fn parse_pins(pins: &[String]) -> Result<Vec<(usize, usize)>, CliError> {
    pins.iter()
        .map(|p| {
            let (v, s) = p.split_once(':').ok_or_else(|| usage(format!("pin `{p}` is not vertex:step")))?;
            let v = v.trim().parse().map_err(|_| usage(format!("pin `{p}`: bad vertex")))?;
            let s = s.trim().parse().map_err(|_| usage(format!("pin `{p}`: bad step")))?;
            Ok((v, s))
        })
        .collect()
}

fn parse_baseline(text: &str, float: bool) -> Result<Baseline, CliError> {
    match text.split_once(':') {
        None if text == "sidorenko" => Ok(Baseline::Sidorenko),
        Some(("knrs", d)) => Ok(Baseline::Knrs(number(d, float)?)),
        _ => Err(usage(format!("baseline `{text}` is neither `sidorenko` nor `knrs:<d>`"))),
    }
}

/// A batch entry is a path relative to the batch file or an inline object.
fn resolve(entry: &Value, base: &Path) -> Result<Value, CliError> {
    match entry {
        Value::String(rel) => read_json(&base.join(rel)),
        Value::Object(_) => Ok(entry.clone()),
        _ => Err(format_err("batch entries must be paths or objects")),
    }
}

fn density(args: &DensityArgs) -> Result<u8, CliError> {
    let mode = Mode::from(args.mode);
    let strategy = Strategy::from(args.strategy);
    let pins = parse_pins(&args.pins)?;
    let baseline = args.baseline.as_deref().map(|b| parse_baseline(b, args.float)).transpose()?;
    let local = args.local_dense.as_deref().map(|d| number(d, args.float)).transpose()?;
    let config = json!({
        "mode": mode,
        "strategy": strategy,
        "pins": pins,
        "baseline": args.baseline,
        "local_dense": args.local_dense,
        "float": args.float,
    });

    if let Some(batch) = &args.batch {
        let base = batch.parent().unwrap_or(Path::new("."));
        let entries = match read_json(batch)? {
            Value::Array(items) => items,
            _ => return Err(format_err(format!("{}: expected a JSON list", batch.display()))),
        };
        let mut pairs = Vec::with_capacity(entries.len());
        for (i, entry) in entries.iter().enumerate() {
            let origin = format!("{} entry {i}", batch.display());
            let g = parse_graph(resolve(&entry["graph"], base)?, &origin)?;
            let w = StepGraphon::from_json(&resolve(&entry["graphon"], base)?, args.float)
                .map_err(|e| format_err(format!("{origin}: {e}")))?;
            pairs.push((g, w));
        }
        let refs: Vec<(&Graph, &StepGraphon)> = pairs.iter().map(|(g, w)| (g, w)).collect();
        let results: Vec<Value> = sidlab::homdensity::hom_density_batch(&refs, mode)
            .into_iter()
            .map(|r| match r {
                Ok(v) => v.to_json(),
                Err(e) => json!({ "error": e.to_string() }),
            })
            .collect();
        let failed = results.iter().any(|r| r.get("error").is_some());
        emit(args.out.as_deref(), &with_header(header("density", None, config), json!({ "results": results })))?;
        return Ok(if failed { 1 } else { 0 });
    }

    let g = read_graph(args.graph.as_deref().expect("clap requires --graph"))?;
    let w = read_graphon(args.graphon.as_deref().expect("clap requires --graphon"), args.float)?;
    let value = hom_density(&g, &w, mode, strategy, &pins).map_err(usage)?;
    let mut body = value.to_json();
    let mut violated = false;
    if let Some(baseline) = &baseline {
        let gap = deficit(&g, &w, baseline, mode).map_err(usage)?;
        body["deficit"] = match &gap.exact {
            Some(exact) => json!(format_rational(exact)),
            None => json!(gap.value),
        };
        violated |= gap.value < -1e-12;
    }
    if let Some(d) = &local {
        let report = local_density_deficit(&w, d, &SearchBudget::default());
        violated |= report.certified_violation;
        body["local_density"] = json!(report);
    }
    emit(args.out.as_deref(), &with_header(header("density", None, config), body))?;
    Ok(if violated { 1 } else { 0 })
}

fn verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let mut suites = Vec::new();
    for name in &args.suites {
        if name == "all" {
            suites.extend(Suite::ALL);
        } else {
            suites.push(name.parse::<Suite>().map_err(usage)?);
        }
    }
    let reports: Vec<SuiteReport> = suites
        .iter()
        .map(|&s| {
            let report = run_suite(s, args.trials, args.seed);
            if args.record_runtime {
                report
            } else {
                report.without_runtime()
            }
        })
        .collect();
    for r in &reports {
        eprintln!("{}: {} trials, {} checks, {} failures", r.suite, r.trials, r.checks, r.failures.len());
    }
    let config = json!({
        "suites": suites.iter().map(|s| s.id()).collect::<Vec<_>>(),
        "trials": args.trials,
        "record_runtime": args.record_runtime,
    });
    let head = header("verify", Some(args.seed), config);
    let body = match reports.as_slice() {
        [single] => json!(single),
        many => json!({ "reports": many }),
    };
    emit(args.out.as_deref(), &with_header(head, body))?;
    Ok(if reports.iter().all(SuiteReport::passed) { 0 } else { 1 })
}

fn search(args: &SearchArgs) -> Result<u8, CliError> {
    let h = read_graph(&args.graph)?;
    let d = number(&args.d, args.float)?;
    let config = SearchConfig {
        starts: args.starts,
        iterations: args.iterations,
        step: args.step,
        seed: args.seed,
        ..SearchConfig::default()
    };
    let result = search_counterexample(&h, args.n, &d, &config).map_err(|e| match e {
        SearchError::NoConvergence { .. } => format_err(e),
        _ => usage(e),
    })?;
    if let Some(path) = &args.trace {
        emit_text(Some(path), &result.trace_csv())?;
    }
    let head = header("search", Some(args.seed), json!({ "n": args.n, "d": format_rational(&d), "search": config }));
    emit(args.out.as_deref(), &with_header(head, json!(result)))?;
    Ok(if result.counterexample { 1 } else { 0 })
}

/// Reads either a single-suite report or a multi-suite file.
fn load_reports(path: &Path) -> Result<Vec<SuiteReport>, CliError> {
    let value = read_json(path)?;
    let bad = |e: serde_json::Error| format_err(format!("{}: not a suite report: {e}", path.display()));
    match value.get("reports") {
        Some(list) => serde_json::from_value(list.clone()).map_err(bad),
        None => Ok(vec![serde_json::from_value(value).map_err(bad)?]),
    }
}

fn report(args: &ReportArgs) -> Result<u8, CliError> {
    let mut reports = Vec::new();
    for path in &args.inputs {
        reports.extend(load_reports(path)?);
    }
    match args.format {
        ReportFormat::Csv => emit_text(args.out.as_deref(), &reports_to_csv(&reports))?,
        ReportFormat::Json => {
            reports.sort_by(|a, b| a.suite.cmp(&b.suite));
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "suite": r.suite,
                        "trials": r.trials,
                        "failures": r.failures.len(),
                        "min_gap": r.min_gap,
                        "max_gap": r.max_gap,
                        "runtime_ms": r.runtime_ms,
                    })
                })
                .collect();
            emit(args.out.as_deref(), &with_header(header("report", None, json!({})), json!({ "rows": rows })))?;
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().map_err(usage)?;
    }
    match &cli.command {
        Command::Construct(args) => construct(args),
        Command::Density(args) => density(args),
        Command::Verify(args) => verify(args),
        Command::Search(args) => search(args),
        Command::Report(args) => report(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sidlab: {e}");
            ExitCode::from(e.code())
        }
    }
}
