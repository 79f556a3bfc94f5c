use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdpattern::errorgen::{self, InjectionUnit, Profile};
use fdpattern::instance_graph::GraphOptions;
use fdpattern::{
    brute_force_optimal, build_fd_graph, build_instance_graph, classify_attributes,
    compute_pattern_quality, compute_sccs, detect_violations, evaluate, explain, instance_quality,
    order_fds_anchored, repair, Error, Instance, OracleLimits, RepairConfig, RepairResult, Sigma,
    Strategy, StrategyKind,
};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "fdpattern",
    version,
    about = "Pattern-preserving repair of FD violations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Repair an instance and write the repaired CSV.
    Repair(RepairArgs),
    /// List groups of tuples violating an FD.
    Detect(DetectArgs),
    /// Dump instance-graph edges with support, confidence and quality.
    Quality(QualityArgs),
    /// Show the pattern expression and decision log of one tuple.
    Explain(ExplainArgs),
    /// Inject FD-violating errors into a clean instance.
    Inject(InjectArgs),
    /// Generate a synthetic instance that satisfies a profile's FDs.
    Generate(GenerateArgs),
    /// Precision and recall of a repair against the clean instance.
    Evaluate(EvaluateArgs),
    /// Exhaustively search the best repair of a tiny instance.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Greedy,
    Rc,
    Hybrid,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Greedy => StrategyKind::Greedy,
            StrategyArg::Rc => StrategyKind::Rc,
            StrategyArg::Hybrid => StrategyKind::Hybrid,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UnitArg {
    Tuple,
    Cell,
}

#[derive(Args, Debug)]
struct Data {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// FD file, one `A,B -> C` per line.
    #[arg(long)]
    fds: PathBuf,
}

#[derive(Args, Debug)]
struct EngineArgs {
    #[arg(long, value_enum, default_value = "hybrid")]
    strategy: StrategyArg,
    /// Hybrid threshold (default 0.5).
    #[arg(long)]
    theta: Option<f64>,
    /// Attributes to make bound when breaking FD cycles.
    #[arg(long, value_delimiter = ',')]
    bound: Vec<String>,
    /// Leave tuples with an empty left-hand value out of the instance graph.
    #[arg(long)]
    exclude_empty_lhs: bool,
    /// Recorded in reports; repair itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RepairArgs {
    #[command(flatten)]
    data: Data,
    #[command(flatten)]
    engine: EngineArgs,
    /// Repaired CSV (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON lines, one per tuple: pattern expression and decision log.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run summary: cost, gain, conflicts and the full configuration.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    data: Data,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct QualityArgs {
    #[command(flatten)]
    data: Data,
    /// Attributes to make bound when breaking FD cycles.
    #[arg(long, value_delimiter = ',')]
    bound: Vec<String>,
    #[arg(long)]
    exclude_empty_lhs: bool,
    /// Print only the instance quality instead of the edges.
    #[arg(long)]
    total: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct ExplainArgs {
    #[command(flatten)]
    data: Data,
    #[command(flatten)]
    engine: EngineArgs,
    /// Zero-based tuple index.
    #[arg(long)]
    tuple: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InjectArgs {
    #[command(flatten)]
    data: Data,
    /// Fraction of tuples (or cells) to perturb, in (0, 1].
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "tuple")]
    unit: UnitArg,
    /// Dirty CSV (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Injection log (JSON).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    rows: usize,
    /// JSON profile; defaults to the built-in tax-like profile.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the profile's FDs here.
    #[arg(long)]
    fds_output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    dirty: PathBuf,
    #[arg(long)]
    repaired: PathBuf,
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    fds: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    data: Data,
    #[arg(long, default_value_t = 10_000_000)]
    max_states: u64,
    #[arg(long, value_delimiter = ',')]
    bound: Vec<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SearchSpaceExceeded { .. } => 3,
            Error::InvalidArgument(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn at_path<T>(path: &Path, r: std::result::Result<T, impl Into<Failure>>) -> Outcome<T> {
    r.map_err(|e| {
        let f = e.into();
        Failure {
            code: f.code,
            message: format!("{}: {}", path.display(), f.message),
        }
    })
}

fn read_instance(path: &Path) -> Outcome<Instance> {
    at_path(path, Instance::from_csv_path(path))
}

fn read_sigma(path: &Path) -> Outcome<Sigma> {
    let text = at_path(path, fs::read_to_string(path))?;
    at_path(path, Sigma::parse(&text))
}

fn sink(path: Option<&Path>) -> Outcome<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(at_path(p, File::create(p))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Outcome {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Scalar fields of a JSON object as `key,value` rows; nested values are
/// written as compact JSON.
fn write_report(path: Option<&Path>, value: &Value, format: Format) -> Outcome {
    match format {
        Format::Json => write_json(path, value),
        Format::Csv => {
            let mut w = sink(path)?;
            writeln!(w, "key,value")?;
            if let Value::Object(map) = value {
                for (k, v) in map {
                    let text = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    writeln!(w, "{},{}", csv_field(k), csv_field(&text))?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn engine_config(e: &EngineArgs, record_trace: bool) -> Outcome<(Strategy, RepairConfig)> {
    let strategy = Strategy::from_kind(e.strategy.into(), e.theta)?;
    let cfg = RepairConfig {
        bound: e.bound.clone(),
        graph: GraphOptions {
            skip_empty_lhs: e.exclude_empty_lhs,
        },
        record_trace,
    };
    Ok((strategy, cfg))
}

fn run_repair(a: RepairArgs) -> Outcome {
    let inst = read_instance(&a.data.input)?;
    let sigma = read_sigma(&a.data.fds)?;
    let (strategy, cfg) = engine_config(&a.engine, a.trace.is_some())?;
    let r = repair(&inst, &sigma, strategy, &cfg)?;

    {
        let mut w = sink(a.output.as_deref())?;
        r.repaired.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &a.trace {
        let mut w = sink(Some(path))?;
        for t in 0..inst.len() {
            let line = trace_line(&r, t)?;
            serde_json::to_writer(&mut w, &line).map_err(io::Error::from)?;
            writeln!(w)?;
        }
        w.flush()?;
    }
    if let Some(path) = &a.report {
        let report = json!({
            "cost": r.stats.cost,
            "gain": r.stats.gain,
            "qualityBefore": r.stats.quality_before,
            "qualityAfter": r.stats.quality_after,
            "conflicts": r.conflicts,
            "fallbacks": r.stats.fallbacks,
            "forced": r.stats.forced,
            "boundAttrs": r.classification.bound,
            "cycleBreaks": r.classification.cycle_breaks,
            "fdOrder": r.order.slots,
            "config": {
                "input": a.data.input,
                "fds": a.data.fds,
                "strategy": strategy.kind,
                "theta": strategy.theta,
                "bound": cfg.bound,
                "excludeEmptyLhs": cfg.graph.skip_empty_lhs,
            },
            "seed": a.engine.seed,
        });
        write_report(Some(path), &report, a.format)?;
    }
    if !r.conflicts.is_empty() {
        eprintln!(
            "warning: {} conflict(s); affected tuples may still violate the FDs",
            r.conflicts.len()
        );
    }
    Ok(())
}

fn trace_line(r: &RepairResult, t: usize) -> Outcome<Value> {
    let expression = r.expression(t)?.record(r.graph());
    let trace = explain(r, t)?;
    Ok(json!({
        "tuple": t,
        "expression": expression.patterns,
        "steps": trace.steps,
        "conflicts": trace.conflicts,
        "changes": trace.changes,
    }))
}

fn run_detect(a: DetectArgs) -> Outcome {
    let inst = read_instance(&a.data.input)?;
    let sigma = read_sigma(&a.data.fds)?;
    let groups = detect_violations(&inst, &sigma)?;
    match a.format {
        Format::Json => write_json(a.output.as_deref(), &groups),
        Format::Csv => {
            let mut w = sink(a.output.as_deref())?;
            writeln!(w, "fd,lhs,tuples,rhs_values")?;
            for g in &groups {
                let tuples: Vec<String> = g.tuple_indices.iter().map(usize::to_string).collect();
                writeln!(
                    w,
                    "{},{},{},{}",
                    g.fd,
                    csv_field(&g.lhs_value.join(";")),
                    tuples.join(";"),
                    csv_field(&g.rhs_values.join(";"))
                )?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn run_quality(a: QualityArgs) -> Outcome {
    let inst = read_instance(&a.data.input)?;
    let sigma = read_sigma(&a.data.fds)?;
    if a.total {
        let q = instance_quality(&inst, &sigma)?;
        let v = json!({ "instanceQuality": q, "tuples": inst.len(), "fds": sigma.len() });
        return write_report(a.output.as_deref(), &v, a.format);
    }
    let cls = classify_attributes(&sigma, &inst, &a.bound)?;
    let order = order_fds_anchored(&sigma, &compute_sccs(&build_fd_graph(&sigma)), &cls);
    let opts = GraphOptions {
        skip_empty_lhs: a.exclude_empty_lhs,
    };
    let mut g = build_instance_graph(&inst, &sigma, opts)?;
    compute_pattern_quality(&mut g, &order);
    let mut w = sink(a.output.as_deref())?;
    if let Format::Csv = a.format {
        writeln!(w, "fd,lhs,rhs,frequency,sup,conf,quality,deferred")?;
    }
    for e in 0..g.edges().len() {
        let rec = g.edge_record(e);
        match a.format {
            Format::Json => {
                let v = json!({
                    "fd": rec.fd,
                    "lhs": rec.lhs,
                    "rhs": rec.rhs,
                    "frequency": rec.frequency,
                    "sup": rec.sup,
                    "conf": rec.conf,
                    "quality": rec.quality,
                    "deferred": rec.deferred,
                });
                serde_json::to_writer(&mut w, &v).map_err(io::Error::from)?;
                writeln!(w)?;
            }
            Format::Csv => writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                rec.fd,
                csv_field(&rec.lhs.join(";")),
                csv_field(&rec.rhs),
                rec.frequency,
                rec.sup,
                rec.conf,
                rec.quality,
                rec.deferred
            )?,
        }
    }
    w.flush()?;
    Ok(())
}

fn run_explain(a: ExplainArgs) -> Outcome {
    let inst = read_instance(&a.data.input)?;
    let sigma = read_sigma(&a.data.fds)?;
    let (strategy, cfg) = engine_config(&a.engine, true)?;
    let r = repair(&inst, &sigma, strategy, &cfg)?;
    write_json(a.output.as_deref(), &trace_line(&r, a.tuple)?)
}

fn run_inject(a: InjectArgs) -> Outcome {
    let clean = read_instance(&a.data.input)?;
    let sigma = read_sigma(&a.data.fds)?;
    let unit = match a.unit {
        UnitArg::Tuple => InjectionUnit::Tuple,
        UnitArg::Cell => InjectionUnit::Cell,
    };
    let (dirty, log) = errorgen::inject_errors(&clean, &sigma, a.rate, a.seed, unit)?;
    {
        let mut w = sink(a.output.as_deref())?;
        dirty.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &a.log {
        write_json(Some(path), &log)?;
    }
    Ok(())
}

fn run_generate(a: GenerateArgs) -> Outcome {
    let profile = match &a.profile {
        Some(path) => {
            let text = at_path(path, fs::read_to_string(path))?;
            serde_json::from_str::<Profile>(&text).map_err(|e| Failure {
                code: 2,
                message: format!("{}: {e}", path.display()),
            })?
        }
        None => Profile::tax_like(a.rows),
    };
    let inst = errorgen::generate_synthetic(a.rows, &profile, a.seed)?;
    {
        let mut w = sink(a.output.as_deref())?;
        inst.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &a.fds_output {
        let text = profile.sigma()?.to_string();
        at_path(path, fs::write(path, text))?;
    }
    Ok(())
}

fn run_evaluate(a: EvaluateArgs) -> Outcome {
    let dirty = read_instance(&a.dirty)?;
    let repaired = read_instance(&a.repaired)?;
    let clean = read_instance(&a.clean)?;
    let sigma = read_sigma(&a.fds)?;
    let report = evaluate(&dirty, &repaired, &clean, &sigma)?;
    let value = serde_json::to_value(report).map_err(io::Error::from)?;
    write_report(a.output.as_deref(), &value, a.format)
}

fn run_oracle(a: OracleArgs) -> Outcome {
    let inst = read_instance(&a.data.input)?;
    let sigma = read_sigma(&a.data.fds)?;
    let limits = OracleLimits {
        max_states: a.max_states,
        bound: a.bound,
    };
    let r = brute_force_optimal(&inst, &sigma, &limits)?;
    write_json(a.output.as_deref(), &r)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Repair(a) => run_repair(a),
        Command::Detect(a) => run_detect(a),
        Command::Quality(a) => run_quality(a),
        Command::Explain(a) => run_explain(a),
        Command::Inject(a) => run_inject(a),
        Command::Generate(a) => run_generate(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Oracle(a) => run_oracle(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
