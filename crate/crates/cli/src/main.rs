use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tzoracle::audit::{
    audit_stretch, bench_build, gen_graph, measure_space, AuditMode, BenchTarget, Model, WeightDist,
};
use tzoracle::bunch::BunchOracle;
use tzoracle::constructions::{Algo, BuildPlan, CompositeOracle};
use tzoracle::hado::{HadoParams, Hado};
use tzoracle::serialize::OracleFile;
use tzoracle::spanner::{baswana_sen_spanner, bkmp_spanner_unweighted};
use tzoracle::{Error, Graph};

#[derive(Parser)]
#[command(name = "tzoracle", version, about = "Approximate distance oracles: generate, build, query, audit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted (required for oracle files).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for parallel phases.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random graph.
    Gen {
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// unit, uniform[:W] or exp[:MEAN]
        #[arg(long, default_value = "unit")]
        weights: String,
    },
    /// Build an oracle (or a spanner) and write it to --out.
    Build {
        #[arg(long)]
        input: PathBuf,
        /// tz, hado, bs-spanner, add-spanner, or one of the six composite builders
        #[arg(long)]
        algo: String,
        #[arg(long)]
        k: usize,
        /// Ladder parameter for --algo hado.
        #[arg(long)]
        x0: Option<f64>,
    },
    /// Query an oracle file; ids are 1-based as in graph files.
    Query {
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, requires = "v", conflicts_with = "pairs")]
        u: Option<usize>,
        #[arg(long, requires = "u")]
        v: Option<usize>,
        /// File with one `<u> <v>` pair per line.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Check an oracle's guarantee against exact distances.
    Audit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Also write the report as a JSON record.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Time repeated builds.
    Bench {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        algo: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Show a solved build plan, or the contents of an oracle file.
    Info {
        #[arg(long, required_unless_present = "oracle")]
        input: Option<PathBuf>,
        #[arg(long, requires = "input", required_unless_present = "oracle")]
        algo: Option<String>,
        #[arg(long, requires = "algo")]
        k: Option<usize>,
        #[arg(long, conflicts_with = "input")]
        oracle: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

enum Failure {
    Usage(String),
    Io(String),
    Violation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Io(_) | Error::Parse { .. } | Error::NegativeWeight { .. } | Error::VertexOutOfRange { .. } | Error::Format(_) => {
                Failure::Io(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Graph::parse(&text).map_err(|e| io_err(path, e))
}

fn read_oracle(path: &Path) -> Result<OracleFile, Failure> {
    OracleFile::read_file(path).map_err(|e| io_err(path, e))
}

fn emit(common: &Common, text: &str) -> Outcome {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn print_value(common: &Common, text: String, value: serde_json::Value) -> Outcome {
    match common.format {
        Format::Text => emit(common, &text),
        Format::Json => emit(common, &format!("{}\n", serde_json::to_string_pretty(&value).unwrap())),
    }
}

fn vertex(id: usize, n: usize) -> Result<usize, Failure> {
    if id == 0 || id > n {
        return Err(usage(format!("vertex {id} out of range 1..={n}")));
    }
    Ok(id - 1)
}

fn fmt_dist(d: f64) -> String {
    if d.is_infinite() {
        "inf".to_string()
    } else {
        format!("{d}")
    }
}

fn parse_algo(name: &str) -> Result<Algo, Failure> {
    name.parse::<Algo>().map_err(|_| {
        let names: Vec<&str> = Algo::ALL.iter().map(|a| a.name()).collect();
        usage(format!("unknown algorithm {name:?}; expected tz, hado, bs-spanner, add-spanner, {}", names.join(", ")))
    })
}

fn cmd_gen(common: &Common, model: &str, n: usize, m: usize, weights: &str) -> Outcome {
    let model: Model = model.parse()?;
    let dist: WeightDist = weights.parse()?;
    let g = gen_graph(model, n, m, dist, common.seed)?;
    let header = vec![format!("generated model={} n={n} m={m} weights={weights} seed={}", model_name(model), common.seed)];
    emit(common, &g.to_text(&header))
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Gnm => "gnm",
        Model::Grid => "grid",
        Model::Path => "path",
        Model::Star => "star",
        Model::Cycle => "cycle",
        Model::Clustered => "clustered",
    }
}

fn cmd_build(common: &Common, input: &Path, algo: &str, k: usize, x0: Option<f64>) -> Outcome {
    let out = common.out.as_ref().ok_or_else(|| usage("build needs --out"))?;
    let g = read_graph(input)?;
    let start = Instant::now();
    let mut lines = Vec::new();
    let oracle = match algo {
        "bs-spanner" | "add-spanner" => {
            let sp = if algo == "bs-spanner" {
                baswana_sen_spanner(&g, k, common.seed)?
            } else {
                bkmp_spanner_unweighted(&g, k, common.seed)?
            };
            fs::write(out, sp.to_text()).map_err(|e| io_err(out, e))?;
            lines.push(format!("spanner edges {} of {}", sp.h.m(), g.m()));
            lines.push(format!("attempts {}", sp.attempts));
            if let Some(over) = sp.overage {
                lines.push(format!("warning: {over} edges over the size budget"));
            }
            lines.push(format!("ms_build {:.3}", start.elapsed().as_secs_f64() * 1e3));
            return print_value(
                common_without_out(common),
                lines.join("\n") + "\n",
                json!({"edges": sp.h.m(), "attempts": sp.attempts, "overage": sp.overage}),
            );
        }
        "tz" => OracleFile::Bunch(BunchOracle::build_classic(&g, k, common.seed)?),
        "hado" => {
            let x0 = x0.ok_or_else(|| usage("--algo hado needs --x0"))?;
            let h = Hado::build(&g, k, x0, common.seed)?;
            lines.extend(h.warnings().iter().map(|w| format!("warning: {w}")));
            OracleFile::Hado(h)
        }
        name => {
            let algo = parse_algo(name)?;
            let c = CompositeOracle::build(&g, algo, k, common.seed)?;
            for (phase, ms) in &c.report().phases {
                lines.push(format!("phase {phase} {ms:.3}"));
            }
            lines.extend(c.plan().notes.iter().map(|n| format!("note: {n}")));
            lines.extend(c.report().warnings.iter().map(|w| format!("warning: {w}")));
            OracleFile::Composite(c)
        }
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    oracle.write_file(out).map_err(|e| io_err(out, e))?;
    lines.insert(0, format!("entries {}", oracle.entries()));
    lines.push(format!("ms_build {ms:.3}"));
    let value = json!({"entries": oracle.entries(), "ms_build": ms, "messages": lines});
    print_value(common_without_out(common), lines.join("\n") + "\n", value)
}

/// Reports go to stdout when `--out` names the artifact itself.
fn common_without_out(common: &Common) -> &Common {
    static STDOUT: Common = Common { seed: 0, out: None, format: Format::Text, threads: None };
    static STDOUT_JSON: Common = Common { seed: 0, out: None, format: Format::Json, threads: None };
    match common.format {
        Format::Text => &STDOUT,
        Format::Json => &STDOUT_JSON,
    }
}

fn cmd_query(common: &Common, oracle: &Path, u: Option<usize>, v: Option<usize>, pairs: Option<&Path>) -> Outcome {
    let o = read_oracle(oracle)?;
    let n = o.n();
    let mut list = Vec::new();
    match (u, v, pairs) {
        (Some(u), Some(v), None) => list.push((u, v)),
        (None, None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            for (i, line) in text.lines().enumerate() {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.is_empty() || toks[0].starts_with('#') {
                    continue;
                }
                let parsed: Vec<usize> = toks.iter().filter_map(|t| t.parse().ok()).collect();
                if toks.len() != 2 || parsed.len() != 2 {
                    return Err(io_err(path, format!("line {}: expected `<u> <v>`", i + 1)));
                }
                list.push((parsed[0], parsed[1]));
            }
        }
        _ => return Err(usage("query needs --u and --v, or --pairs")),
    }
    let mut text = String::new();
    let mut records = Vec::new();
    for (a, b) in list {
        let est = o.query(vertex(a, n)?, vertex(b, n)?);
        writeln!(text, "{a} {b} {}", fmt_dist(est)).unwrap();
        records.push(json!({"u": a, "v": b, "estimate": if est.is_finite() { json!(est) } else { json!(null) }}));
    }
    print_value(common, text, json!(records))
}

fn cmd_audit(common: &Common, input: &Path, oracle: &Path, mode: Mode, samples: usize, record: Option<&Path>) -> Outcome {
    let g = read_graph(input)?;
    let o = read_oracle(oracle)?;
    let mode = match mode {
        Mode::Exhaustive => AuditMode::Exhaustive,
        Mode::Sampled => AuditMode::Sampled { count: samples, seed: common.seed },
    };
    let report = audit_stretch(&g, &o, mode, 0.0)?;
    let value = serde_json::to_value(&report).unwrap();
    if let Some(path) = record {
        fs::write(path, serde_json::to_string_pretty(&value).unwrap() + "\n").map_err(|e| io_err(path, e))?;
    }
    let mut text = report.to_string();
    text.push('\n');
    for v in report.violations.iter().take(10) {
        writeln!(text, "violation {} {} d={} estimate={}", v.u + 1, v.v + 1, fmt_dist(v.d), fmt_dist(v.estimate)).unwrap();
    }
    writeln!(text, "{}", if report.passed() { "PASS" } else { "FAIL" }).unwrap();
    print_value(common, text, value)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn bench_target(algo: &str, k: usize) -> Result<BenchTarget, Failure> {
    Ok(match algo {
        "tz" => BenchTarget::Classic { k },
        name => BenchTarget::Composite { algo: parse_algo(name)?, k },
    })
}

fn cmd_bench(common: &Common, input: &Path, algo: &str, k: usize, reps: usize) -> Outcome {
    let g = read_graph(input)?;
    let summary = bench_build(&g, bench_target(algo, k)?, common.seed, reps)?;
    let mut text = format!("reps {}\n", summary.reps);
    for p in summary.phases.iter().chain(std::iter::once(&summary.total)) {
        writeln!(text, "{} median_ms {:.3} iqr_ms {:.3}", p.name, p.median_ms, p.iqr_ms).unwrap();
    }
    print_value(common, text, serde_json::to_value(&summary).unwrap())
}

fn cmd_info_plan(common: &Common, input: &Path, algo: &str, k: Option<usize>) -> Outcome {
    let g = read_graph(input)?;
    let k = k.ok_or_else(|| usage("info needs --k with --algo"))?;
    let algo = parse_algo(algo)?;
    let plan = BuildPlan::solve(algo, &g, k, common.seed)?;
    let params = HadoParams::new(g.n(), k, plan.x0)?;
    let n = g.n() as f64;
    let targets: Vec<f64> = params.xs.iter().map(|x| n.powf(1.0 - x)).collect();
    let (alpha, beta) = plan.guarantee();
    let mut text = String::new();
    writeln!(text, "algo {algo}").unwrap();
    writeln!(text, "n {} m {}", g.n(), g.m()).unwrap();
    writeln!(text, "k {k}").unwrap();
    writeln!(text, "guarantee alpha={alpha} beta={beta}").unwrap();
    writeln!(text, "x0 {:.6}", plan.x0).unwrap();
    let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
    writeln!(text, "k_prime {}", opt(plan.k_prime)).unwrap();
    writeln!(text, "k_dprime {}", opt(plan.k_dprime)).unwrap();
    writeln!(text, "t {}", params.t).unwrap();
    for (i, (x, s)) in params.xs.iter().zip(&targets).enumerate() {
        writeln!(text, "S_{i} x={x:.6} target_size={s:.1}").unwrap();
    }
    writeln!(text, "build_exponent {:.6}", plan.exponent()).unwrap();
    for note in &plan.notes {
        writeln!(text, "note: {note}").unwrap();
    }
    let value = json!({
        "algo": algo.name(), "n": g.n(), "m": g.m(), "k": k, "alpha": alpha, "beta": beta,
        "x0": plan.x0, "k_prime": plan.k_prime, "k_dprime": plan.k_dprime, "t": params.t,
        "xs": params.xs, "target_sizes": targets, "build_exponent": plan.exponent(), "notes": plan.notes,
    });
    print_value(common, text, value)
}

fn cmd_info_oracle(common: &Common, path: &Path) -> Outcome {
    let o = read_oracle(path)?;
    let space = measure_space(&o);
    let mut text = String::new();
    let kind = match &o {
        OracleFile::Bunch(_) => "tz",
        OracleFile::Hado(_) => "hado",
        OracleFile::Composite(c) => c.plan().algo.name(),
    };
    writeln!(text, "kind {kind}").unwrap();
    writeln!(text, "n {}", o.n()).unwrap();
    let mut value = json!({"kind": kind, "n": o.n(), "entries": space.total, "components": space.components});
    if let Some((a, b)) = o.guarantee() {
        writeln!(text, "guarantee alpha={a} beta={b}").unwrap();
        value["alpha"] = json!(a);
        value["beta"] = json!(b);
    }
    let hado = match &o {
        OracleFile::Bunch(b) => {
            let sizes: Vec<usize> = b.levels().sets.iter().map(|s| s.len()).collect();
            writeln!(text, "k {}", b.k()).unwrap();
            writeln!(text, "levels {sizes:?}").unwrap();
            value["levels"] = json!(sizes);
            None
        }
        OracleFile::Hado(h) => Some(h),
        OracleFile::Composite(c) => {
            let p = c.plan();
            writeln!(text, "k {}", p.k).unwrap();
            writeln!(text, "x0 {:.6}", p.x0).unwrap();
            let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
            writeln!(text, "k_prime {}", opt(p.k_prime)).unwrap();
            writeln!(text, "k_dprime {}", opt(p.k_dprime)).unwrap();
            value["x0"] = json!(p.x0);
            value["k_prime"] = json!(p.k_prime);
            value["k_dprime"] = json!(p.k_dprime);
            Some(c.hado())
        }
    };
    if let Some(h) = hado {
        if matches!(o, OracleFile::Hado(_)) {
            writeln!(text, "k {}", h.k()).unwrap();
            writeln!(text, "x0 {:.6}", h.params().x0).unwrap();
        }
        writeln!(text, "t {}", h.params().t).unwrap();
        for (i, (x, s)) in h.params().xs.iter().zip(h.s_sets()).enumerate() {
            writeln!(text, "S_{i} x={x:.6} size={}", s.len()).unwrap();
        }
        value["t"] = json!(h.params().t);
        value["xs"] = json!(h.params().xs);
        value["s_sizes"] = json!(h.s_sets().iter().map(|s| s.len()).collect::<Vec<_>>());
    }
    for (name, count) in &space.components {
        writeln!(text, "entries {name} {count}").unwrap();
    }
    writeln!(text, "entries total {}", space.total).unwrap();
    print_value(common, text, value)
}

fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| usage(e.to_string()))?;
    }
    let c = &cli.common;
    match &cli.command {
        Command::Gen { model, n, m, weights } => cmd_gen(c, model, *n, *m, weights),
        Command::Build { input, algo, k, x0 } => cmd_build(c, input, algo, *k, *x0),
        Command::Query { oracle, u, v, pairs } => cmd_query(c, oracle, *u, *v, pairs.as_deref()),
        Command::Audit { input, oracle, mode, samples, json } => cmd_audit(c, input, oracle, *mode, *samples, json.as_deref()),
        Command::Bench { input, algo, k, reps } => cmd_bench(c, input, algo, *k, *reps),
        Command::Info { input, algo, k, oracle } => match (oracle, input, algo) {
            (Some(path), _, _) => cmd_info_oracle(c, path),
            (None, Some(input), Some(algo)) => cmd_info_plan(c, input, algo, *k),
            _ => Err(usage("info needs --oracle, or --input with --algo and --k")),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
