//! `flowsparse`: generate terminal networks, build and verify flow
//! sparsifiers, and query demand sketches.
//!
//! Exit codes: 0 success, 1 verification failed, 2 input or structure
//! error, 3 budget exceeded.

mod io;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use flowsparse::flow::{lambda_terminal_free, lambda_value};
use flowsparse::generate::{self, CapRange};
use flowsparse::merging::{self, MergeOutput};
use flowsparse::network::DemandEntry;
use flowsparse::sampling;
use flowsparse::sketch::{DemandSketch, SketchFile};
use flowsparse::structured::{self, LeafBuilder, SpTree, TreeDecomposition};
use flowsparse::verify::{certify_cuts, demand_grid, Certifier, DemandSpec};
use flowsparse::{DemandVector, Error, TerminalNetwork, VertexPartition};

use io::{network_json, read_json, read_network, sidecar, write_json, Format, RunManifest, TOOL_VERSION};

#[derive(Parser, Debug)]
#[command(name = "flowsparse", version, about = "Vertex flow sparsifiers for terminal networks")]
struct Cli {
    /// Worker threads for oracle calls (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Build a sparsifier.
    Sparsify(SparsifyArgs),
    /// Compare a network with a candidate sparsifier.
    Verify(VerifyArgs),
    /// Build or query a demand sketch.
    #[command(subcommand)]
    Sketch(SketchCmd),
    /// Oversampling factor for importance sampling.
    Plan(PlanArgs),
    /// Concurrent-flow value of a demand.
    Lambda(LambdaArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GenKind {
    QuasiBipartite,
    Sp,
    BoundedComponent,
    Treewidth,
    Random,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    /// Instance family.
    kind: GenKind,
    /// Number of terminals.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Vertex count (quasi-bipartite: total including terminals).
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Component size bound or treewidth.
    #[arg(long, default_value_t = 2)]
    w: usize,
    /// Number of components (bounded-component).
    #[arg(long, default_value_t = 20)]
    components: usize,
    /// Build a complete SP tree of this depth instead of a random one.
    #[arg(long)]
    depth: Option<usize>,
    /// Edge probability (random).
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    /// Smallest edge capacity.
    #[arg(long, default_value_t = 1)]
    cap_lo: i64,
    /// Largest edge capacity.
    #[arg(long, default_value_t = 10)]
    cap_hi: i64,
    // kept out of the file's metadata so identical runs give identical files
    /// Output network file.
    #[serde(skip)]
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct InputArgs {
    /// Network file.
    #[arg(long)]
    input: PathBuf,
    /// Input format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Terminal list for DIMACS input.
    #[arg(long)]
    terminals: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self, manifest: &mut RunManifest) -> Result<(TerminalNetwork, String)> {
        let hash = manifest.input(&self.input)?;
        if let Some(t) = &self.terminals {
            manifest.input(t)?;
        }
        Ok((read_network(&self.input, self.format, self.terminals.as_deref())?, hash))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    /// Contract the blocks of --partition.
    Clump,
    /// Profile buckets over a demand set.
    Profile,
    /// Capacity-ratio types.
    Ratio,
    /// Importance sampling of non-terminals.
    Sample,
    /// Importance sampling of components of size at most --w.
    SampleGrouped,
    /// Exact network on the terminals plus one vertex (k <= 4).
    Mimick,
    /// Exact series-parallel recursion.
    Sp,
    /// Treewidth recursion over --tdec.
    Treewidth,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Leaf {
    Identity,
    Mimick,
}

#[derive(Args, Debug, Serialize)]
struct SparsifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Construction to run.
    #[arg(long, value_enum)]
    method: Method,
    /// Accuracy parameter in (0, 0.5).
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Oversampling factor; default from the planner at --fail.
    #[arg(long)]
    m: Option<f64>,
    /// Target failure probability for the planner.
    #[arg(long, default_value_t = 0.1)]
    fail: f64,
    /// Component size bound for sample-grouped.
    #[arg(long, default_value_t = 2)]
    w: usize,
    /// JSON list of vertex lists.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Demand set for profile buckets (default `disc:EPS:EPS/k²:2`).
    #[arg(long)]
    demands: Option<String>,
    /// SP decomposition tree; recognized from the graph when absent.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Tree decomposition; required for treewidth.
    #[arg(long)]
    tdec: Option<PathBuf>,
    /// Exact construction for treewidth leaves.
    #[arg(long, value_enum, default_value_t = Leaf::Mimick)]
    leaf: Leaf,
    /// Leaf threshold for the treewidth recursion (default 6(w+1)).
    #[arg(long)]
    threshold: Option<usize>,
    /// Output network file.
    #[serde(skip)]
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Original network.
    #[arg(long)]
    g: PathBuf,
    /// Candidate sparsifier.
    #[arg(long)]
    gp: PathBuf,
    /// `basis`, `random:N:SEED` or `disc:EPS:ETA[:SUPPORT]`.
    #[arg(long, default_value = "random:100:0")]
    demands: String,
    /// Claimed quality; default from the candidate's metadata, else 1.
    #[arg(long)]
    claim: Option<f64>,
    /// Relative tolerance on both sides of the check.
    #[arg(long, default_value_t = flowsparse::verify::DEFAULT_TOL)]
    tol: f64,
    /// Also compare all terminal bipartition min-cuts exactly.
    #[arg(long)]
    cuts: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum SketchCmd {
    Build(SketchBuildArgs),
    Query(SketchQueryArgs),
}

#[derive(Args, Debug, Serialize)]
struct SketchBuildArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Accuracy parameter in (0, 0.5).
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Sketch file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SketchQueryArgs {
    /// Sketch file from `sketch build`.
    #[arg(long)]
    sketch: PathBuf,
    /// Demand entries `S,T,VALUE`.
    #[arg(long = "demand", required = true)]
    demand: Vec<String>,
    /// Write the answer here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PlanArgs {
    /// Target accuracy.
    #[arg(long)]
    eps: f64,
    /// Number of terminals.
    #[arg(long)]
    k: usize,
    /// Target failure probability.
    #[arg(long)]
    fail: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct LambdaArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Demand entries `S,T,VALUE`.
    #[arg(long = "demand", required = true)]
    demand: Vec<String>,
    /// Only paths with no terminal as an internal vertex.
    #[arg(long)]
    terminal_free: bool,
}

/// The claimed quality was not met.
#[derive(Debug)]
struct VerificationFailed(String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 1;
    }
    for cause in err.chain() {
        if let Some(Error::BudgetExceeded { .. }) = cause.downcast_ref::<Error>() {
            return 3;
        }
    }
    2
}

fn parse_demand(entries: &[String]) -> Result<DemandVector> {
    let mut d = DemandVector::new();
    for e in entries {
        let parts: Vec<&str> = e.split(',').map(str::trim).collect();
        let [s, t, x] = parts.as_slice() else { bail!("demand entry `{e}` is not S,T,VALUE") };
        let x: f64 = x.parse().with_context(|| format!("demand value in `{e}`"))?;
        let prev = d.get(s, t);
        d.set(s, t, prev + x)?;
    }
    Ok(d)
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn gen(args: &GenArgs, seed: u64, manifest: &mut RunManifest) -> Result<()> {
    let caps = CapRange { lo: args.cap_lo, hi: args.cap_hi };
    let mut extra: Option<(PathBuf, serde_json::Value)> = None;
    let net = match args.kind {
        GenKind::QuasiBipartite => generate::quasi_bipartite(args.k, args.n, caps, seed)?,
        GenKind::BoundedComponent => generate::bounded_component(args.k, args.components, args.w, caps, seed)?,
        GenKind::Random => generate::random_connected(args.n, args.k, args.p, caps, seed)?,
        GenKind::Sp => {
            let (net, tree) = match args.depth {
                Some(depth) => generate::series_parallel_depth(depth, args.k, caps, seed)?,
                None => generate::series_parallel(args.n, args.k, caps, seed)?,
            };
            extra = Some((sidecar(&args.out, "sptree"), serde_json::to_value(&tree)?));
            net
        }
        GenKind::Treewidth => {
            let (net, tdec) = generate::treewidth(args.k, args.n, args.w, caps, seed)?;
            extra = Some((sidecar(&args.out, "tdec"), serde_json::to_value(&tdec)?));
            net
        }
    };
    let meta = json!({ "tool": "flowsparse", "version": TOOL_VERSION, "generator": params(args), "seed": seed });
    write_json(&args.out, &network_json(&net, meta))?;
    manifest.outputs.push(args.out.display().to_string());
    if let Some((path, value)) = extra {
        write_json(&path, &value)?;
        manifest.outputs.push(path.display().to_string());
    }
    eprintln!("wrote {} (n={}, k={}, m={})", args.out.display(), net.n(), net.k(), net.m());
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PartitionFile {
    Lists(Vec<Vec<String>>),
    Struct(VertexPartition),
}

fn sparsify(args: &SparsifyArgs, seed: u64, manifest: &mut RunManifest) -> Result<()> {
    let (net, input_hash) = args.input.load(manifest)?;
    let mut claimed: Option<f64> = None;
    let mut info = serde_json::Map::new();
    let merged = |out: MergeOutput, claimed: &mut Option<f64>| {
        *claimed = Some(out.claimed_quality);
        out.net
    };
    let result = match args.method {
        Method::Clump => {
            let path = args.partition.as_ref().context("--method clump needs --partition")?;
            manifest.input(path)?;
            let partition = match read_json::<PartitionFile>(path)? {
                PartitionFile::Lists(blocks) => VertexPartition::new(
                    blocks.into_iter().map(|b| b.into_iter().collect::<BTreeSet<String>>()).collect(),
                ),
                PartitionFile::Struct(p) => p,
            };
            merging::clump(&net, &partition)?
        }
        Method::Profile => {
            let spec: DemandSpec = match &args.demands {
                Some(s) => s.parse()?,
                None => DemandSpec::Disc { eps: args.eps, eta: args.eps / (net.k() * net.k()) as f64, max_support: 2 },
            };
            let demands = demand_grid(&net, &spec)?;
            info.insert("demand_set".into(), json!(spec.to_string()));
            info.insert("demands".into(), json!(demands.len()));
            merged(merging::profile_bucket_sparsifier(&net, args.eps, &demands)?, &mut claimed)
        }
        Method::Ratio => merged(merging::ratio_type_sparsifier(&net, args.eps)?, &mut claimed),
        Method::Sample | Method::SampleGrouped => {
            let m = match args.m {
                Some(m) => m,
                None => sampling::plan_m(args.eps, net.k(), args.fail)?.m,
            };
            let plan = match args.method {
                Method::Sample => sampling::sampling_plan(&net, m, seed)?,
                _ => sampling::grouped_sampling_plan(&net, args.w, m, seed)?,
            };
            info.insert("m".into(), json!(m));
            info.insert("expected_units".into(), json!(plan.expected_units()));
            info.insert("units".into(), json!(plan.units.len()));
            sampling::apply_plan(&net, &plan)?
        }
        Method::Mimick => {
            claimed = Some(1.0);
            structured::mimick_small(&net)?
        }
        Method::Sp => {
            let tree: SpTree = match &args.tree {
                Some(p) => {
                    manifest.input(p)?;
                    read_json(p)?
                }
                None => structured::sp_recognize(&net)?,
            };
            claimed = Some(1.0);
            structured::sp_sparsifier(&net, &tree)?
        }
        Method::Treewidth => {
            let path = args.tdec.as_ref().context("--method treewidth needs --tdec")?;
            manifest.input(path)?;
            let tdec: TreeDecomposition = read_json(path)?;
            let leaf = match args.leaf {
                Leaf::Identity => LeafBuilder::Identity,
                Leaf::Mimick => LeafBuilder::Mimick,
            };
            let out = match args.threshold {
                Some(t) => structured::treewidth_sparsifier_with_threshold(&net, &tdec, leaf, t)?,
                None => structured::treewidth_sparsifier(&net, &tdec, leaf)?,
            };
            claimed = Some(out.quality);
            info.insert("depth".into(), json!(out.depth));
            info.insert("leaves".into(), json!(out.leaves));
            info.insert("width".into(), json!(out.width));
            out.net
        }
    };
    let meta = json!({
        "tool": "flowsparse",
        "version": TOOL_VERSION,
        "method": args.method,
        "claimed_quality": claimed,
        "params": params(args),
        "seed": seed,
        "input_sha256": input_hash,
        "info": info,
    });
    write_json(&args.out, &network_json(&result, meta))?;
    manifest.outputs.push(args.out.display().to_string());
    eprintln!("wrote {}: {} -> {} vertices, {} -> {} edges", args.out.display(), net.n(), result.n(), net.m(), result.m());
    Ok(())
}

fn verify(args: &VerifyArgs, manifest: &mut RunManifest) -> Result<()> {
    manifest.input(&args.g)?;
    manifest.input(&args.gp)?;
    let g = read_network(&args.g, Format::Json, None)?;
    let gp_json: flowsparse::network::NetworkJson = read_json(&args.gp)?;
    let gp = TerminalNetwork::from_json(&gp_json, false)?;
    let claim = args
        .claim
        .or_else(|| gp_json.meta.as_ref().and_then(|m| m.get("claimed_quality")).and_then(|q| q.as_f64()))
        .unwrap_or(1.0);
    let spec: DemandSpec = args.demands.parse()?;
    let mut cert = Certifier::from_spec(&g, &spec)?;
    cert.tolerance = args.tol;
    let report = cert.certify(&gp, claim)?;
    let cuts = if args.cuts { Some(certify_cuts(&g, &gp)?) } else { None };
    let body = json!({ "flow": report, "cuts": cuts });
    match &args.out {
        Some(path) => {
            write_json(path, &body)?;
            manifest.outputs.push(path.display().to_string());
        }
        None => println!("{}", serde_json::to_string_pretty(&body)?),
    }
    eprintln!(
        "{} demands: lower {:.6}, upper {:.6}, claim {claim}: {:?}",
        report.records.len(),
        report.lower,
        report.upper,
        report.verdict
    );
    if !report.passed() {
        return Err(VerificationFailed(format!("upper {:.6} / lower {:.6} against claim {claim}", report.upper, report.lower)).into());
    }
    Ok(())
}

fn sketch(cmd: &SketchCmd, manifest: &mut RunManifest) -> Result<()> {
    match cmd {
        SketchCmd::Build(args) => {
            let (net, _) = args.input.load(manifest)?;
            let sk = DemandSketch::build(&net, args.eps)?;
            write_json(&args.out, &sk.to_file())?;
            manifest.outputs.push(args.out.display().to_string());
            let st = sk.storage();
            eprintln!("wrote {}: {} entries, {} bytes (bound {:.3e} entries)", args.out.display(), st.entries, st.bytes, st.bound);
        }
        SketchCmd::Query(args) => {
            manifest.input(&args.sketch)?;
            let file: SketchFile = read_json(&args.sketch)?;
            let sk = DemandSketch::from_file(&file)?;
            let d = parse_demand(&args.demand)?;
            let ans = sk.query_counted(&d)?;
            let body = json!({ "lambda_estimate": ans.value, "probes": ans.probes, "epsilon": sk.epsilon() });
            emit(&body, args.out.as_deref(), manifest)?;
        }
    }
    Ok(())
}

fn emit(body: &serde_json::Value, out: Option<&Path>, manifest: &mut RunManifest) -> Result<()> {
    match out {
        Some(path) => {
            write_json(path, body)?;
            manifest.outputs.push(path.display().to_string());
        }
        None => println!("{}", serde_json::to_string_pretty(body)?),
    }
    Ok(())
}

fn plan(args: &PlanArgs, manifest: &mut RunManifest) -> Result<()> {
    let report = sampling::plan_m(args.eps, args.k, args.fail)?;
    eprintln!("M = {:.1}, predicted failure bound {:.3e}", report.m, report.predicted_failure);
    emit(&serde_json::to_value(&report)?, args.out.as_deref(), manifest)
}

fn lambda(args: &LambdaArgs, manifest: &mut RunManifest) -> Result<()> {
    let (net, _) = args.input.load(manifest)?;
    let d = parse_demand(&args.demand)?;
    let value = if args.terminal_free { lambda_terminal_free(&net, &d)? } else { lambda_value(&net, &d)? };
    let entries: Vec<DemandEntry> = d.to_json();
    println!("{}", serde_json::to_string_pretty(&json!({ "lambda": value, "demand": entries }))?);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().context("configuring --jobs")?;
    }
    let t0 = Instant::now();
    let (name, parameters) = match &cli.cmd {
        Command::Gen(a) => ("gen", params(a)),
        Command::Sparsify(a) => ("sparsify", params(a)),
        Command::Verify(a) => ("verify", params(a)),
        Command::Sketch(SketchCmd::Build(a)) => ("sketch build", params(a)),
        Command::Sketch(SketchCmd::Query(a)) => ("sketch query", params(a)),
        Command::Plan(a) => ("plan", params(a)),
        Command::Lambda(a) => ("lambda", params(a)),
    };
    let mut manifest = RunManifest::new(name, parameters, cli.seed, cli.jobs);
    let result = match &cli.cmd {
        Command::Gen(a) => gen(a, cli.seed, &mut manifest),
        Command::Sparsify(a) => sparsify(a, cli.seed, &mut manifest),
        Command::Verify(a) => verify(a, &mut manifest),
        Command::Sketch(c) => sketch(c, &mut manifest),
        Command::Plan(a) => plan(a, &mut manifest),
        Command::Lambda(a) => lambda(a, &mut manifest),
    };
    // a failed verification still leaves its report and manifest behind
    if result.is_ok() || result.as_ref().err().is_some_and(|e| e.downcast_ref::<VerificationFailed>().is_some()) {
        manifest.finish(t0.elapsed())?;
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
