//! The `crs` command line: `gen`, `select`, `classify`, `eval` and `sweep`.
//!
//! Exit codes: 0 on success, 2 for usage and configuration errors (including
//! missing input files), 1 for data errors. Output files are written to a
//! temporary sibling and renamed into place, and each one starts with `#`
//! comment lines holding the effective configuration as JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::select::{CrsParams, GraphMode, ScoreRule};
use crate::dataset::synthetic::{gen_synthetic, network_style_matrix, SyntheticSpec};
use crate::dataset::{
    load_dense_csv, load_similarity_matrix, load_sparse_records, write_dense_csv,
    write_similarity_matrix, ItemId, LabelColumn, LabeledDataset,
};
use crate::baselines::DeltaMedoidsParams;
use crate::error::{Error, Result};
use crate::eval::{
    build_prototypes, confusion_csv, per_class_csv, per_cluster_table, run_eval_detailed, sweep_k,
    cluster_meta, MethodConfig, SplitConfig,
};
use crate::npc::{classify, PrototypeSet};
use crate::prototype::{read_prototypes, write_prototypes, Method};
use crate::reverse_graph::TauMode;
use crate::similarity::{full_pairs, CountingSimilarity, SimilarityMeasure, SimilaritySpace};

#[derive(Debug, Parser)]
#[command(name = "crs", version, about = "Cluster representatives selection and nearest-prototype classification")]
pub struct Cli {
    /// Worker threads. Outputs are reproducible byte for byte only with 1.
    #[arg(long, default_value_t = 1, global = true)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Select a prototype for every cluster of a dataset.
    Select(SelectArgs),
    /// Classify queries against a prototype file.
    Classify(ClassifyArgs),
    /// Split, build prototypes, classify the test half and report metrics.
    Eval(EvalArgs),
    /// Evaluate CRS for several k on one shared split.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Sparse,
    Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Blobs,
    Spirals,
    Uniform,
    Network,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Crs,
    DeltaMedoids,
    Random,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphArg {
    NnDescent,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScoreArg {
    Count,
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimilarityArg {
    Cosine,
    InverseEuclidean,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input dataset.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Label column of a CSV dataset, by header name or 0-based index.
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Similarity for vector data [default: cosine]; matrix input brings its own.
    #[arg(long, value_enum)]
    pub similarity: Option<SimilarityArg>,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Crs)]
    pub method: MethodArg,
    /// Neighbours per node in the k-NN graph.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Fraction of each cluster that must be covered.
    #[arg(long, default_value_t = 0.95)]
    pub epsilon: f64,
    /// Edge pruning threshold: auto, exact, sampled:<fraction> or a number.
    #[arg(long, default_value = "auto")]
    pub tau: TauMode,
    /// NN-Descent sample rate.
    #[arg(long, default_value_t = 0.7)]
    pub rho: f64,
    /// NN-Descent termination threshold.
    #[arg(long, default_value_t = 0.001)]
    pub delta_nn: f64,
    #[arg(long, default_value_t = 30)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = GraphArg::NnDescent)]
    pub graph: GraphArg,
    /// Primary key of the greedy choice.
    #[arg(long, value_enum, default_value_t = ScoreArg::Count)]
    pub score: ScoreArg,
    /// δ-medoids threshold [default: sampled cluster homogeneity].
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub max_refine_iters: usize,
    /// Sample fraction of the random method.
    #[arg(long, default_value_t = 0.05)]
    pub fraction: f64,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "CRS_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Points per blob for blobs, total points for spirals and uniform.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Blob centres as `x,y;x,y;...`.
    #[arg(long, default_value = "0,0;5,5")]
    pub centers: String,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 1.5)]
    pub turns: f64,
    #[arg(long, default_value_t = 1.0)]
    pub side: f64,
    /// Cluster sizes of a network-style matrix, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Target homogeneity per cluster of a network-style matrix.
    #[arg(long, value_delimiter = ',')]
    pub homogeneity: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub spread: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Prototype file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Training data the prototype ids refer to.
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub prototypes: PathBuf,
    /// Queries in the same format as the data; for matrix input, a file of
    /// item ids, one per line.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// JSON report to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub per_class_csv: Option<PathBuf>,
    #[arg(long)]
    pub confusion_csv: Option<PathBuf>,
    #[arg(long)]
    pub prototypes_out: Option<PathBuf>,
    /// Add wall-clock seconds to the report (makes it non-reproducible).
    #[arg(long)]
    pub record_timing: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// k values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Summary CSV, one row per k.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON array of the full reports.
    #[arg(long)]
    pub reports_json: Option<PathBuf>,
    /// Per-cluster table with size, homogeneity and per-k results.
    #[arg(long)]
    pub per_cluster_csv: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("crs: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => 2,
        _ => 1,
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    if cli.workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Select(a) => select(a, cli.workers),
        Command::Classify(a) => classify_cmd(a, cli.workers),
        Command::Eval(a) => eval(a, cli.workers),
        Command::Sweep(a) => sweep(a, cli.workers),
    })
}

fn load(args: &DataArgs) -> Result<(LabeledDataset, SimilarityMeasure)> {
    match args.format {
        Format::Matrix => {
            if args.similarity.is_some() {
                return Err(Error::Config("--similarity does not apply to matrix input".into()));
            }
            load_similarity_matrix(&args.data)
        }
        Format::Csv => {
            let col: LabelColumn = args.label_column.parse().expect("infallible");
            Ok((load_dense_csv(&args.data, &col)?, measure(args)))
        }
        Format::Sparse => Ok((load_sparse_records(&args.data)?, measure(args))),
    }
}

fn measure(args: &DataArgs) -> SimilarityMeasure {
    match args.similarity.unwrap_or(SimilarityArg::Cosine) {
        SimilarityArg::Cosine => SimilarityMeasure::Cosine,
        SimilarityArg::InverseEuclidean => SimilarityMeasure::InverseEuclidean,
    }
}

fn data_json(args: &DataArgs, m: &SimilarityMeasure) -> serde_json::Value {
    json!({
        "data": args.data.display().to_string(),
        "format": value_name(&args.format),
        "label_column": args.label_column,
        "similarity": m.name(),
    })
}

fn method_config(m: &MethodArgs, seed: u64) -> MethodConfig {
    match m.method {
        MethodArg::Crs => MethodConfig::Crs(crs_params(m, seed)),
        MethodArg::DeltaMedoids => MethodConfig::DeltaMedoids(DeltaMedoidsParams {
            delta: m.delta,
            max_refine_iters: m.max_refine_iters,
            seed,
        }),
        MethodArg::Random => MethodConfig::Random {
            fraction: m.fraction,
            seed,
        },
        MethodArg::Full => MethodConfig::Full,
    }
}

fn crs_params(m: &MethodArgs, seed: u64) -> CrsParams {
    CrsParams {
        k: m.k,
        epsilon: m.epsilon,
        tau: m.tau.clone(),
        graph: match m.graph {
            GraphArg::NnDescent => GraphMode::NnDescent,
            GraphArg::Exact => GraphMode::Exact,
        },
        score: match m.score {
            ScoreArg::Count => ScoreRule::UncoveredCount,
            ScoreArg::Weighted => ScoreRule::WeightedSum,
        },
        rho: m.rho,
        delta_nn: m.delta_nn,
        max_iters: m.max_iters,
        seed,
    }
}

/// Every CLI parameter with its effective value, for the output header.
fn method_json(m: &MethodArgs, seed: u64) -> serde_json::Value {
    json!({
        "method": value_name(&m.method),
        "k": m.k,
        "epsilon": m.epsilon,
        "tau": m.tau.to_string(),
        "rho": m.rho,
        "delta_nn": m.delta_nn,
        "max_iters": m.max_iters,
        "graph": value_name(&m.graph),
        "score": value_name(&m.score),
        "delta": m.delta,
        "max_refine_iters": m.max_refine_iters,
        "fraction": m.fraction,
        "seed": seed,
    })
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

fn config_header(command: &str, parts: &[serde_json::Value], workers: usize) -> String {
    config_header_from(&config_json(command, parts, workers))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn comment(w: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(w, "# {line}").map_err(|e| Error::io("<output>", e))
}

fn gen(a: &GenArgs) -> Result<()> {
    let seed = a.seed.seed;
    let header = config_header(
        "gen",
        &[json!({
            "kind": value_name(&a.kind),
            "n": a.n,
            "centers": a.centers,
            "sigma": a.sigma,
            "noise": a.noise,
            "turns": a.turns,
            "side": a.side,
            "sizes": a.sizes,
            "homogeneity": a.homogeneity,
            "spread": a.spread,
            "seed": seed,
        })],
        1,
    );
    if a.kind == GenKind::Network {
        let (ds, m) = network_style_matrix(&a.sizes, &a.homogeneity, a.spread, seed)?;
        let SimilarityMeasure::Matrix(matrix) = m else {
            unreachable!("network generator returns a matrix")
        };
        return write_atomic(&a.out, |w| {
            comment(w, &header)?;
            write_similarity_matrix(&ds, &matrix, w)
        });
    }
    let spec = match a.kind {
        GenKind::Blobs => SyntheticSpec::GaussianBlobs {
            centers: parse_centers(&a.centers)?,
            per_blob: a.n,
            sigma: a.sigma,
        },
        GenKind::Spirals => SyntheticSpec::TwoSpirals {
            n: a.n,
            noise: a.noise,
            turns: a.turns,
        },
        GenKind::Uniform => SyntheticSpec::Uniform { n: a.n, side: a.side },
        GenKind::Network => unreachable!(),
    };
    let ds = gen_synthetic(&spec, seed)?;
    write_atomic(&a.out, |w| {
        comment(w, &header)?;
        write_dense_csv(&ds, w)
    })
}

fn parse_centers(s: &str) -> Result<Vec<[f64; 2]>> {
    s.split(';')
        .map(|c| {
            let xy: Vec<f64> = c
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("bad centre {c:?}")))?;
            match xy[..] {
                [x, y] => Ok([x, y]),
                _ => Err(Error::Config(format!("centre {c:?} needs two coordinates"))),
            }
        })
        .collect()
}

fn select(a: &SelectArgs, workers: usize) -> Result<()> {
    let seed = a.seed.seed;
    let method = method_config(&a.method, seed);
    method.validate()?;
    let (ds, m) = load(&a.data)?;
    let space = SimilaritySpace::new(&m, &ds)?;
    let clusters = ds.clusters();
    let built = build_prototypes(&space, &clusters, &method)?;
    let pairs: u64 = clusters.iter().map(|c| full_pairs(c.len())).sum();
    eprintln!(
        "selected {} representatives from {} items in {} clusters; {} build and {} threshold similarity calls over {} pairs",
        built.rep_count(),
        ds.len(),
        clusters.len(),
        built.build_calls(),
        built.threshold_calls(),
        pairs
    );
    let header = config_header(
        "select",
        &[data_json(&a.data, &m), method_json(&a.method, seed)],
        workers,
    );
    let columns = "label\tepsilon\tk\ttau\tcovered_fraction\trepresentatives".to_string();
    write_atomic(&a.out, |w| write_prototypes(&built.prototypes, &[header, columns], w))
}

fn classify_cmd(a: &ClassifyArgs, workers: usize) -> Result<()> {
    let (ds, m) = load(&a.data)?;
    let protos = read_prototypes(&a.prototypes, Method::Crs)?;
    for p in &protos {
        if let Some(r) = p.representatives.iter().find(|r| r.index() >= ds.len()) {
            return Err(Error::Domain(format!(
                "prototype {:?} refers to item {r}, but the data has {} items",
                p.label,
                ds.len()
            )));
        }
    }
    let ps = PrototypeSet::new(protos)?;
    let queries = load_queries(a, &ds)?;
    let space = SimilaritySpace::new(&m, &ds)?;
    let cs = CountingSimilarity::new(&space);
    let results: Vec<_> = {
        use rayon::prelude::*;
        queries
            .items()
            .par_iter()
            .map(|x| classify(x, &ps, &cs))
            .collect::<Result<_>>()?
    };
    eprintln!(
        "classified {} queries against {} representatives ({} similarity calls)",
        queries.len(),
        ps.rep_count(),
        cs.count()
    );
    let header = config_header(
        "classify",
        &[
            data_json(&a.data, &m),
            json!({
                "prototypes": a.prototypes.display().to_string(),
                "queries": a.queries.display().to_string(),
            }),
        ],
        workers,
    );
    write_atomic(&a.out, |w| {
        comment(w, &header)?;
        comment(w, "query_id\tlabel\tbest_rep\tbest_sim")?;
        let mut text = String::new();
        for (id, c) in queries.ids().iter().zip(&results) {
            writeln!(text, "{}", c.to_line(id)).expect("write to string");
        }
        w.write_all(text.as_bytes()).map_err(|e| Error::io(&a.out, e))
    })
}

fn load_queries(a: &ClassifyArgs, ds: &LabeledDataset) -> Result<LabeledDataset> {
    match a.data.format {
        Format::Csv => {
            let col: LabelColumn = a.data.label_column.parse().expect("infallible");
            load_dense_csv(&a.queries, &col)
        }
        Format::Sparse => load_sparse_records(&a.queries),
        Format::Matrix => {
            let text = std::fs::read_to_string(&a.queries).map_err(|e| Error::io(&a.queries, e))?;
            let mut picked = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let id = line.trim();
                if id.is_empty() || id.starts_with('#') {
                    continue;
                }
                let pos = ds
                    .ids()
                    .iter()
                    .position(|x| x == id)
                    .ok_or_else(|| Error::parse(&a.queries, i + 1, format!("unknown item id {id:?}")))?;
                picked.push(ItemId::new(pos));
            }
            Ok(ds.subset("queries", &picked))
        }
    }
}

fn eval(a: &EvalArgs, workers: usize) -> Result<()> {
    let seed = a.seed.seed;
    let method = method_config(&a.method, seed);
    method.validate()?;
    let split = SplitConfig {
        test_fraction: a.test_fraction,
        seed,
    };
    if !(split.test_fraction > 0.0 && split.test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "--test-fraction must lie in (0, 1), got {}",
            split.test_fraction
        )));
    }
    let (ds, m) = load(&a.data)?;
    let start = Instant::now();
    let mut out = run_eval_detailed(&ds, &m, &method, split)?;
    if a.record_timing {
        out.report.wall_clock_secs = Some(start.elapsed().as_secs_f64());
    }
    let r = &out.report;
    eprintln!(
        "{}: macro precision {:.4}, macro recall {:.4}, prototype fraction {:.4}, S build {:.4}",
        method.method(),
        r.macro_precision,
        r.macro_recall,
        r.prototype_fraction,
        r.s_ratio_build
    );
    let config = config_json(
        "eval",
        &[
            data_json(&a.data, &m),
            method_json(&a.method, seed),
            json!({ "test_fraction": a.test_fraction, "record_timing": a.record_timing }),
        ],
        workers,
    );
    let header = config_header_from(&config);
    let doc = json!({ "config": config, "report": r });
    write_atomic(&a.out, |w| {
        let text = serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Domain(format!("report encoding: {e}")))?;
        writeln!(w, "{text}").map_err(|e| Error::io(&a.out, e))
    })?;
    if let Some(p) = &a.per_class_csv {
        write_atomic(p, |w| {
            comment(w, &header)?;
            per_class_csv(r, w)
        })?;
    }
    if let Some(p) = &a.confusion_csv {
        write_atomic(p, |w| {
            comment(w, &header)?;
            confusion_csv(r, w)
        })?;
    }
    if let Some(p) = &a.prototypes_out {
        let protos = out.source_prototypes();
        write_atomic(p, |w| write_prototypes(&protos, &[header.clone()], w))?;
    }
    Ok(())
}

fn config_json(command: &str, parts: &[serde_json::Value], workers: usize) -> serde_json::Value {
    let mut obj = serde_json::Map::new();
    obj.insert("command".into(), json!(command));
    obj.insert("workers".into(), json!(workers));
    for p in parts {
        if let serde_json::Value::Object(m) = p {
            obj.extend(m.clone());
        }
    }
    serde_json::Value::Object(obj)
}

fn config_header_from(config: &serde_json::Value) -> String {
    format!("crs config {config}")
}

fn sweep(a: &SweepArgs, workers: usize) -> Result<()> {
    let seed = a.seed.seed;
    if a.method.method != MethodArg::Crs {
        return Err(Error::Config("sweep only supports --method crs".into()));
    }
    let params = crs_params(&a.method, seed);
    let split = SplitConfig {
        test_fraction: a.test_fraction,
        seed,
    };
    // validate before touching the data
    for &k in &a.ks {
        CrsParams { k, ..params.clone() }.validate()?;
    }
    let (ds, m) = load(&a.data)?;
    let reports = sweep_k(&ds, &m, &a.ks, &params, split)?;
    let config = config_json(
        "sweep",
        &[
            data_json(&a.data, &m),
            method_json(&a.method, seed),
            json!({ "ks": a.ks, "test_fraction": a.test_fraction }),
        ],
        workers,
    );
    let header = config_header_from(&config);
    write_atomic(&a.out, |w| {
        comment(w, &header)?;
        let mut csv = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Domain(format!("csv output: {e}"));
        csv.write_record([
            "k",
            "representatives",
            "prototype_fraction",
            "macro_precision",
            "macro_recall",
            "build_calls",
            "threshold_calls",
            "s_ratio_build",
            "s_ratio_threshold",
            "s_ratio_classify",
        ])
        .map_err(err)?;
        for (k, r) in &reports {
            eprintln!(
                "k={k}: prototype fraction {:.4}, macro precision {:.4}, S build {:.4}",
                r.prototype_fraction, r.macro_precision, r.s_ratio_build
            );
            csv.write_record([
                k.to_string(),
                r.rep_count.to_string(),
                r.prototype_fraction.to_string(),
                r.macro_precision.to_string(),
                r.macro_recall.to_string(),
                r.build_calls.to_string(),
                r.threshold_calls.to_string(),
                r.s_ratio_build.to_string(),
                r.s_ratio_threshold.to_string(),
                r.s_ratio_classify.to_string(),
            ])
            .map_err(err)?;
        }
        csv.flush().map_err(|e| Error::io("<csv>", e))
    })?;
    if let Some(p) = &a.reports_json {
        let doc = json!({
            "config": config,
            "reports": reports.iter().map(|(_, r)| r).collect::<Vec<_>>(),
        });
        write_atomic(p, |w| {
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::Domain(format!("report encoding: {e}")))?;
            writeln!(w, "{text}").map_err(|e| Error::io(p, e))
        })?;
    }
    if let Some(p) = &a.per_cluster_csv {
        let meta = cluster_meta(&ds, &m, seed)?;
        let rs: Vec<_> = reports.into_iter().map(|(_, r)| r).collect();
        write_atomic(p, |w| {
            comment(w, &header)?;
            per_cluster_table(&rs, &meta, w)
        })?;
    }
    Ok(())
}
