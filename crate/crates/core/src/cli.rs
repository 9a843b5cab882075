//! The `uq` command line.
//!
//! ```text
//! uq compute    --input responses.jsonl [--methods ..] [--similarity ..] [--provider-url URL|stub] [--precomputed-dir DIR]
//! uq eval       --input responses.jsonl [--scores scores.csv]
//! uq stability  [--scores scores.csv] [--delta-mode relative|absolute]
//! uq correlate  [--scores scores.csv]
//! uq report     [--eval eval.csv] [--stability stability.csv] [--correlation correlation.csv] [--curves curves.csv]
//! uq synthesize --output corpus.jsonl [--items 500] [--samples 5] [--seed 7]
//! ```
//!
//! Every command writes into `--out-dir` (default `.`) and merges a section
//! into `run_metadata.json` there, the only output that carries a timestamp.
//!
//! Exit codes: 0 success, 1 some input records were rejected, 2 fatal
//! configuration, input, or provider error.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{self, Perspective};
use crate::graph::{DEFAULT_DSE_THRESHOLD, EIGEN_CAP, LAMBDA2_EPSILON};
use crate::methods::{Method, MethodSettings};
use crate::pipeline::{self, MatrixSources};
use crate::plot::{self, Series};
use crate::ranking::EvalMetric;
use crate::response::{parse_response_file, ConfigKey, ParsedResponses, PredictionRule, Strategy, SCHEMA_VERSION};
use crate::similarity::cache::CACHE_DIR_ENV;
use crate::similarity::precomputed::PrecomputedStore;
use crate::similarity::{HttpProvider, Provider, ProviderEndpoint, SimilarityCache, SimilarityEngine, SimilarityKind, StubProvider};
use crate::stability::{DeltaMode, CHANGE_EPSILON};
use crate::synthetic::{self, SyntheticSpec};
use crate::tables::{self, CurveKind, CurvePoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_FATAL: i32 = 2;

pub const METADATA_FILE: &str = "run_metadata.json";
pub const DEFAULT_CACHE_DIR: &str = ".uq-cache";
/// `--provider-url` value selecting the in-process deterministic stub.
pub const STUB_PROVIDER: &str = "stub";

#[derive(Debug, Parser)]
#[command(name = "uq", version, about = "Uncertainty metrics and benchmarks for repeated LLM grading outputs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-item uncertainty for every selected method.
    Compute(ComputeArgs),
    /// AUROC, C-index, AUARC and AUERC per configuration and method.
    Eval(EvalArgs),
    /// Change ratio and stepwise Spearman per configuration and method.
    Stability(StabilityArgs),
    /// Pearson correlation between methods per configuration.
    Correlate(CorrelateArgs),
    /// Rank tables, correlation heatmap and plots from earlier outputs.
    Report(ReportArgs),
    /// Write a seeded synthetic response corpus.
    Synthesize(SynthesizeArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated method names; default: categorical methods plus
    /// every relation method whose similarity kind is enabled.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    /// Comma-separated similarity kinds; default: jaccard, plus the kinds a
    /// provider or precomputed directory can serve.
    #[arg(long, value_delimiter = ',')]
    pub similarity: Vec<SimilarityKind>,
    /// Base URL of the /embed and /nli provider, or `stub`.
    #[arg(long)]
    pub provider_url: Option<String>,
    /// Model identity recorded in cache keys and metadata.
    #[arg(long)]
    pub provider_model: Option<String>,
    #[arg(long, default_value_t = 30_000)]
    pub provider_timeout_ms: u64,
    #[arg(long, default_value_t = 32)]
    pub max_batch: usize,
    #[arg(long, default_value_t = 4)]
    pub max_parallel: usize,
    #[arg(long)]
    pub precomputed_dir: Option<PathBuf>,
    /// Cache directory; `UQ_CACHE_DIR` wins over the built-in default.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DSE_THRESHOLD)]
    pub dse_threshold: f64,
    /// Recorded in metadata; no computation here is randomized.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Default: `<out-dir>/scores.csv`.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// `majority` or `first`.
    #[arg(long, default_value = "majority")]
    pub prediction: PredictionRule,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// `relative` or `absolute`.
    #[arg(long, default_value = "relative")]
    pub delta_mode: DeltaMode,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Default: `<out-dir>/eval.csv`.
    #[arg(long)]
    pub eval: Option<PathBuf>,
    /// Default: `<out-dir>/stability.csv`, skipped when absent.
    #[arg(long)]
    pub stability: Option<PathBuf>,
    /// Default: `<out-dir>/correlation.csv`, skipped when absent.
    #[arg(long)]
    pub correlation: Option<PathBuf>,
    /// Default: `<out-dir>/curves.csv`, skipped when absent.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub items: usize,
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub label_min: i64,
    #[arg(long, default_value_t = 3)]
    pub label_max: i64,
    #[arg(long, default_value_t = 0.3)]
    pub q_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub invalid_rate: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "synthetic-model")]
    pub models: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "q1")]
    pub questions: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "zero_shot_cot")]
    pub strategies: Vec<Strategy>,
}

/// A fatal error: printed to stderr, exit code 2.
#[derive(Debug)]
pub struct Fatal(pub String);

impl<E: std::error::Error> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

type CmdResult = Result<i32, Fatal>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Compute(a) => compute(&a),
        Command::Eval(a) => eval(&a),
        Command::Stability(a) => stability(&a),
        Command::Correlate(a) => correlate(&a),
        Command::Report(a) => report(&a),
        Command::Synthesize(a) => synthesize(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            eprintln!("uq: error: {msg}");
            EXIT_FATAL
        }
    }
}

fn prepare_out_dir(out: &OutArgs) -> Result<&Path, Fatal> {
    fs::create_dir_all(&out.out_dir)
        .map_err(|e| Fatal(format!("cannot create output directory {}: {e}", out.out_dir.display())))?;
    Ok(&out.out_dir)
}

fn or_default(path: &Option<PathBuf>, dir: &Path, file: &str) -> PathBuf {
    path.clone().unwrap_or_else(|| dir.join(file))
}

fn load_responses(path: &Path) -> Result<ParsedResponses, Fatal> {
    let parsed = parse_response_file(path, SCHEMA_VERSION)?;
    for r in &parsed.rejects {
        eprintln!(
            "uq: {}: line {}: rejected `{}`: {}",
            path.display(),
            r.line,
            r.item_id.as_deref().unwrap_or("?"),
            r.error
        );
    }
    Ok(parsed)
}

fn partial_or_ok(rejects: usize) -> i32 {
    if rejects > 0 {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

/// Conventions every output depends on.
pub fn conventions() -> Value {
    json!({
        "entropy_log_base": "e",
        "invalid_label": "unparseable scores form their own INVALID category",
        "fsd_tie": "tied top-two frequencies give fsd = 1",
        "jaccard_tokens": "lowercased maximal alphanumeric runs; two empty sets give 1",
        "embedding_similarity": "cosine clamped to [0, 1]; zero vector gives 0",
        "nli_similarity": "sentence split on . ! ? followed by whitespace; directed score is the mean over premise sentences of the max over hypothesis sentences; symmetric score is the mean of both directions",
        "graph_distance": "1 - similarity",
        "eigen_lambda2_epsilon": LAMBDA2_EPSILON,
        "eigen_cap": EIGEN_CAP,
        "eigen_capped_when": "lambda2 < eigen_lambda2_epsilon",
        "dse_comparison": "both directed entailment scores strictly greater than the threshold",
        "majority_tie": "lowest label among the most frequent present scores",
        "unscored_prediction": "label_min, counted wrong with abs_error max(|label_min - gold|, 1)",
        "auroc_ties": "tied uncertainties count one half",
        "c_index_pairs": "pairs with different abs_error; tied uncertainties count one half",
        "rejection_grid": "reject the j most uncertain items for j = 0..m-1, x = j/m",
        "rejection_ties": "equal uncertainty ordered by item_id",
        "rejection_area": "trapezoid rule divided by the x-span (m-1)/m",
        "change_epsilon": CHANGE_EPSILON,
        "spearman_steps": "steps with zero variance at either k are skipped",
        "rank_ties": "average ranks, 1 = best",
        "rank_direction": {
            "higher_is_better": ["auroc", "c_index", "auarc", "spearmanr"],
            "lower_is_better": ["auerc", "delta"],
        },
        "pearson_min_items": crate::correlation::MIN_PAIRED_ITEMS,
    })
}

/// Merges `section` under `commands.<command>` in the metadata file.
fn write_metadata(dir: &Path, command: &str, section: Value) -> Result<(), Fatal> {
    let path = dir.join(METADATA_FILE);
    let mut doc: Value = fs::read_to_string(&path)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .filter(Value::is_object)
        .unwrap_or_else(|| json!({}));
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    doc["tool"] = json!({ "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") });
    doc["conventions"] = conventions();
    if !doc["commands"].is_object() {
        doc["commands"] = json!({});
    }
    let mut section = section;
    section["finished_at_unix"] = json!(now);
    doc["commands"][command] = section;
    let text = serde_json::to_string_pretty(&doc).expect("metadata serializes");
    fs::write(&path, text + "\n").map_err(|e| Fatal(format!("cannot write {}: {e}", path.display())))
}

fn make_provider(args: &ComputeArgs, url: &str) -> Result<Box<dyn Provider>, Fatal> {
    if url == STUB_PROVIDER {
        return Ok(Box::new(StubProvider::default()));
    }
    let endpoint = ProviderEndpoint {
        base_url: url.to_string(),
        timeout_ms: args.provider_timeout_ms,
        max_batch: args.max_batch,
        max_parallel: args.max_parallel,
    };
    let provider = HttpProvider::new(endpoint, args.provider_model.clone())
        .map_err(|e| Fatal(format!("provider configuration: {e}")))?;
    Ok(Box::new(provider))
}

/// Resolves the methods to run and checks each has a similarity source.
fn select_methods(args: &ComputeArgs, sources: &MatrixSources<'_>) -> Result<Vec<Method>, Fatal> {
    let enabled: Vec<SimilarityKind> = if args.similarity.is_empty() {
        SimilarityKind::ALL.into_iter().filter(|&k| sources.covers(k)).collect()
    } else {
        args.similarity.clone()
    };
    let methods: BTreeSet<Method> = if args.methods.is_empty() {
        Method::for_kinds(&enabled).into_iter().collect()
    } else {
        args.methods.iter().copied().collect()
    };
    for &m in &methods {
        let Some(kind) = m.similarity_kind() else { continue };
        if !sources.covers(kind) {
            return Err(Fatal(format!(
                "method {m} needs {kind} similarities but no provider or precomputed {kind} matrices are configured; pass --provider-url or --precomputed-dir"
            )));
        }
        if !enabled.contains(&kind) {
            return Err(Fatal(format!("method {m} needs similarity kind {kind}, which --similarity does not enable")));
        }
    }
    Ok(methods.into_iter().collect())
}

fn compute(args: &ComputeArgs) -> CmdResult {
    if !(0.0..=1.0).contains(&args.dse_threshold) {
        return Err(Fatal(format!("--dse-threshold must lie in [0, 1], got {}", args.dse_threshold)));
    }
    let out_dir = prepare_out_dir(&args.out)?;
    let parsed = load_responses(&args.input)?;

    let store = match &args.precomputed_dir {
        Some(dir) => Some(PrecomputedStore::load_dir(dir)?),
        None => None,
    };
    let provider = match &args.provider_url {
        Some(url) => Some(make_provider(args, url)?),
        None => None,
    };
    let cache = match &args.cache_dir {
        Some(dir) => SimilarityCache::with_dir(dir),
        None => SimilarityCache::from_env_or(DEFAULT_CACHE_DIR),
    };
    let engine = provider.as_deref().map(|p| SimilarityEngine::new(p, &cache));
    let sources = MatrixSources { engine: engine.as_ref(), precomputed: store.as_ref() };
    let methods = select_methods(args, &sources)?;
    let settings = MethodSettings { dse_threshold: args.dse_threshold };

    let sets: Vec<_> = parsed.iter().collect();
    let output = pipeline::compute(&sets, &methods, sources, &settings);
    let scores_path = out_dir.join(tables::SCORES_FILE);
    tables::write_scores(&scores_path, &output.rows)?;

    for (kind, e) in &output.failed {
        eprintln!("uq: {kind} similarity failed, its methods were skipped: {e}");
    }
    write_metadata(
        out_dir,
        "compute",
        json!({
            "input": args.input,
            "items": parsed.len(),
            "rejected_records": parsed.rejects.len(),
            "methods": methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "dse_threshold": args.dse_threshold,
            "seed": args.seed,
            "provider_url": args.provider_url,
            "provider_model_id": engine.as_ref().map(|e| e.model_id().to_string()),
            "precomputed_dir": args.precomputed_dir,
            "precomputed_matrices": store.as_ref().map(PrecomputedStore::len),
            "cache_dir": cache.dir(),
            "cache_dir_env": CACHE_DIR_ENV,
            "failed_kinds": output.failed.iter().map(|(k, e)| (k.as_str(), e.as_str())).collect::<BTreeMap<_, _>>(),
            "rows": output.rows.len(),
        }),
    )?;
    if !output.failed.is_empty() {
        return Ok(EXIT_FATAL);
    }
    Ok(partial_or_ok(parsed.rejects.len()))
}

fn eval(args: &EvalArgs) -> CmdResult {
    let out_dir = prepare_out_dir(&args.out)?;
    let scores_path = or_default(&args.scores, out_dir, tables::SCORES_FILE);
    let scores = tables::read_scores(&scores_path)?;
    let parsed = load_responses(&args.input)?;
    let out = analysis::evaluate_scores(&scores, &parsed, args.prediction);
    for (config, item) in &out.unmatched {
        eprintln!("uq: unmatched item_id `{item}` in configuration {config}");
    }
    tables::write_eval(&out_dir.join(tables::EVAL_FILE), &out.rows)?;
    tables::write_curves(&out_dir.join(tables::CURVES_FILE), &out.curves)?;
    write_metadata(
        out_dir,
        "eval",
        json!({
            "scores": scores_path,
            "input": args.input,
            "prediction_rule": args.prediction,
            "rejected_records": parsed.rejects.len(),
            "unmatched_items": out.unmatched.len(),
            "rows": out.rows.len(),
        }),
    )?;
    Ok(partial_or_ok(parsed.rejects.len()))
}

fn stability(args: &StabilityArgs) -> CmdResult {
    let out_dir = prepare_out_dir(&args.out)?;
    let scores_path = or_default(&args.scores, out_dir, tables::SCORES_FILE);
    let scores = tables::read_scores(&scores_path)?;
    let rows = analysis::stability_rows(&scores, args.delta_mode);
    tables::write_stability(&out_dir.join(tables::STABILITY_FILE), &rows)?;
    write_metadata(
        out_dir,
        "stability",
        json!({ "scores": scores_path, "delta_mode": args.delta_mode, "rows": rows.len() }),
    )?;
    Ok(EXIT_OK)
}

fn correlate(args: &CorrelateArgs) -> CmdResult {
    let out_dir = prepare_out_dir(&args.out)?;
    let scores_path = or_default(&args.scores, out_dir, tables::SCORES_FILE);
    let scores = tables::read_scores(&scores_path)?;
    let rows = analysis::correlation_rows(&scores);
    tables::write_correlation(&out_dir.join(tables::CORRELATION_FILE), &rows)?;
    write_metadata(out_dir, "correlate", json!({ "scores": scores_path, "rows": rows.len() }))?;
    Ok(EXIT_OK)
}

/// An optional input: explicit paths must exist, defaults may be absent.
fn optional_input(path: &Option<PathBuf>, dir: &Path, file: &str) -> Result<Option<PathBuf>, Fatal> {
    match path {
        Some(p) if !p.exists() => Err(Fatal(format!("{} does not exist", p.display()))),
        Some(p) => Ok(Some(p.clone())),
        None => {
            let p = dir.join(file);
            Ok(p.exists().then_some(p))
        }
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' { c } else { '-' })
        .collect()
}

fn config_slug(c: &ConfigKey) -> String {
    format!("{}__{}__{}", slug(&c.model), slug(&c.question), c.strategy)
}

fn write_svg(path: &Path, svg: &str) -> Result<(), Fatal> {
    fs::write(path, svg).map_err(|e| Fatal(format!("cannot write {}: {e}", path.display())))
}

fn report(args: &ReportArgs) -> CmdResult {
    let out_dir = prepare_out_dir(&args.out)?;
    let plots = out_dir.join("plots");
    fs::create_dir_all(&plots).map_err(|e| Fatal(format!("cannot create {}: {e}", plots.display())))?;

    let eval_path = or_default(&args.eval, out_dir, tables::EVAL_FILE);
    let eval_rows = tables::read_eval(&eval_path)?;
    let stability_path = optional_input(&args.stability, out_dir, tables::STABILITY_FILE)?;
    let stability_rows = match &stability_path {
        Some(p) => tables::read_stability(p)?,
        None => {
            log::warn!("no stability table, stability ranks skipped");
            Vec::new()
        }
    };

    let table = analysis::rank_table(&eval_rows, &stability_rows);
    tables::write_rank_table(&out_dir.join(tables::RANKS_EFFECTIVENESS_FILE), &table, &EvalMetric::EFFECTIVENESS)?;
    if !stability_rows.is_empty() {
        tables::write_rank_table(&out_dir.join(tables::RANKS_STABILITY_FILE), &table, &EvalMetric::STABILITY)?;
    }
    tables::write_per_config_ranks(&out_dir.join(tables::RANKS_PER_CONFIG_FILE), &table)?;

    let mut written = vec![tables::RANKS_EFFECTIVENESS_FILE.to_string(), tables::RANKS_PER_CONFIG_FILE.to_string()];
    if !stability_rows.is_empty() {
        written.push(tables::RANKS_STABILITY_FILE.into());
    }

    let metrics: Vec<EvalMetric> = EvalMetric::EFFECTIVENESS
        .into_iter()
        .chain(EvalMetric::STABILITY)
        .filter(|m| table.aggregate.contains_key(m))
        .collect();
    for perspective in Perspective::ALL {
        for &metric in &metrics {
            let dist = analysis::perspective_ranks(&table, perspective, metric);
            let names: Vec<String> = dist.keys().map(Method::to_string).collect();
            let groups: Vec<(&str, Vec<f64>)> = names.iter().map(String::as_str).zip(dist.into_values()).collect();
            let title = format!("{} rank by {perspective}", metric.column());
            let file = format!("boxplot_{perspective}_{}.svg", metric.column());
            write_svg(&plots.join(&file), &plot::box_plot(&title, "average rank", &groups))?;
            written.push(format!("plots/{file}"));
        }
    }

    let correlation_path = optional_input(&args.correlation, out_dir, tables::CORRELATION_FILE)?;
    if let Some(p) = &correlation_path {
        let mean = analysis::mean_correlation(&tables::read_correlation(p)?);
        let methods: Vec<Method> = mean.keys().map(|(a, _)| *a).collect::<BTreeSet<_>>().into_iter().collect();
        let cell = |a: Method, b: Method| mean.get(&(a, b)).copied().flatten();
        tables::write_matrix(&out_dir.join(tables::CORRELATION_MATRIX_FILE), &methods, cell)?;
        let labels: Vec<&str> = methods.iter().map(|m| m.name()).collect();
        let svg = plot::heatmap("Pearson correlation between methods", &labels, |i, j| cell(methods[i], methods[j]));
        write_svg(&plots.join("correlation_heatmap.svg"), &svg)?;
        written.push(tables::CORRELATION_MATRIX_FILE.into());
        written.push("plots/correlation_heatmap.svg".into());
    }

    let curves_path = optional_input(&args.curves, out_dir, tables::CURVES_FILE)?;
    if let Some(p) = &curves_path {
        let points = tables::read_curves(p)?;
        let mut grouped: BTreeMap<(ConfigKey, CurveKind), BTreeMap<Method, Vec<(f64, f64)>>> = BTreeMap::new();
        for CurvePoint { config, method, curve, x, y } in points {
            grouped.entry((config, curve)).or_default().entry(method).or_default().push((x, y));
        }
        for ((config, curve), by_method) in &grouped {
            let names: Vec<String> = by_method.keys().map(Method::to_string).collect();
            let series: Vec<Series<'_>> = names
                .iter()
                .zip(by_method.values())
                .map(|(name, pts)| Series { name, points: pts })
                .collect();
            let (x_label, y_label, y_range) = match curve {
                CurveKind::Roc => ("false positive rate", "true positive rate", Some((0.0, 1.0))),
                CurveKind::Arc => ("rejection rate", "accuracy", Some((0.0, 1.0))),
                CurveKind::Erc => ("rejection rate", "mean absolute error", None),
            };
            let title = format!("{} {config}", curve.as_str().to_uppercase());
            let file = format!("{}_{}.svg", curve.as_str(), config_slug(config));
            write_svg(&plots.join(&file), &plot::line_chart(&title, x_label, y_label, &series, y_range))?;
            written.push(format!("plots/{file}"));
        }
    }

    write_metadata(
        out_dir,
        "report",
        json!({
            "eval": eval_path,
            "stability": stability_path,
            "correlation": correlation_path,
            "curves": curves_path,
            "outputs": written,
        }),
    )?;
    Ok(EXIT_OK)
}

fn synthesize(args: &SynthesizeArgs) -> CmdResult {
    if args.samples < 2 || args.label_min >= args.label_max {
        return Err(Fatal("need --samples >= 2 and --label-min < --label-max".into()));
    }
    if !(0.0..=1.0).contains(&args.q_min) || !(args.q_min..=1.0).contains(&args.q_max) {
        return Err(Fatal("need 0 <= --q-min <= --q-max <= 1".into()));
    }
    if !(0.0..=1.0).contains(&args.invalid_rate) {
        return Err(Fatal("--invalid-rate must lie in [0, 1]".into()));
    }
    let mut configs = Vec::new();
    for model in &args.models {
        for question in &args.questions {
            for &strategy in &args.strategies {
                configs.push(ConfigKey::new(model.clone(), question.clone(), strategy));
            }
        }
    }
    let spec = SyntheticSpec {
        items_per_config: args.items,
        samples: args.samples,
        label_min: args.label_min,
        label_max: args.label_max,
        q_min: args.q_min,
        q_max: args.q_max,
        invalid_rate: args.invalid_rate,
        seed: args.seed,
        configs,
    };
    let mut text = String::new();
    for item in synthetic::generate(&spec) {
        text.push_str(&item.set.to_json_line());
        text.push('\n');
    }
    if let Some(parent) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&args.output, text).map_err(|e| Fatal(format!("cannot write {}: {e}", args.output.display())))?;
    Ok(EXIT_OK)
}
