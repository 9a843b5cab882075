//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use grade_uq::categorical::{categorical_entropy, fsd, mar, numset, Label, LabelHistogram};
use grade_uq::effectiveness::{auarc, auerc, auroc, c_index, ScoredItem};
use grade_uq::graph::{
    algebraic_connectivity_uncertainty, discrete_semantic_entropy, eccentricity, nad, semantic_clusters,
    RelationGraph, LAMBDA2_EPSILON,
};
use grade_uq::methods::{Method, MethodSettings};
use grade_uq::pipeline::{compute, MatrixSources, ScoreRow};
use grade_uq::response::{majority_prediction, ConfigKey, GradingSample, ResponseSet, Strategy};
use grade_uq::similarity::{SimilarityCache, SimilarityEngine, SimilarityKind, SimilarityMatrix, StubProvider};
use grade_uq::stability::{stability, DeltaMode, PrefixSeries};
use grade_uq::synthetic::{generate, SyntheticSpec};
use rand::Rng;

const FORMULA_TOL: f64 = 1e-12;
const FORMULA_BUDGET: Duration = Duration::from_secs(10);
const GRAPH_MATRICES: usize = 200;
const GRAPH_MAX_N: usize = 8;
const NAD_TOL: f64 = 1e-12;
const ECC_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-6;
const DSE_TOL: f64 = 1e-12;
const GRAPH_BUDGET: Duration = Duration::from_secs(30);
const EFFECTIVENESS_MAX_M: usize = 7;
const PAIR_TOL: f64 = 1e-12;
const AREA_SUM_TOL: f64 = 1e-9;
const UNANIMITY_TOL: f64 = 1e-12;
const SYNTHETIC_ITEMS: usize = 500;
const SYNTHETIC_N: usize = 5;
const SYNTHETIC_MIN_AUROC: f64 = 0.75;
const SYNTHETIC_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    check(t < budget, || format!("took {t:.2?}, budget {budget:?}"))?;
    Ok(t)
}

fn formula_oracles() -> Outcome {
    let start = Instant::now();
    let alphabet = [Label::Score(0), Label::Score(1), Label::Score(2), Label::Invalid];
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for samples in common::all_sequences(&alphabet, n) {
            let h = LabelHistogram::from_labels(samples.iter().copied());
            let pairs = [
                (numset(&h), common::numset(&samples), "numset"),
                (mar(&h), common::mar(&samples), "mar"),
                (categorical_entropy(&h), common::entropy(&samples), "ce"),
                (fsd(&h), common::fsd(&samples), "fsd"),
            ];
            for (got, want, name) in pairs {
                let err = (got - want).abs();
                worst = worst.max(err);
                check(err <= FORMULA_TOL, || format!("{name} on {samples:?}: {got} vs {want}"))?;
            }
            cases += 1;
        }
    }
    let t = within_budget(start, FORMULA_BUDGET)?;
    Ok(format!("{cases} label sequences, N = 2..6 over 4 labels, max error {worst:e}, {t:.2?}"))
}

fn graph_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(2024);
    let (mut capped, mut worst_eigen) = (0, 0.0f64);
    for case in 0..GRAPH_MATRICES {
        let n = rng.gen_range(2..=GRAPH_MAX_N);
        let s = common::random_similarity(&mut rng, n);
        let g = RelationGraph::new(SimilarityMatrix::from_rows(SimilarityKind::Embed, s.clone()).unwrap());
        let (got, want) = (nad(&g), common::nad(&s));
        check((got - want).abs() <= NAD_TOL, || format!("case {case}: nad {got} vs {want}"))?;
        let (got, want) = (eccentricity(&g), common::floyd_warshall_eccentricity(&s));
        check((got - want).abs() <= ECC_TOL, || format!("case {case}: eccentricity {got} vs {want}"))?;

        let lambda2 = common::laplacian_spectrum(&s)[1];
        let e = algebraic_connectivity_uncertainty(&g).map_err(|e| e.to_string())?;
        if lambda2 < LAMBDA2_EPSILON {
            check(e.capped, || format!("case {case}: λ2 = {lambda2:e} should be capped"))?;
            capped += 1;
        } else {
            let err = (e.value - 1.0 / lambda2).abs();
            worst_eigen = worst_eigen.max(err);
            check(err <= EIGEN_TOL, || format!("case {case}: 1/λ2 {} vs {}", e.value, 1.0 / lambda2))?;
        }

        let d = common::random_directed(&mut rng, n);
        let g = RelationGraph::new(SimilarityMatrix::from_directed(d.clone()).unwrap());
        let c = semantic_clusters(&g, 0.5).map_err(|e| e.to_string())?;
        let got = discrete_semantic_entropy(&c, n);
        let want = common::entropy(&common::cluster_labels(&common::clusters(&d, 0.5)));
        check((got - want).abs() <= DSE_TOL, || format!("case {case}: dse {got} vs {want}"))?;
    }
    let t = within_budget(start, GRAPH_BUDGET)?;
    Ok(format!(
        "{GRAPH_MATRICES} matrices, N ≤ {GRAPH_MAX_N}, {capped} capped, max 1/λ2 error {worst_eigen:e}, {t:.2?}"
    ))
}

fn effectiveness_oracles() -> Outcome {
    let mut rng = common::rng(77);
    let mut defined = 0;
    for case in 0..3000 {
        let m = rng.gen_range(1..=EFFECTIVENESS_MAX_M);
        let (max_error, levels) = (rng.gen_range(0..=3), rng.gen_range(1..=6));
        let items = common::random_items(&mut rng, m, max_error, levels);
        for (name, got, want) in [
            ("auroc", auroc(&items), common::auroc(&items)),
            ("c_index", c_index(&items), common::c_index(&items)),
        ] {
            match (got, want) {
                (Some(a), Some(b)) => {
                    defined += 1;
                    check((a - b).abs() <= PAIR_TOL, || format!("case {case}: {name} {a} vs {b}"))?
                }
                (None, None) => {}
                _ => return Err(format!("case {case}: {name} definedness differs: {got:?} vs {want:?}")),
            }
        }

        let transformed: Vec<ScoredItem> = items
            .iter()
            .map(|it| ScoredItem { uncertainty: (2.5 * it.uncertainty).exp() - 4.0, ..it.clone() })
            .collect();
        check(auroc(&items) == auroc(&transformed) && c_index(&items) == c_index(&transformed), || {
            format!("case {case}: rank transform changed AUROC or C-index")
        })?;

        if m >= 2 {
            let binary = common::random_items(&mut rng, m, 1, levels);
            let total = auarc(&binary).unwrap() + auerc(&binary).unwrap();
            check((total - 1.0).abs() <= AREA_SUM_TOL, || format!("case {case}: AUARC + AUERC = {total}"))?;
        }
    }
    Ok(format!("3000 item sets, m ≤ {EFFECTIVENESS_MAX_M}, {defined} defined pair metrics checked"))
}

fn unanimous_set(n: usize, text: &str) -> ResponseSet {
    let samples = (0..n)
        .map(|i| GradingSample { score: Some(2), rationale: text.into(), raw: text.into(), sample_index: i })
        .collect();
    ResponseSet::new("u", ConfigKey::new("m", "q", Strategy::ZeroShot), 2, (0, 3), samples).unwrap()
}

fn unanimity() -> Outcome {
    let stub = StubProvider::default();
    let cache = SimilarityCache::in_memory();
    let engine = SimilarityEngine::new(&stub, &cache);
    let sources = MatrixSources { engine: Some(&engine), precomputed: None };
    let mut checked = 0;
    for n in [2, 3, 5] {
        for text in ["Correct. The answer names osmosis! Does it explain why? Yes.", "3"] {
            let set = unanimous_set(n, text);
            let out = compute(&[&set], &Method::ALL, sources, &MethodSettings::default());
            check(out.failed.is_empty() && out.rows.len() == 14, || format!("N = {n}: {:?}", out.failed))?;
            for row in &out.rows {
                let want = match row.method {
                    Method::Numset => 1.0,
                    m if m.name().ends_with("_eigen") => 1.0 / n as f64,
                    _ => 0.0,
                };
                check((row.uncertainty - want).abs() <= UNANIMITY_TOL, || {
                    format!("N = {n}: {} = {} (want {want})", row.method, row.uncertainty)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} metric values at N ∈ {{2, 3, 5}}"))
}

struct SyntheticRun {
    sets: Vec<ResponseSet>,
    rows: Vec<ScoreRow>,
    elapsed: Duration,
}

fn synthetic_run() -> Result<SyntheticRun, String> {
    let start = Instant::now();
    let spec = SyntheticSpec { items_per_config: SYNTHETIC_ITEMS, samples: SYNTHETIC_N, q_min: 0.3, q_max: 1.0, ..SyntheticSpec::default() };
    let sets: Vec<ResponseSet> = generate(&spec).into_iter().map(|it| it.set).collect();
    let stub = StubProvider::default();
    let cache = SimilarityCache::in_memory();
    let engine = SimilarityEngine::new(&stub, &cache);
    let sources = MatrixSources { engine: Some(&engine), precomputed: None };
    let refs: Vec<&ResponseSet> = sets.iter().collect();
    let out = compute(&refs, &Method::ALL, sources, &MethodSettings::default());
    check(out.failed.is_empty(), || format!("similarity failures: {:?}", out.failed))?;
    Ok(SyntheticRun { sets, rows: out.rows, elapsed: start.elapsed() })
}

fn synthetic_discrimination(run: &SyntheticRun) -> Outcome {
    let errors: BTreeMap<&str, u64> = run
        .sets
        .iter()
        .map(|rs| (rs.item_id(), majority_prediction(rs).abs_error))
        .collect();
    let items: Vec<ScoredItem> = run
        .rows
        .iter()
        .filter(|r| r.method == Method::Ce)
        .map(|r| ScoredItem::new(r.item_id.clone(), r.uncertainty, errors[r.item_id.as_str()]))
        .collect();
    check(items.len() == SYNTHETIC_ITEMS, || format!("{} CE rows", items.len()))?;
    let value = auroc(&items).ok_or("AUROC undefined")?;
    check(value > SYNTHETIC_MIN_AUROC, || format!("CE AUROC {value:.4} ≤ {SYNTHETIC_MIN_AUROC}"))?;
    check(run.elapsed < SYNTHETIC_BUDGET, || format!("took {:.2?}", run.elapsed))?;
    let wrong = items.iter().filter(|i| !i.correct).count();
    Ok(format!(
        "CE AUROC {value:.4} over {SYNTHETIC_ITEMS} items ({wrong} wrong), all 14 methods in {:.2?}",
        run.elapsed
    ))
}

/// Items whose most common score covers all but at most one sample.
fn unanimous_heavy(rs: &ResponseSet) -> bool {
    let h = LabelHistogram::from_labels(rs.scores());
    let top = h.counts().values().copied().max().unwrap_or(0);
    top + 1 >= rs.n()
}

fn stability_protocol(run: &SyntheticRun) -> Outcome {
    let heavy: std::collections::BTreeSet<&str> =
        run.sets.iter().filter(|rs| unanimous_heavy(rs)).map(|rs| rs.item_id()).collect();
    let series = |method: Method| -> Vec<PrefixSeries> {
        run.rows
            .iter()
            .filter(|r| r.method == method && heavy.contains(r.item_id.as_str()))
            .map(|r| PrefixSeries { item_id: r.item_id.clone(), method, values: r.prefix.clone() })
            .collect()
    };
    let numset = stability(&series(Method::Numset), DeltaMode::Relative).delta.ok_or("numset delta undefined")?;
    let mar = stability(&series(Method::Mar), DeltaMode::Relative).delta.ok_or("mar delta undefined")?;
    check(numset < mar, || format!("numset delta {numset:.4e} ≥ mar delta {mar:.4e}"))?;
    Ok(format!("{} unanimous-heavy items: numset delta {numset:.4e} < mar delta {mar:.4e}", heavy.len()))
}

fn uq(args: &[&str], cache: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_uq"))
        .args(args)
        .env("UQ_CACHE_DIR", cache)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || format!("uq {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != grade_uq::cli::METADATA_FILE {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |rel: &str| tmp.path().join(rel).to_string_lossy().into_owned();
    let cache = tmp.path().join("cache");
    let input = p("corpus.jsonl");
    uq(&["synthesize", "--output", &input, "--items", "60", "--models", "a,b", "--strategies", "zero_shot,few_shot_cot"], &cache)?;
    for run in ["warm", "run1", "run2"] {
        let out = p(run);
        uq(&["compute", "--input", &input, "--provider-url", "stub", "--out-dir", &out], &cache)?;
        uq(&["eval", "--input", &input, "--out-dir", &out], &cache)?;
        uq(&["stability", "--out-dir", &out], &cache)?;
        uq(&["correlate", "--out-dir", &out], &cache)?;
        uq(&["report", "--out-dir", &out], &cache)?;
    }
    let (a, b) = (data_files(&tmp.path().join("run1")), data_files(&tmp.path().join("run2")));
    check(!a.is_empty() && a.keys().eq(b.keys()), || "runs produced different file sets".into())?;
    for (name, bytes) in &a {
        check(b[name] == *bytes, || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} data files byte-identical across two warm-cache runs", a.len()))
}

fn main() {
    let synthetic = synthetic_run();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("formula oracle suite", formula_oracles()),
        ("graph oracle suite", graph_oracles()),
        ("effectiveness oracle suite", effectiveness_oracles()),
        ("unanimity equivalence", unanimity()),
        ("synthetic discrimination", synthetic.as_ref().map_err(Clone::clone).and_then(synthetic_discrimination)),
        ("stability protocol", synthetic.as_ref().map_err(Clone::clone).and_then(stability_protocol)),
        ("end-to-end determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, outcome) in &criteria {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
