//! Grading samples, response sets, and the JSONL ingestion path.
//!
//! A [`ResponseSet`] holds the `N` repeated grading outputs an LLM grader
//! produced for one student answer under one configuration (model, question,
//! prompting strategy), together with the gold label and the item's label
//! range. Everything downstream consumes response sets.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Only schema revision understood by [`parse_response_file`].
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    ZeroShot,
    ZeroShotCot,
    FewShotCot,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::ZeroShot, Strategy::ZeroShotCot, Strategy::FewShotCot];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::ZeroShot => "zero_shot",
            Strategy::ZeroShotCot => "zero_shot_cot",
            Strategy::FewShotCot => "few_shot_cot",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// One benchmark configuration: the unit within which methods are ranked.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConfigKey {
    pub model: String,
    pub question: String,
    pub strategy: Strategy,
}

impl ConfigKey {
    pub fn new(model: impl Into<String>, question: impl Into<String>, strategy: Strategy) -> Self {
        Self { model: model.into(), question: question.into(), strategy }
    }
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.model, self.question, self.strategy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradingSample {
    pub score: Option<i64>,
    pub rationale: String,
    pub raw: String,
    pub sample_index: usize,
}

impl GradingSample {
    /// Text the relation graph is built over: the rationale, or the raw
    /// generation when the rationale is empty.
    pub fn relation_text(&self) -> &str {
        if self.rationale.trim().is_empty() {
            &self.raw
        } else {
            &self.rationale
        }
    }
}

/// Reasons a single record is rejected. These never abort a whole file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("N < 2: a response set needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("empty label range [{min}, {max}]")]
    EmptyLabelRange { min: i64, max: i64 },
    #[error("gold label {gold} outside label range [{min}, {max}]")]
    GoldOutOfRange { gold: i64, min: i64, max: i64 },
    #[error("sample {index} has score {score} outside label range [{min}, {max}]")]
    ScoreOutOfRange { index: usize, score: i64, min: i64, max: i64 },
    #[error("duplicate item_id `{0}` within configuration")]
    DuplicateItem(String),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: malformed JSON: {source}")]
    MalformedJson { line: usize, source: serde_json::Error },
    #[error("unsupported schema version `{0}` (expected `{SCHEMA_VERSION}`)")]
    UnsupportedSchema(String),
}

/// All `N` repeated grading outputs for one item under one configuration.
///
/// Construction validates every invariant, so a `ResponseSet` in hand is
/// always well-formed. Sample order is generation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseSet {
    item_id: String,
    config: ConfigKey,
    gold: i64,
    label_min: i64,
    label_max: i64,
    samples: Vec<GradingSample>,
}

impl ResponseSet {
    /// Builds a validated response set. `sample_index` is reassigned from
    /// the position in `samples`.
    pub fn new(
        item_id: impl Into<String>,
        config: ConfigKey,
        gold: i64,
        label_range: (i64, i64),
        samples: Vec<GradingSample>,
    ) -> Result<Self, RecordError> {
        let (label_min, label_max) = label_range;
        if label_min >= label_max {
            return Err(RecordError::EmptyLabelRange { min: label_min, max: label_max });
        }
        if samples.len() < 2 {
            return Err(RecordError::TooFewSamples(samples.len()));
        }
        if !(label_min..=label_max).contains(&gold) {
            return Err(RecordError::GoldOutOfRange { gold, min: label_min, max: label_max });
        }
        let mut samples = samples;
        for (index, sample) in samples.iter_mut().enumerate() {
            sample.sample_index = index;
            if let Some(score) = sample.score {
                if !(label_min..=label_max).contains(&score) {
                    return Err(RecordError::ScoreOutOfRange {
                        index,
                        score,
                        min: label_min,
                        max: label_max,
                    });
                }
            }
        }
        Ok(Self { item_id: item_id.into(), config, gold, label_min, label_max, samples })
    }

    /// Convenience constructor from bare scores with empty rationales.
    pub fn from_scores(
        item_id: impl Into<String>,
        config: ConfigKey,
        gold: i64,
        label_range: (i64, i64),
        scores: &[Option<i64>],
    ) -> Result<Self, RecordError> {
        let samples = scores
            .iter()
            .enumerate()
            .map(|(i, &score)| GradingSample {
                score,
                rationale: String::new(),
                raw: String::new(),
                sample_index: i,
            })
            .collect();
        Self::new(item_id, config, gold, label_range, samples)
    }

    pub fn item_id(&self) -> &str {
        &self.item_id
    }

    pub fn config(&self) -> &ConfigKey {
        &self.config
    }

    pub fn gold(&self) -> i64 {
        self.gold
    }

    pub fn label_min(&self) -> i64 {
        self.label_min
    }

    pub fn label_max(&self) -> i64 {
        self.label_max
    }

    pub fn samples(&self) -> &[GradingSample] {
        &self.samples
    }

    /// Number of repeated generations `N`.
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn scores(&self) -> impl Iterator<Item = Option<i64>> + '_ {
        self.samples.iter().map(|s| s.score)
    }

    pub fn to_record(&self) -> ResponseRecord {
        ResponseRecord {
            item_id: self.item_id.clone(),
            model: self.config.model.clone(),
            question: self.config.question.clone(),
            strategy: self.config.strategy,
            gold: self.gold,
            label_min: self.label_min,
            label_max: self.label_max,
            samples: self
                .samples
                .iter()
                .map(|s| SampleRecord {
                    score: s.score,
                    rationale: s.rationale.clone(),
                    raw: s.raw.clone(),
                })
                .collect(),
        }
    }

    /// One JSONL line (no trailing newline).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("record serialization is infallible")
    }
}

/// Wire form of one JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub item_id: String,
    pub model: String,
    pub question: String,
    pub strategy: Strategy,
    pub gold: i64,
    pub label_min: i64,
    pub label_max: i64,
    pub samples: Vec<SampleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(default)]
    pub score: Option<i64>,
    #[serde(default)]
    pub rationale: String,
    #[serde(default)]
    pub raw: String,
}

impl ResponseRecord {
    /// Validates into a [`ResponseSet`]. A null `score` falls back to
    /// [`extract_score`] on the raw generation.
    pub fn into_response_set(self) -> Result<ResponseSet, RecordError> {
        let (min, max) = (self.label_min, self.label_max);
        let samples = self
            .samples
            .into_iter()
            .enumerate()
            .map(|(i, s)| GradingSample {
                score: s.score.or_else(|| extract_score(&s.raw, min, max)),
                rationale: s.rationale,
                raw: s.raw,
                sample_index: i,
            })
            .collect();
        ResponseSet::new(
            self.item_id,
            ConfigKey::new(self.model, self.question, self.strategy),
            self.gold,
            (min, max),
            samples,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordReject {
    pub line: usize,
    pub item_id: Option<String>,
    pub error: RecordError,
}

/// Result of ingesting a JSONL file: accepted sets grouped by configuration
/// (in file order within each group) plus record-level rejects.
#[derive(Debug, Clone, Default)]
pub struct ParsedResponses {
    pub sets: BTreeMap<ConfigKey, Vec<ResponseSet>>,
    pub rejects: Vec<RecordReject>,
}

impl ParsedResponses {
    pub fn len(&self) -> usize {
        self.sets.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &ResponseSet> {
        self.sets.values().flatten()
    }
}

pub fn parse_response_file(path: &Path, schema_version: &str) -> Result<ParsedResponses, ParseError> {
    if schema_version != SCHEMA_VERSION {
        return Err(ParseError::UnsupportedSchema(schema_version.to_string()));
    }
    let io_err = |source| ParseError::Io { path: path.display().to_string(), source };
    let file = File::open(path).map_err(io_err)?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        lines.push(line.map_err(io_err)?);
    }
    parse_response_lines(lines.iter().map(String::as_str))
}

/// Parses JSONL content already in memory. Line numbers are 1-based.
pub fn parse_response_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<ParsedResponses, ParseError> {
    let mut parsed = ParsedResponses::default();
    let mut seen: HashSet<(ConfigKey, String)> = HashSet::new();
    for (idx, line) in lines.into_iter().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: ResponseRecord = serde_json::from_str(line)
            .map_err(|source| ParseError::MalformedJson { line: line_no, source })?;
        let item_id = record.item_id.clone();
        let outcome = record.into_response_set().and_then(|rs| {
            if seen.insert((rs.config().clone(), rs.item_id().to_string())) {
                Ok(rs)
            } else {
                Err(RecordError::DuplicateItem(rs.item_id().to_string()))
            }
        });
        match outcome {
            Ok(rs) => parsed.sets.entry(rs.config().clone()).or_default().push(rs),
            Err(error) => {
                log::warn!("line {line_no}: rejected record `{item_id}`: {error}");
                parsed.rejects.push(RecordReject { line: line_no, item_id: Some(item_id), error });
            }
        }
    }
    Ok(parsed)
}

fn score_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)score["']?\s*(?:[:=]|\bis\b)?\s*(-?\d+)"#).unwrap())
}

fn trailing_integer() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:^|[^\w.-])(-?\d+)\.?\s*$").unwrap())
}

fn json_score(value: &serde_json::Value) -> Option<Option<i64>> {
    let field = value.as_object()?.get("score")?;
    let score = match field {
        serde_json::Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_f64().filter(|f| f.fract() == 0.0).map(|f| f as i64)),
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    };
    Some(score)
}

/// Recovers a score from a free-form generation.
///
/// Rules are tried in priority order and the first rule that finds a
/// candidate decides: a JSON `"score"` field (whole text, or the outermost
/// `{...}` span), then the last `score <sep> <int>` mention, then a bare
/// integer ending the final non-empty line. Out-of-range values yield `None`.
pub fn extract_score(raw: &str, label_min: i64, label_max: i64) -> Option<i64> {
    let in_range = |s: i64| (label_min..=label_max).contains(&s).then_some(s);

    let trimmed = raw.trim();
    let json_candidate = serde_json::from_str::<serde_json::Value>(trimmed).ok().or_else(|| {
        let start = trimmed.find('{')?;
        let end = trimmed.rfind('}')?;
        (start < end).then(|| serde_json::from_str(&trimmed[start..=end]).ok()).flatten()
    });
    if let Some(found) = json_candidate.as_ref().and_then(json_score) {
        return found.and_then(in_range);
    }

    if let Some(caps) = score_pattern().captures_iter(raw).last() {
        return caps[1].parse().ok().and_then(in_range);
    }

    let last_line = raw.lines().rev().find(|l| !l.trim().is_empty())?;
    let caps = trailing_integer().captures(last_line.trim_end())?;
    caps[1].parse().ok().and_then(in_range)
}

/// Per-item prediction derived from the repeated samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: i64,
    pub correct: bool,
    pub abs_error: u64,
}

impl Prediction {
    fn scored(label: i64, gold: i64) -> Self {
        let abs_error = label.abs_diff(gold);
        Self { label, correct: abs_error == 0, abs_error }
    }

    /// No usable score: the prediction falls back to `label_min` and is
    /// always counted wrong, with an error of at least one grade step.
    fn unscored(label_min: i64, gold: i64) -> Self {
        Self { label: label_min, correct: false, abs_error: label_min.abs_diff(gold).max(1) }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionRule {
    /// Most frequent present score, ties toward the lower label.
    #[default]
    Majority,
    /// Score of the first generation.
    FirstSample,
}

impl FromStr for PredictionRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "majority" => Ok(Self::Majority),
            "first" | "first_sample" => Ok(Self::FirstSample),
            other => Err(format!("unknown prediction rule `{other}`")),
        }
    }
}

pub fn predict(rs: &ResponseSet, rule: PredictionRule) -> Prediction {
    match rule {
        PredictionRule::Majority => majority_prediction(rs),
        PredictionRule::FirstSample => match rs.samples()[0].score {
            Some(label) => Prediction::scored(label, rs.gold()),
            None => Prediction::unscored(rs.label_min(), rs.gold()),
        },
    }
}

pub fn majority_prediction(rs: &ResponseSet) -> Prediction {
    let mut votes: BTreeMap<i64, usize> = BTreeMap::new();
    for score in rs.scores().flatten() {
        *votes.entry(score).or_default() += 1;
    }
    // BTreeMap iterates labels ascending; keeping the first maximum breaks
    // ties toward the lower label.
    let winner = votes
        .iter()
        .fold(None::<(i64, usize)>, |best, (&label, &count)| match best {
            Some((_, c)) if c >= count => best,
            _ => Some((label, count)),
        });
    match winner {
        Some((label, _)) => Prediction::scored(label, rs.gold()),
        None => Prediction::unscored(rs.label_min(), rs.gold()),
    }
}
