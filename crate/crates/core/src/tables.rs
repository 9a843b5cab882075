//! CSV schemas for every tabular output, with readers that check headers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! value read back is bit-identical. Absent values are empty fields.
//! Readers locate columns by name and reject a file missing any required
//! column, naming the field.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::effectiveness::EffectivenessResult;
use crate::methods::Method;
use crate::pipeline::ScoreRow;
use crate::ranking::{EvalMetric, RankTable};
use crate::response::{ConfigKey, Strategy};
use crate::stability::StabilityResult;

pub const SCORES_FILE: &str = "scores.csv";
pub const EVAL_FILE: &str = "eval.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const STABILITY_FILE: &str = "stability.csv";
pub const CORRELATION_FILE: &str = "correlation.csv";
pub const CORRELATION_MATRIX_FILE: &str = "correlation_matrix.csv";
pub const RANKS_EFFECTIVENESS_FILE: &str = "ranks_effectiveness.csv";
pub const RANKS_STABILITY_FILE: &str = "ranks_stability.csv";
pub const RANKS_PER_CONFIG_FILE: &str = "ranks_per_config.csv";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: missing column `{field}`")]
    MissingColumn { path: PathBuf, field: String },
    #[error("{path}: row {row}: bad value `{value}` in column `{field}`: {reason}")]
    BadValue { path: PathBuf, row: usize, field: String, value: String, reason: String },
}

pub fn format_float(v: f64) -> String {
    format!("{v}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn config_fields(c: &ConfigKey) -> [String; 3] {
    [c.model.clone(), c.question.clone(), c.strategy.to_string()]
}

pub struct TableWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl TableWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, TableError> {
        let mut inner = csv::Writer::from_path(path).map_err(|source| TableError::Csv { path: path.into(), source })?;
        inner
            .write_record(header)
            .map_err(|source| TableError::Csv { path: path.into(), source })?;
        Ok(Self { path: path.into(), inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), TableError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner
            .write_record(fields)
            .map_err(|source| TableError::Csv { path: self.path.clone(), source })
    }

    pub fn finish(mut self) -> Result<(), TableError> {
        self.inner
            .flush()
            .map_err(|source| TableError::Io { path: self.path.clone(), source })
    }
}

/// A header-indexed CSV file held in memory.
pub struct Table {
    path: PathBuf,
    columns: HashMap<String, usize>,
    header: Vec<String>,
    records: Vec<csv::StringRecord>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, TableError> {
        let csv_err = |source| TableError::Csv { path: path.into(), source };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let columns = header.iter().enumerate().map(|(i, h)| (h.clone(), i)).collect();
        let records = reader.records().collect::<Result<_, _>>().map_err(csv_err)?;
        Ok(Self { path: path.into(), columns, header, records })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn require(&self, fields: &[&str]) -> Result<(), TableError> {
        match fields.iter().find(|f| !self.columns.contains_key(**f)) {
            Some(f) => Err(TableError::MissingColumn { path: self.path.clone(), field: f.to_string() }),
            None => Ok(()),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.records.iter().enumerate().map(move |(i, record)| Row { table: self, index: i + 1, record })
    }
}

pub struct Row<'t> {
    table: &'t Table,
    /// 1-based data row number.
    index: usize,
    record: &'t csv::StringRecord,
}

impl Row<'_> {
    pub fn str(&self, field: &str) -> &str {
        self.table.columns.get(field).and_then(|&i| self.record.get(i)).unwrap_or("")
    }

    fn bad(&self, field: &str, reason: impl ToString) -> TableError {
        TableError::BadValue {
            path: self.table.path.clone(),
            row: self.index,
            field: field.to_string(),
            value: self.str(field).to_string(),
            reason: reason.to_string(),
        }
    }

    pub fn parse<T: FromStr>(&self, field: &str) -> Result<T, TableError>
    where
        T::Err: ToString,
    {
        self.str(field).parse().map_err(|e: T::Err| self.bad(field, e))
    }

    /// Empty field → `None`.
    pub fn opt_f64(&self, field: &str) -> Result<Option<f64>, TableError> {
        match self.str(field) {
            "" => Ok(None),
            _ => self.parse(field).map(Some),
        }
    }

    pub fn config(&self) -> Result<ConfigKey, TableError> {
        Ok(ConfigKey::new(self.str("model"), self.str("question"), self.parse::<Strategy>("strategy")?))
    }
}

// Scores

pub fn scores_header(max_n: usize) -> Vec<String> {
    let mut h: Vec<String> = ["item_id", "model", "question", "strategy", "method", "uncertainty"]
        .map(String::from)
        .to_vec();
    h.extend((2..=max_n.max(2)).map(|k| format!("u_{k}")));
    h
}

pub fn write_scores(path: &Path, rows: &[ScoreRow]) -> Result<(), TableError> {
    let max_n = rows.iter().map(|r| r.prefix.len() + 1).max().unwrap_or(2);
    let header = scores_header(max_n);
    let mut w = TableWriter::create(path, &header.iter().map(String::as_str).collect::<Vec<_>>())?;
    for r in rows {
        let [model, question, strategy] = config_fields(&r.config);
        let mut fields = vec![r.item_id.clone(), model, question, strategy, r.method.to_string(), format_float(r.uncertainty)];
        fields.extend((0..max_n - 1).map(|i| format_opt(r.prefix.get(i).copied())));
        w.row(fields)?;
    }
    w.finish()
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRow>, TableError> {
    let t = Table::read(path)?;
    t.require(&["item_id", "model", "question", "strategy", "method", "uncertainty"])?;
    let prefix_cols: Vec<String> = (2..)
        .map(|k| format!("u_{k}"))
        .take_while(|c| t.columns.contains_key(c))
        .collect();
    t.rows()
        .map(|row| {
            let mut prefix = Vec::new();
            for c in &prefix_cols {
                match row.opt_f64(c)? {
                    Some(v) => prefix.push(v),
                    None => break,
                }
            }
            Ok(ScoreRow {
                config: row.config()?,
                item_id: row.str("item_id").to_string(),
                method: row.parse("method")?,
                uncertainty: row.parse("uncertainty")?,
                prefix,
            })
        })
        .collect()
}

// Effectiveness

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub config: ConfigKey,
    pub method: Method,
    pub result: EffectivenessResult,
}

pub const EVAL_HEADER: [&str; 9] = ["model", "question", "strategy", "method", "auroc", "c_index", "auarc", "auerc", "m"];

pub fn write_eval(path: &Path, rows: &[EvalRow]) -> Result<(), TableError> {
    let mut w = TableWriter::create(path, &EVAL_HEADER)?;
    for r in rows {
        let [model, question, strategy] = config_fields(&r.config);
        let e = &r.result;
        w.row([
            model,
            question,
            strategy,
            r.method.to_string(),
            format_opt(e.auroc),
            format_opt(e.c_index),
            format_opt(e.auarc),
            format_opt(e.auerc),
            e.m.to_string(),
        ])?;
    }
    w.finish()
}

pub fn read_eval(path: &Path) -> Result<Vec<EvalRow>, TableError> {
    let t = Table::read(path)?;
    t.require(&EVAL_HEADER)?;
    t.rows()
        .map(|row| {
            Ok(EvalRow {
                config: row.config()?,
                method: row.parse("method")?,
                result: EffectivenessResult {
                    auroc: row.opt_f64("auroc")?,
                    c_index: row.opt_f64("c_index")?,
                    auarc: row.opt_f64("auarc")?,
                    auerc: row.opt_f64("auerc")?,
                    m: row.parse("m")?,
                },
            })
        })
        .collect()
}

impl EvalRow {
    pub fn metric(&self, metric: EvalMetric) -> Option<f64> {
        match metric {
            EvalMetric::Auroc => self.result.auroc,
            EvalMetric::CIndex => self.result.c_index,
            EvalMetric::Auarc => self.result.auarc,
            EvalMetric::Auerc => self.result.auerc,
            EvalMetric::Delta | EvalMetric::Spearmanr => None,
        }
    }
}

// Curves

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveKind {
    Roc,
    Arc,
    Erc,
}

impl CurveKind {
    pub const ALL: [CurveKind; 3] = [CurveKind::Roc, CurveKind::Arc, CurveKind::Erc];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Roc => "roc",
            CurveKind::Arc => "arc",
            CurveKind::Erc => "erc",
        }
    }
}

impl FromStr for CurveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CurveKind::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown curve `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub config: ConfigKey,
    pub method: Method,
    pub curve: CurveKind,
    pub x: f64,
    pub y: f64,
}

pub const CURVES_HEADER: [&str; 7] = ["model", "question", "strategy", "method", "curve", "x", "y"];

pub fn write_curves(path: &Path, points: &[CurvePoint]) -> Result<(), TableError> {
    let mut w = TableWriter::create(path, &CURVES_HEADER)?;
    for p in points {
        let [model, question, strategy] = config_fields(&p.config);
        w.row([model, question, strategy, p.method.to_string(), p.curve.as_str().into(), format_float(p.x), format_float(p.y)])?;
    }
    w.finish()
}

pub fn read_curves(path: &Path) -> Result<Vec<CurvePoint>, TableError> {
    let t = Table::read(path)?;
    t.require(&CURVES_HEADER)?;
    t.rows()
        .map(|row| {
            Ok(CurvePoint {
                config: row.config()?,
                method: row.parse("method")?,
                curve: row.parse("curve")?,
                x: row.parse("x")?,
                y: row.parse("y")?,
            })
        })
        .collect()
}

// Stability

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub config: ConfigKey,
    pub method: Method,
    pub result: StabilityResult,
}

pub const STABILITY_HEADER: [&str; 7] = ["model", "question", "strategy", "method", "delta", "spearmanr", "items"];

pub fn write_stability(path: &Path, rows: &[StabilityRow]) -> Result<(), TableError> {
    let mut w = TableWriter::create(path, &STABILITY_HEADER)?;
    for r in rows {
        let [model, question, strategy] = config_fields(&r.config);
        w.row([
            model,
            question,
            strategy,
            r.method.to_string(),
            format_opt(r.result.delta),
            format_opt(r.result.spearmanr),
            r.result.items.to_string(),
        ])?;
    }
    w.finish()
}

pub fn read_stability(path: &Path) -> Result<Vec<StabilityRow>, TableError> {
    let t = Table::read(path)?;
    t.require(&STABILITY_HEADER)?;
    t.rows()
        .map(|row| {
            Ok(StabilityRow {
                config: row.config()?,
                method: row.parse("method")?,
                result: StabilityResult {
                    delta: row.opt_f64("delta")?,
                    spearmanr: row.opt_f64("spearmanr")?,
                    items: row.parse("items")?,
                },
            })
        })
        .collect()
}

impl StabilityRow {
    pub fn metric(&self, metric: EvalMetric) -> Option<f64> {
        match metric {
            EvalMetric::Delta => self.result.delta,
            EvalMetric::Spearmanr => self.result.spearmanr,
            _ => None,
        }
    }
}

// Correlation

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub config: ConfigKey,
    pub method_a: Method,
    pub method_b: Method,
    pub pearson: Option<f64>,
}

pub const CORRELATION_HEADER: [&str; 6] = ["model", "question", "strategy", "method_a", "method_b", "pearson"];

pub fn write_correlation(path: &Path, rows: &[CorrelationRow]) -> Result<(), TableError> {
    let mut w = TableWriter::create(path, &CORRELATION_HEADER)?;
    for r in rows {
        let [model, question, strategy] = config_fields(&r.config);
        w.row([model, question, strategy, r.method_a.to_string(), r.method_b.to_string(), format_opt(r.pearson)])?;
    }
    w.finish()
}

pub fn read_correlation(path: &Path) -> Result<Vec<CorrelationRow>, TableError> {
    let t = Table::read(path)?;
    t.require(&CORRELATION_HEADER)?;
    t.rows()
        .map(|row| {
            Ok(CorrelationRow {
                config: row.config()?,
                method_a: row.parse("method_a")?,
                method_b: row.parse("method_b")?,
                pearson: row.opt_f64("pearson")?,
            })
        })
        .collect()
}

/// Square matrix: a `method` column, then one column per method.
pub fn write_matrix(path: &Path, methods: &[Method], cell: impl Fn(Method, Method) -> Option<f64>) -> Result<(), TableError> {
    let mut header = vec!["method".to_string()];
    header.extend(methods.iter().map(|m| m.to_string()));
    let mut w = TableWriter::create(path, &header.iter().map(String::as_str).collect::<Vec<_>>())?;
    for &a in methods {
        let mut fields = vec![a.to_string()];
        fields.extend(methods.iter().map(|&b| format_opt(cell(a, b))));
        w.row(fields)?;
    }
    w.finish()
}

pub fn read_matrix(path: &Path) -> Result<BTreeMap<(Method, Method), Option<f64>>, TableError> {
    let t = Table::read(path)?;
    t.require(&["method"])?;
    let columns: Vec<String> = t.header().iter().filter(|h| *h != "method").cloned().collect();
    let mut out = BTreeMap::new();
    for row in t.rows() {
        let a: Method = row.parse("method")?;
        for c in &columns {
            let b: Method = c
                .parse()
                .map_err(|e: String| TableError::BadValue { path: path.into(), row: 0, field: c.clone(), value: c.clone(), reason: e })?;
            out.insert((a, b), row.opt_f64(c)?);
        }
    }
    Ok(out)
}

// Ranks

/// Aggregate table: one row per method, one column per metric.
pub fn write_rank_table(path: &Path, table: &RankTable<ConfigKey, Method>, metrics: &[EvalMetric]) -> Result<(), TableError> {
    let mut header = vec!["method"];
    header.extend(metrics.iter().map(|m| m.column()));
    let mut w = TableWriter::create(path, &header)?;
    let methods: std::collections::BTreeSet<Method> = metrics
        .iter()
        .filter_map(|m| table.aggregate.get(m))
        .flat_map(|by| by.keys().copied())
        .collect();
    for method in methods {
        let mut fields = vec![method.to_string()];
        fields.extend(
            metrics
                .iter()
                .map(|m| format_opt(table.aggregate.get(m).and_then(|by| by.get(&method)).copied())),
        );
        w.row(fields)?;
    }
    w.finish()
}

pub const RANKS_PER_CONFIG_HEADER: [&str; 6] = ["model", "question", "strategy", "metric", "method", "rank"];

pub fn write_per_config_ranks(path: &Path, table: &RankTable<ConfigKey, Method>) -> Result<(), TableError> {
    let mut w = TableWriter::create(path, &RANKS_PER_CONFIG_HEADER)?;
    for ((config, metric), ranks) in &table.per_config {
        for (method, rank) in ranks {
            let [model, question, strategy] = config_fields(config);
            w.row([model, question, strategy, metric.column().into(), method.to_string(), format_float(*rank)])?;
        }
    }
    w.finish()
}

/// Reads an aggregate rank table back as metric → method → mean rank.
pub fn read_rank_table(path: &Path) -> Result<BTreeMap<EvalMetric, BTreeMap<Method, f64>>, TableError> {
    let t = Table::read(path)?;
    t.require(&["method"])?;
    let metrics: Vec<(String, EvalMetric)> = t
        .header()
        .iter()
        .filter_map(|h| h.parse::<EvalMetric>().ok().map(|m| (h.clone(), m)))
        .collect();
    let mut out: BTreeMap<EvalMetric, BTreeMap<Method, f64>> = BTreeMap::new();
    for row in t.rows() {
        let method: Method = row.parse("method")?;
        for (col, metric) in &metrics {
            if let Some(v) = row.opt_f64(col)? {
                out.entry(*metric).or_default().insert(method, v);
            }
        }
    }
    Ok(out)
}
