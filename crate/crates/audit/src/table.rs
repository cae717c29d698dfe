//! Score tables: one CSV row per scored post.
//!
//! ```text
//! # dialect-audit score-table schema=1 group=AAE
//! text,p_aa,p_white,toxicity,severe_toxicity,obscene,threat,insult,identity_attack
//! "I did not mean to say dat",9.5714300000000005e-1,...
//! ```
//!
//! The first line is a comment carrying the schema version and group.
//! Numbers are written with 17 significant digits so that re-reading a
//! table reproduces every `f64` exactly.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use dialect_audit_core::scorer::ScoredPost;
use dialect_audit_core::{DialectGroup, Label, LabelScores, Post};
use thiserror::Error;

pub const TABLE_SCHEMA_VERSION: u32 = 1;

pub const HEADER: [&str; 9] = [
    "text",
    "p_aa",
    "p_white",
    "toxicity",
    "severe_toxicity",
    "obscene",
    "threat",
    "insult",
    "identity_attack",
];

const PREAMBLE: &str = "# dialect-audit score-table";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", .path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: not a score table (missing `{PREAMBLE}` preamble)", .path.display())]
    Preamble { path: PathBuf },
    #[error("{}: unsupported score-table schema version {found} (expected {TABLE_SCHEMA_VERSION})", .path.display())]
    SchemaVersion { path: PathBuf, found: String },
    #[error("{}: header does not match the fixed score-table header", .path.display())]
    Header { path: PathBuf },
    #[error("{}: row {row}: {message}", .path.display())]
    Row { path: PathBuf, row: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub post: Post,
    pub scores: LabelScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub group: DialectGroup,
    /// `backend:config-digest` of the scorer that produced the rows.
    pub scorer: Option<String>,
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn from_scored(group: DialectGroup, scorer: Option<String>, scored: Vec<ScoredPost>) -> ScoreTable {
        ScoreTable {
            group,
            scorer,
            rows: scored.into_iter().map(|s| ScoreRow { post: s.post, scores: s.scores }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn label_scores(&self, label: Label) -> Vec<f64> {
        self.rows.iter().map(|r| *r.scores.get(label)).collect()
    }

    pub fn scores(&self) -> impl Iterator<Item = &LabelScores> {
        self.rows.iter().map(|r| &r.scores)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_score_table(table: &ScoreTable, path: &Path) -> Result<(), TableError> {
    let io_err = |source| TableError::Io { path: path.into(), source };
    let csv_err = |source| TableError::Csv { path: path.into(), source };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    write!(out, "{PREAMBLE} schema={TABLE_SCHEMA_VERSION} group={}", table.group).map_err(io_err)?;
    if let Some(scorer) = &table.scorer {
        write!(out, " scorer={scorer}").map_err(io_err)?;
    }
    writeln!(out).map_err(io_err)?;
    let mut writer = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .from_writer(out);
    writer.write_record(HEADER).map_err(csv_err)?;
    for row in &table.rows {
        let mut record = Vec::with_capacity(9);
        record.push(row.post.text().to_string());
        record.push(format_full(row.post.p_aa()));
        record.push(format_full(row.post.p_white()));
        record.extend(row.scores.to_array().map(format_full));
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(io_err)
}

fn parse_preamble(line: &str, path: &Path) -> Result<(DialectGroup, Option<String>), TableError> {
    let rest = line
        .trim_end()
        .strip_prefix(PREAMBLE)
        .ok_or_else(|| TableError::Preamble { path: path.into() })?;
    let mut schema = None;
    let mut group = None;
    let mut scorer = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("schema", v)) => schema = Some(v.to_string()),
            Some(("group", v)) => group = Some(v.to_string()),
            Some(("scorer", v)) => scorer = Some(v.to_string()),
            _ => {}
        }
    }
    let schema = schema.unwrap_or_default();
    if schema != TABLE_SCHEMA_VERSION.to_string() {
        return Err(TableError::SchemaVersion { path: path.into(), found: schema });
    }
    let group = group
        .unwrap_or_default()
        .parse()
        .map_err(|message| TableError::Row { path: path.into(), row: 0, message })?;
    Ok((group, scorer))
}

pub fn read_score_table(path: &Path) -> Result<ScoreTable, TableError> {
    let io_err = |source| TableError::Io { path: path.into(), source };
    let mut reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(io_err)?;
    let (group, scorer) = parse_preamble(&first, path)?;

    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = csv_reader
        .headers()
        .map_err(|source| TableError::Csv { path: path.into(), source })?;
    if header.iter().ne(HEADER) {
        return Err(TableError::Header { path: path.into() });
    }
    let mut rows = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let row_no = i + 1;
        let row_err = |message: String| TableError::Row { path: path.into(), row: row_no, message };
        let record = record.map_err(|source| TableError::Csv { path: path.into(), source })?;
        if record.len() != HEADER.len() {
            return Err(row_err(format!("expected {} fields, found {}", HEADER.len(), record.len())));
        }
        let num = |i: usize| -> Result<f64, TableError> {
            record[i]
                .parse::<f64>()
                .map_err(|e| row_err(format!("{}: {e}", HEADER[i])))
        };
        let post = Post::new(&record[0], num(1)?, num(2)?).map_err(|e| row_err(e.to_string()))?;
        let mut values = [0.0; 6];
        for (k, slot) in values.iter_mut().enumerate() {
            *slot = num(3 + k)?;
        }
        let scores = LabelScores::from_array(values).map_err(|e| row_err(e.to_string()))?;
        rows.push(ScoreRow { post, scores });
    }
    Ok(ScoreTable { group, scorer, rows })
}
