//! TSV ingestion and the JSON Lines corpus format.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dialect_audit_core::corpus::{IngestCounts, SkipReason};
use dialect_audit_core::{CorpusError, DialectCorpus, DialectGroup, PoolBuilder, Post};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CORPUS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("column {0:?} is referenced by name but the input has no header row")]
    NamedColumnWithoutHeader(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("reading {path}: {source}")]
    Read { path: String, source: csv::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {message}", .path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}: unsupported corpus schema version {found} (expected {CORPUS_SCHEMA_VERSION})", .path.display())]
    SchemaVersion { path: PathBuf, found: u32 },
}

/// A column picked by zero-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    /// All-digit strings are indices; anything else is a header name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "#{i}"),
            ColumnRef::Name(n) => f.write_str(n),
        }
    }
}

/// Which columns of the input hold the text and the two posteriors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub text: ColumnRef,
    pub p_aa: ColumnRef,
    pub p_white: ColumnRef,
    pub has_header: bool,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            text: ColumnRef::Name("text".into()),
            p_aa: ColumnRef::Name("p_aa".into()),
            p_white: ColumnRef::Name("p_white".into()),
            has_header: true,
        }
    }
}

impl ColumnMapping {
    fn resolve(&self, header: Option<&csv::ByteRecord>) -> Result<[usize; 3], IngestError> {
        let names: Option<Vec<String>> = match header {
            Some(h) => Some(
                h.iter()
                    .map(|f| {
                        std::str::from_utf8(f)
                            .map(|s| s.trim().to_string())
                            .map_err(|_| IngestError::MalformedHeader("header is not UTF-8".into()))
                    })
                    .collect::<Result<_, _>>()?,
            ),
            None => None,
        };
        let find = |col: &ColumnRef| -> Result<usize, IngestError> {
            match (col, &names) {
                (ColumnRef::Index(i), Some(n)) if *i >= n.len() => {
                    Err(IngestError::MissingColumn(col.to_string()))
                }
                (ColumnRef::Index(i), _) => Ok(*i),
                (ColumnRef::Name(name), Some(n)) => n
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| IngestError::MissingColumn(name.clone())),
                (ColumnRef::Name(name), None) => {
                    Err(IngestError::NamedColumnWithoutHeader(name.clone()))
                }
            }
        };
        Ok([find(&self.text)?, find(&self.p_aa)?, find(&self.p_white)?])
    }
}

/// Parameters of one ingestion run.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestParams {
    pub group: DialectGroup,
    pub filter_threshold: f64,
    pub sample_size: usize,
    pub seed: u64,
}

/// Reads tab-separated rows, filters them on the group posterior, and
/// draws a seeded sample.
pub fn ingest_corpus<R: Read>(
    source: R,
    source_path: &str,
    mapping: &ColumnMapping,
    params: &IngestParams,
) -> Result<DialectCorpus, IngestError> {
    let mut pool = PoolBuilder::new(params.group, params.filter_threshold)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(source);
    let read_err = |source| IngestError::Read { path: source_path.to_string(), source };

    let mut records = reader.byte_records();
    let header = if mapping.has_header {
        match records.next() {
            Some(h) => Some(h.map_err(read_err)?),
            None => return Err(IngestError::MalformedHeader("input is empty".into())),
        }
    } else {
        None
    };
    let [text_col, p_aa_col, p_white_col] = mapping.resolve(header.as_ref())?;

    for record in records {
        let record = record.map_err(read_err)?;
        if std::str::from_utf8(record.as_slice()).is_err() {
            pool.push_skipped(SkipReason::InvalidUtf8);
            continue;
        }
        let field = |i: usize| record.get(i).map(|b| std::str::from_utf8(b).unwrap_or_default());
        match (field(text_col), field(p_aa_col), field(p_white_col)) {
            (Some(text), Some(p_aa), Some(p_white)) => {
                pool.push_fields(text, p_aa, p_white);
            }
            _ => pool.push_skipped(SkipReason::MissingField),
        }
    }
    let counts = *pool.counts();
    log::info!(
        "{source_path}: {} rows, {} qualifying, {} below threshold, {} skipped",
        counts.total_rows,
        counts.qualifying,
        counts.below_threshold,
        counts.skipped.total()
    );
    let corpus = pool.finish(params.sample_size, params.seed, source_path.to_string())?;
    if let Some(w) = &corpus.warning {
        log::warn!("{w}");
    }
    Ok(corpus)
}

/// Sidecar describing how a JSONL corpus was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub schema_version: u32,
    pub group: DialectGroup,
    pub source_path: String,
    pub filter_threshold: f64,
    pub sample_seed: u64,
    pub sample_size: usize,
    pub post_count: usize,
    pub counts: IngestCounts,
    pub warning: Option<String>,
}

impl CorpusManifest {
    pub fn of(corpus: &DialectCorpus) -> CorpusManifest {
        CorpusManifest {
            schema_version: CORPUS_SCHEMA_VERSION,
            group: corpus.group,
            source_path: corpus.source_path.clone(),
            filter_threshold: corpus.filter_threshold,
            sample_seed: corpus.sample_seed,
            sample_size: corpus.sample_size,
            post_count: corpus.posts.len(),
            counts: corpus.counts,
            warning: corpus.warning.clone(),
        }
    }
}

/// `corpus.jsonl` -> `corpus.manifest.json`.
pub fn manifest_path(corpus_path: &Path) -> PathBuf {
    corpus_path.with_extension("manifest.json")
}

/// Writes one post per line, plus the manifest sidecar.
pub fn write_corpus(corpus: &DialectCorpus, path: &Path) -> Result<(), IngestError> {
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| IngestError::Io { path: p, source }
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for post in &corpus.posts {
        serde_json::to_writer(&mut out, post).map_err(|e| io_err(path)(e.into()))?;
        out.write_all(b"\n").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))?;

    let manifest = manifest_path(path);
    let mut json = serde_json::to_vec_pretty(&CorpusManifest::of(corpus))
        .map_err(|e| io_err(&manifest)(e.into()))?;
    json.push(b'\n');
    std::fs::write(&manifest, json).map_err(io_err(&manifest))
}

pub fn read_posts(path: &Path) -> Result<Vec<Post>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io { path: path.into(), source })?;
    let mut posts = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let post = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            path: path.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        posts.push(post);
    }
    Ok(posts)
}

pub fn read_manifest(corpus_path: &Path) -> Result<CorpusManifest, IngestError> {
    let path = manifest_path(corpus_path);
    let bytes = std::fs::read(&path).map_err(|source| IngestError::Io { path: path.clone(), source })?;
    let value: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| IngestError::Parse { path: path.clone(), line: e.line(), message: e.to_string() })?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != CORPUS_SCHEMA_VERSION {
        return Err(IngestError::SchemaVersion { path, found });
    }
    serde_json::from_value(value)
        .map_err(|e| IngestError::Parse { path, line: 0, message: e.to_string() })
}

/// Loads a corpus written by [`write_corpus`].
pub fn read_corpus(path: &Path) -> Result<DialectCorpus, IngestError> {
    let manifest = read_manifest(path)?;
    let posts = read_posts(path)?;
    Ok(DialectCorpus {
        group: manifest.group,
        posts,
        source_path: manifest.source_path,
        filter_threshold: manifest.filter_threshold,
        sample_seed: manifest.sample_seed,
        sample_size: manifest.sample_size,
        counts: manifest.counts,
        warning: manifest.warning,
    })
}
