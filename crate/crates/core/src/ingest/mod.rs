//! Corpus ingestion: tagged export and JSON readers, affiliation
//! normalization and the wildcard query filter.

mod affiliation;
mod json;
mod query;
mod record;
mod wos;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

pub use affiliation::normalize_affiliation;
pub use json::{parse_corpus_json, serialize_corpus};
pub use query::{apply_query_filter, Pattern, Query, QueryError};
pub use record::{Affiliation, Author, BibRecord, DocType, ParsedRef, RefString};
pub use wos::parse_wos_export;

/// Where in an input an error was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    /// 1-based line number.
    Line(usize),
    /// 0-based index into a JSON record array.
    Record(usize),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Line(n) => write!(f, "line {n}"),
            Position::Record(i) => write!(f, "record #{i}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{at}: expected `{expected}` header line")]
    MissingHeader { at: Position, expected: &'static str },
    #[error("{at}: file ends without an `EF` terminator")]
    MissingFileTerminator { at: Position },
    #[error("{at}: malformed record: {reason}")]
    MalformedRecord { at: Position, reason: String },
    #[error("{at}: duplicate record id `{id}`")]
    DuplicateRecordId { id: String, at: Position },
    #[error("{at}: schema violation: {detail}")]
    SchemaViolation { at: Position, detail: String },
}

impl IngestError {
    pub fn position(&self) -> Position {
        match self {
            IngestError::MissingHeader { at, .. }
            | IngestError::MissingFileTerminator { at }
            | IngestError::MalformedRecord { at, .. }
            | IngestError::DuplicateRecordId { at, .. }
            | IngestError::SchemaViolation { at, .. } => *at,
        }
    }
}

/// Input format accepted by the ingest stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Wos,
    Json,
}

impl std::str::FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wos" => Ok(InputFormat::Wos),
            "json" => Ok(InputFormat::Json),
            _ => Err(format!("unknown input format `{s}` (expected wos or json)")),
        }
    }
}

pub fn parse_corpus(format: InputFormat, input: &[u8]) -> Result<Vec<BibRecord>, IngestError> {
    match format {
        InputFormat::Wos => parse_wos_export(input),
        InputFormat::Json => parse_corpus_json(input),
    }
}

/// Concatenates several parsed files, rejecting ids repeated across them.
/// The returned error's position is the record index in the merged corpus.
pub fn merge_corpora(parts: Vec<Vec<BibRecord>>) -> Result<Vec<BibRecord>, IngestError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in parts.into_iter().flatten() {
        if !seen.insert(record.record_id.clone()) {
            return Err(IngestError::DuplicateRecordId {
                at: Position::Record(out.len()),
                id: record.record_id,
            });
        }
        out.push(record);
    }
    Ok(out)
}
