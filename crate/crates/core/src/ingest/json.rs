use std::collections::HashSet;

use serde_json::Value;

use super::record::BibRecord;
use super::{IngestError, Position};

/// Parses the corpus interchange format: a JSON array of record objects.
pub fn parse_corpus_json(input: &[u8]) -> Result<Vec<BibRecord>, IngestError> {
    let value: Value = serde_json::from_slice(input).map_err(|e| IngestError::SchemaViolation {
        at: Position::Line(e.line().max(1)),
        detail: e.to_string(),
    })?;
    let Value::Array(items) = value else {
        return Err(IngestError::SchemaViolation {
            at: Position::Line(1),
            detail: "top-level value must be an array of records".into(),
        });
    };

    let mut records = Vec::with_capacity(items.len());
    let mut seen = HashSet::new();
    for (index, item) in items.into_iter().enumerate() {
        let violation = |detail: String| IngestError::SchemaViolation {
            at: Position::Record(index),
            detail,
        };
        let Value::Object(ref obj) = item else {
            return Err(violation("record must be an object".into()));
        };
        for required in ["record_id", "title"] {
            match obj.get(required) {
                Some(Value::String(_)) => {}
                Some(_) => return Err(violation(format!("field `{required}` must be a string"))),
                None => return Err(violation(format!("missing field `{required}`"))),
            }
        }
        let record: BibRecord = serde_json::from_value(item).map_err(|e| violation(e.to_string()))?;
        if record.record_id.is_empty() {
            return Err(violation("field `record_id` must not be empty".into()));
        }
        if let Some(year) = record.year.filter(|y| !(1900..=2100).contains(y)) {
            return Err(violation(format!("field `year` out of range: {year}")));
        }
        if !seen.insert(record.record_id.clone()) {
            return Err(IngestError::DuplicateRecordId {
                id: record.record_id,
                at: Position::Record(index),
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Serializes a corpus to the interchange format (pretty-printed, trailing
/// newline). Output is a pure function of the records.
pub fn serialize_corpus(records: &[BibRecord]) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(records).expect("records always serialize");
    out.push(b'\n');
    out
}
