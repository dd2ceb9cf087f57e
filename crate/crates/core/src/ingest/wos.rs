//! Reader for the field-tagged plain-text export format.
//!
//! ```text
//! FN Clarivate Analytics Web of Science
//! VR 1.0
//! PT J
//! AU Ranson, MR
//! TI Treatment of advanced breast cancer with
//!    pegylated liposomal doxorubicin
//! ER
//!
//! EF
//! ```

use std::collections::HashSet;

use super::affiliation::normalize_affiliation;
use super::record::{Author, BibRecord, DocType, RefString};
use super::{IngestError, Position};

/// Decodes one line as UTF-8, falling back to Latin-1 when it is not valid.
fn decode_line(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_string(),
        Err(_) => bytes.iter().map(|&b| b as char).collect(),
    }
}

fn split_lines(input: &[u8]) -> Vec<String> {
    let input = input.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(input);
    if input.is_empty() {
        return Vec::new();
    }
    let body = input.strip_suffix(b"\n").unwrap_or(input);
    body.split(|&b| b == b'\n')
        .map(|line| decode_line(line.strip_suffix(b"\r").unwrap_or(line)))
        .collect()
}

struct Field {
    tag: String,
    line: usize,
    values: Vec<String>,
}

struct Pending {
    fields: Vec<Field>,
}

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedRecord {
        at: Position::Line(line),
        reason: reason.into(),
    }
}

/// Parses a tagged export into records, preserving file order.
pub fn parse_wos_export(input: &[u8]) -> Result<Vec<BibRecord>, IngestError> {
    let lines = split_lines(input);
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut pending: Option<Pending> = None;
    let mut header = HeaderState::ExpectFn;
    let mut terminated = false;

    for (idx, line) in lines.iter().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if terminated {
            return Err(malformed(lineno, "content after EF"));
        }
        if header != HeaderState::Done {
            header = header.advance(line, lineno)?;
            continue;
        }

        if let Some(cont) = line.strip_prefix("   ") {
            let field = pending
                .as_mut()
                .and_then(|p| p.fields.last_mut())
                .ok_or_else(|| malformed(lineno, "continuation line outside a field"))?;
            field.values.push(cont.trim().to_string());
            continue;
        }

        let (tag, value) = split_tag(line, lineno)?;
        match tag {
            "ER" => {
                let record = pending
                    .take()
                    .filter(|p| !p.fields.is_empty())
                    .ok_or_else(|| malformed(lineno, "ER without any preceding tags"))?;
                let record = build_record(record, lineno)?;
                if !seen.insert(record.record_id.clone()) {
                    return Err(IngestError::DuplicateRecordId {
                        id: record.record_id,
                        at: Position::Line(lineno),
                    });
                }
                records.push(record);
            }
            "EF" => {
                if pending.is_some() {
                    return Err(malformed(lineno, "record not terminated by ER"));
                }
                terminated = true;
            }
            // Concatenated exports repeat the header between files.
            "FN" | "VR" if pending.is_none() => {}
            _ => {
                let p = pending.get_or_insert_with(|| Pending { fields: Vec::new() });
                p.fields.push(Field {
                    tag: tag.to_string(),
                    line: lineno,
                    values: vec![value.to_string()],
                });
            }
        }
    }

    if !terminated {
        return Err(IngestError::MissingFileTerminator {
            at: Position::Line(lines.len().max(1)),
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HeaderState {
    ExpectFn,
    ExpectVr,
    Done,
}

impl HeaderState {
    fn advance(self, line: &str, lineno: usize) -> Result<Self, IngestError> {
        let expected = match self {
            HeaderState::ExpectFn => "FN",
            HeaderState::ExpectVr => "VR",
            HeaderState::Done => return Ok(self),
        };
        let ok = line.starts_with(expected) && line[expected.len()..].chars().next().is_none_or(|c| c == ' ');
        if !ok {
            return Err(IngestError::MissingHeader {
                at: Position::Line(lineno),
                expected,
            });
        }
        Ok(match self {
            HeaderState::ExpectFn => HeaderState::ExpectVr,
            _ => HeaderState::Done,
        })
    }
}

fn split_tag(line: &str, lineno: usize) -> Result<(&str, &str), IngestError> {
    let mut chars = line.char_indices();
    let (Some((_, a)), Some((_, b))) = (chars.next(), chars.next()) else {
        return Err(malformed(lineno, "tag line shorter than 2 characters"));
    };
    let is_tag_char = |c: char| c.is_ascii_uppercase() || c.is_ascii_digit();
    if !is_tag_char(a) || !is_tag_char(b) {
        return Err(malformed(lineno, format!("invalid field tag in `{}`", truncate(line))));
    }
    let rest = &line[2..];
    if !rest.is_empty() && !rest.starts_with(' ') {
        return Err(malformed(
            lineno,
            format!("field tag not followed by a space in `{}`", truncate(line)),
        ));
    }
    Ok((&line[..2], rest.trim()))
}

fn truncate(line: &str) -> String {
    line.chars().take(24).collect()
}

fn build_record(pending: Pending, er_line: usize) -> Result<BibRecord, IngestError> {
    let mut record = BibRecord::new(String::new(), String::new());
    record.doc_type = DocType::Other;
    let mut record_id = None;
    let joined = |f: &Field| f.values.join(" ").trim().to_string();
    let non_empty = |s: String| Some(s).filter(|s| !s.is_empty());

    for field in &pending.fields {
        match field.tag.as_str() {
            "UT" => record_id = non_empty(joined(field)),
            "TI" => record.title = joined(field),
            "AB" => record.abstract_text = non_empty(joined(field)),
            "SO" => record.source = joined(field),
            "J9" => record.source_abbrev = non_empty(joined(field)),
            "DT" => record.doc_type = DocType::from_wos(&joined(field)),
            "VL" => record.volume = non_empty(joined(field)),
            "BP" => record.start_page = non_empty(joined(field)),
            "DI" => record.doi = non_empty(joined(field)),
            "AU" => record
                .authors
                .extend(field.values.iter().filter(|v| !v.is_empty()).map(|v| Author::parse(v))),
            "CR" => record.cited_refs.extend(field.values.iter().filter_map(RefString::new)),
            "C1" => record
                .affiliations
                .extend(field.values.iter().flat_map(|v| normalize_affiliation(v))),
            "DE" | "ID" => record.keywords.extend(
                joined(field)
                    .split(';')
                    .map(str::trim)
                    .filter(|k| !k.is_empty())
                    .map(String::from),
            ),
            "PY" => {
                let text = joined(field);
                let year: i32 = text
                    .parse()
                    .map_err(|_| malformed(field.line, format!("PY is not a year: `{text}`")))?;
                if !(1900..=2100).contains(&year) {
                    return Err(malformed(field.line, format!("PY out of range: {year}")));
                }
                record.year = Some(year);
            }
            "TC" => {
                let text = joined(field);
                record.times_cited = text
                    .parse()
                    .map_err(|_| malformed(field.line, format!("TC is not a count: `{text}`")))?;
            }
            _ => {}
        }
    }
    record.record_id = record_id.ok_or_else(|| malformed(er_line, "record has no UT accession number"))?;
    Ok(record)
}
