use serde::Deserialize;
use thiserror::Error;

use super::record::{BibRecord, DocType};
use crate::text::{tokenize, tokenize_pattern};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("query has no title or topic patterns")]
    NoPatterns,
    #[error("pattern `{0}` is empty")]
    EmptyPattern(String),
    #[error("pattern `{0}`: `*` may only appear at the end of a word")]
    BadWildcard(String),
    #[error("year range {0}..{1} is empty")]
    InvalidYearRange(i32, i32),
    #[error("cannot parse query file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PatternToken {
    stem: String,
    wildcard: bool,
}

impl PatternToken {
    fn matches(&self, token: &str) -> bool {
        if self.wildcard {
            token.starts_with(&self.stem)
        } else {
            token == self.stem
        }
    }
}

/// A single- or multi-word search term with optional trailing wildcards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    text: String,
    tokens: Vec<PatternToken>,
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Self, QueryError> {
        let unquoted = text.trim().trim_matches(|c| matches!(c, '"' | '\u{201c}' | '\u{201d}'));
        let mut tokens = Vec::new();
        for tok in tokenize_pattern(unquoted) {
            let stem = tok.strip_suffix('*');
            if stem.is_some_and(str::is_empty) || stem.unwrap_or(&tok).contains('*') {
                return Err(QueryError::BadWildcard(text.to_string()));
            }
            tokens.push(PatternToken {
                stem: stem.unwrap_or(&tok).to_string(),
                wildcard: stem.is_some(),
            });
        }
        if tokens.is_empty() {
            return Err(QueryError::EmptyPattern(text.to_string()));
        }
        Ok(Self {
            text: text.to_string(),
            tokens,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// True if the pattern matches a run of consecutive tokens.
    pub fn matches_tokens(&self, tokens: &[String]) -> bool {
        tokens
            .windows(self.tokens.len())
            .any(|w| w.iter().zip(&self.tokens).all(|(t, p)| p.matches(t)))
    }
}

/// Field-level record filter: title terms AND topic terms AND constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub title_patterns: Vec<Pattern>,
    pub topic_patterns: Vec<Pattern>,
    pub doc_type: Option<DocType>,
    pub year_range: Option<(i32, i32)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryFile {
    #[serde(default)]
    title: Vec<String>,
    #[serde(default)]
    topic: Vec<String>,
    doc_type: Option<String>,
    year_range: Option<(i32, i32)>,
}

impl Query {
    pub fn new(
        title_patterns: Vec<Pattern>,
        topic_patterns: Vec<Pattern>,
        doc_type: Option<DocType>,
        year_range: Option<(i32, i32)>,
    ) -> Result<Self, QueryError> {
        if title_patterns.is_empty() && topic_patterns.is_empty() {
            return Err(QueryError::NoPatterns);
        }
        if let Some((lo, hi)) = year_range {
            if lo > hi {
                return Err(QueryError::InvalidYearRange(lo, hi));
            }
        }
        Ok(Self {
            title_patterns,
            topic_patterns,
            doc_type,
            year_range,
        })
    }

    /// Builds a query from string patterns.
    pub fn from_patterns<S: AsRef<str>>(title: &[S], topic: &[S]) -> Result<Self, QueryError> {
        let parse = |ps: &[S]| {
            ps.iter()
                .map(|p| Pattern::parse(p.as_ref()))
                .collect::<Result<Vec<_>, _>>()
        };
        Self::new(parse(title)?, parse(topic)?, None, None)
    }

    /// Reads the TOML query file:
    ///
    /// ```toml
    /// title = ["cancer*", "carcinoma*"]
    /// topic = ["liposome*"]
    /// doc_type = "Article"
    /// year_range = [1900, 2013]
    /// ```
    pub fn from_toml(text: &str) -> Result<Self, QueryError> {
        let file: QueryFile = toml::from_str(text).map_err(|e| QueryError::Parse(e.to_string()))?;
        let doc_type = file
            .doc_type
            .map(|d| d.parse::<DocType>())
            .transpose()
            .map_err(QueryError::Parse)?;
        let mut q = Self::from_patterns(&file.title, &file.topic)?;
        q = Self::new(q.title_patterns, q.topic_patterns, doc_type, file.year_range)?;
        Ok(q)
    }

    pub fn matches(&self, record: &BibRecord) -> bool {
        if let Some(dt) = self.doc_type {
            if record.doc_type != dt {
                return false;
            }
        }
        if let Some((lo, hi)) = self.year_range {
            match record.year {
                Some(y) if (lo..=hi).contains(&y) => {}
                _ => return false,
            }
        }
        let title_tokens = tokenize(&record.title);
        if !self.title_patterns.is_empty() && !self.title_patterns.iter().any(|p| p.matches_tokens(&title_tokens)) {
            return false;
        }
        if self.topic_patterns.is_empty() {
            return true;
        }
        let mut fields = vec![title_tokens];
        if let Some(abs) = &record.abstract_text {
            fields.push(tokenize(abs));
        }
        fields.extend(record.keywords.iter().map(|k| tokenize(k)));
        self.topic_patterns
            .iter()
            .any(|p| fields.iter().any(|f| p.matches_tokens(f)))
    }
}

/// Keeps the records matching `query`, in input order.
pub fn apply_query_filter(records: &[BibRecord], query: &Query) -> Vec<BibRecord> {
    records.iter().filter(|r| query.matches(r)).cloned().collect()
}
