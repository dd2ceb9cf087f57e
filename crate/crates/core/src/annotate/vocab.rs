use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::AnnotateError;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VocabSource {
    #[serde(rename = "MESH")]
    Mesh,
    #[serde(rename = "GO")]
    Go,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabTerm {
    pub term_id: String,
    pub preferred_label: String,
    pub synonyms: Vec<String>,
    pub source: VocabSource,
    /// Hierarchy positions such as `E02.319.310`; empty for GO terms.
    pub tree_numbers: Vec<String>,
}

impl VocabTerm {
    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.preferred_label.as_str()).chain(self.synonyms.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermClass {
    Clinical,
    NonClinical,
}

/// Tree-number prefixes whose subtrees count as clinical.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClinicalPrefixes {
    entries: Vec<(String, String)>,
}

impl ClinicalPrefixes {
    /// Reads one prefix per line, optionally followed by whitespace and a
    /// category name. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, AnnotateError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (prefix, name) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            if !prefix.chars().all(|c| c.is_ascii_alphanumeric() || c == '.') {
                return Err(AnnotateError::MalformedRow {
                    line: i + 1,
                    reason: format!("invalid tree-number prefix `{prefix}`"),
                });
            }
            entries.push((prefix.to_string(), name.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn prefixes(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(p, _)| p.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Matches on tree-number segment boundaries: `E02` covers `E02` and
    /// `E02.319` but not `E020`; a bare category letter covers its whole
    /// category.
    pub fn covers(&self, tree_number: &str) -> bool {
        self.prefixes().any(|p| {
            let Some(rest) = tree_number.strip_prefix(p) else {
                return false;
            };
            let category_letter = p.len() == 1 && p.chars().all(|c| c.is_ascii_alphabetic());
            rest.is_empty() || rest.starts_with('.') || category_letter
        })
    }
}

/// Clinical iff a tree number falls under a clinical prefix. GO terms are
/// never clinical.
pub fn classify_term(term: &VocabTerm, prefixes: &ClinicalPrefixes) -> TermClass {
    if term.source == VocabSource::Mesh && term.tree_numbers.iter().any(|t| prefixes.covers(t)) {
        TermClass::Clinical
    } else {
        TermClass::NonClinical
    }
}

/// Loaded vocabulary with its folded surface-form lookup.
#[derive(Debug, Clone, Default)]
pub struct VocabularyIndex {
    terms: BTreeMap<String, VocabTerm>,
    /// Folded token sequence (space-joined) -> candidate term ids in
    /// preference order (MESH before GO, then term id).
    surface_index: HashMap<String, Vec<String>>,
    max_surface_tokens: usize,
    clinical_prefixes: ClinicalPrefixes,
}

impl VocabularyIndex {
    pub fn from_terms(terms: impl IntoIterator<Item = VocabTerm>, prefixes: ClinicalPrefixes) -> Self {
        let mut index = VocabularyIndex {
            clinical_prefixes: prefixes,
            ..Default::default()
        };
        for term in terms {
            index.terms.insert(term.term_id.clone(), term);
        }
        for term in index.terms.values() {
            for surface in term.surfaces() {
                let tokens = tokenize(surface);
                if tokens.is_empty() {
                    continue;
                }
                index.max_surface_tokens = index.max_surface_tokens.max(tokens.len());
                let ids = index.surface_index.entry(tokens.join(" ")).or_default();
                if !ids.contains(&term.term_id) {
                    ids.push(term.term_id.clone());
                }
            }
        }
        let terms = &index.terms;
        for ids in index.surface_index.values_mut() {
            ids.sort_by(|a, b| (terms[a].source, a).cmp(&(terms[b].source, b)));
        }
        index
    }

    pub fn with_prefixes(mut self, prefixes: ClinicalPrefixes) -> Self {
        self.clinical_prefixes = prefixes;
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: &str) -> Option<&VocabTerm> {
        self.terms.get(id)
    }

    pub fn terms(&self) -> impl Iterator<Item = &VocabTerm> {
        self.terms.values()
    }

    pub fn clinical_prefixes(&self) -> &ClinicalPrefixes {
        &self.clinical_prefixes
    }

    pub fn classify(&self, term_id: &str) -> TermClass {
        self.terms
            .get(term_id)
            .map(|t| classify_term(t, &self.clinical_prefixes))
            .unwrap_or(TermClass::NonClinical)
    }

    pub(crate) fn max_surface_tokens(&self) -> usize {
        self.max_surface_tokens
    }

    /// Preferred term for an exact folded token sequence.
    pub(crate) fn lookup(&self, tokens: &[String]) -> Option<&str> {
        self.surface_index
            .get(&tokens.join(" "))
            .and_then(|ids| ids.first())
            .map(String::as_str)
    }

    pub fn surface_count(&self) -> usize {
        self.surface_index.len()
    }
}

fn split_list(cell: Option<&str>) -> Vec<String> {
    cell.unwrap_or("")
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Reads the vocabulary TSV: `term_id, source, preferred_label,
/// tree_numbers, synonyms`, the last two `;`-separated. A first row starting
/// with `term_id` is a header; `#` lines are comments.
pub fn load_vocabulary(input: &[u8], prefixes: ClinicalPrefixes) -> Result<VocabularyIndex, AnnotateError> {
    let text = std::str::from_utf8(input).map_err(|e| AnnotateError::MalformedRow {
        line: input[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
        reason: "invalid UTF-8".into(),
    })?;
    let mut terms: BTreeMap<String, VocabTerm> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let bad = |reason: String| AnnotateError::MalformedRow { line: lineno, reason };
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("term_id")) {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() < 3 || cells.len() > 5 {
            return Err(bad(format!(
                "expected 3 to 5 tab-separated columns, found {}",
                cells.len()
            )));
        }
        let term_id = cells[0].trim();
        let label = cells[2].trim();
        if term_id.is_empty() || label.is_empty() {
            return Err(bad("empty term_id or preferred_label".into()));
        }
        let source = match cells[1].trim() {
            "MESH" | "MeSH" | "mesh" => VocabSource::Mesh,
            "GO" | "go" => VocabSource::Go,
            other => return Err(bad(format!("unknown source `{other}`"))),
        };
        let tree_numbers = split_list(cells.get(3).copied());
        match source {
            VocabSource::Mesh if tree_numbers.is_empty() => {
                return Err(bad(format!("MESH term `{term_id}` has no tree number")))
            }
            VocabSource::Go if !tree_numbers.is_empty() => {
                return Err(bad(format!("GO term `{term_id}` carries a tree number")))
            }
            _ => {}
        }
        if terms.contains_key(term_id) {
            return Err(bad(format!("duplicate term_id `{term_id}`")));
        }
        terms.insert(
            term_id.to_string(),
            VocabTerm {
                term_id: term_id.to_string(),
                preferred_label: label.to_string(),
                synonyms: split_list(cells.get(4).copied()),
                source,
                tree_numbers,
            },
        );
    }
    Ok(VocabularyIndex::from_terms(terms.into_values(), prefixes))
}
