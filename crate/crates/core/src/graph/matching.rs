//! Exact-key resolution of cited-reference strings to corpus records.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{CitationNetwork, NodeAttrs};
use crate::ingest::{Author, BibRecord, ParsedRef, RefString};
use crate::text::fold_key;

/// Folded journal-name variants mapped to a canonical abbreviation.
#[derive(Debug, Clone, Default)]
pub struct JournalSynonyms {
    map: HashMap<String, String>,
}

impl JournalSynonyms {
    /// Reads `variant<TAB>canonical` lines; `#` starts a comment line.
    pub fn from_tsv(text: &str) -> Result<Self, String> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (variant, canonical) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected `variant<TAB>canonical`", i + 1))?;
            map.insert(fold_key(variant), fold_key(canonical));
        }
        Ok(Self { map })
    }

    pub fn canonical(&self, name: &str) -> String {
        let folded = fold_key(name);
        self.map.get(&folded).cloned().unwrap_or(folded)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Normalized bibliographic key shared by records and reference strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchKey {
    pub first_author_surname: String,
    pub year: i32,
    pub source_abbrev: String,
    pub volume: Option<String>,
    pub start_page: Option<String>,
    pub doi: Option<String>,
}

fn fold_doi(doi: &str) -> Option<String> {
    let d = doi.trim().to_lowercase();
    let d = d
        .strip_prefix("https://doi.org/")
        .or_else(|| d.strip_prefix("http://dx.doi.org/"))
        .unwrap_or(&d)
        .trim()
        .to_string();
    Some(d).filter(|d| !d.is_empty())
}

fn fold_locator(v: &str) -> Option<String> {
    Some(v.trim().to_uppercase()).filter(|v| !v.is_empty())
}

impl MatchKey {
    pub fn from_record(rec: &BibRecord, journals: &JournalSynonyms) -> Option<Self> {
        let surname = fold_key(&rec.first_author()?.surname);
        let source = rec.source_abbrev.as_deref().unwrap_or(&rec.source);
        if surname.is_empty() || source.trim().is_empty() {
            return None;
        }
        Some(Self {
            first_author_surname: surname,
            year: rec.year?,
            source_abbrev: journals.canonical(source),
            volume: rec.volume.as_deref().and_then(fold_locator),
            start_page: rec.start_page.as_deref().and_then(fold_locator),
            doi: rec.doi.as_deref().and_then(fold_doi),
        })
    }

    pub fn from_reference(parsed: &ParsedRef, journals: &JournalSynonyms) -> Self {
        Self {
            first_author_surname: fold_key(&Author::parse(&parsed.first_author).surname),
            year: parsed.year,
            source_abbrev: journals.canonical(&parsed.source_abbrev),
            volume: parsed.volume.as_deref().and_then(fold_locator),
            start_page: parsed.start_page.as_deref().and_then(fold_locator),
            doi: parsed.doi.as_deref().and_then(fold_doi),
        }
    }

    fn base(&self) -> (String, i32, String) {
        (self.first_author_surname.clone(), self.year, self.source_abbrev.clone())
    }

    /// Locators that both sides carry must agree.
    fn compatible(&self, other: &MatchKey) -> bool {
        fn agree(a: &Option<String>, b: &Option<String>) -> bool {
            match (a, b) {
                (Some(x), Some(y)) => x == y,
                _ => true,
            }
        }
        agree(&self.doi, &other.doi) && agree(&self.volume, &other.volume) && agree(&self.start_page, &other.start_page)
    }
}

/// Lookup structure over the records references may resolve to.
#[derive(Debug, Clone, Default)]
pub struct ReferenceIndex {
    journals: JournalSynonyms,
    by_doi: HashMap<String, Vec<String>>,
    by_base: HashMap<(String, i32, String), Vec<(String, MatchKey)>>,
}

impl ReferenceIndex {
    pub fn build(records: &[BibRecord], journals: JournalSynonyms) -> Self {
        let mut index = ReferenceIndex {
            journals,
            ..Default::default()
        };
        for rec in records {
            if let Some(doi) = rec.doi.as_deref().and_then(fold_doi) {
                index.by_doi.entry(doi).or_default().push(rec.record_id.clone());
            }
            if let Some(key) = MatchKey::from_record(rec, &index.journals) {
                index
                    .by_base
                    .entry(key.base())
                    .or_default()
                    .push((rec.record_id.clone(), key));
            }
        }
        index
    }

    pub fn journals(&self) -> &JournalSynonyms {
        &self.journals
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchOutcome {
    Matched(String),
    NoMatch,
    /// Several records fit the reference; none is chosen.
    Ambiguous(Vec<String>),
}

impl MatchOutcome {
    pub fn matched(&self) -> Option<&str> {
        match self {
            MatchOutcome::Matched(id) => Some(id),
            _ => None,
        }
    }
}

/// Resolves one reference. A DOI shared by both sides decides; otherwise
/// surname, year and source must be equal, along with volume and start page
/// wherever both sides carry them.
pub fn match_reference(reference: &RefString, index: &ReferenceIndex) -> MatchOutcome {
    let Some(parsed) = reference.parsed() else {
        return MatchOutcome::NoMatch;
    };
    let key = MatchKey::from_reference(parsed, &index.journals);
    if let Some(hits) = key.doi.as_ref().and_then(|d| index.by_doi.get(d)) {
        return decide(hits.clone());
    }
    let candidates: Vec<String> = index
        .by_base
        .get(&key.base())
        .into_iter()
        .flatten()
        .filter(|(_, k)| k.compatible(&key))
        .map(|(id, _)| id.clone())
        .collect();
    decide(candidates)
}

fn decide(mut ids: Vec<String>) -> MatchOutcome {
    match ids.len() {
        0 => MatchOutcome::NoMatch,
        1 => MatchOutcome::Matched(ids.remove(0)),
        _ => {
            ids.sort();
            MatchOutcome::Ambiguous(ids)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ambiguity {
    pub citing: String,
    pub reference: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub references: usize,
    pub matched: usize,
    pub self_citations: usize,
    pub duplicate_edges: usize,
    pub unmatched: usize,
    pub ambiguities: Vec<Ambiguity>,
}

fn node_label(rec: &BibRecord) -> String {
    let author = rec.first_author().map(|a| a.surname.as_str()).unwrap_or("Anonymous");
    match rec.year {
        Some(y) => format!("{author} {y}"),
        None => author.to_string(),
    }
}

/// Builds the citation network among `selected`. References outside the set
/// only increment the citing node's `external_refs`.
pub fn build_network(selected: &[BibRecord], journals: JournalSynonyms) -> (CitationNetwork, BuildReport) {
    let index = ReferenceIndex::build(selected, journals);
    let mut net = CitationNetwork::new();
    let mut report = BuildReport::default();
    let mut external: BTreeMap<&str, usize> = BTreeMap::new();

    for rec in selected {
        net.add_node(
            rec.record_id.clone(),
            NodeAttrs {
                year: rec.year,
                label: node_label(rec),
                has_address: rec.has_address(),
                ..Default::default()
            },
        );
    }
    for rec in selected {
        for reference in &rec.cited_refs {
            report.references += 1;
            match match_reference(reference, &index) {
                MatchOutcome::Matched(id) if id == rec.record_id => report.self_citations += 1,
                MatchOutcome::Matched(id) => {
                    report.matched += 1;
                    if !net.add_edge(&rec.record_id, &id).expect("both endpoints are selected") {
                        report.duplicate_edges += 1;
                    }
                }
                MatchOutcome::NoMatch => {
                    report.unmatched += 1;
                    *external.entry(&rec.record_id).or_default() += 1;
                }
                MatchOutcome::Ambiguous(candidates) => {
                    log::warn!(
                        "{}: ambiguous reference `{}` fits {}",
                        rec.record_id,
                        reference.raw(),
                        candidates.join(", ")
                    );
                    *external.entry(&rec.record_id).or_default() += 1;
                    report.ambiguities.push(Ambiguity {
                        citing: rec.record_id.clone(),
                        reference: reference.raw().to_string(),
                        candidates,
                    });
                }
            }
        }
    }
    for (id, count) in external {
        if let Some(attrs) = net.attrs_mut(id) {
            attrs.external_refs = count;
        }
    }
    (net, report)
}
