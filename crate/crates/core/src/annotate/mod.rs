//! Controlled-vocabulary tagging and the clinical-terms ratio.

mod vocab;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::BibRecord;
use crate::text::tokenize;

pub use vocab::{classify_term, load_vocabulary, ClinicalPrefixes, TermClass, VocabSource, VocabTerm, VocabularyIndex};

#[derive(Debug, Error, PartialEq)]
pub enum AnnotateError {
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("cannot parse annotations JSON: {0}")]
    Parse(String),
}

/// How matched terms feed the clinical/nonclinical counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Each distinct term counts once per document.
    #[default]
    Unique,
    /// Every occurrence counts.
    Occurrences,
}

impl std::str::FromStr for CountMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unique" => Ok(CountMode::Unique),
            "occurrences" => Ok(CountMode::Occurrences),
            _ => Err(format!("unknown count mode `{s}` (expected unique or occurrences)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub record_id: String,
    pub matched: BTreeSet<String>,
    pub clinical_count: usize,
    pub nonclinical_count: usize,
}

impl Annotation {
    pub fn empty(record_id: impl Into<String>) -> Self {
        Self {
            record_id: record_id.into(),
            matched: BTreeSet::new(),
            clinical_count: 0,
            nonclinical_count: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.clinical_count + self.nonclinical_count == 0
    }
}

/// Greedy longest non-overlapping match over a token sequence, returning the
/// matched term ids in text order.
fn match_tokens<'v>(tokens: &[String], vocab: &'v VocabularyIndex, out: &mut Vec<&'v str>) {
    let longest = vocab.max_surface_tokens();
    let mut i = 0;
    while i < tokens.len() {
        let max_len = longest.min(tokens.len() - i);
        let hit = (1..=max_len)
            .rev()
            .find_map(|len| vocab.lookup(&tokens[i..i + len]).map(|id| (id, len)));
        match hit {
            Some((id, len)) => {
                out.push(id);
                i += len;
            }
            None => i += 1,
        }
    }
}

/// Tags a record's title then abstract. Matches never span the two fields.
pub fn annotate_document(rec: &BibRecord, vocab: &VocabularyIndex, mode: CountMode) -> Annotation {
    let mut hits = Vec::new();
    match_tokens(&tokenize(&rec.title), vocab, &mut hits);
    if let Some(abs) = &rec.abstract_text {
        match_tokens(&tokenize(abs), vocab, &mut hits);
    }
    let matched: BTreeSet<String> = hits.iter().map(|s| s.to_string()).collect();
    let counted: Vec<&str> = match mode {
        CountMode::Unique => matched.iter().map(String::as_str).collect(),
        CountMode::Occurrences => hits,
    };
    let clinical_count = counted
        .iter()
        .filter(|id| vocab.classify(id) == TermClass::Clinical)
        .count();
    Annotation {
        record_id: rec.record_id.clone(),
        nonclinical_count: counted.len() - clinical_count,
        clinical_count,
        matched,
    }
}

pub fn annotate_corpus(records: &[BibRecord], vocab: &VocabularyIndex, mode: CountMode) -> Vec<Annotation> {
    records.iter().map(|r| annotate_document(r, vocab, mode)).collect()
}

/// `clinical / (clinical + nonclinical)`, absent for an empty annotation.
pub fn clinical_ratio(a: &Annotation) -> Option<f64> {
    let total = a.clinical_count + a.nonclinical_count;
    (total > 0).then(|| a.clinical_count as f64 / total as f64)
}

#[derive(Serialize, Deserialize)]
struct AnnotationBody {
    matched: BTreeSet<String>,
    clinical_count: usize,
    nonclinical_count: usize,
}

/// Serializes annotations as a JSON object keyed by record id.
pub fn annotations_to_json(annotations: &[Annotation]) -> Vec<u8> {
    let map: BTreeMap<&str, AnnotationBody> = annotations
        .iter()
        .map(|a| {
            (
                a.record_id.as_str(),
                AnnotationBody {
                    matched: a.matched.clone(),
                    clinical_count: a.clinical_count,
                    nonclinical_count: a.nonclinical_count,
                },
            )
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&map).expect("annotations serialize");
    out.push(b'\n');
    out
}

pub fn annotations_from_json(bytes: &[u8]) -> Result<Vec<Annotation>, AnnotateError> {
    let map: BTreeMap<String, AnnotationBody> =
        serde_json::from_slice(bytes).map_err(|e| AnnotateError::Parse(e.to_string()))?;
    Ok(map
        .into_iter()
        .map(|(record_id, b)| Annotation {
            record_id,
            matched: b.matched,
            clinical_count: b.clinical_count,
            nonclinical_count: b.nonclinical_count,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const VOCAB: &str = "\
D004317\tMESH\tDoxorubicin\tD02.455.326.146.250\tadriamycin
D008081\tMESH\tLiposomes\tD25.651;D27.720.470\tliposome;liposomal
D001943\tMESH\tBreast Neoplasms\tC04.588.180;C17.800.090.500\tbreast cancer;breast tumor
D004358\tMESH\tDrug Therapy\tE02.319\tchemotherapy
D009369\tMESH\tNeoplasms\tC04\tcancer;tumor
GO:0006915\tGO\tapoptotic process\t\tapoptosis
";

    fn vocab() -> VocabularyIndex {
        let prefixes = ClinicalPrefixes::parse("E01\nE02\nE04\nM01\nN\n").unwrap();
        load_vocabulary(VOCAB.as_bytes(), prefixes).unwrap()
    }

    fn rec(title: &str, abs: Option<&str>) -> BibRecord {
        let mut r = BibRecord::new("r1", title);
        r.abstract_text = abs.map(String::from);
        r
    }

    #[test]
    fn four_terms_with_longest_match() {
        let a = annotate_document(
            &rec("Liposomal doxorubicin in breast cancer chemotherapy", None),
            &vocab(),
            CountMode::Unique,
        );
        let ids: Vec<&str> = a.matched.iter().map(String::as_str).collect();
        assert_eq!(ids, vec!["D001943", "D004317", "D004358", "D008081"]);
        assert_eq!((a.clinical_count, a.nonclinical_count), (1, 3));
        assert_eq!(clinical_ratio(&a), Some(0.25));
    }

    #[test]
    fn empty_text_gives_empty_annotation() {
        let a = annotate_document(&rec("", None), &vocab(), CountMode::Unique);
        assert!(a.is_empty());
        assert_eq!(clinical_ratio(&a), None);
    }

    #[test]
    fn repeated_term_counted_once_unless_occurrences() {
        let abs = "Chemotherapy. chemotherapy, CHEMOTHERAPY; chemotherapy and chemotherapy with apoptosis";
        let a = annotate_document(&rec("x", Some(abs)), &vocab(), CountMode::Unique);
        assert_eq!((a.clinical_count, a.nonclinical_count), (1, 1));
        let o = annotate_document(&rec("x", Some(abs)), &vocab(), CountMode::Occurrences);
        assert_eq!((o.clinical_count, o.nonclinical_count), (5, 1));
        assert_eq!(o.matched, a.matched);
    }

    #[test]
    fn matches_do_not_cross_title_and_abstract() {
        let a = annotate_document(&rec("Breast", Some("cancer")), &vocab(), CountMode::Unique);
        let ids: Vec<&str> = a.matched.iter().map(String::as_str).collect();
        assert_eq!(ids, vec!["D009369"]);
    }

    #[test]
    fn ratio_arithmetic() {
        let mut a = Annotation::empty("x");
        a.clinical_count = 3;
        a.nonclinical_count = 1;
        assert_eq!(clinical_ratio(&a), Some(0.75));
        a.nonclinical_count = 0;
        assert_eq!(clinical_ratio(&a), Some(1.0));
    }

    #[test]
    fn json_keyed_by_record() {
        let a = annotate_document(&rec("Liposomal doxorubicin", None), &vocab(), CountMode::Unique);
        let bytes = annotations_to_json(std::slice::from_ref(&a));
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("\"r1\""));
        assert_eq!(annotations_from_json(&bytes).unwrap(), vec![a]);
    }
}
