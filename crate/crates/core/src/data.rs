//! Bundled default vocabulary and lookup tables.

use crate::annotate::{load_vocabulary, ClinicalPrefixes, VocabularyIndex};
use crate::graph::JournalSynonyms;
use crate::report::InstitutionSynonyms;

pub const VOCAB_TSV: &str = include_str!("../data/vocab.tsv");
pub const CLINICAL_PREFIXES: &str = include_str!("../data/clinical.txt");
pub const JOURNAL_SYNONYMS_TSV: &str = include_str!("../data/journal_synonyms.tsv");
pub const INSTITUTION_SYNONYMS_TSV: &str = include_str!("../data/institution_synonyms.tsv");

pub fn clinical_prefixes() -> ClinicalPrefixes {
    ClinicalPrefixes::parse(CLINICAL_PREFIXES).expect("bundled prefixes parse")
}

pub fn vocabulary() -> VocabularyIndex {
    load_vocabulary(VOCAB_TSV.as_bytes(), clinical_prefixes()).expect("bundled vocabulary parses")
}

pub fn journal_synonyms() -> JournalSynonyms {
    JournalSynonyms::from_tsv(JOURNAL_SYNONYMS_TSV).expect("bundled journal table parses")
}

pub fn institution_synonyms() -> InstitutionSynonyms {
    InstitutionSynonyms::from_tsv(INSTITUTION_SYNONYMS_TSV).expect("bundled institution table parses")
}
