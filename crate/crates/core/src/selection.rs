//! Top-cited core selection and citation-coverage arithmetic.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::BibRecord;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus has zero total citations; coverage is undefined")]
    ZeroTotalCitations,
    #[error("selected id `{0}` is not in the corpus")]
    UnknownRecord(String),
    #[error("invalid selection config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Extend the cut to every record tied with the last one inside it.
    #[default]
    IncludeTies,
    /// Cut at exactly `floor(fraction * n)` records.
    TruncateStrict,
}

impl std::str::FromStr for TiePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "include" | "include_ties" => Ok(TiePolicy::IncludeTies),
            "truncate" | "truncate_strict" | "strict" => Ok(TiePolicy::TruncateStrict),
            _ => Err(format!("unknown tie policy `{s}` (expected include or truncate)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub fraction: f64,
    pub min_coverage: f64,
    pub tie_policy: TiePolicy,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            fraction: 0.2,
            min_coverage: 0.6,
            tie_policy: TiePolicy::IncludeTies,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), SelectionError> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(SelectionError::InvalidConfig(format!(
                "fraction must be in (0, 1], got {}",
                self.fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(SelectionError::InvalidConfig(format!(
                "min_coverage must be in [0, 1], got {}",
                self.min_coverage
            )));
        }
        Ok(())
    }

    /// Base cut size `floor(fraction * n)`, at least one record.
    pub fn base_size(&self, n: usize) -> usize {
        // 0.29 * 100 = 28.999...
        let k = (self.fraction * n as f64 + 1e-9).floor() as usize;
        k.clamp(1, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Sorted by times cited descending, then record id ascending.
    pub selected_ids: Vec<String>,
    pub corpus_size: usize,
    pub selected_citations: u64,
    pub total_citations: u64,
    pub coverage: f64,
    pub coverage_met: bool,
    pub config: SelectionConfig,
}

impl SelectionResult {
    /// Share of the corpus selected, in `[0, 1]`.
    pub fn selected_fraction(&self) -> f64 {
        self.selected_ids.len() as f64 / self.corpus_size as f64
    }
}

/// Selects the most-cited fraction of the corpus.
pub fn select_top_cited(corpus: &[BibRecord], cfg: &SelectionConfig) -> Result<SelectionResult, SelectionError> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(SelectionError::EmptyCorpus);
    }
    let mut ranked: Vec<&BibRecord> = corpus.iter().collect();
    ranked.sort_by(|a, b| {
        b.times_cited
            .cmp(&a.times_cited)
            .then_with(|| a.record_id.cmp(&b.record_id))
    });

    let k = cfg.base_size(corpus.len());
    let cut = match cfg.tie_policy {
        TiePolicy::TruncateStrict => k,
        TiePolicy::IncludeTies => {
            let threshold = ranked[k - 1].times_cited;
            k + ranked[k..].iter().take_while(|r| r.times_cited == threshold).count()
        }
    };
    let selected = &ranked[..cut];
    let selected_citations: u64 = selected.iter().map(|r| r.times_cited).sum();
    let total_citations: u64 = corpus.iter().map(|r| r.times_cited).sum();
    let coverage = if total_citations > 0 {
        selected_citations as f64 / total_citations as f64
    } else {
        log::warn!("corpus has zero total citations; coverage reported as 0");
        0.0
    };
    let coverage_met = total_citations > 0 && coverage >= cfg.min_coverage;
    if !coverage_met {
        log::warn!(
            "selected records cover {:.1}% of citations, below the {:.1}% target",
            coverage * 100.0,
            cfg.min_coverage * 100.0
        );
    }
    if cut > k {
        log::info!(
            "tie extension at {} citations added {} records",
            ranked[k - 1].times_cited,
            cut - k
        );
    }

    Ok(SelectionResult {
        selected_ids: selected.iter().map(|r| r.record_id.clone()).collect(),
        corpus_size: corpus.len(),
        selected_citations,
        total_citations,
        coverage,
        coverage_met,
        config: *cfg,
    })
}

/// Fraction of the corpus's citations held by `selected`.
pub fn citation_coverage(selected: &HashSet<String>, corpus: &[BibRecord]) -> Result<f64, SelectionError> {
    let counts: HashMap<&str, u64> = corpus.iter().map(|r| (r.record_id.as_str(), r.times_cited)).collect();
    let mut held = 0u64;
    for id in selected {
        held += counts
            .get(id.as_str())
            .ok_or_else(|| SelectionError::UnknownRecord(id.clone()))?;
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(SelectionError::ZeroTotalCitations);
    }
    Ok(held as f64 / total as f64)
}

/// Returns the records named by a selection, in selection order.
pub fn selected_records(corpus: &[BibRecord], selection: &SelectionResult) -> Vec<BibRecord> {
    let by_id: HashMap<&str, &BibRecord> = corpus.iter().map(|r| (r.record_id.as_str(), r)).collect();
    selection
        .selected_ids
        .iter()
        .filter_map(|id| by_id.get(id.as_str()).map(|r| (*r).clone()))
        .collect()
}
