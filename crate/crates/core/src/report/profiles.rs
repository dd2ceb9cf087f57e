use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::annotate::{clinical_ratio, Annotation, VocabularyIndex};
use crate::cluster::Partition;

/// Share of clusters above which a term counts as common to all documents.
pub const UBIQUITY_SHARE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_id: u32,
    pub size: usize,
    /// `(term_id, documents matching it)`, by count descending then id.
    pub term_freqs: Vec<(String, usize)>,
    /// Label of the best-ranked term not common to most clusters; empty when
    /// there is none.
    pub top_label: String,
    pub mean_ratio: Option<f64>,
}

/// Document frequencies of matched terms per cluster.
pub fn cluster_profiles(
    partition: &Partition,
    annotations: &[Annotation],
    vocab: Option<&VocabularyIndex>,
) -> Result<Vec<ClusterProfile>, ReportError> {
    let by_id: HashMap<&str, &Annotation> = annotations.iter().map(|a| (a.record_id.as_str(), a)).collect();
    let clusters = partition.clusters();

    let mut profiles = Vec::with_capacity(clusters.len());
    for (&cluster_id, members) in &clusters {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        let mut ratios = Vec::new();
        for id in members {
            let a = by_id
                .get(id)
                .ok_or_else(|| ReportError::IdMismatch(format!("no annotation for `{id}`")))?;
            for term in &a.matched {
                *freq.entry(term).or_insert(0) += 1;
            }
            ratios.extend(clinical_ratio(a));
        }
        let mut term_freqs: Vec<(String, usize)> = freq.into_iter().map(|(t, c)| (t.to_string(), c)).collect();
        term_freqs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mean_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
        profiles.push(ClusterProfile {
            cluster_id,
            size: members.len(),
            term_freqs,
            top_label: String::new(),
            mean_ratio,
        });
    }

    let k = profiles.len();
    let mut spread: HashMap<&str, usize> = HashMap::new();
    for p in &profiles {
        for (t, _) in &p.term_freqs {
            *spread.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    // Single cluster: nothing excluded.
    let is_common = |t: &str| k >= 2 && spread[t] as f64 >= UBIQUITY_SHARE * k as f64;
    let labels: Vec<String> = profiles
        .iter()
        .map(|p| {
            p.term_freqs
                .iter()
                .find(|(t, _)| !is_common(t))
                .map(|(t, _)| {
                    vocab
                        .and_then(|v| v.term(t))
                        .map(|term| term.preferred_label.clone())
                        .unwrap_or_else(|| t.clone())
                })
                .unwrap_or_default()
        })
        .collect();
    for (p, label) in profiles.iter_mut().zip(labels) {
        p.top_label = label;
    }
    Ok(profiles)
}

/// Reporting bands for mean cluster ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBands {
    pub basic_below: f64,
    pub clinical_above: f64,
}

impl Default for RatioBands {
    fn default() -> Self {
        Self {
            basic_below: 0.33,
            clinical_above: 0.66,
        }
    }
}

impl RatioBands {
    pub fn band(&self, ratio: Option<f64>) -> &'static str {
        match ratio {
            None => "unscored",
            Some(r) if r < self.basic_below => "basic",
            Some(r) if r > self.clinical_above => "clinical",
            Some(_) => "mixed",
        }
    }
}
