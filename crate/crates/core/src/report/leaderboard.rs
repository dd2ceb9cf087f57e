use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::ingest::BibRecord;
use crate::text::fold_key;

/// Maps normalized institution spellings to a canonical display name.
#[derive(Debug, Clone, Default)]
pub struct InstitutionSynonyms {
    map: HashMap<String, String>,
}

impl InstitutionSynonyms {
    /// Reads `variant<TAB>canonical name` lines; `#` starts a comment.
    pub fn from_tsv(text: &str) -> Result<Self, String> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (variant, canonical) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected `variant<TAB>canonical`", i + 1))?;
            let canonical = canonical.trim();
            map.insert(fold_key(variant), canonical.to_string());
            map.insert(fold_key(canonical), canonical.to_string());
        }
        Ok(Self { map })
    }

    fn canonical(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderRow {
    pub name: String,
    pub location: String,
    pub paper_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Leaderboard {
    pub rows: Vec<LeaderRow>,
}

impl Leaderboard {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rank", "institution", "location", "papers"])
            .expect("in-memory write");
        for (i, row) in self.rows.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                row.name.clone(),
                row.location.clone(),
                row.paper_count.to_string(),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

fn modal<T: Ord + Clone>(counts: &BTreeMap<T, usize>) -> Option<T> {
    // BTreeMap order makes the smallest value win ties.
    let best = counts.values().max()?;
    counts.iter().find(|(_, c)| *c == best).map(|(v, _)| v.clone())
}

#[derive(Default)]
struct Tally {
    papers: usize,
    spellings: BTreeMap<String, usize>,
    places: BTreeMap<(String, String), usize>,
}

/// Distinct papers per normalized institution, most papers first, ties by
/// name. Each institution is credited at most once per paper.
pub fn institution_leaderboard(records: &[BibRecord], synonyms: &InstitutionSynonyms) -> Leaderboard {
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for rec in records {
        let mut credited = BTreeSet::new();
        for aff in &rec.affiliations {
            let key = fold_key(&aff.institution);
            if key.is_empty() {
                continue;
            }
            let key = match synonyms.canonical(&key) {
                Some(canonical) => fold_key(canonical),
                None => key,
            };
            let tally = tallies.entry(key.clone()).or_default();
            *tally.spellings.entry(aff.institution.trim().to_string()).or_insert(0) += 1;
            *tally.places.entry((aff.city.clone(), aff.country.clone())).or_insert(0) += 1;
            if credited.insert(key) {
                tally.papers += 1;
            }
        }
    }
    let mut rows: Vec<LeaderRow> = tallies
        .into_iter()
        .map(|(key, t)| {
            let name = synonyms
                .canonical(&key)
                .map(String::from)
                .or_else(|| modal(&t.spellings))
                .unwrap_or(key);
            let location = modal(&t.places)
                .map(|(city, country)| match (city.is_empty(), country.is_empty()) {
                    (false, false) => format!("{city}, {country}"),
                    (true, _) => country,
                    (false, true) => city,
                })
                .unwrap_or_default();
            LeaderRow {
                name,
                location,
                paper_count: t.papers,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.paper_count.cmp(&a.paper_count).then_with(|| a.name.cmp(&b.name)));
    Leaderboard { rows }
}

/// Distinct papers per country, most first, ties by name.
pub fn country_distribution(records: &[BibRecord]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for rec in records {
        let countries: BTreeSet<&str> = rec
            .affiliations
            .iter()
            .map(|a| a.country.trim())
            .filter(|c| !c.is_empty())
            .collect();
        for c in countries {
            *counts.entry(c.to_string()).or_insert(0) += 1;
        }
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn countries_to_csv(rows: &[(String, usize)]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "country", "papers"]).expect("in-memory write");
    for (i, (country, n)) in rows.iter().enumerate() {
        w.write_record([(i + 1).to_string(), country.clone(), n.to_string()])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
