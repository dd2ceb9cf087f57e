use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One bibliographic record as exported by the citation index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BibRecord {
    /// Accession number (`UT` tag); unique within a corpus.
    pub record_id: String,
    pub title: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default)]
    pub authors: Vec<Author>,
    #[serde(default)]
    pub source: String,
    /// Abbreviated source title (`J9`), used for reference matching.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_abbrev: Option<String>,
    #[serde(default)]
    pub doc_type: DocType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_page: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub cited_refs: Vec<RefString>,
    #[serde(default)]
    pub times_cited: u64,
    #[serde(default)]
    pub affiliations: Vec<Affiliation>,
}

impl BibRecord {
    pub fn new(record_id: impl Into<String>, title: impl Into<String>) -> Self {
        Self {
            record_id: record_id.into(),
            title: title.into(),
            abstract_text: None,
            authors: Vec::new(),
            source: String::new(),
            source_abbrev: None,
            doc_type: DocType::Article,
            year: None,
            volume: None,
            start_page: None,
            doi: None,
            keywords: Vec::new(),
            cited_refs: Vec::new(),
            times_cited: 0,
            affiliations: Vec::new(),
        }
    }

    /// Records that reported no address are kept but flagged by this.
    pub fn has_address(&self) -> bool {
        !self.affiliations.is_empty()
    }

    pub fn first_author(&self) -> Option<&Author> {
        self.authors.first()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub surname: String,
    #[serde(default)]
    pub initials: String,
}

impl Author {
    /// Parses `"Ranson, MR"` or `"RANSON MR"`.
    pub fn parse(raw: &str) -> Self {
        let raw = raw.trim();
        if let Some((surname, initials)) = raw.split_once(',') {
            return Self {
                surname: surname.trim().to_string(),
                initials: initials.trim().to_string(),
            };
        }
        match raw.rsplit_once(' ') {
            Some((surname, initials)) if looks_like_initials(initials) => Self {
                surname: surname.trim().to_string(),
                initials: initials.to_string(),
            },
            _ => Self {
                surname: raw.to_string(),
                initials: String::new(),
            },
        }
    }
}

fn looks_like_initials(s: &str) -> bool {
    !s.is_empty() && s.chars().count() <= 4 && s.chars().all(|c| c.is_uppercase() || c == '.' || c == '-')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum DocType {
    Article,
    Review,
    #[default]
    Other,
}

impl DocType {
    /// Maps a `DT` value. Only the first `;`-separated type counts.
    pub fn from_wos(value: &str) -> Self {
        let first = value.split(';').next().unwrap_or("").trim();
        if first.eq_ignore_ascii_case("article") {
            DocType::Article
        } else if first.eq_ignore_ascii_case("review") {
            DocType::Review
        } else {
            DocType::Other
        }
    }
}

impl std::str::FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "article" => Ok(DocType::Article),
            "review" => Ok(DocType::Review),
            "other" => Ok(DocType::Other),
            _ => Err(format!("unknown document type `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Affiliation {
    pub institution: String,
    #[serde(default)]
    pub city: String,
    #[serde(default)]
    pub country: String,
}

/// A cited-reference string. Only `raw` is stored; the parsed view is
/// recomputed from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefString {
    raw: String,
    parsed: Option<ParsedRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedRef {
    pub first_author: String,
    pub year: i32,
    pub source_abbrev: String,
    pub volume: Option<String>,
    pub start_page: Option<String>,
    pub doi: Option<String>,
}

impl RefString {
    /// Returns `None` for a blank string.
    pub fn new(raw: impl Into<String>) -> Option<Self> {
        let raw = raw.into().trim().to_string();
        if raw.is_empty() {
            return None;
        }
        let parsed = parse_reference(&raw);
        Some(Self { raw, parsed })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn parsed(&self) -> Option<&ParsedRef> {
        self.parsed.as_ref()
    }
}

impl fmt::Display for RefString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl Serialize for RefString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for RefString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        RefString::new(raw).ok_or_else(|| serde::de::Error::custom("empty cited reference"))
    }
}

/// Parses `AUTHOR, YEAR, SOURCE[, Vnn][, Pnn][, DOI x]`.
fn parse_reference(raw: &str) -> Option<ParsedRef> {
    let mut fields = raw.split(',').map(str::trim);
    let first_author = fields.next()?.to_string();
    let year: i32 = fields.next()?.parse().ok()?;
    let source_abbrev = fields.next()?.to_string();
    if first_author.is_empty() || source_abbrev.is_empty() {
        return None;
    }
    let mut parsed = ParsedRef {
        first_author,
        year,
        source_abbrev,
        volume: None,
        start_page: None,
        doi: None,
    };
    for field in fields {
        if let Some(doi) = field.strip_prefix("DOI ").or_else(|| field.strip_prefix("doi ")) {
            parsed.doi = Some(doi.trim().trim_start_matches("DOI ").to_string());
        } else if let Some(v) = field.strip_prefix('V').filter(|v| !v.is_empty()) {
            parsed.volume = Some(v.to_string());
        } else if let Some(p) = field.strip_prefix('P').filter(|p| !p.is_empty()) {
            parsed.start_page = Some(p.to_string());
        }
    }
    Some(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_reference() {
        let r = RefString::new("RANSON MR, 1997, J CLIN ONCOL, V15, P3185, DOI 10.1200/JCO.1997.15.10.3185").unwrap();
        let p = r.parsed().unwrap();
        assert_eq!(p.first_author, "RANSON MR");
        assert_eq!(p.year, 1997);
        assert_eq!(p.source_abbrev, "J CLIN ONCOL");
        assert_eq!(p.volume.as_deref(), Some("15"));
        assert_eq!(p.start_page.as_deref(), Some("3185"));
        assert_eq!(p.doi.as_deref(), Some("10.1200/JCO.1997.15.10.3185"));
    }

    #[test]
    fn unparseable_reference_keeps_raw() {
        let r = RefString::new("Some unpublished note").unwrap();
        assert!(r.parsed().is_none());
        assert_eq!(r.raw(), "Some unpublished note");
        assert!(RefString::new("   ").is_none());
    }

    #[test]
    fn author_forms() {
        assert_eq!(Author::parse("Ranson, MR").surname, "Ranson");
        let a = Author::parse("VAN DER BERG JH");
        assert_eq!((a.surname.as_str(), a.initials.as_str()), ("VAN DER BERG", "JH"));
        assert_eq!(Author::parse("Consortium").initials, "");
    }

    #[test]
    fn doc_type_mapping() {
        assert_eq!(DocType::from_wos("Article; Proceedings Paper"), DocType::Article);
        assert_eq!(DocType::from_wos("Review"), DocType::Review);
        assert_eq!(DocType::from_wos("Letter"), DocType::Other);
    }
}
