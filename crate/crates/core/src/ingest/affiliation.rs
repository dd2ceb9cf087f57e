use super::record::Affiliation;

/// Splits one `C1` address line into affiliations.
///
/// Bracketed author lists are removed, segments are separated by `;` and
/// fields by `,`. The first field is the institution and the last the
/// country; a trailing `USA` token marks a US address whose state and ZIP
/// occupy the last field. The city is the last middle field carrying a postal
/// code, else the last middle field that is not a bare region code.
pub fn normalize_affiliation(raw: &str) -> Vec<Affiliation> {
    strip_brackets(raw)
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_segment)
        .collect()
}

fn strip_brackets(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut depth = 0usize;
    for c in raw.chars() {
        match c {
            '[' => depth += 1,
            ']' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

fn parse_segment(segment: &str) -> Affiliation {
    let segment = segment.trim_end_matches('.').trim_end();
    let fields: Vec<&str> = segment.split(',').map(str::trim).filter(|f| !f.is_empty()).collect();
    let unparsed = || Affiliation {
        institution: segment.to_string(),
        city: String::new(),
        country: String::new(),
    };
    if fields.len() < 2 || segment.trim_start().starts_with(',') {
        return unparsed();
    }
    let institution = fields[0].to_string();
    let last = fields[fields.len() - 1];
    let middle = &fields[1..fields.len() - 1];

    let country = if last.split_whitespace().last() == Some("USA") {
        "USA".to_string()
    } else {
        strip_postal(last)
    };
    if country.is_empty() {
        return unparsed();
    }
    let candidates = || {
        middle
            .iter()
            .rev()
            .map(|f| (has_postal(f), strip_postal(f)))
            .filter(|(_, f)| !f.is_empty() && !is_region_code(f))
    };
    let city = candidates()
        .find(|(postal, _)| *postal)
        .or_else(|| candidates().next())
        .map(|(_, f)| f)
        .unwrap_or_default();

    Affiliation {
        institution,
        city,
        country,
    }
}

fn strip_postal(field: &str) -> String {
    field
        .split_whitespace()
        .filter(|tok| !tok.chars().any(|c| c.is_ascii_digit()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn has_postal(field: &str) -> bool {
    field.chars().any(|c| c.is_ascii_digit())
}

fn is_region_code(field: &str) -> bool {
    let len = field.chars().count();
    (2..=3).contains(&len) && field.chars().all(|c| c.is_ascii_uppercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aff(institution: &str, city: &str, country: &str) -> Affiliation {
        Affiliation {
            institution: institution.into(),
            city: city.into(),
            country: country.into(),
        }
    }

    #[test]
    fn us_address_with_zip() {
        assert_eq!(
            normalize_affiliation("Univ Texas MD Anderson Canc Ctr, Houston, TX 77030 USA"),
            vec![aff("Univ Texas MD Anderson Canc Ctr", "Houston", "USA")]
        );
    }

    #[test]
    fn empty_line() {
        assert!(normalize_affiliation("").is_empty());
        assert!(normalize_affiliation(" ; ;").is_empty());
    }

    #[test]
    fn two_segments_with_region_code() {
        let got = normalize_affiliation("Univ Alberta, Edmonton, AB, Canada; Nagoya Univ, Nagoya, Japan");
        assert_eq!(
            got,
            vec![
                aff("Univ Alberta", "Edmonton", "Canada"),
                aff("Nagoya Univ", "Nagoya", "Japan")
            ]
        );
    }

    #[test]
    fn bracketed_authors_are_dropped() {
        let got = normalize_affiliation(
            "[Ranson, M; Smith, J] Christie Hosp NHS Trust, Dept Med Oncol, Manchester M20 4BX, Lancs, England",
        );
        assert_eq!(got, vec![aff("Christie Hosp NHS Trust", "Manchester", "England")]);
        let got = normalize_affiliation("[Lee, K] Nagoya Univ, Grad Sch Med, Nagoya, Aichi 4668550, Japan");
        assert_eq!(got[0].city, "Aichi");
    }

    #[test]
    fn trailing_period_dropped() {
        assert_eq!(
            normalize_affiliation("Univ Toronto, Fac Pharm, Toronto, ON M5S 3M2, Canada."),
            vec![aff("Univ Toronto", "Toronto", "Canada")]
        );
    }

    #[test]
    fn unparseable_segment_kept_raw() {
        assert_eq!(normalize_affiliation("Roswell Park"), vec![aff("Roswell Park", "", "")]);
    }
}
