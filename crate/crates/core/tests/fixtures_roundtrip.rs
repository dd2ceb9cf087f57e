use std::collections::BTreeSet;
use std::path::PathBuf;

use transmap_core::data;
use transmap_core::graph::build_network;
use transmap_core::ingest::{parse_corpus_json, parse_wos_export, serialize_corpus};
use transmap_core::report::institution_leaderboard;

fn fixture(rel: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const WOS_FILES: [&str; 5] = ["01_single", "02_continuations", "03_crlf_bom", "04_latin1", "05_sparse"];

#[test]
fn wos_exports_match_golden_json() {
    for name in WOS_FILES {
        let records = parse_wos_export(&fixture(&format!("wos/{name}.txt"))).unwrap_or_else(|e| panic!("{name}: {e}"));
        let golden = fixture(&format!("wos/{name}.json"));
        let emitted = serialize_corpus(&records);
        assert_eq!(
            String::from_utf8_lossy(&emitted),
            String::from_utf8_lossy(&golden),
            "{name}"
        );
    }
}

#[test]
fn golden_json_reemits_identically() {
    for name in WOS_FILES {
        let golden = fixture(&format!("wos/{name}.json"));
        let records = parse_corpus_json(&golden).unwrap();
        assert_eq!(serialize_corpus(&records), golden, "{name}");
    }
}

#[test]
fn latin1_line_is_decoded() {
    let records = parse_wos_export(&fixture("wos/04_latin1.txt")).unwrap();
    assert_eq!(records[0].affiliations[0].institution, "Université Paris 05");
    assert_eq!(records[0].authors[0].surname, "Müller");
}

fn expected_edges() -> BTreeSet<(String, String)> {
    let bytes = fixture("matching/expected_edges.csv");
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string())
        })
        .collect()
}

#[test]
fn matching_fixture_yields_planted_edges() {
    let corpus = parse_corpus_json(&fixture("matching/corpus.json")).unwrap();
    assert_eq!(corpus.len(), 20);
    assert_eq!(corpus.iter().map(|r| r.cited_refs.len()).sum::<usize>(), 60);
    let (net, report) = build_network(&corpus, data::journal_synonyms());
    let got: BTreeSet<(String, String)> = net.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let want = expected_edges();
    assert_eq!(want.len(), 38);
    let false_edges: Vec<_> = got.difference(&want).collect();
    let missed: Vec<_> = want.difference(&got).collect();
    assert!(false_edges.is_empty(), "false edges: {false_edges:?}");
    assert!(missed.is_empty(), "missed edges: {missed:?}");
    assert!(
        got.contains(&("M08".to_string(), "M01".to_string())),
        "Ranson-style key"
    );

    let want_amb: serde_json::Value = serde_json::from_slice(&fixture("matching/expected_ambiguities.json")).unwrap();
    let mut got_amb = serde_json::to_value(&report.ambiguities).unwrap();
    got_amb.as_array_mut().unwrap().sort_by_key(|a| {
        (
            a["citing"].as_str().unwrap().to_string(),
            a["reference"].as_str().unwrap().to_string(),
        )
    });
    assert_eq!(got_amb, want_amb);
    assert_eq!(report.self_citations, 1);
}

#[test]
fn institution_fixture_reproduces_counts_and_tie() {
    let corpus = parse_corpus_json(&fixture("institutions/corpus.json")).unwrap();
    let board = institution_leaderboard(&corpus, &data::institution_synonyms());
    let want: Vec<serde_json::Value> = serde_json::from_slice(&fixture("institutions/expected.json")).unwrap();
    let got: Vec<(String, usize)> = board.rows.iter().map(|r| (r.name.clone(), r.paper_count)).collect();
    let want: Vec<(String, usize)> = want
        .iter()
        .map(|v| {
            (
                v["name"].as_str().unwrap().to_string(),
                v["paper_count"].as_u64().unwrap() as usize,
            )
        })
        .collect();
    assert_eq!(got, want);
    assert_eq!(
        got[0],
        ("The University of Texas MD Anderson Cancer Center".to_string(), 15)
    );
    assert_eq!(got[1], ("Georgia Institute of Technology".to_string(), 7));
    assert_eq!(got[2], ("Rice University".to_string(), 7));
    assert_eq!(board.rows[0].location, "Houston, USA");
}
