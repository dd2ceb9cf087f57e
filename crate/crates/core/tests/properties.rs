use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transmap_core::annotate::{annotate_document, clinical_ratio, CountMode};
use transmap_core::cluster::{modularity, Partition};
use transmap_core::data;
use transmap_core::ingest::{
    apply_query_filter, parse_corpus_json, parse_wos_export, serialize_corpus, Affiliation, Author, DocType, Position,
    Query, RefString,
};
use transmap_core::report::{color_for_ratio, export_graph, institution_leaderboard, score_annotations, GraphFormat};
use transmap_core::{Annotation, BibRecord, CitationNetwork, NodeAttrs};

fn text() -> impl Strategy<Value = String> {
    "[A-Za-z0-9 ,.;:'\"\\-éüñ&<>/]{0,24}"
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "cancer",
        "tumor",
        "tumour",
        "liposome",
        "liposomal",
        "drug",
        "delivery",
        "trial",
        "patients",
        "mice",
        "phase",
        "doxorubicin",
        "the",
        "of",
        "in",
        "carcinoma",
        "nanoparticle",
    ])
    .prop_map(str::to_string)
}

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 0..10).prop_map(|w| w.join(" "))
}

fn record() -> impl Strategy<Value = BibRecord> {
    (
        (
            "[A-Z0-9]{4,10}",
            sentence(),
            prop::option::of(sentence()),
            prop::collection::vec(("[A-Za-z]{1,10}", "[A-Z]{0,3}"), 0..4),
            text(),
            prop::option::of("[A-Z ]{1,12}"),
            prop::sample::select(vec![DocType::Article, DocType::Review, DocType::Other]),
        ),
        (
            prop::option::of(1900i32..=2100),
            prop::option::of("[0-9]{1,3}"),
            prop::option::of("[0-9]{1,4}"),
            prop::option::of("10\\.[0-9]{4}/[a-z0-9.]{1,8}"),
            prop::collection::vec(text(), 0..3),
            prop::collection::vec("[A-Z]{2,8} [A-Z]{1,2}, (19|20)[0-9]{2}, [A-Z ]{2,12}", 0..4),
            0u64..10_000,
            prop::collection::vec((text(), text(), text()), 0..3),
        ),
    )
        .prop_map(
            |(
                (id, title, abs, authors, source, abbrev, doc_type),
                (year, volume, page, doi, keywords, refs, tc, affs),
            )| {
                let mut r = BibRecord::new(format!("WOS:{id}"), title);
                r.abstract_text = abs;
                r.authors = authors
                    .into_iter()
                    .map(|(surname, initials)| Author { surname, initials })
                    .collect();
                r.source = source;
                r.source_abbrev = abbrev;
                r.doc_type = doc_type;
                r.year = year;
                r.volume = volume;
                r.start_page = page;
                r.doi = doi;
                r.keywords = keywords;
                r.cited_refs = refs.into_iter().filter_map(RefString::new).collect();
                r.times_cited = tc;
                r.affiliations = affs
                    .into_iter()
                    .map(|(institution, city, country)| Affiliation {
                        institution,
                        city,
                        country,
                    })
                    .collect();
                r
            },
        )
}

fn corpus() -> impl Strategy<Value = Vec<BibRecord>> {
    prop::collection::vec(record(), 0..12).prop_map(|mut rs| {
        let mut seen = BTreeSet::new();
        rs.retain(|r| seen.insert(r.record_id.clone()));
        rs
    })
}

fn patterns() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec![
            "cancer*",
            "tumo*",
            "liposom*",
            "drug",
            "carcinoma*",
            "trial*",
            "nano*",
        ]),
        1..3,
    )
    .prop_map(|v| v.into_iter().map(str::to_string).collect())
}

proptest! {
    #[test]
    fn corpus_json_round_trips(records in corpus()) {
        let bytes = serialize_corpus(&records);
        let back = parse_corpus_json(&bytes).unwrap();
        prop_assert_eq!(&back, &records);
        prop_assert_eq!(serialize_corpus(&back), bytes);
    }

    #[test]
    fn query_filter_idempotent(records in corpus(), title in patterns(), topic in patterns()) {
        let q = Query::from_patterns(&title, &topic).unwrap();
        let once = apply_query_filter(&records, &q);
        prop_assert_eq!(apply_query_filter(&once, &q), once.clone());
        prop_assert!(once.iter().all(|r| records.contains(r)));
    }

    #[test]
    fn more_patterns_never_shrink_the_result(
        records in corpus(), title in patterns(), topic in patterns(), extra in patterns(), to_title: bool,
    ) {
        let q = Query::from_patterns(&title, &topic).unwrap();
        let (mut t2, mut p2) = (title.clone(), topic.clone());
        if to_title { t2.extend(extra) } else { p2.extend(extra) }
        let wider = Query::from_patterns(&t2, &p2).unwrap();
        let narrow: BTreeSet<String> = apply_query_filter(&records, &q).into_iter().map(|r| r.record_id).collect();
        let broad: BTreeSet<String> = apply_query_filter(&records, &wider).into_iter().map(|r| r.record_id).collect();
        prop_assert!(narrow.is_subset(&broad));
    }

    #[test]
    fn color_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (c_lo, c_hi) = (color_for_ratio(Some(lo)).unwrap(), color_for_ratio(Some(hi)).unwrap());
        prop_assert!(c_lo.0 >= c_hi.0);
        prop_assert!(c_lo.2 <= c_hi.2);
        prop_assert_eq!(c_lo.1, 0);
        prop_assert!((c_lo.0 as u16 + c_lo.2 as u16).abs_diff(255) <= 1);
    }

    #[test]
    fn color_rejects_out_of_range(r in prop_oneof![-10.0f64..-1e-9, 1.0000001f64..10.0]) {
        prop_assert!(color_for_ratio(Some(r)).is_err());
    }

    #[test]
    fn leaderboard_ignores_record_order(records in corpus(), seed: u64) {
        let syn = data::institution_synonyms();
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = institution_leaderboard(&records, &syn);
        let b = institution_leaderboard(&shuffled, &syn);
        let counts = |l: &transmap_core::Leaderboard| l.rows.iter().map(|r| (r.name.clone(), r.paper_count)).collect::<Vec<_>>();
        prop_assert_eq!(counts(&a), counts(&b));
        prop_assert!(a.rows.windows(2).all(|w| w[0].paper_count >= w[1].paper_count));
        for row in &a.rows {
            prop_assert!(row.paper_count <= records.len());
        }
    }

    #[test]
    fn clinical_ratio_bounded(title in sentence(), abs in prop::option::of(sentence()), occ: bool) {
        let vocab = data::vocabulary();
        let mut rec = BibRecord::new("R1", title);
        rec.abstract_text = abs;
        let mode = if occ { CountMode::Occurrences } else { CountMode::Unique };
        let ann = annotate_document(&rec, &vocab, mode);
        match clinical_ratio(&ann) {
            Some(r) => prop_assert!((0.0..=1.0).contains(&r)),
            None => prop_assert!(ann.is_empty()),
        }
        let unique = annotate_document(&rec, &vocab, CountMode::Unique);
        prop_assert_eq!(unique.clinical_count + unique.nonclinical_count, unique.matched.len());
    }

    #[test]
    fn modularity_ignores_cluster_labels(seed: u64, n in 3usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_net(&mut rng, n);
        let labels: Vec<u32> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let mut perm: Vec<u32> = (0..4).collect();
        perm.shuffle(&mut rng);
        let ids: Vec<String> = net.node_ids().map(str::to_string).collect();
        let p1 = Partition::from_labels(ids.iter().map(String::as_str).zip(labels.iter().copied()));
        let p2 = Partition::from_labels(ids.iter().map(String::as_str).zip(labels.iter().map(|&l| perm[l as usize] + 10)));
        prop_assert_eq!(&p1.assignment, &p2.assignment);
        let q1 = modularity(&net, &p1).unwrap();
        prop_assert!((q1 - modularity(&net, &p2).unwrap()).abs() < 1e-12);
        prop_assert!((-0.5..=1.0).contains(&q1));
    }

    #[test]
    fn json_export_reimports(seed: u64, n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_net(&mut rng, n);
        let anns: Vec<Annotation> = net
            .node_ids()
            .map(|id| {
                let mut a = Annotation::empty(id);
                a.clinical_count = rng.gen_range(0..4);
                a.nonclinical_count = rng.gen_range(0..4);
                a
            })
            .collect();
        let scores = score_annotations(&anns);
        let bytes = export_graph(&net, &scores, None, None, GraphFormat::Json).unwrap();
        let back = CitationNetwork::from_json(&bytes).unwrap();
        prop_assert_eq!(back.node_ids().collect::<Vec<_>>(), net.node_ids().collect::<Vec<_>>());
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), net.edges().collect::<Vec<_>>());
        for s in &scores {
            prop_assert_eq!(back.attrs(&s.record_id).unwrap().clinical_ratio, s.ratio);
        }
        prop_assert_eq!(export_graph(&net, &scores, None, None, GraphFormat::Json).unwrap(), bytes);
    }
}

fn random_net(rng: &mut ChaCha8Rng, n: usize) -> CitationNetwork {
    let mut net = CitationNetwork::new();
    for i in 0..n {
        net.add_node(
            format!("N{i:03}"),
            NodeAttrs {
                year: Some(2000 + i as i32),
                ..Default::default()
            },
        );
    }
    for a in 1..n {
        net.add_edge(&format!("N{a:03}"), &format!("N{:03}", rng.gen_range(0..a)))
            .unwrap();
        if rng.gen_bool(0.3) {
            net.add_edge(&format!("N{a:03}"), &format!("N{:03}", rng.gen_range(0..a)))
                .unwrap();
        }
    }
    net
}

/// Byte-level mutations of real exports never panic, and every failure names
/// a line inside the input.
#[test]
fn wos_parser_survives_mutation() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/wos");
    let seeds: Vec<Vec<u8>> = ["01_single", "02_continuations", "03_crlf_bom", "04_latin1", "05_sparse"]
        .iter()
        .map(|n| std::fs::read(dir.join(format!("{n}.txt"))).unwrap())
        .collect();
    let alphabet = b"\n\r \tERFNVPTUAIY0123456789\xff\xef\xbb\xbf";
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut ok, mut failed) = (0, 0);
    for _ in 0..10_000 {
        let mut bytes = seeds.choose(&mut rng).unwrap().clone();
        for _ in 0..rng.gen_range(1..6) {
            let at = rng.gen_range(0..=bytes.len());
            match rng.gen_range(0..4) {
                0 if at < bytes.len() => {
                    bytes.remove(at);
                }
                1 => bytes.insert(at, *alphabet.choose(&mut rng).unwrap()),
                2 if at < bytes.len() => bytes[at] = rng.gen(),
                _ => bytes.truncate(at),
            }
        }
        let lines = bytes.split(|&b| b == b'\n').count();
        match parse_wos_export(&bytes) {
            Ok(_) => ok += 1,
            Err(e) => {
                failed += 1;
                match e.position() {
                    Position::Line(l) => assert!(l >= 1 && l <= lines + 1, "{e} with {lines} lines"),
                    Position::Record(_) => panic!("wos errors carry line positions: {e}"),
                }
            }
        }
    }
    assert!(ok > 0 && failed > 0, "{ok} parsed, {failed} rejected");
}
