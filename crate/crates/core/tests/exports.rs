use std::collections::{BTreeMap, BTreeSet};

use quick_xml::events::Event;
use quick_xml::{Reader, XmlVersion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transmap_core::cluster::{detect_subnets, Partition};
use transmap_core::graph::hierarchical_layering;
use transmap_core::report::{
    color_for_ratio, export_graph, shape_for_cluster, ClinicalScore, GraphFormat, ReportError,
};
use transmap_core::{Annotation, CitationNetwork, NodeAttrs};

fn one_node() -> (CitationNetwork, Vec<ClinicalScore>) {
    let mut net = CitationNetwork::new();
    net.add_node(
        "WOS:1",
        NodeAttrs {
            year: Some(2001),
            label: "Ranson 2001".into(),
            has_address: true,
            ..Default::default()
        },
    );
    let scores = vec![ClinicalScore {
        record_id: "WOS:1".into(),
        ratio: Some(0.25),
        color: color_for_ratio(Some(0.25)).unwrap(),
    }];
    (net, scores)
}

#[test]
fn minimal_graphml_document() {
    let (net, scores) = one_node();
    let out = String::from_utf8(export_graph(&net, &scores, None, None, GraphFormat::GraphMl).unwrap()).unwrap();
    let expected = r#"<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">
  <key id="label" for="node" attr.name="label" attr.type="string"/>
  <key id="year" for="node" attr.name="year" attr.type="int"/>
  <key id="layer" for="node" attr.name="layer" attr.type="int"/>
  <key id="cluster_id" for="node" attr.name="cluster_id" attr.type="int"/>
  <key id="shape" for="node" attr.name="shape" attr.type="string"/>
  <key id="fill" for="node" attr.name="fill" attr.type="string"/>
  <key id="clinical_ratio" for="node" attr.name="clinical_ratio" attr.type="double"/>
  <key id="has_address" for="node" attr.name="has_address" attr.type="boolean"/>
  <key id="external_refs" for="node" attr.name="external_refs" attr.type="int"/>
  <graph id="citations" edgedefault="directed">
    <node id="WOS:1">
      <data key="label">Ranson 2001</data>
      <data key="year">2001</data>
      <data key="shape">ellipse</data>
      <data key="fill">#BF0040</data>
      <data key="clinical_ratio">0.25</data>
      <data key="has_address">true</data>
      <data key="external_refs">0</data>
    </node>
  </graph>
</graphml>
"#;
    assert_eq!(out, expected);
}

#[test]
fn minimal_dot_document() {
    let (net, scores) = one_node();
    let out = String::from_utf8(export_graph(&net, &scores, None, None, GraphFormat::Dot).unwrap()).unwrap();
    let expected = "digraph citations {
  rankdir=BT;
  node [style=filled];
  \"WOS:1\" [label=\"Ranson 2001\", shape=ellipse, fillcolor=\"#BF0040\", year=2001, clinical_ratio=\"0.25\"];
}
";
    assert_eq!(out, expected);
}

fn random_case(seed: u64, n: usize) -> (CitationNetwork, Vec<ClinicalScore>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = CitationNetwork::new();
    for i in 0..n {
        let label = ["A & B <x>", "O'Neil \"q\"", "plain", "back\\slash", "Müller"][i % 5];
        net.add_node(
            format!("N{i:03}"),
            NodeAttrs {
                year: Some(1990 + (i / 3) as i32),
                label: format!("{label} {i}"),
                has_address: i % 2 == 0,
                external_refs: rng.gen_range(0..20),
                ..Default::default()
            },
        );
    }
    for a in 1..n {
        for _ in 0..rng.gen_range(1..3) {
            let b = rng.gen_range(0..a);
            if (b / 3) < (a / 3) {
                net.add_edge(&format!("N{a:03}"), &format!("N{b:03}")).unwrap();
            }
        }
    }
    let anns: Vec<Annotation> = net
        .node_ids()
        .map(|id| {
            let mut a = Annotation::empty(id);
            a.clinical_count = rng.gen_range(0..3);
            a.nonclinical_count = rng.gen_range(0..3);
            a
        })
        .collect();
    (net, transmap_core::report::score_annotations(&anns))
}

#[test]
fn graphml_is_well_formed_and_complete() {
    for seed in 0..20 {
        let (net, scores) = random_case(seed, 30);
        let partition = if net.edge_count() > 0 {
            detect_subnets(&net, 42).ok()
        } else {
            None
        };
        let layering = hierarchical_layering(&net).unwrap();
        let bytes = export_graph(&net, &scores, partition.as_ref(), Some(&layering), GraphFormat::GraphMl).unwrap();

        let mut reader = Reader::from_reader(bytes.as_slice());
        let mut buf = Vec::new();
        let mut nodes: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut edges = BTreeSet::new();
        let (mut current, mut key) = (None::<String>, None::<String>);
        loop {
            match reader.read_event_into(&mut buf).unwrap() {
                Event::Eof => break,
                Event::Start(e) | Event::Empty(e) => {
                    let attr = |name: &str| {
                        e.try_get_attribute(name)
                            .unwrap()
                            .map(|a| a.normalized_value(XmlVersion::Implicit1_0).unwrap().into_owned())
                    };
                    match e.name().as_ref() {
                        "node" => {
                            let id = attr("id").unwrap();
                            nodes.insert(id.clone(), BTreeMap::new());
                            current = Some(id);
                        }
                        "data" => key = attr("key"),
                        "edge" => {
                            edges.insert((attr("source").unwrap(), attr("target").unwrap()));
                        }
                        _ => {}
                    }
                }
                Event::Text(t) => {
                    if let (Some(node), Some(k)) = (&current, &key) {
                        nodes
                            .get_mut(node)
                            .unwrap()
                            .entry(k.clone())
                            .or_default()
                            .push_str(&t.xml10_content());
                    }
                }
                Event::GeneralRef(r) => {
                    if let (Some(node), Some(k)) = (&current, &key) {
                        let name = r.into_inner();
                        let ch = match name.as_ref() {
                            "amp" => "&",
                            "lt" => "<",
                            "gt" => ">",
                            "quot" => "\"",
                            "apos" => "'",
                            other => panic!("unexpected entity {other}"),
                        };
                        nodes.get_mut(node).unwrap().entry(k.clone()).or_default().push_str(ch);
                    }
                }
                Event::End(e) if e.name().as_ref() == "data" => key = None,
                _ => {}
            }
            buf.clear();
        }

        assert_eq!(nodes.len(), net.node_count());
        let want: BTreeSet<(String, String)> = net.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(edges, want);
        for s in &scores {
            let data = &nodes[&s.record_id];
            let attrs = net.attrs(&s.record_id).unwrap();
            assert_eq!(data["fill"], s.color.hex());
            assert_eq!(data["label"], attrs.label);
            assert_eq!(data["layer"], layering.layer_of(&s.record_id).unwrap().to_string());
            assert_eq!(data.get("clinical_ratio").map(|r| r.parse::<f64>().unwrap()), s.ratio);
            let cluster = partition.as_ref().and_then(|p| p.cluster_of(&s.record_id));
            assert_eq!(data["shape"], shape_for_cluster(cluster));
        }
    }
}

/// dot-parser drops the surrounding quotes of an ID but keeps its escapes.
fn unquote(s: String) -> String {
    let inner = s.strip_prefix('"').and_then(|x| x.strip_suffix('"')).unwrap_or(&s);
    inner.replace("\\\"", "\"").replace("\\\\", "\\")
}

#[test]
fn dot_parses_under_reference_grammar() {
    for seed in 0..20 {
        let (net, scores) = random_case(seed, 25);
        let partition = if net.edge_count() > 0 {
            detect_subnets(&net, 7).ok()
        } else {
            None
        };
        let layering = hierarchical_layering(&net).unwrap();
        let text = String::from_utf8(
            export_graph(&net, &scores, partition.as_ref(), Some(&layering), GraphFormat::Dot).unwrap(),
        )
        .unwrap();
        let ast = dot_parser::ast::Graph::try_from(text.as_str()).unwrap_or_else(|e| panic!("{e}\n{text}"));
        let mut node_attrs: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for stmt in &ast.stmts {
            if let dot_parser::ast::Stmt::NodeStmt(ns) = stmt {
                let attrs = ns.attr.as_ref().map(|a| a.flatten_ref().elems).unwrap_or_default();
                node_attrs.insert(
                    unquote(ns.node.id.clone()),
                    attrs
                        .into_iter()
                        .map(|(k, v)| (k.clone().into(), unquote(v.clone().into())))
                        .collect(),
                );
            }
        }
        let g = dot_parser::canonical::Graph::from(ast);
        let by_id: BTreeMap<String, _> = g.nodes.set.iter().map(|(k, v)| (unquote(k.clone()), v)).collect();
        assert_eq!(
            by_id.keys().cloned().collect::<BTreeSet<_>>(),
            net.node_ids().map(str::to_string).collect()
        );
        let edges: BTreeSet<(String, String)> = g
            .edges
            .set
            .iter()
            .map(|e| (unquote(e.from.clone()), unquote(e.to.clone())))
            .collect();
        assert_eq!(
            edges,
            net.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect()
        );
        for s in &scores {
            let attrs = &node_attrs[&s.record_id];
            assert_eq!(attrs.get("fillcolor"), Some(&s.color.hex()), "{attrs:?}");
            assert_eq!(attrs["label"], net.attrs(&s.record_id).unwrap().label);
        }
        let rank_lines = text.lines().filter(|l| l.contains("rank=same")).count();
        assert_eq!(rank_lines as u32, layering.layer_count());
    }
}

#[test]
fn shapes_cycle_through_ten() {
    assert_eq!(shape_for_cluster(None), "ellipse");
    assert_eq!(shape_for_cluster(Some(1)), "ellipse");
    assert_eq!(shape_for_cluster(Some(2)), "box");
    assert_eq!(shape_for_cluster(Some(10)), "pentagon");
    assert_eq!(shape_for_cluster(Some(11)), "ellipse");
    let distinct: BTreeSet<&str> = (1..=10).map(|c| shape_for_cluster(Some(c))).collect();
    assert_eq!(distinct.len(), 10);
}

#[test]
fn exports_reject_mismatched_inputs() {
    let (net, scores) = one_node();
    assert!(matches!(
        export_graph(&net, &[], None, None, GraphFormat::Json),
        Err(ReportError::IdMismatch(_))
    ));
    let mut other = Partition::from_labels([("WOS:1", 0u8), ("WOS:2", 1)]);
    other.modularity = 0.0;
    assert!(matches!(
        export_graph(&net, &scores, Some(&other), None, GraphFormat::GraphMl),
        Err(ReportError::IdMismatch(_))
    ));
    assert!(matches!(
        "svg".parse::<GraphFormat>(),
        Err(ReportError::UnknownFormat(_))
    ));
}

#[test]
fn exports_are_byte_stable() {
    let (net, scores) = random_case(99, 40);
    let p = detect_subnets(&net, 42).unwrap();
    let layering = hierarchical_layering(&net).unwrap();
    for f in [GraphFormat::GraphMl, GraphFormat::Dot, GraphFormat::Json] {
        let a = export_graph(&net, &scores, Some(&p), Some(&layering), f).unwrap();
        let b = export_graph(&net, &scores, Some(&p), Some(&layering), f).unwrap();
        assert_eq!(a, b);
    }
}
