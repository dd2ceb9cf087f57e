use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::{ClinicalScore, ReportError, Rgb};
use crate::cluster::Partition;
use crate::graph::{CitationNetwork, Layering, NodeAttrs};

/// Node shapes assigned to clusters in id order, wrapping after the last.
pub const SHAPES: [&str; 10] = [
    "ellipse",
    "box",
    "diamond",
    "triangle",
    "hexagon",
    "octagon",
    "parallelogram",
    "trapezium",
    "invtriangle",
    "pentagon",
];

pub fn shape_for_cluster(cluster_id: Option<u32>) -> &'static str {
    match cluster_id {
        Some(c) if c > 0 => SHAPES[(c as usize - 1) % SHAPES.len()],
        _ => SHAPES[0],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    GraphMl,
    Dot,
    Json,
}

impl GraphFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            GraphFormat::GraphMl => "graphml",
            GraphFormat::Dot => "dot",
            GraphFormat::Json => "json",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(GraphFormat::GraphMl),
            "dot" | "gv" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

/// Copies ratio, cluster and layer onto the node attributes. Every node
/// needs a score; partition and layering, when given, must cover exactly
/// the network's nodes.
pub fn annotate_network(
    net: &CitationNetwork,
    scores: &[ClinicalScore],
    partition: Option<&Partition>,
    layering: Option<&Layering>,
) -> Result<CitationNetwork, ReportError> {
    let by_id: HashMap<&str, &ClinicalScore> = scores.iter().map(|s| (s.record_id.as_str(), s)).collect();
    if let Some(p) = partition {
        if p.assignment.len() != net.node_count() {
            return Err(ReportError::IdMismatch(format!(
                "partition covers {} nodes, network has {}",
                p.assignment.len(),
                net.node_count()
            )));
        }
    }
    if let Some(l) = layering {
        if l.slots.len() != net.node_count() {
            return Err(ReportError::IdMismatch(format!(
                "layering covers {} nodes, network has {}",
                l.slots.len(),
                net.node_count()
            )));
        }
    }
    let mut out = net.clone();
    for id in net.node_ids() {
        let score = by_id
            .get(id)
            .ok_or_else(|| ReportError::IdMismatch(format!("no score for `{id}`")))?;
        let attrs = out.attrs_mut(id).expect("id taken from the network");
        attrs.clinical_ratio = score.ratio;
        if let Some(p) = partition {
            attrs.cluster_id = Some(
                p.cluster_of(id)
                    .ok_or_else(|| ReportError::IdMismatch(format!("`{id}` not in partition")))?,
            );
        }
        if let Some(l) = layering {
            attrs.layer = Some(
                l.layer_of(id)
                    .ok_or_else(|| ReportError::IdMismatch(format!("`{id}` not layered")))?,
            );
        }
    }
    Ok(out)
}

fn fill_of(attrs: &NodeAttrs) -> Rgb {
    super::color_for_ratio(attrs.clinical_ratio).unwrap_or(Rgb::GRAY)
}

/// Serializes the scored network. Output depends only on the inputs.
pub fn export_graph(
    net: &CitationNetwork,
    scores: &[ClinicalScore],
    partition: Option<&Partition>,
    layering: Option<&Layering>,
    format: GraphFormat,
) -> Result<Vec<u8>, ReportError> {
    let annotated = annotate_network(net, scores, partition, layering)?;
    Ok(match format {
        GraphFormat::GraphMl => graphml(&annotated).into_bytes(),
        GraphFormat::Dot => dot(&annotated, layering).into_bytes(),
        GraphFormat::Json => json(&annotated),
    })
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => {}
            c => out.push(c),
        }
    }
    out
}

const GRAPHML_KEYS: [(&str, &str); 9] = [
    ("label", "string"),
    ("year", "int"),
    ("layer", "int"),
    ("cluster_id", "int"),
    ("shape", "string"),
    ("fill", "string"),
    ("clinical_ratio", "double"),
    ("has_address", "boolean"),
    ("external_refs", "int"),
];

fn graphml(net: &CitationNetwork) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    for (name, ty) in GRAPHML_KEYS {
        let _ = writeln!(
            s,
            "  <key id=\"{name}\" for=\"node\" attr.name=\"{name}\" attr.type=\"{ty}\"/>"
        );
    }
    s.push_str("  <graph id=\"citations\" edgedefault=\"directed\">\n");
    for (id, a) in net.nodes() {
        let _ = writeln!(s, "    <node id=\"{}\">", xml_escape(id));
        let mut data = |key: &str, value: String| {
            let _ = writeln!(s, "      <data key=\"{key}\">{}</data>", xml_escape(&value));
        };
        data("label", a.label.clone());
        if let Some(y) = a.year {
            data("year", y.to_string());
        }
        if let Some(l) = a.layer {
            data("layer", l.to_string());
        }
        if let Some(c) = a.cluster_id {
            data("cluster_id", c.to_string());
        }
        data("shape", shape_for_cluster(a.cluster_id).to_string());
        data("fill", fill_of(a).hex());
        if let Some(r) = a.clinical_ratio {
            data("clinical_ratio", r.to_string());
        }
        data("has_address", a.has_address.to_string());
        data("external_refs", a.external_refs.to_string());
        s.push_str("    </node>\n");
    }
    for (i, (src, dst)) in net.edges().enumerate() {
        let _ = writeln!(
            s,
            "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\"/>",
            xml_escape(src),
            xml_escape(dst)
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn dot(net: &CitationNetwork, layering: Option<&Layering>) -> String {
    let mut s = String::from("digraph citations {\n  rankdir=BT;\n  node [style=filled];\n");
    for (id, a) in net.nodes() {
        let mut attrs = vec![
            format!("label={}", dot_quote(&a.label)),
            format!("shape={}", shape_for_cluster(a.cluster_id)),
            format!("fillcolor={}", dot_quote(&fill_of(a).hex())),
        ];
        if let Some(y) = a.year {
            attrs.push(format!("year={y}"));
        }
        if let Some(c) = a.cluster_id {
            attrs.push(format!("cluster_id={c}"));
        }
        if let Some(l) = a.layer {
            attrs.push(format!("layer={l}"));
        }
        if let Some(r) = a.clinical_ratio {
            attrs.push(format!("clinical_ratio={}", dot_quote(&r.to_string())));
        }
        let _ = writeln!(s, "  {} [{}];", dot_quote(id), attrs.join(", "));
    }
    if let Some(l) = layering {
        for layer in 0..l.layer_count() {
            let members: Vec<String> = l.members(layer).into_iter().map(dot_quote).collect();
            if !members.is_empty() {
                let _ = writeln!(s, "  {{ rank=same; {}; }}", members.join("; "));
            }
        }
    }
    for (src, dst) in net.edges() {
        let _ = writeln!(s, "  {} -> {};", dot_quote(src), dot_quote(dst));
    }
    s.push_str("}\n");
    s
}

#[derive(Serialize)]
struct ExportFile<'a> {
    nodes: Vec<ExportNode<'a>>,
    edges: Vec<ExportEdge<'a>>,
}

#[derive(Serialize)]
struct ExportNode<'a> {
    id: &'a str,
    #[serde(flatten)]
    attrs: &'a NodeAttrs,
    fill: String,
    shape: &'static str,
}

#[derive(Serialize)]
struct ExportEdge<'a> {
    source: &'a str,
    target: &'a str,
}

/// The network JSON layout plus `fill` and `shape`. Reads back with
/// [`CitationNetwork::from_json`].
fn json(net: &CitationNetwork) -> Vec<u8> {
    let file = ExportFile {
        nodes: net
            .nodes()
            .map(|(id, attrs)| ExportNode {
                id,
                attrs,
                fill: fill_of(attrs).hex(),
                shape: shape_for_cluster(attrs.cluster_id),
            })
            .collect(),
        edges: net
            .edges()
            .map(|(source, target)| ExportEdge { source, target })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("export serializes");
    out.push(b'\n');
    out
}
