//! The directed citation network among selected records.

mod components;
mod layering;
mod matching;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use components::{components, largest_component, ComponentReport};
pub use layering::{chronology_violations, hierarchical_layering, LayerSlot, Layering};
pub use matching::{
    build_network, match_reference, Ambiguity, BuildReport, JournalSynonyms, MatchKey, MatchOutcome, ReferenceIndex,
};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("nodes without a publication year: {}", .0.join(", "))]
    MissingYear(Vec<String>),
    #[error("edge {0} -> {1} references an unknown node")]
    DanglingEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("cannot parse network JSON: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeAttrs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub has_address: bool,
    /// References that did not resolve to another node.
    #[serde(default)]
    pub external_refs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clinical_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<u32>,
}

/// Nodes keyed by record id; edges are `(citing, cited)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CitationNetwork {
    nodes: BTreeMap<String, NodeAttrs>,
    edges: BTreeSet<(String, String)>,
}

impl CitationNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: impl Into<String>, attrs: NodeAttrs) {
        self.nodes.insert(id.into(), attrs);
    }

    /// Adds `citing -> cited`. Returns `Ok(false)` if the edge already existed.
    pub fn add_edge(&mut self, citing: &str, cited: &str) -> Result<bool, GraphError> {
        if citing == cited {
            return Err(GraphError::SelfLoop(citing.to_string()));
        }
        if !self.nodes.contains_key(citing) || !self.nodes.contains_key(cited) {
            return Err(GraphError::DanglingEdge(citing.to_string(), cited.to_string()));
        }
        Ok(self.edges.insert((citing.to_string(), cited.to_string())))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Node ids in ascending order.
    pub fn node_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.nodes.keys().map(String::as_str)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, &NodeAttrs)> + '_ {
        self.nodes.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn attrs(&self, id: &str) -> Option<&NodeAttrs> {
        self.nodes.get(id)
    }

    pub fn attrs_mut(&mut self, id: &str) -> Option<&mut NodeAttrs> {
        self.nodes.get_mut(id)
    }

    /// Edges in ascending `(citing, cited)` order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn in_degrees(&self) -> BTreeMap<&str, usize> {
        let mut deg: BTreeMap<&str, usize> = self.node_ids().map(|id| (id, 0)).collect();
        for (_, cited) in self.edges() {
            *deg.get_mut(cited).expect("edge endpoints are nodes") += 1;
        }
        deg
    }

    /// Undirected simple projection as sorted `(min, max)` pairs.
    pub fn undirected_edges(&self) -> BTreeSet<(&str, &str)> {
        self.edges().map(|(a, b)| if a < b { (a, b) } else { (b, a) }).collect()
    }

    /// Subgraph induced on `keep`.
    pub fn induced(&self, keep: &BTreeSet<&str>) -> CitationNetwork {
        CitationNetwork {
            nodes: self
                .nodes
                .iter()
                .filter(|(id, _)| keep.contains(id.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|(a, b)| keep.contains(a.as_str()) && keep.contains(b.as_str()))
                .cloned()
                .collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&NetworkFile::from(self)).expect("network serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, GraphError> {
        let file: NetworkFile = serde_json::from_slice(bytes).map_err(|e| GraphError::Parse(e.to_string()))?;
        file.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    nodes: Vec<NodeEntry>,
    edges: Vec<EdgeEntry>,
}

#[derive(Serialize, Deserialize)]
struct NodeEntry {
    id: String,
    #[serde(flatten)]
    attrs: NodeAttrs,
}

#[derive(Serialize, Deserialize)]
struct EdgeEntry {
    source: String,
    target: String,
}

impl From<&CitationNetwork> for NetworkFile {
    fn from(net: &CitationNetwork) -> Self {
        NetworkFile {
            nodes: net
                .nodes()
                .map(|(id, attrs)| NodeEntry {
                    id: id.to_string(),
                    attrs: attrs.clone(),
                })
                .collect(),
            edges: net
                .edges()
                .map(|(s, t)| EdgeEntry {
                    source: s.to_string(),
                    target: t.to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<NetworkFile> for CitationNetwork {
    type Error = GraphError;

    fn try_from(file: NetworkFile) -> Result<Self, GraphError> {
        let mut net = CitationNetwork::new();
        for node in file.nodes {
            if net.contains(&node.id) {
                return Err(GraphError::DuplicateNode(node.id));
            }
            net.add_node(node.id, node.attrs);
        }
        for edge in file.edges {
            net.add_edge(&edge.source, &edge.target)?;
        }
        Ok(net)
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::net;
    use super::*;

    #[test]
    fn rejects_self_loops_and_dangling_edges() {
        let mut n = net(&[("a", None), ("b", None)], &[]);
        assert_eq!(n.add_edge("a", "a"), Err(GraphError::SelfLoop("a".into())));
        assert!(matches!(n.add_edge("a", "z"), Err(GraphError::DanglingEdge(..))));
        assert_eq!(n.add_edge("a", "b"), Ok(true));
        assert_eq!(n.add_edge("a", "b"), Ok(false));
        assert_eq!(n.edge_count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let mut n = net(&[("a", Some(1997)), ("b", Some(2001))], &[("b", "a")]);
        n.attrs_mut("a").unwrap().clinical_ratio = Some(0.25);
        n.attrs_mut("a").unwrap().cluster_id = Some(2);
        let back = CitationNetwork::from_json(&n.to_json()).unwrap();
        assert_eq!(back, n);
    }

    #[test]
    fn json_validation() {
        let bad = br#"{"nodes":[{"id":"a"}],"edges":[{"source":"a","target":"b"}]}"#;
        assert!(matches!(
            CitationNetwork::from_json(bad),
            Err(GraphError::DanglingEdge(..))
        ));
        let dup = br#"{"nodes":[{"id":"a"},{"id":"a"}],"edges":[]}"#;
        assert!(matches!(
            CitationNetwork::from_json(dup),
            Err(GraphError::DuplicateNode(_))
        ));
    }

    #[test]
    fn undirected_projection_merges_reciprocal_edges() {
        let n = net(
            &[("a", None), ("b", None), ("c", None)],
            &[("a", "b"), ("b", "a"), ("c", "a")],
        );
        assert_eq!(n.undirected_edges().len(), 2);
        assert_eq!(n.in_degrees()["a"], 2);
    }
}
