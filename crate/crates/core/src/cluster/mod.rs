//! Subnetwork detection by modularity maximization on the undirected
//! projection of the citation graph.

mod brute;
mod louvain;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::CitationNetwork;

pub use brute::{brute_force_partition, BRUTE_FORCE_LIMIT};
pub use louvain::{detect_subnets, detect_subnets_with_resolution};

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("network has no edges; modularity is undefined")]
    EdgelessNetwork,
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("{nodes} nodes exceeds the exhaustive-search limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("partition does not cover the network: {0}")]
    PartitionMismatch(String),
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("cannot parse partition JSON: {0}")]
    Parse(String),
}

/// Node-to-cluster assignment. Cluster ids are dense from 1, ordered by
/// cluster size descending and then by smallest member id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: BTreeMap<String, u32>,
    pub modularity: f64,
}

impl Partition {
    /// Canonicalizes arbitrary labels into dense size-ordered ids. The
    /// modularity field is left at zero for the caller to fill.
    pub fn from_labels<'a, L: Ord + Copy>(labels: impl IntoIterator<Item = (&'a str, L)>) -> Self {
        let mut groups: BTreeMap<L, Vec<&str>> = BTreeMap::new();
        for (id, label) in labels {
            groups.entry(label).or_default().push(id);
        }
        let mut groups: Vec<Vec<&str>> = groups
            .into_values()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(b[0])));
        let assignment = groups
            .iter()
            .enumerate()
            .flat_map(|(i, g)| g.iter().map(move |id| (id.to_string(), i as u32 + 1)))
            .collect();
        Partition {
            assignment,
            modularity: 0.0,
        }
    }

    pub fn single_cluster(net: &CitationNetwork) -> Self {
        Self::from_labels(net.node_ids().map(|id| (id, 0u8)))
    }

    pub fn singletons(net: &CitationNetwork) -> Self {
        Self::from_labels(net.node_ids().map(|id| (id, id)))
    }

    pub fn cluster_of(&self, id: &str) -> Option<u32> {
        self.assignment.get(id).copied()
    }

    pub fn cluster_count(&self) -> usize {
        self.assignment.values().max().copied().unwrap_or(0) as usize
    }

    /// `cluster id -> sorted member ids`.
    pub fn clusters(&self) -> BTreeMap<u32, Vec<&str>> {
        let mut out: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
        for (id, c) in &self.assignment {
            out.entry(*c).or_default().push(id);
        }
        out
    }

    /// True if both partitions group the nodes identically, ignoring ids.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        let mine: std::collections::BTreeSet<Vec<&str>> = self.clusters().into_values().collect();
        let theirs: std::collections::BTreeSet<Vec<&str>> = other.clusters().into_values().collect();
        mine == theirs
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("partition serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ClusterError> {
        serde_json::from_slice(bytes).map_err(|e| ClusterError::Parse(e.to_string()))
    }
}

fn check_covers(net: &CitationNetwork, partition: &Partition) -> Result<(), ClusterError> {
    if net.node_count() != partition.assignment.len() {
        return Err(ClusterError::PartitionMismatch(format!(
            "{} nodes but {} assignments",
            net.node_count(),
            partition.assignment.len()
        )));
    }
    if let Some(id) = net.node_ids().find(|id| !partition.assignment.contains_key(*id)) {
        return Err(ClusterError::PartitionMismatch(format!("node `{id}` is unassigned")));
    }
    Ok(())
}

/// Newman modularity of `partition` on the undirected simple projection.
pub fn modularity(net: &CitationNetwork, partition: &Partition) -> Result<f64, ClusterError> {
    modularity_with_resolution(net, partition, 1.0)
}

/// `Q = sum_c [ e_c / m - resolution * (d_c / 2m)^2 ]`.
pub fn modularity_with_resolution(
    net: &CitationNetwork,
    partition: &Partition,
    resolution: f64,
) -> Result<f64, ClusterError> {
    check_covers(net, partition)?;
    let edges = net.undirected_edges();
    if edges.is_empty() {
        return Err(ClusterError::EdgelessNetwork);
    }
    let m = edges.len() as f64;
    let mut intra: BTreeMap<u32, f64> = BTreeMap::new();
    let mut degree: BTreeMap<u32, f64> = BTreeMap::new();
    for (a, b) in edges {
        let (ca, cb) = (partition.assignment[a], partition.assignment[b]);
        if ca == cb {
            *intra.entry(ca).or_insert(0.0) += 1.0;
        }
        *degree.entry(ca).or_insert(0.0) += 1.0;
        *degree.entry(cb).or_insert(0.0) += 1.0;
    }
    Ok(degree
        .iter()
        .map(|(c, d)| {
            let e = intra.get(c).copied().unwrap_or(0.0);
            let share = d / (2.0 * m);
            e / m - resolution * share * share
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::net;

    fn two_triangles() -> CitationNetwork {
        net(
            &[
                ("a", None),
                ("b", None),
                ("c", None),
                ("d", None),
                ("e", None),
                ("f", None),
            ],
            &[("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d")],
        )
    }

    #[test]
    fn single_cluster_is_zero() {
        let n = two_triangles();
        assert_eq!(modularity(&n, &Partition::single_cluster(&n)).unwrap(), 0.0);
    }

    #[test]
    fn two_triangles_is_one_half() {
        let n = two_triangles();
        let p = Partition::from_labels(n.node_ids().map(|id| (id, id < "d")));
        assert_eq!(modularity(&n, &p).unwrap(), 0.5);
    }

    #[test]
    fn singletons_negative_sum_of_squares() {
        let n = two_triangles();
        let q = modularity(&n, &Partition::singletons(&n)).unwrap();
        // Every node has degree 2 of 2m = 12.
        let expected = -6.0 * (2.0f64 / 12.0).powi(2);
        assert!((q - expected).abs() < 1e-15);
        assert!(q < 0.0);
    }

    #[test]
    fn reciprocal_citations_count_once() {
        let one = net(&[("a", None), ("b", None)], &[("a", "b")]);
        let both = net(&[("a", None), ("b", None)], &[("a", "b"), ("b", "a")]);
        let p = Partition::singletons(&one);
        assert_eq!(modularity(&one, &p).unwrap(), modularity(&both, &p).unwrap());
        assert_eq!(modularity(&one, &p).unwrap(), -0.5);
    }

    #[test]
    fn errors() {
        let n = net(&[("a", None)], &[]);
        assert_eq!(
            modularity(&n, &Partition::singletons(&n)),
            Err(ClusterError::EdgelessNetwork)
        );
        let t = two_triangles();
        let partial = Partition::singletons(&net(&[("a", None)], &[]));
        assert!(matches!(
            modularity(&t, &partial),
            Err(ClusterError::PartitionMismatch(_))
        ));
    }

    #[test]
    fn canonical_ids_by_size_then_min_member() {
        let p = Partition::from_labels([("z", 9), ("y", 9), ("a", 3), ("m", 5), ("n", 5)]);
        assert_eq!(p.cluster_of("m"), Some(1));
        assert_eq!(p.cluster_of("y"), Some(2));
        assert_eq!(p.cluster_of("a"), Some(3));
        assert_eq!(p.cluster_count(), 3);
    }
}
