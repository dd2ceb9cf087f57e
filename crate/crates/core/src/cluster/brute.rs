//! Exhaustive modularity maximization, used as a reference for small graphs.

use super::{modularity, ClusterError, Partition};
use crate::graph::CitationNetwork;

pub const BRUTE_FORCE_LIMIT: usize = 12;

const TIE_EPSILON: f64 = 1e-12;

/// Enumerates every set partition (as restricted growth strings over nodes
/// sorted by id) and returns the one with the highest modularity. Ties go to
/// fewer clusters, then to the lexicographically smallest assignment.
pub fn brute_force_partition(net: &CitationNetwork) -> Result<Partition, ClusterError> {
    let n = net.node_count();
    if n == 0 {
        return Err(ClusterError::EmptyNetwork);
    }
    if n > BRUTE_FORCE_LIMIT {
        return Err(ClusterError::TooLarge {
            nodes: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let ids: Vec<&str> = net.node_ids().collect();
    let pos = |id: &str| ids.binary_search(&id).expect("edge endpoint is a node");
    let edges: Vec<(usize, usize)> = net
        .undirected_edges()
        .into_iter()
        .map(|(a, b)| (pos(a), pos(b)))
        .collect();
    if edges.is_empty() {
        return Err(ClusterError::EdgelessNetwork);
    }
    let m = edges.len() as f64;

    let score = |rgs: &[usize], k: usize| -> f64 {
        let mut intra = vec![0.0; k];
        let mut degree = vec![0.0; k];
        for &(u, v) in &edges {
            if rgs[u] == rgs[v] {
                intra[rgs[u]] += 1.0;
            }
            degree[rgs[u]] += 1.0;
            degree[rgs[v]] += 1.0;
        }
        (0..k).map(|c| intra[c] / m - (degree[c] / (2.0 * m)).powi(2)).sum()
    };

    let mut rgs = vec![0usize; n];
    // prefix_max[i] = max(rgs[0..=i])
    let mut prefix_max = vec![0usize; n];
    let mut best = (f64::NEG_INFINITY, usize::MAX, rgs.clone());
    loop {
        let k = prefix_max[n - 1] + 1;
        let q = score(&rgs, k);
        let better = q > best.0 + TIE_EPSILON || ((q - best.0).abs() <= TIE_EPSILON && k < best.1);
        if better {
            best = (q, k, rgs.clone());
        }
        // Advance to the next restricted growth string.
        let mut i = n - 1;
        loop {
            if i == 0 {
                let mut p = Partition::from_labels(ids.iter().copied().zip(best.2.iter().copied()));
                p.modularity = modularity(net, &p)?;
                return Ok(p);
            }
            let limit = prefix_max[i - 1] + 1;
            if rgs[i] < limit {
                rgs[i] += 1;
                prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
                for j in i + 1..n {
                    rgs[j] = 0;
                    prefix_max[j] = prefix_max[i];
                }
                break;
            }
            i -= 1;
        }
    }
}
