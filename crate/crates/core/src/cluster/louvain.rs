//! Multi-level greedy modularity optimization (local moving followed by
//! community aggregation, repeated until no node moves).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{modularity_with_resolution, ClusterError, Partition};
use crate::graph::CitationNetwork;

const GAIN_EPSILON: f64 = 1e-12;
const MAX_PASSES: usize = 1000;

/// Weighted undirected graph over dense node indices.
#[derive(Debug, Clone)]
struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    /// Sum of all degrees (`2m`).
    total: f64,
}

impl WeightedGraph {
    fn from_network(net: &CitationNetwork) -> Self {
        let index: std::collections::HashMap<&str, usize> = net.node_ids().enumerate().map(|(i, id)| (id, i)).collect();
        let n = index.len();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in net.undirected_edges() {
            let (i, j) = (index[a], index[b]);
            adj[i].push((j, 1.0));
            adj[j].push((i, 1.0));
        }
        for list in &mut adj {
            list.sort_by_key(|(j, _)| *j);
        }
        Self::assemble(adj, vec![0.0; n])
    }

    fn assemble(adj: Vec<Vec<(usize, f64)>>, self_loops: Vec<f64>) -> Self {
        let degree: Vec<f64> = adj
            .iter()
            .zip(&self_loops)
            .map(|(list, s)| list.iter().map(|(_, w)| w).sum::<f64>() + 2.0 * s)
            .collect();
        let total = degree.iter().sum();
        Self {
            adj,
            self_loops,
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Collapses each community into one node. `community` must use dense
    /// labels `0..k`.
    fn aggregate(&self, community: &[usize], k: usize) -> Self {
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        let mut self_loops = vec![0.0; k];
        for (i, list) in self.adj.iter().enumerate() {
            let ci = community[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in list {
                let cj = community[j];
                if ci == cj {
                    // Each internal edge is visited from both ends.
                    self_loops[ci] += w / 2.0;
                } else {
                    *weights[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adj = weights.into_iter().map(|m| m.into_iter().collect()).collect();
        Self::assemble(adj, self_loops)
    }
}

/// Relabels to dense ids in order of first appearance.
fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; labels.len()];
    let mut next = 0;
    let out = labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect();
    (out, next)
}

/// Moves single nodes between communities while modularity improves.
/// Returns whether any node changed community.
fn local_moving(g: &WeightedGraph, community: &mut [usize], resolution: f64, rng: &mut ChaCha8Rng) -> bool {
    let n = g.len();
    let mut tot = vec![0.0; n];
    for i in 0..n {
        tot[community[i]] += g.degree[i];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    for _ in 0..MAX_PASSES {
        let mut moved = false;
        for &i in &order {
            let ci = community[i];
            let ki = g.degree[i];
            for &(j, w) in &g.adj[i] {
                let cj = community[j];
                if link[cj] == 0.0 && !touched.contains(&cj) {
                    touched.push(cj);
                }
                link[cj] += w;
            }
            tot[ci] -= ki;
            let gain = |c: usize, link_c: f64| link_c - resolution * tot[c] * ki / g.total;
            let mut best = ci;
            let mut best_gain = gain(ci, link[ci]);
            for &c in &touched {
                let candidate = gain(c, link[c]);
                if candidate > best_gain + GAIN_EPSILON {
                    best = c;
                    best_gain = candidate;
                }
            }
            tot[best] += ki;
            community[i] = best;
            if best != ci {
                moved = true;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    any_move
}

/// Detects subnetworks at resolution 1.0.
pub fn detect_subnets(net: &CitationNetwork, seed: u64) -> Result<Partition, ClusterError> {
    detect_subnets_with_resolution(net, seed, 1.0)
}

/// Multi-level modularity maximization. Node visiting order is shuffled by
/// `seed` over nodes sorted by id.
pub fn detect_subnets_with_resolution(
    net: &CitationNetwork,
    seed: u64,
    resolution: f64,
) -> Result<Partition, ClusterError> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(ClusterError::InvalidResolution(resolution));
    }
    if net.is_empty() {
        return Err(ClusterError::EmptyNetwork);
    }
    let base = WeightedGraph::from_network(net);
    if base.total == 0.0 {
        return Err(ClusterError::EdgelessNetwork);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut membership: Vec<usize> = (0..base.len()).collect();
    let mut level = base.clone();
    loop {
        let mut community: Vec<usize> = (0..level.len()).collect();
        if !local_moving(&level, &mut community, resolution, &mut rng) {
            break;
        }
        let (community, k) = compact(&community);
        for m in membership.iter_mut() {
            *m = community[*m];
        }
        if k == level.len() || k == 1 {
            break;
        }
        level = level.aggregate(&community, k);
    }
    // Final single-node refinement on the original graph.
    local_moving(&base, &mut membership, resolution, &mut rng);

    let ids: Vec<&str> = net.node_ids().collect();
    let mut partition = Partition::from_labels(ids.iter().copied().zip(membership.iter().copied()));
    partition.modularity = modularity_with_resolution(net, &partition, resolution)?;
    Ok(partition)
}
