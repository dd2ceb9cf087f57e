use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{CitationNetwork, GraphError};

/// Component size profile of a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    /// Component sizes, largest first.
    pub sizes: Vec<usize>,
}

impl ComponentReport {
    /// `size -> number of components of that size`.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for &s in &self.sizes {
            *h.entry(s).or_insert(0) += 1;
        }
        h
    }

    pub fn total_nodes(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn largest(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    /// CSV with header `size,count`, largest size first.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["size", "count"]).expect("in-memory write");
        for (size, count) in self.histogram().iter().rev() {
            w.write_record([size.to_string(), count.to_string()])
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, String> {
        let mut r = csv::Reader::from_reader(bytes);
        let mut sizes = Vec::new();
        for row in r.records() {
            let row = row.map_err(|e| e.to_string())?;
            let parse = |i: usize| -> Result<usize, String> {
                row.get(i)
                    .ok_or_else(|| "short row".to_string())?
                    .parse()
                    .map_err(|e| format!("{e}"))
            };
            let (size, count) = (parse(0)?, parse(1)?);
            sizes.extend(std::iter::repeat_n(size, count));
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { sizes })
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Weakly connected components, largest first; equal sizes are ordered by
/// their smallest member id. Members within a component are sorted.
pub fn components(net: &CitationNetwork) -> Vec<Vec<&str>> {
    let ids: Vec<&str> = net.node_ids().collect();
    let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    for (a, b) in net.edges() {
        let (ra, rb) = (find(&mut parent, pos[a]), find(&mut parent, pos[b]));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(id);
    }
    let mut comps: Vec<Vec<&str>> = groups.into_values().collect();
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(b[0])));
    comps
}

/// Induced subgraph on the largest weakly connected component.
pub fn largest_component(net: &CitationNetwork) -> Result<(CitationNetwork, ComponentReport), GraphError> {
    let comps = components(net);
    let first = comps.first().ok_or(GraphError::EmptyNetwork)?;
    let keep: BTreeSet<&str> = first.iter().copied().collect();
    let report = ComponentReport {
        sizes: comps.iter().map(Vec::len).collect(),
    };
    Ok((net.induced(&keep), report))
}
