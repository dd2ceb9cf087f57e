use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CitationNetwork, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSlot {
    /// Dense rank of the publication year, oldest = 0.
    pub layer: u32,
    /// Order within the layer: in-degree descending, then id.
    pub position: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Layering {
    pub slots: BTreeMap<String, LayerSlot>,
}

impl Layering {
    pub fn layer_of(&self, id: &str) -> Option<u32> {
        self.slots.get(id).map(|s| s.layer)
    }

    pub fn layer_count(&self) -> u32 {
        self.slots.values().map(|s| s.layer + 1).max().unwrap_or(0)
    }

    /// Node ids of `layer` in position order.
    pub fn members(&self, layer: u32) -> Vec<&str> {
        let mut m: Vec<(&str, u32)> = self
            .slots
            .iter()
            .filter(|(_, s)| s.layer == layer)
            .map(|(id, s)| (id.as_str(), s.position))
            .collect();
        m.sort_by_key(|(_, p)| *p);
        m.into_iter().map(|(id, _)| id).collect()
    }
}

/// Assigns each node to a layer by publication-year rank.
pub fn hierarchical_layering(net: &CitationNetwork) -> Result<Layering, GraphError> {
    let missing: Vec<String> = net
        .nodes()
        .filter(|(_, a)| a.year.is_none())
        .map(|(id, _)| id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(GraphError::MissingYear(missing));
    }
    let years: BTreeSet<i32> = net.nodes().filter_map(|(_, a)| a.year).collect();
    let rank: BTreeMap<i32, u32> = years.iter().enumerate().map(|(i, y)| (*y, i as u32)).collect();
    let in_deg = net.in_degrees();

    let mut by_layer: BTreeMap<u32, Vec<(&str, usize)>> = BTreeMap::new();
    for (id, attrs) in net.nodes() {
        let layer = rank[&attrs.year.expect("checked above")];
        by_layer.entry(layer).or_default().push((id, in_deg[id]));
    }
    let mut slots = BTreeMap::new();
    for (layer, mut members) in by_layer {
        members.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (position, (id, _)) in members.into_iter().enumerate() {
            slots.insert(
                id.to_string(),
                LayerSlot {
                    layer,
                    position: position as u32,
                },
            );
        }
    }
    Ok(Layering { slots })
}

/// Edges whose citing paper is older than the cited one. Nodes without a
/// year are skipped.
pub fn chronology_violations(net: &CitationNetwork) -> Vec<(&str, &str)> {
    net.edges()
        .filter(|(a, b)| {
            let ya = net.attrs(a).and_then(|x| x.year);
            let yb = net.attrs(b).and_then(|x| x.year);
            matches!((ya, yb), (Some(ya), Some(yb)) if ya < yb)
        })
        .collect()
}
