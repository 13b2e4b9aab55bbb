//! Forwarding-graph analytics: graph construction, modularity, Leiden
//! community detection, HITS ranking, and community flagging.

pub mod flags;
pub mod hits;
pub mod leiden;
pub mod modularity;
pub mod partition;

use std::collections::HashMap;
use std::path::Path;

use crate::corpus::ChannelRecord;
use crate::error::{Error, Result};

pub use flags::{flag_communities, CommunityFlag, CommunityFlagReport};
pub use hits::{hits, HitsScores};
pub use leiden::{leiden_partition, leiden_with_priorities};
pub use modularity::modularity;
pub use partition::{nmi, Partition};

/// Directed weighted forwarding graph over dense node indices; node `u` has
/// an edge to `v` weighted by how many of `u`'s messages were forwarded
/// from `v`.
#[derive(Debug, Clone)]
pub struct ForwardingGraph {
    nodes: Vec<i64>,
    index: HashMap<i64, usize>,
    out_adj: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
    pub dropped_external_forwards: u64,
    pub self_forwards: u64,
}

impl ForwardingGraph {
    /// Build from a corpus. With `binary_edges` every edge weight is 1
    /// regardless of forward counts.
    pub fn build(channels: &[ChannelRecord], binary_edges: bool) -> Self {
        let nodes: Vec<i64> = channels.iter().map(|c| c.channel_id).collect();
        let index: HashMap<i64, usize> =
            nodes.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut weights: Vec<HashMap<usize, f64>> = vec![HashMap::new(); nodes.len()];
        let mut dropped = 0u64;
        let mut self_forwards = 0u64;

        for channel in channels {
            let u = index[&channel.channel_id];
            for message in &channel.messages {
                let Some(origin) = message.forwarded_from else {
                    continue;
                };
                if origin == channel.channel_id {
                    self_forwards += 1;
                    continue;
                }
                match index.get(&origin) {
                    Some(&v) => *weights[u].entry(v).or_insert(0.0) += 1.0,
                    None => dropped += 1,
                }
            }
        }

        let mut out_adj = Vec::with_capacity(nodes.len());
        let mut edge_count = 0;
        for w in weights {
            let mut adj: Vec<(usize, f64)> = w
                .into_iter()
                .map(|(v, w)| (v, if binary_edges { 1.0 } else { w }))
                .collect();
            adj.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            edge_count += adj.len();
            out_adj.push(adj);
        }

        ForwardingGraph {
            nodes,
            index,
            out_adj,
            edge_count,
            dropped_external_forwards: dropped,
            self_forwards,
        }
    }

    /// Build directly from channel-id edges (deduping by summing weights).
    pub fn from_edges(mut nodes: Vec<i64>, edges: &[(i64, i64, f64)]) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        let index: HashMap<i64, usize> =
            nodes.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut weights: Vec<HashMap<usize, f64>> = vec![HashMap::new(); nodes.len()];
        let mut dropped = 0u64;
        let mut self_forwards = 0u64;
        for (src, dst, w) in edges {
            if src == dst {
                self_forwards += 1;
                continue;
            }
            match (index.get(src), index.get(dst)) {
                (Some(&u), Some(&v)) => *weights[u].entry(v).or_insert(0.0) += w,
                _ => dropped += 1,
            }
        }
        let mut out_adj = Vec::with_capacity(nodes.len());
        let mut edge_count = 0;
        for w in weights {
            let mut adj: Vec<(usize, f64)> = w.into_iter().collect();
            adj.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            edge_count += adj.len();
            out_adj.push(adj);
        }
        ForwardingGraph {
            nodes,
            index,
            out_adj,
            edge_count,
            dropped_external_forwards: dropped,
            self_forwards,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn node_ids(&self) -> &[i64] {
        &self.nodes
    }

    pub fn node_id(&self, idx: usize) -> i64 {
        self.nodes[idx]
    }

    pub fn node_index(&self, channel_id: i64) -> Option<usize> {
        self.index.get(&channel_id).copied()
    }

    pub fn out_edges(&self, u: usize) -> &[(usize, f64)] {
        &self.out_adj[u]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().map(move |&(v, w)| (u, v, w)))
    }

    /// Undirected projection `A = W + Wᵀ` used by modularity and Leiden.
    pub fn undirected_projection(&self) -> UndirectedProjection {
        let n = self.node_count();
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        for (u, v, w) in self.edges() {
            *maps[u].entry(v).or_insert(0.0) += w;
            *maps[v].entry(u).or_insert(0.0) += w;
        }
        let mut adj = Vec::with_capacity(n);
        let mut degree = vec![0.0; n];
        let mut two_m = 0.0;
        for (u, map) in maps.into_iter().enumerate() {
            let mut list: Vec<(usize, f64)> = map.into_iter().collect();
            list.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            degree[u] = list.iter().map(|&(_, w)| w).sum();
            two_m += degree[u];
            adj.push(list);
        }
        UndirectedProjection { adj, degree, two_m }
    }
}

/// Symmetric weighted adjacency with per-node degrees; `two_m` is the sum
/// of all degrees.
#[derive(Debug, Clone)]
pub struct UndirectedProjection {
    pub adj: Vec<Vec<(usize, f64)>>,
    pub degree: Vec<f64>,
    pub two_m: f64,
}

impl UndirectedProjection {
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }
}

/// Write `edges.csv` (src, dst, weight) using channel ids.
pub fn write_edges(graph: &ForwardingGraph, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["src", "dst", "weight"])?;
    for (u, v, weight) in graph.edges() {
        w.write_record([
            graph.node_id(u).to_string(),
            graph.node_id(v).to_string(),
            format_weight(weight),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a graph back from `edges.csv`, including isolated nodes listed in
/// `node_ids` (edges alone cannot carry them).
pub fn read_edges(path: &Path, extra_nodes: &[i64]) -> Result<ForwardingGraph> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut edges = Vec::new();
    let mut nodes: Vec<i64> = extra_nodes.to_vec();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let locator = format!("{}:{}", path.display(), idx + 2);
        let parse_err = |message: String| Error::Parse {
            locator: locator.clone(),
            message,
        };
        let src: i64 = record
            .get(0)
            .unwrap_or_default()
            .parse()
            .map_err(|e| parse_err(format!("src: {e}")))?;
        let dst: i64 = record
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|e| parse_err(format!("dst: {e}")))?;
        let weight: f64 = record
            .get(2)
            .unwrap_or_default()
            .parse()
            .map_err(|e| parse_err(format!("weight: {e}")))?;
        nodes.push(src);
        nodes.push(dst);
        edges.push((src, dst, weight));
    }
    Ok(ForwardingGraph::from_edges(nodes, &edges))
}

/// Fixed decimal formatting shared by graph outputs (reports must be
/// byte-identical across runs).
pub fn format_weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        format!("{w}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::MessageRecord;
    use chrono::{TimeZone, Utc};

    fn channel(id: i64, forwards: &[(i64, Option<i64>)]) -> ChannelRecord {
        ChannelRecord {
            channel_id: id,
            username: None,
            title: format!("c{id}"),
            description: String::new(),
            creation_date: Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap(),
            messages: forwards
                .iter()
                .enumerate()
                .map(|(i, (mid, fwd))| MessageRecord {
                    message_id: *mid + i as i64,
                    timestamp: Utc.with_ymd_and_hms(2020, 1, 2, 0, 0, i as u32).unwrap(),
                    text: String::new(),
                    forwarded_from: *fwd,
                })
                .collect(),
        }
    }

    #[test]
    fn counts_forward_weights() {
        let corpus = vec![
            channel(1, &[(1, Some(2)), (10, Some(2)), (20, Some(2))]),
            channel(2, &[(1, None)]),
        ];
        let g = ForwardingGraph::build(&corpus, false);
        let u = g.node_index(1).unwrap();
        let v = g.node_index(2).unwrap();
        assert_eq!(g.out_edges(u), &[(v, 3.0)]);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn external_forwards_are_dropped_and_counted() {
        let corpus = vec![channel(1, &[(1, Some(99))])];
        let g = ForwardingGraph::build(&corpus, false);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.dropped_external_forwards, 1);
    }

    #[test]
    fn self_forwards_excluded() {
        let corpus = vec![channel(1, &[(1, Some(1))])];
        let g = ForwardingGraph::build(&corpus, false);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.self_forwards, 1);
    }

    #[test]
    fn corpus_without_forwards_is_edgeless() {
        let corpus = vec![channel(1, &[(1, None)]), channel(2, &[])];
        let g = ForwardingGraph::build(&corpus, false);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn binary_edges_flatten_weights() {
        let corpus = vec![
            channel(1, &[(1, Some(2)), (10, Some(2))]),
            channel(2, &[]),
        ];
        let g = ForwardingGraph::build(&corpus, true);
        let u = g.node_index(1).unwrap();
        assert_eq!(g.out_edges(u)[0].1, 1.0);
    }

    #[test]
    fn projection_symmetrizes() {
        let g = ForwardingGraph::from_edges(vec![1, 2], &[(1, 2, 2.0), (2, 1, 1.0)]);
        let p = g.undirected_projection();
        assert_eq!(p.adj[0], vec![(1, 3.0)]);
        assert_eq!(p.adj[1], vec![(0, 3.0)]);
        assert_eq!(p.two_m, 6.0);
    }
}
