//! Community assignments and comparison metrics.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::ForwardingGraph;

/// A community assignment over dense node indices, with the parameters and
/// quality score of the run that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// node index -> community id; community ids are dense from 0.
    pub assignment: Vec<usize>,
    pub modularity: f64,
    pub resolution: f64,
    pub seed: u64,
    /// Outer Leiden iterations performed.
    pub iterations: usize,
    /// Modularity after each outer iteration (non-decreasing).
    pub modularity_sequence: Vec<f64>,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Members of each community, by community id.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.assignment.iter().enumerate() {
            out[c].push(node);
        }
        out
    }
}

/// Renumber arbitrary community labels to be dense from 0, ordered by each
/// community's smallest node index. Deterministic.
pub fn renumber(assignment: &mut [usize]) {
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut next = 0;
    for value in assignment.iter_mut() {
        let id = *remap.entry(*value).or_insert_with(|| {
            let id = next;
            next += 1;
            id
        });
        *value = id;
    }
}

/// Normalized mutual information between two assignments over the same
/// node set: 2·I(X;Y)/(H(X)+H(Y)), 1.0 when both are trivial and equal.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut pa: HashMap<usize, f64> = HashMap::new();
    let mut pb: HashMap<usize, f64> = HashMap::new();
    let w = 1.0 / n as f64;
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0.0) += w;
        *pa.entry(x).or_insert(0.0) += w;
        *pb.entry(y).or_insert(0.0) += w;
    }
    let entropy = |p: &HashMap<usize, f64>| -> f64 {
        p.values().map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 }).sum()
    };
    let ha = entropy(&pa);
    let hb = entropy(&pb);
    if ha + hb == 0.0 {
        // both partitions are single-community: identical clusterings
        return 1.0;
    }
    let mut mi = 0.0;
    for (&(x, y), &pxy) in &joint {
        let px = pa[&x];
        let py = pb[&y];
        if pxy > 0.0 {
            mi += pxy * (pxy / (px * py)).ln();
        }
    }
    (2.0 * mi / (ha + hb)).clamp(0.0, 1.0)
}

/// Write `communities.csv` (channel_id, community_id).
pub fn write_communities(graph: &ForwardingGraph, partition: &Partition, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["channel_id", "community_id"])?;
    for (idx, &community) in partition.assignment.iter().enumerate() {
        w.write_record([graph.node_id(idx).to_string(), community.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a community assignment back, aligned to `graph`'s node indexing.
pub fn read_communities(graph: &ForwardingGraph, path: &Path) -> Result<Vec<usize>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut assignment = vec![usize::MAX; graph.node_count()];
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let locator = format!("{}:{}", path.display(), idx + 2);
        let parse_err = |message: String| Error::Parse {
            locator: locator.clone(),
            message,
        };
        let channel: i64 = record
            .get(0)
            .unwrap_or_default()
            .parse()
            .map_err(|e| parse_err(format!("channel_id: {e}")))?;
        let community: usize = record
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|e| parse_err(format!("community_id: {e}")))?;
        let node = graph
            .node_index(channel)
            .ok_or_else(|| parse_err(format!("unknown channel {channel}")))?;
        assignment[node] = community;
    }
    if let Some(missing) = assignment.iter().position(|&c| c == usize::MAX) {
        return Err(Error::Parse {
            locator: path.display().to_string(),
            message: format!("channel {} missing from assignment", graph.node_id(missing)),
        });
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmi_identical_is_one() {
        let a = [0, 0, 1, 1, 2];
        assert!((nmi(&a, &a) - 1.0).abs() < 1e-12);
        // invariant under label permutation
        let b = [2, 2, 0, 0, 1];
        assert!((nmi(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_independent_is_low() {
        let a = [0, 0, 0, 0, 1, 1, 1, 1];
        let b = [0, 1, 0, 1, 0, 1, 0, 1];
        assert!(nmi(&a, &b) < 0.01);
    }

    #[test]
    fn renumber_is_dense_and_ordered() {
        let mut a = vec![7, 7, 3, 9, 3];
        renumber(&mut a);
        assert_eq!(a, vec![0, 0, 1, 2, 1]);
    }
}
