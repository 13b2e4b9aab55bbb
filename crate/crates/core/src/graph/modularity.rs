//! Newman–Girvan weighted modularity with a resolution parameter, computed
//! on the undirected projection of the forwarding graph.

use crate::graph::{ForwardingGraph, UndirectedProjection};

/// Modularity of `assignment` (dense index -> community id) at resolution
/// `gamma`. An empty graph has modularity 0 by definition.
pub fn modularity(graph: &ForwardingGraph, assignment: &[usize], gamma: f64) -> f64 {
    projection_modularity(&graph.undirected_projection(), assignment, gamma)
}

/// Same, over a prebuilt projection: Q = Σ_c [ Σin_c/2m − γ·(Σtot_c/2m)² ]
/// where Σin_c counts both orientations of internal edges.
pub fn projection_modularity(
    projection: &UndirectedProjection,
    assignment: &[usize],
    gamma: f64,
) -> f64 {
    assert_eq!(
        assignment.len(),
        projection.node_count(),
        "assignment must cover every node"
    );
    if projection.two_m == 0.0 {
        return 0.0;
    }
    let communities = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; communities];
    let mut total = vec![0.0; communities];
    for (u, adj) in projection.adj.iter().enumerate() {
        let cu = assignment[u];
        total[cu] += projection.degree[u];
        for &(v, w) in adj {
            if assignment[v] == cu {
                internal[cu] += w;
            }
        }
    }
    let two_m = projection.two_m;
    (0..communities)
        .map(|c| internal[c] / two_m - gamma * (total[c] / two_m).powi(2))
        .sum()
}
