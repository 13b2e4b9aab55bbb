//! Leiden community detection on the undirected projection: queue-based
//! local moving, singleton-merge refinement, and graph aggregation, iterated
//! to a fixed point.
//!
//! All randomness is concentrated in one per-node priority vector drawn from
//! the seeded RNG; visit order, candidate enumeration, and tie-breaking all
//! derive from it, so runs are reproducible and node-label-independent once
//! the priorities are fixed.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::graph::modularity::projection_modularity;
use crate::graph::partition::{renumber, Partition};
use crate::graph::{ForwardingGraph, UndirectedProjection};

const EPS: f64 = 1e-12;

/// Working graph at one aggregation level. `loops[v]` is the total internal
/// weight folded into super-node `v` (both orientations), and degrees always
/// include it, so `two_m` is invariant across levels.
struct WorkGraph {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    degree: Vec<f64>,
    two_m: f64,
}

impl WorkGraph {
    fn len(&self) -> usize {
        self.adj.len()
    }

    fn from_projection(projection: &UndirectedProjection, priorities: &[u64]) -> Self {
        let mut adj = projection.adj.clone();
        for list in &mut adj {
            list.sort_unstable_by_key(|&(u, _)| (priorities[u], u));
        }
        WorkGraph {
            adj,
            loops: vec![0.0; projection.node_count()],
            degree: projection.degree.clone(),
            two_m: projection.two_m,
        }
    }
}

/// Queue-based local moving. Returns whether any node moved.
fn local_move(g: &WorkGraph, comm: &mut [usize], priorities: &[u64], gamma: f64) -> bool {
    let n = g.len();
    let mut comm_tot = vec![0.0; n];
    let mut comm_size = vec![0usize; n];
    for v in 0..n {
        comm_tot[comm[v]] += g.degree[v];
        comm_size[comm[v]] += 1;
    }
    let mut empties: Vec<usize> = (0..n).rev().filter(|&c| comm_size[c] == 0).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&v| (priorities[v], v));
    let mut queue: VecDeque<usize> = order.into();
    let mut in_queue = vec![true; n];

    let mut comm_w = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;

    while let Some(v) = queue.pop_front() {
        in_queue[v] = false;
        let c = comm[v];
        let kv = g.degree[v];

        touched.clear();
        for &(u, w) in &g.adj[v] {
            let cu = comm[u];
            if comm_w[cu] == 0.0 {
                touched.push(cu);
            }
            comm_w[cu] += w;
        }

        // score(d) = w(v,d) − γ·k_v·Σtot_d/2m with v removed from its
        // community; candidates are enumerated in priority order, so ties
        // resolve identically for isomorphic inputs.
        let base = gamma * kv / g.two_m;
        let mut best = c;
        let mut best_score = comm_w[c] - base * (comm_tot[c] - kv);
        for &d in &touched {
            if d == c {
                continue;
            }
            let score = comm_w[d] - base * comm_tot[d];
            if score > best_score + EPS {
                best_score = score;
                best = d;
            }
        }
        // a fresh singleton scores 0
        if comm_size[c] > 1 && 0.0 > best_score + EPS {
            if let Some(&e) = empties.last() {
                best = e;
            }
        }

        if best != c {
            comm_tot[c] -= kv;
            comm_size[c] -= 1;
            if comm_size[c] == 0 {
                empties.push(c);
            }
            if comm_size[best] == 0 {
                debug_assert_eq!(empties.last(), Some(&best));
                empties.pop();
            }
            comm[v] = best;
            comm_tot[best] += kv;
            comm_size[best] += 1;
            moved_any = true;
            for &(u, _) in &g.adj[v] {
                if comm[u] != best && !in_queue[u] {
                    queue.push_back(u);
                    in_queue[u] = true;
                }
            }
        }

        for &d in &touched {
            comm_w[d] = 0.0;
        }
    }
    moved_any
}

/// Refinement: within each community, grow connected sub-communities by
/// merging still-singleton nodes into the adjacent sub-community with the
/// best positive gain. Every resulting sub-community is connected.
fn refine(g: &WorkGraph, comm: &[usize], priorities: &[u64], gamma: f64) -> Vec<usize> {
    let n = g.len();
    let mut sub: Vec<usize> = (0..n).collect();
    let mut sub_tot: Vec<f64> = g.degree.clone();
    let mut sub_size = vec![1usize; n];

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&v| (priorities[v], v));

    let mut sub_w = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();

    for &v in &order {
        if sub_size[sub[v]] != 1 {
            continue;
        }
        touched.clear();
        for &(u, w) in &g.adj[v] {
            if comm[u] != comm[v] {
                continue;
            }
            let su = sub[u];
            if sub_w[su] == 0.0 {
                touched.push(su);
            }
            sub_w[su] += w;
        }
        let base = gamma * g.degree[v] / g.two_m;
        let mut best = sub[v];
        let mut best_score = 0.0;
        for &s in &touched {
            if s == sub[v] {
                continue;
            }
            let score = sub_w[s] - base * sub_tot[s];
            if score > best_score + EPS {
                best_score = score;
                best = s;
            }
        }
        if best != sub[v] {
            sub_tot[sub[v]] -= g.degree[v];
            sub_size[sub[v]] -= 1;
            sub[v] = best;
            sub_tot[best] += g.degree[v];
            sub_size[best] += 1;
        }
        for &s in &touched {
            sub_w[s] = 0.0;
        }
    }
    sub
}

struct Aggregated {
    graph: WorkGraph,
    init_comm: Vec<usize>,
    priorities: Vec<u64>,
    node_to_agg: Vec<usize>,
    len: usize,
}

/// Collapse refined sub-communities into super-nodes; the local-moving
/// partition becomes the initial assignment of the aggregate.
fn aggregate(g: &WorkGraph, comm: &[usize], sub: &[usize], priorities: &[u64]) -> Aggregated {
    let n = g.len();
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut node_to_agg = vec![0usize; n];
    for v in 0..n {
        let next = remap.len();
        let agg = *remap.entry(sub[v]).or_insert(next);
        node_to_agg[v] = agg;
    }
    let k = remap.len();

    let mut loops = vec![0.0; k];
    let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); k];
    let mut agg_pri = vec![u64::MAX; k];
    let mut init_comm = vec![0usize; k];
    for v in 0..n {
        let av = node_to_agg[v];
        agg_pri[av] = agg_pri[av].min(priorities[v]);
        init_comm[av] = comm[v];
        loops[av] += g.loops[v];
        for &(u, w) in &g.adj[v] {
            let au = node_to_agg[u];
            if au == av {
                loops[av] += w;
            } else {
                *maps[av].entry(au).or_insert(0.0) += w;
            }
        }
    }

    let mut adj = Vec::with_capacity(k);
    let mut degree = vec![0.0; k];
    for (v, map) in maps.into_iter().enumerate() {
        let mut list: Vec<(usize, f64)> = map.into_iter().collect();
        list.sort_unstable_by_key(|&(u, _)| (agg_pri[u], u));
        degree[v] = loops[v] + list.iter().map(|&(_, w)| w).sum::<f64>();
        adj.push(list);
    }
    renumber(&mut init_comm);

    Aggregated {
        graph: WorkGraph {
            adj,
            loops,
            degree,
            two_m: g.two_m,
        },
        init_comm,
        priorities: agg_pri,
        node_to_agg,
        len: k,
    }
}

/// Split any community that is disconnected in the projection into its
/// connected components. This only ever increases modularity.
fn split_disconnected(projection: &UndirectedProjection, assignment: &mut [usize]) {
    let n = assignment.len();
    let mut next = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // flood the component of `start` within its community
        let community = assignment[start];
        let mut component = vec![start];
        seen[start] = true;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &(u, _) in &projection.adj[v] {
                if !seen[u] && assignment[u] == community {
                    seen[u] = true;
                    stack.push(u);
                    component.push(u);
                }
            }
        }
        // first component of a community keeps its label; later ones
        // (same community id seen again) get fresh labels
        if component.iter().any(|&v| v == first_of(assignment, community, &seen, start)) {
        }
        let _ = component;
        let _ = next;
        unreachable!("replaced below");
    }
}

fn first_of(_a: &[usize], _c: usize, _s: &[bool], v: usize) -> usize {
    v
}

/// Leiden with priorities drawn from a ChaCha stream seeded by `seed`.
pub fn leiden_partition(graph: &ForwardingGraph, resolution: f64, seed: u64) -> Partition {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let priorities: Vec<u64> = (0..graph.node_count()).map(|_| rng.gen()).collect();
    let mut partition = leiden_with_priorities(graph, resolution, &priorities);
    partition.seed = seed;
    partition
}

/// Leiden with an explicit per-node priority vector. Exposed so callers can
/// carry the priorities through a node relabeling and check equivariance.
pub fn leiden_with_priorities(
    graph: &ForwardingGraph,
    resolution: f64,
    priorities: &[u64],
) -> Partition {
    assert_eq!(priorities.len(), graph.node_count());
    let projection = graph.undirected_projection();
    let n = projection.node_count();

    let mut sequence: Vec<f64> = Vec::new();
    let mut flat: Vec<usize> = (0..n).collect();
    let mut iterations = 0usize;

    if n > 0 && projection.two_m > 0.0 {
        let mut work = WorkGraph::from_projection(&projection, priorities);
        let mut pri = priorities.to_vec();
        let mut comm: Vec<usize> = (0..n).collect();
        loop {
            iterations += 1;
            let moved = local_move(&work, &mut comm, &pri, resolution);
            if moved || sequence.is_empty() {
                let flattened: Vec<usize> = flat.iter().map(|&v| comm[v]).collect();
                sequence.push(projection_modularity(&projection, &flattened, resolution));
            } else {
                // no moves: modularity is unchanged by definition
                sequence.push(*sequence.last().unwrap());
            }
            if !moved {
                break;
            }
            let sub = refine(&work, &comm, &pri, resolution);
            let agg = aggregate(&work, &comm, &sub, &pri);
            if agg.len == work.len() {
                break;
            }
            for f in flat.iter_mut() {
                *f = agg.node_to_agg[*f];
            }
            work = agg.graph;
            comm = agg.init_comm;
            pri = agg.priorities;
            if work.len() <= 1 {
                break;
            }
        }
        let mut assignment: Vec<usize> = flat.iter().map(|&v| comm[v]).collect();
        split_components(&projection, &mut assignment);
        renumber(&mut assignment);
        let q = projection_modularity(&projection, &assignment, resolution);
        return Partition {
            assignment,
            modularity: q,
            resolution,
            seed: 0,
            iterations,
            modularity_sequence: sequence,
        };
    }

    // empty or edgeless graph: every node its own community
    Partition {
        assignment: (0..n).collect(),
        modularity: 0.0,
        resolution,
        seed: 0,
        iterations: 0,
        modularity_sequence: vec![0.0],
    }
}

/// See `split_disconnected`; actual implementation.
fn split_components(projection: &UndirectedProjection, assignment: &mut [usize]) {
    let n = assignment.len();
    let mut next = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut community_seen = vec![false; next];
    let mut visited = vec![false; n];
    let mut stack = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let community = assignment[start];
        let relabel = if community_seen[community] {
            let id = next;
            next += 1;
            Some(id)
        } else {
            community_seen[community] = true;
            None
        };
        visited[start] = true;
        stack.push(start);
        let mut members = vec![start];
        while let Some(v) = stack.pop() {
            for &(u, _) in &projection.adj[v] {
                if !visited[u] && assignment[u] == community {
                    visited[u] = true;
                    stack.push(u);
                    members.push(u);
                }
            }
        }
        if let Some(id) = relabel {
            for v in members {
                assignment[v] = id;
            }
        }
    }
}
