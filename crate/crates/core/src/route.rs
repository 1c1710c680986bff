//! Distances and routing tables over the edge-adjacency graph.
//!
//! Ions live on edges, so routing works on pairs of adjacent edges. All
//! distances count edge hops and respect the one-way entry/exit chains.

use std::collections::VecDeque;

use crate::device::{DeviceGraph, EdgeId, NodeId, PzId};

/// Edge-hop distance from `from` to `to`, or `None` if unreachable.
pub fn edge_distance(graph: &DeviceGraph, from: EdgeId, to: EdgeId) -> Option<u32> {
    if from == to {
        return Some(0);
    }
    let mut dist = vec![u32::MAX; graph.num_edges()];
    dist[from.index()] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(e) = queue.pop_front() {
        let d = dist[e.index()];
        for (f, _) in graph.edge_successors(e) {
            if dist[f.index()] == u32::MAX {
                if f == to {
                    return Some(d + 1);
                }
                dist[f.index()] = d + 1;
                queue.push_back(f);
            }
        }
    }
    None
}

/// Precomputed routing data for one device graph: per-zone distance-to-core
/// tables and the directed state graph used for cycle search.
///
/// A cycle-search state is (edge, entry endpoint): an ion pushed around a loop
/// enters each edge at one end and leaves at the other, so the same edge
/// appears as two states. State id = `edge * 2 + side` where side 0 means the
/// ion entered at `ends.0`.
pub struct Router {
    dist_to_core: Vec<Vec<u32>>,
    state_succ: Vec<Vec<u32>>,
    state_pred: Vec<Vec<u32>>,
    mz_edges: u32,
}

impl Router {
    pub fn new(graph: &DeviceGraph) -> Self {
        let n_edges = graph.num_edges();
        // Reverse adjacency for the distance-to-core tables.
        let mut pred: Vec<Vec<EdgeId>> = vec![Vec::new(); n_edges];
        for e in 0..n_edges as u32 {
            for (f, _) in graph.edge_successors(EdgeId(e)) {
                pred[f.index()].push(EdgeId(e));
            }
        }
        let dist_to_core = graph
            .pzs()
            .iter()
            .map(|pz| {
                let mut dist = vec![u32::MAX; n_edges];
                dist[pz.core.index()] = 0;
                let mut queue = VecDeque::from([pz.core]);
                while let Some(e) = queue.pop_front() {
                    let d = dist[e.index()];
                    for &p in &pred[e.index()] {
                        if dist[p.index()] == u32::MAX {
                            dist[p.index()] = d + 1;
                            queue.push_back(p);
                        }
                    }
                }
                dist
            })
            .collect();

        let mz = graph.mz_edge_count();
        let n_states = (mz as usize) * 2;
        let mut state_succ: Vec<Vec<u32>> = vec![Vec::new(); n_states];
        let mut state_pred: Vec<Vec<u32>> = vec![Vec::new(); n_states];
        for e in 0..mz {
            let edge = EdgeId(e);
            for side in 0..2u32 {
                let state = e * 2 + side;
                let entered = endpoint(graph, edge, side);
                let out = graph.other_end(edge, entered);
                for &f in graph.incident_edges(out) {
                    if f == edge || !graph.zone(f).is_mz() {
                        continue;
                    }
                    let f_side = side_of(graph, f, out);
                    let succ = f.0 * 2 + f_side;
                    state_succ[state as usize].push(succ);
                    state_pred[succ as usize].push(state);
                }
            }
        }
        Router { dist_to_core, state_succ, state_pred, mz_edges: mz }
    }

    /// Edge-hop distance from `edge` to the core of `pz`.
    pub fn distance_to_core(&self, pz: PzId, edge: EdgeId) -> Option<u32> {
        let d = self.dist_to_core[pz.index()][edge.index()];
        (d != u32::MAX).then_some(d)
    }

    pub fn num_pzs(&self) -> u32 {
        self.dist_to_core.len() as u32
    }

    pub(crate) fn mz_edge_count(&self) -> u32 {
        self.mz_edges
    }

    pub(crate) fn state_successors(&self, state: u32) -> &[u32] {
        &self.state_succ[state as usize]
    }

    pub(crate) fn state_predecessors(&self, state: u32) -> &[u32] {
        &self.state_pred[state as usize]
    }
}

#[inline]
pub(crate) fn endpoint(graph: &DeviceGraph, e: EdgeId, side: u32) -> NodeId {
    let ends = graph.edge(e).ends;
    if side == 0 {
        ends.0
    } else {
        ends.1
    }
}

#[inline]
pub(crate) fn side_of(graph: &DeviceGraph, e: EdgeId, n: NodeId) -> u32 {
    if graph.edge(e).ends.0 == n {
        0
    } else {
        1
    }
}
