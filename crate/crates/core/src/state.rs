//! Runtime ion positions on a device graph.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::device::{DeviceGraph, EdgeId};
use crate::error::ShuttleError;

/// Index of an ion. Ions `0..num_qubits` carry the circuit qubits with the
/// same index; the rest are fillers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IonId(pub u32);

impl IonId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for IonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where every ion sits. Placement (ion -> edge) and occupancy
/// (edge -> ions, in arrival order) are kept consistent by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IonState {
    placement: Vec<EdgeId>,
    occupancy: Vec<Vec<IonId>>,
}

impl IonState {
    /// State with no ions on a graph with `num_edges` edges.
    pub fn empty(graph: &DeviceGraph) -> Self {
        IonState { placement: Vec::new(), occupancy: vec![Vec::new(); graph.num_edges()] }
    }

    /// Append an ion on `edge`; ions get consecutive ids in call order.
    pub fn add_ion(&mut self, graph: &DeviceGraph, edge: EdgeId) -> Result<IonId, ShuttleError> {
        if self.occupancy[edge.index()].len() >= graph.capacity(edge) as usize {
            return Err(ShuttleError::OverCapacity(edge));
        }
        let ion = IonId(self.placement.len() as u32);
        self.placement.push(edge);
        self.occupancy[edge.index()].push(ion);
        Ok(ion)
    }

    /// Rebuild a state from explicit (ion, edge) pairs; ids must be dense.
    pub fn from_placement(
        graph: &DeviceGraph,
        pairs: &[(IonId, EdgeId)],
    ) -> Result<Self, ShuttleError> {
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|(ion, _)| *ion);
        let mut state = Self::empty(graph);
        for (i, (ion, edge)) in sorted.iter().enumerate() {
            if ion.index() != i {
                return Err(ShuttleError::MissingIon(*edge));
            }
            state.add_ion(graph, *edge)?;
        }
        Ok(state)
    }

    pub fn num_ions(&self) -> u32 {
        self.placement.len() as u32
    }

    #[inline]
    pub fn ion_edge(&self, ion: IonId) -> EdgeId {
        self.placement[ion.index()]
    }

    #[inline]
    pub fn occupants(&self, edge: EdgeId) -> &[IonId] {
        &self.occupancy[edge.index()]
    }

    #[inline]
    pub fn is_free(&self, edge: EdgeId) -> bool {
        self.occupancy[edge.index()].is_empty()
    }

    /// Relocate a batch of ions simultaneously. Departures are processed
    /// before arrivals so rotations on fully occupied cycles work.
    pub fn apply(&mut self, movers: &[(IonId, EdgeId)]) {
        for (ion, _) in movers {
            let from = self.placement[ion.index()];
            self.occupancy[from.index()].retain(|i| i != ion);
        }
        for (ion, to) in movers {
            self.placement[ion.index()] = *to;
            self.occupancy[to.index()].push(*ion);
        }
    }

    pub fn placement_pairs(&self) -> Vec<(IonId, EdgeId)> {
        self.placement.iter().enumerate().map(|(i, e)| (IonId(i as u32), *e)).collect()
    }
}

/// Fill every memory-zone edge with one ion. Which ion lands on which edge is
/// a seed-determined permutation, so the seed controls where each qubit
/// starts.
pub fn initial_placement(graph: &DeviceGraph, seed: u64) -> IonState {
    let mz = graph.mz_edge_count();
    let mut ions: Vec<u32> = (0..mz).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ions.shuffle(&mut rng);
    let mut placement = vec![EdgeId(0); mz as usize];
    let mut occupancy = vec![Vec::new(); graph.num_edges()];
    for (edge, ion) in ions.into_iter().enumerate() {
        placement[ion as usize] = EdgeId(edge as u32);
        occupancy[edge].push(IonId(ion));
    }
    IonState { placement, occupancy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{ArchConfig, GridParams};

    fn graph_with_pz() -> DeviceGraph {
        let cfg = ArchConfig::with_default_pzs(GridParams { m: 3, n: 3, v: 1, h: 1 }, 1).unwrap();
        DeviceGraph::from_arch(&cfg).unwrap()
    }

    #[test]
    fn initial_placement_fills_every_mz_edge() {
        let g = graph_with_pz();
        let state = initial_placement(&g, 7);
        assert_eq!(state.num_ions(), 12);
        for e in 0..g.mz_edge_count() {
            assert_eq!(state.occupants(EdgeId(e)).len(), 1);
        }
        for e in g.mz_edge_count()..g.num_edges() as u32 {
            assert!(state.is_free(EdgeId(e)), "zone edge {e} should start empty");
        }
    }

    #[test]
    fn placement_is_seed_deterministic() {
        let g = graph_with_pz();
        assert_eq!(initial_placement(&g, 3), initial_placement(&g, 3));
    }

    #[test]
    fn different_seeds_give_different_permutations() {
        let g = DeviceGraph::build_grid(4, 4, 1, 1).unwrap();
        assert_ne!(initial_placement(&g, 1), initial_placement(&g, 2));
    }

    #[test]
    fn apply_rotates_a_full_loop() {
        let g = DeviceGraph::build_grid(2, 2, 1, 1).unwrap();
        let mut state = initial_placement(&g, 0);
        let before: Vec<EdgeId> = (0..4).map(|i| state.ion_edge(IonId(i))).collect();
        let movers: Vec<(IonId, EdgeId)> = (0..4u32)
            .map(|i| {
                let e = state.ion_edge(IonId(i));
                (IonId(i), EdgeId((e.0 + 1) % 4))
            })
            .collect();
        state.apply(&movers);
        for i in 0..4u32 {
            assert_eq!(state.ion_edge(IonId(i)).0, (before[i as usize].0 + 1) % 4);
            assert_eq!(state.occupants(state.ion_edge(IonId(i))).len(), 1);
        }
    }

    #[test]
    fn from_placement_round_trips() {
        let g = graph_with_pz();
        let state = initial_placement(&g, 11);
        let rebuilt = IonState::from_placement(&g, &state.placement_pairs()).unwrap();
        assert_eq!(rebuilt, state);
    }
}
