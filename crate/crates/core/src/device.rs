//! Device graph: a grid-shaped memory zone with linear processing zones
//! attached at perimeter junctions.
//!
//! Edges are trap segments that hold ions; nodes are junctions (Major) or
//! intermediate points inside a linear segment (Minor). Memory-zone edges are
//! bidirectional with capacity one. Each processing zone contributes a one-way
//! entry chain, a core edge with capacity >= 2, and a one-way exit chain, all
//! anchored at the same boundary junction.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::DeviceError;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Index of a node in the device graph.
    NodeId
);
id_type!(
    /// Index of an edge in the device graph.
    EdgeId
);
id_type!(
    /// Index of a processing zone.
    PzId
);

/// Junctions are Major nodes; points subdividing a linear segment are Minor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Major,
    Minor,
}

/// Which part of the device an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Zone {
    /// Memory zone (the grid).
    Mz,
    /// Entry chain of a processing zone, one-way towards the core.
    PzEntry(PzId),
    /// Core edge of a processing zone where gates execute.
    PzCore(PzId),
    /// Exit chain of a processing zone, one-way towards the memory zone.
    PzExit(PzId),
}

impl Zone {
    /// The processing zone this edge belongs to, if any.
    pub fn pz(self) -> Option<PzId> {
        match self {
            Zone::Mz => None,
            Zone::PzEntry(p) | Zone::PzCore(p) | Zone::PzExit(p) => Some(p),
        }
    }

    pub fn is_mz(self) -> bool {
        matches!(self, Zone::Mz)
    }
}

#[derive(Debug, Clone)]
pub struct EdgeInfo {
    pub ends: (NodeId, NodeId),
    pub zone: Zone,
    pub capacity: u8,
    /// `Some((from, to))` marks a one-way edge traversable only from -> to.
    pub direction: Option<(NodeId, NodeId)>,
}

/// Static description of one processing zone.
///
/// `entry` is ordered from the boundary junction towards the core, `exit`
/// from the core back to the boundary junction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PzDescriptor {
    pub id: PzId,
    pub attach: NodeId,
    pub entry: Vec<EdgeId>,
    pub core: EdgeId,
    pub exit: Vec<EdgeId>,
    pub capacity: u8,
}

/// Grid parameters: an `m x n` junction grid with `v` edges per vertical
/// segment and `h` edges per horizontal segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridParams {
    pub m: u32,
    pub n: u32,
    pub v: u32,
    pub h: u32,
}

/// One processing-zone attachment in an architecture description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PzAttach {
    /// Node id of the boundary junction the zone hangs off.
    pub junction: u32,
    pub entry_len: u32,
    pub exit_len: u32,
    pub capacity: u8,
}

/// Serializable architecture description: grid plus processing zones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub grid: GridParams,
    pub pzs: Vec<PzAttach>,
}

impl ArchConfig {
    /// Architecture with `count` processing zones spread over the perimeter
    /// with the default entry/exit length of 2 and core capacity 2.
    pub fn with_default_pzs(grid: GridParams, count: u32) -> Result<Self, DeviceError> {
        Self::with_pzs(grid, count, 2, 2, 2)
    }

    pub fn with_pzs(
        grid: GridParams,
        count: u32,
        entry_len: u32,
        exit_len: u32,
        capacity: u8,
    ) -> Result<Self, DeviceError> {
        let probe = DeviceGraph::build_grid(grid.m, grid.n, grid.v, grid.h)?;
        let junctions = probe.default_pz_junctions(count);
        let pzs = junctions
            .into_iter()
            .map(|j| PzAttach { junction: j.0, entry_len, exit_len, capacity })
            .collect();
        Ok(ArchConfig { grid, pzs })
    }
}

/// The full device graph. Immutable once all zones are attached; runtime
/// state (ion positions, gate activity) lives elsewhere.
#[derive(Debug, Clone)]
pub struct DeviceGraph {
    grid: GridParams,
    nodes: Vec<NodeKind>,
    edges: Vec<EdgeInfo>,
    incident: Vec<Vec<EdgeId>>,
    mz_edges: u32,
    pzs: Vec<PzDescriptor>,
}

impl DeviceGraph {
    /// Build the memory-zone grid. Junction `(c, r)` gets node id `r * m + c`
    /// with columns `c < m` and rows `r < n`; vertical segments carry `v`
    /// edges, horizontal segments `h` edges.
    pub fn build_grid(m: u32, n: u32, v: u32, h: u32) -> Result<Self, DeviceError> {
        if m < 2 || n < 2 {
            return Err(DeviceError::GridTooSmall { m, n });
        }
        if v < 1 || h < 1 {
            return Err(DeviceError::SegmentTooShort { v, h });
        }
        let mut g = DeviceGraph {
            grid: GridParams { m, n, v, h },
            nodes: vec![NodeKind::Major; (m * n) as usize],
            edges: Vec::new(),
            incident: vec![Vec::new(); (m * n) as usize],
            mz_edges: 0,
            pzs: Vec::new(),
        };
        for c in 0..m {
            for r in 0..n - 1 {
                g.add_segment(g.junction(c, r), g.junction(c, r + 1), v);
            }
        }
        for r in 0..n {
            for c in 0..m - 1 {
                g.add_segment(g.junction(c, r), g.junction(c + 1, r), h);
            }
        }
        g.mz_edges = g.edges.len() as u32;
        Ok(g)
    }

    /// Build a graph from a serialized architecture description.
    pub fn from_arch(cfg: &ArchConfig) -> Result<Self, DeviceError> {
        let mut g = Self::build_grid(cfg.grid.m, cfg.grid.n, cfg.grid.v, cfg.grid.h)?;
        for pz in &cfg.pzs {
            g.attach_pz(NodeId(pz.junction), pz.entry_len, pz.exit_len, pz.capacity)?;
        }
        Ok(g)
    }

    /// Attach a processing zone at a perimeter junction. Entry and exit chains
    /// both connect to `junction`; all chain nodes are Major (Y-junctions).
    pub fn attach_pz(
        &mut self,
        junction: NodeId,
        entry_len: u32,
        exit_len: u32,
        capacity: u8,
    ) -> Result<PzId, DeviceError> {
        if junction.index() >= (self.grid.m * self.grid.n) as usize {
            return Err(DeviceError::UnknownNode(junction));
        }
        if !self.is_perimeter(junction) {
            return Err(DeviceError::NotPerimeter(junction));
        }
        if self.pzs.iter().any(|p| p.attach == junction) {
            return Err(DeviceError::JunctionOccupied(junction));
        }
        if capacity < 2 {
            return Err(DeviceError::CapacityTooSmall(capacity));
        }
        if entry_len < 1 || exit_len < 1 {
            return Err(DeviceError::EmptyAccessPath);
        }

        let id = PzId(self.pzs.len() as u32);
        let mut entry = Vec::with_capacity(entry_len as usize);
        let mut prev = junction;
        for _ in 0..entry_len {
            let next = self.add_node(NodeKind::Major);
            entry.push(self.add_edge(prev, next, Zone::PzEntry(id), 1, true));
            prev = next;
        }
        let core_far = self.add_node(NodeKind::Major);
        let core = self.add_edge(prev, core_far, Zone::PzCore(id), capacity, true);
        let mut exit = Vec::with_capacity(exit_len as usize);
        prev = core_far;
        for i in 0..exit_len {
            let next = if i + 1 == exit_len { junction } else { self.add_node(NodeKind::Major) };
            exit.push(self.add_edge(prev, next, Zone::PzExit(id), 1, true));
            prev = next;
        }
        self.pzs.push(PzDescriptor { id, attach: junction, entry, core, exit, capacity });
        Ok(id)
    }

    fn add_segment(&mut self, a: NodeId, b: NodeId, count: u32) {
        let mut prev = a;
        for i in 0..count {
            let next = if i + 1 == count { b } else { self.add_node(NodeKind::Minor) };
            self.add_edge(prev, next, Zone::Mz, 1, false);
            prev = next;
        }
    }

    fn add_node(&mut self, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(kind);
        self.incident.push(Vec::new());
        id
    }

    fn add_edge(&mut self, a: NodeId, b: NodeId, zone: Zone, capacity: u8, one_way: bool) -> EdgeId {
        let id = EdgeId(self.edges.len() as u32);
        let direction = one_way.then_some((a, b));
        self.edges.push(EdgeInfo { ends: (a, b), zone, capacity, direction });
        self.incident[a.index()].push(id);
        self.incident[b.index()].push(id);
        id
    }

    #[inline]
    pub fn junction(&self, c: u32, r: u32) -> NodeId {
        NodeId(r * self.grid.m + c)
    }

    pub fn grid(&self) -> GridParams {
        self.grid
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Memory-zone edges occupy ids `0..mz_edge_count()`.
    pub fn mz_edge_count(&self) -> u32 {
        self.mz_edges
    }

    pub fn node_kind(&self, n: NodeId) -> NodeKind {
        self.nodes[n.index()]
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeInfo {
        &self.edges[e.index()]
    }

    pub fn zone(&self, e: EdgeId) -> Zone {
        self.edges[e.index()].zone
    }

    pub fn capacity(&self, e: EdgeId) -> u8 {
        self.edges[e.index()].capacity
    }

    pub fn incident_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.incident[n.index()]
    }

    pub fn pzs(&self) -> &[PzDescriptor] {
        &self.pzs
    }

    pub fn pz(&self, id: PzId) -> &PzDescriptor {
        &self.pzs[id.index()]
    }

    /// The node shared by two distinct edges, if any.
    pub fn shared_node(&self, a: EdgeId, b: EdgeId) -> Option<NodeId> {
        if a == b {
            return None;
        }
        let ea = self.edges[a.index()].ends;
        let eb = self.edges[b.index()].ends;
        if ea.0 == eb.0 || ea.0 == eb.1 {
            Some(ea.0)
        } else if ea.1 == eb.0 || ea.1 == eb.1 {
            Some(ea.1)
        } else {
            None
        }
    }

    /// The endpoint of `e` that is not `n`.
    pub fn other_end(&self, e: EdgeId, n: NodeId) -> NodeId {
        let ends = self.edges[e.index()].ends;
        if ends.0 == n {
            ends.1
        } else {
            ends.0
        }
    }

    /// May an ion leave edge `e` through node `via`?
    #[inline]
    pub fn can_exit(&self, e: EdgeId, via: NodeId) -> bool {
        match self.edges[e.index()].direction {
            None => true,
            Some((_, to)) => to == via,
        }
    }

    /// May an ion enter edge `e` through node `via`?
    #[inline]
    pub fn can_enter(&self, e: EdgeId, via: NodeId) -> bool {
        match self.edges[e.index()].direction {
            None => true,
            Some((from, _)) => from == via,
        }
    }

    /// Edges an ion on `e` may move to in one step, with the transit node.
    /// Respects one-way entry/exit chains.
    pub fn edge_successors(&self, e: EdgeId) -> Vec<(EdgeId, NodeId)> {
        let ends = self.edges[e.index()].ends;
        let mut out = Vec::new();
        for via in [ends.0, ends.1] {
            if !self.can_exit(e, via) {
                continue;
            }
            for &f in self.incident_edges(via) {
                if f != e && self.can_enter(f, via) {
                    out.push((f, via));
                }
            }
        }
        out
    }

    pub fn is_perimeter(&self, n: NodeId) -> bool {
        let (m, gn) = (self.grid.m, self.grid.n);
        if n.index() >= (m * gn) as usize {
            return false;
        }
        let c = n.0 % m;
        let r = n.0 / m;
        c == 0 || c == m - 1 || r == 0 || r == gn - 1
    }

    /// Perimeter junctions enumerated clockwise starting at the mid-bottom
    /// junction `(m/2, 0)`.
    pub fn perimeter_junctions(&self) -> Vec<NodeId> {
        let (m, n) = (self.grid.m, self.grid.n);
        let mut tour = Vec::new();
        for c in 0..m {
            tour.push(self.junction(c, 0));
        }
        for r in 1..n {
            tour.push(self.junction(m - 1, r));
        }
        for c in (0..m - 1).rev() {
            tour.push(self.junction(c, n - 1));
        }
        for r in (1..n - 1).rev() {
            tour.push(self.junction(0, r));
        }
        tour.reverse();
        let start = self.junction(m / 2, 0);
        let pos = tour.iter().position(|&j| j == start).unwrap();
        tour.rotate_left(pos);
        tour
    }

    /// Default attachment points: zone `i` of `count` sits at perimeter index
    /// `floor(i * P / count)`.
    pub fn default_pz_junctions(&self, count: u32) -> Vec<NodeId> {
        let perim = self.perimeter_junctions();
        let p = perim.len() as u32;
        (0..count).map(|i| perim[(i * p / count) as usize]).collect()
    }

    /// Architecture description that reproduces this graph.
    pub fn to_arch(&self) -> ArchConfig {
        ArchConfig {
            grid: self.grid,
            pzs: self
                .pzs
                .iter()
                .map(|p| PzAttach {
                    junction: p.attach.0,
                    entry_len: p.entry.len() as u32,
                    exit_len: p.exit.len() as u32,
                    capacity: p.capacity,
                })
                .collect(),
        }
    }
}
