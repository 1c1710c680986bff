//! One time step of ion motion: cycle rotations in the memory zone, directed
//! path shifts through processing zones, and greedy conflict resolution.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::device::{DeviceGraph, EdgeId, GridParams, NodeId, PzId, Zone};
use crate::error::ShuttleError;
use crate::route::{side_of, Router};
use crate::state::{IonId, IonState};

/// A simultaneous one-edge shift of every ion on the listed edges.
///
/// `Cycle` is a closed rotation: the ion on `edges[i]` advances to
/// `edges[i+1]` (wrapping). `Path` is an open chain shifting ions toward the
/// final edge; ions already on the final edge stay put. `picks` designates the
/// moving ion for any non-terminal edge holding more than one (only PZ cores
/// can).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Move {
    Cycle {
        edges: Vec<EdgeId>,
    },
    Path {
        edges: Vec<EdgeId>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        picks: Vec<(EdgeId, IonId)>,
    },
}

impl Move {
    pub fn edges(&self) -> &[EdgeId] {
        match self {
            Move::Cycle { edges } | Move::Path { edges, .. } => edges,
        }
    }

    pub fn is_cycle(&self) -> bool {
        matches!(self, Move::Cycle { .. })
    }

    /// Processing zones whose entry/exit/core edges this move uses.
    pub fn pzs_touched(&self, graph: &DeviceGraph) -> Vec<PzId> {
        let mut out: Vec<PzId> = self
            .edges()
            .iter()
            .filter_map(|e| graph.zone(*e).pz())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Within-move validity: consecutive edges chain through distinct transit
/// nodes, no edge repeats, no transit node repeats, one-way directions are
/// respected, and cycles stay inside the memory zone.
pub(crate) fn check_move(graph: &DeviceGraph, mv: &Move) -> Result<(), ShuttleError> {
    let edges = mv.edges();
    let closed = mv.is_cycle();
    if edges.len() < 2 {
        let e = edges.first().copied().unwrap_or(EdgeId(0));
        return Err(ShuttleError::NotAdjacent(e, e));
    }
    let mut seen_edges = vec![false; graph.num_edges()];
    for &e in edges {
        if seen_edges[e.index()] {
            return Err(ShuttleError::NotAdjacent(e, e));
        }
        seen_edges[e.index()] = true;
        if closed && !graph.zone(e).is_mz() {
            return Err(ShuttleError::NotAdjacent(e, e));
        }
    }
    let hops = if closed { edges.len() } else { edges.len() - 1 };
    let mut transits: Vec<NodeId> = Vec::with_capacity(hops);
    for i in 0..hops {
        let a = edges[i];
        let b = edges[(i + 1) % edges.len()];
        let via = graph
            .shared_node(a, b)
            .ok_or(ShuttleError::NotAdjacent(a, b))?;
        if !graph.can_exit(a, via) || !graph.can_enter(b, via) {
            return Err(ShuttleError::NotAdjacent(a, b));
        }
        transits.push(via);
    }
    // an ion must leave each edge at the opposite end from where it entered
    let pairs = if closed { transits.len() } else { transits.len().saturating_sub(1) };
    for i in 0..pairs {
        let j = (i + 1) % transits.len();
        if transits[i] == transits[j] {
            return Err(ShuttleError::NotAdjacent(edges[(i + 1) % edges.len()], edges[(i + 1) % edges.len()]));
        }
    }
    let mut sorted = transits.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != transits.len() {
        return Err(ShuttleError::NotAdjacent(edges[0], edges[0]));
    }
    Ok(())
}

/// Next hop for an ion heading to a processing-zone core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextHop {
    /// Already on the target core.
    Arrived,
    /// Successor edge on a shortest path to the core.
    Step(EdgeId),
    /// No path (malformed device).
    Unreachable,
}

/// Successor edge on a shortest legal path from the ion's edge to `pz`'s
/// core; ties go to the lowest edge id. Routes only through the memory zone
/// and the target zone's own paths.
pub fn desired_next_edge(
    graph: &DeviceGraph,
    router: &Router,
    state: &IonState,
    ion: IonId,
    pz: PzId,
) -> NextHop {
    let e = state.ion_edge(ion);
    if e == graph.pz(pz).core {
        return NextHop::Arrived;
    }
    let mut best: Option<(u32, EdgeId)> = None;
    for (f, _) in graph.edge_successors(e) {
        let zone = graph.zone(f);
        if !zone.is_mz() && zone.pz() != Some(pz) {
            continue;
        }
        if let Some(d) = router.distance_to_core(pz, f) {
            if best.map_or(true, |(bd, bf)| (d, f.0) < (bd, bf.0)) {
                best = Some((d, f));
            }
        }
    }
    match best {
        Some((_, f)) => NextHop::Step(f),
        None => NextHop::Unreachable,
    }
}

/// Longest rotation cycle worth searching for on this grid: enough for a
/// single-cell loop, a straight junction crossing (two stacked cells), and
/// the grid's longer dimension.
pub fn cycle_length_cap(grid: &GridParams) -> u32 {
    let seg = grid.v.max(grid.h);
    let a = 2 * (seg + 1) + 2 * grid.m.min(grid.n);
    let b = 2 * (grid.v + grid.h) + 2 * seg + 2;
    a.max(b)
}

/// Shortest closed rotation through the ion's edge whose first hop is
/// `first_step`; ties resolved toward the lexicographically smallest edge
/// sequence. Fails if no cycle of at most `cap` edges exists.
pub fn find_cycle(
    graph: &DeviceGraph,
    router: &Router,
    state: &IonState,
    ion: IonId,
    first_step: EdgeId,
    cap: u32,
) -> Result<Move, ShuttleError> {
    let start = state.ion_edge(ion);
    if start == first_step || !graph.zone(start).is_mz() || !graph.zone(first_step).is_mz() {
        return Err(ShuttleError::NotAdjacent(start, first_step));
    }
    let Some(u) = graph.shared_node(start, first_step) else {
        return Err(ShuttleError::NotAdjacent(start, first_step));
    };
    let no_cycle = ShuttleError::NoCycle { start, first: first_step, cap };
    let s0 = (first_step.0 * 2 + side_of(graph, first_step, u)) as usize;
    let b = graph.other_end(start, u);
    let goal = (start.0 * 2 + side_of(graph, start, b)) as usize;

    // Backward BFS from the goal over the rotation-state graph. States of the
    // start and first-step edges may not appear mid-cycle (the move would
    // reuse the edge), so they are never relaxed.
    let n_states = (router.mz_edge_count() * 2) as usize;
    let mut dist = vec![u32::MAX; n_states];
    dist[goal] = 0;
    let mut queue = VecDeque::from([goal]);
    while let Some(s) = queue.pop_front() {
        if dist[s] + 1 > cap.saturating_sub(1) {
            continue;
        }
        for &p in router.state_predecessors(s as u32) {
            let p = p as usize;
            let edge = (p / 2) as u32;
            if dist[p] != u32::MAX || edge == start.0 || (edge == first_step.0 && p != s0) {
                continue;
            }
            dist[p] = dist[s] + 1;
            queue.push_back(p);
        }
    }
    if dist[s0] == u32::MAX {
        return Err(no_cycle);
    }

    let mut edges = vec![start, first_step];
    let mut cur = s0;
    while dist[cur] > 0 {
        let mut next: Option<usize> = None;
        for &t in router.state_successors(cur as u32) {
            let t = t as usize;
            if dist[t] != u32::MAX
                && dist[t] == dist[cur] - 1
                && next.map_or(true, |n| t / 2 < n / 2)
            {
                next = Some(t);
            }
        }
        cur = next.ok_or(no_cycle.clone())?;
        if dist[cur] == 0 {
            break;
        }
        edges.push(EdgeId((cur / 2) as u32));
    }
    let mv = Move::Cycle { edges };
    check_move(graph, &mv).map_err(|_| no_cycle)?;
    Ok(mv)
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryPlan {
    Admissible(Move),
    /// Entry chain and core saturated; needs a simultaneous exit.
    Blocked,
}

/// Path moving an ion (and everything queued ahead of it) one edge deeper
/// into `pz`. The ion must sit on the zone's entry chain or on the memory
/// edge facing its mouth.
pub fn plan_entry_path(
    graph: &DeviceGraph,
    state: &IonState,
    ion: IonId,
    pz: PzId,
) -> Result<EntryPlan, ShuttleError> {
    let desc = graph.pz(pz);
    let e = state.ion_edge(ion);
    let mut chain: Vec<EdgeId> = Vec::new();
    match graph.zone(e) {
        Zone::PzEntry(p) if p == pz => {
            let pos = desc.entry.iter().position(|x| *x == e).unwrap();
            chain.extend(&desc.entry[pos..]);
        }
        Zone::Mz => {
            let mouth = desc.entry[0];
            if graph.shared_node(e, mouth) != Some(desc.attach) {
                return Err(ShuttleError::NotAdjacent(e, mouth));
            }
            chain.push(e);
            chain.extend(&desc.entry);
        }
        _ => return Err(ShuttleError::IonNotInZone(ion.0, pz.0)),
    }
    chain.push(desc.core);

    if state.occupants(desc.core).len() < desc.capacity as usize {
        return Ok(EntryPlan::Admissible(Move::Path { edges: chain, picks: Vec::new() }));
    }
    // full core: compact the queue into the first gap on the chain
    for i in 1..chain.len() - 1 {
        if state.is_free(chain[i]) {
            chain.truncate(i + 1);
            return Ok(EntryPlan::Admissible(Move::Path { edges: chain, picks: Vec::new() }));
        }
    }
    Ok(EntryPlan::Blocked)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExitPlan {
    Admissible(Move),
    /// No free memory edge reachable; retry later.
    Congested,
}

/// Path draining `ion` out of `pz`: the remaining exit chain plus the
/// shortest memory-zone stretch from the boundary junction to the nearest
/// free edge (ties to the lowest edge id).
pub fn plan_exit_path(
    graph: &DeviceGraph,
    router: &Router,
    state: &IonState,
    pz: PzId,
    ion: IonId,
) -> Result<ExitPlan, ShuttleError> {
    let desc = graph.pz(pz);
    let e = state.ion_edge(ion);
    let mut chain: Vec<EdgeId> = Vec::new();
    let mut picks: Vec<(EdgeId, IonId)> = Vec::new();
    match graph.zone(e) {
        Zone::PzCore(p) if p == pz => {
            chain.push(desc.core);
            chain.extend(&desc.exit);
            if state.occupants(desc.core).len() > 1 {
                picks.push((desc.core, ion));
            }
        }
        Zone::PzExit(p) if p == pz => {
            let pos = desc.exit.iter().position(|x| *x == e).unwrap();
            chain.extend(&desc.exit[pos..]);
        }
        _ => return Err(ShuttleError::IonNotInZone(ion.0, pz.0)),
    }

    // BFS outward from the boundary junction over memory-zone states.
    let n_states = (router.mz_edge_count() * 2) as usize;
    let mut dist = vec![u32::MAX; n_states];
    let mut parent = vec![usize::MAX; n_states];
    let mut queue = VecDeque::new();
    for &f in graph.incident_edges(desc.attach) {
        if graph.zone(f).is_mz() {
            let s = (f.0 * 2 + side_of(graph, f, desc.attach)) as usize;
            if dist[s] == u32::MAX {
                dist[s] = 1;
                queue.push_back(s);
            }
        }
    }
    while let Some(s) = queue.pop_front() {
        for &t in router.state_successors(s as u32) {
            let t = t as usize;
            if dist[t] == u32::MAX {
                dist[t] = dist[s] + 1;
                parent[t] = s;
                queue.push_back(t);
            }
        }
    }
    let mut best: Option<(u32, u32, usize)> = None;
    for f in 0..router.mz_edge_count() {
        if !state.is_free(EdgeId(f)) {
            continue;
        }
        for side in 0..2 {
            let s = (f * 2 + side) as usize;
            if dist[s] != u32::MAX {
                let cand = (dist[s], f, s);
                if best.map_or(true, |b| cand < b) {
                    best = Some(cand);
                }
            }
        }
    }
    let Some((_, _, target)) = best else {
        return Ok(ExitPlan::Congested);
    };
    let mut tail = Vec::new();
    let mut cur = target;
    loop {
        tail.push(EdgeId((cur / 2) as u32));
        if dist[cur] == 1 {
            break;
        }
        cur = parent[cur];
    }
    tail.reverse();
    chain.extend(tail);
    let mv = Move::Path { edges: chain, picks };
    match check_move(graph, &mv) {
        Ok(()) => Ok(ExitPlan::Admissible(mv)),
        Err(_) => Ok(ExitPlan::Congested),
    }
}

/// What the orchestration layer wants from one ion this step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueAction {
    /// Bring the ion toward the target zone's core.
    Enter,
    /// Drain the ion out of the target zone.
    Exit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueEntry {
    pub ion: IonId,
    pub target: PzId,
    pub action: QueueAction,
}

struct Claims {
    edges: Vec<bool>,
    nodes: Vec<bool>,
}

impl Claims {
    fn new(graph: &DeviceGraph) -> Self {
        Claims { edges: vec![false; graph.num_edges()], nodes: vec![false; graph.num_nodes()] }
    }

    fn rebuild(&mut self, graph: &DeviceGraph, moves: &[Move]) {
        self.edges.fill(false);
        self.nodes.fill(false);
        for mv in moves {
            self.add(graph, mv);
        }
    }

    fn add(&mut self, graph: &DeviceGraph, mv: &Move) {
        for &e in mv.edges() {
            self.edges[e.index()] = true;
            let (a, b) = graph.edge(e).ends;
            self.nodes[a.index()] = true;
            self.nodes[b.index()] = true;
        }
    }

    fn disjoint(&self, graph: &DeviceGraph, mv: &Move) -> bool {
        mv.edges().iter().all(|&e| {
            let (a, b) = graph.edge(e).ends;
            !self.edges[e.index()] && !self.nodes[a.index()] && !self.nodes[b.index()]
        })
    }
}

fn touches_busy(graph: &DeviceGraph, mv: &Move, busy: &[bool]) -> bool {
    mv.pzs_touched(graph).iter().any(|p| busy[p.index()])
}

/// Build the move set for one time step: walk the priority queue, plan each
/// ion's move from its current location, and admit it iff it is disjoint
/// from everything already admitted and touches no gate-busy zone. An entry
/// blocked by a full core merges with an already-admitted drain of the same
/// zone when the combined push is itself a legal move.
pub fn plan_timestep(
    graph: &DeviceGraph,
    router: &Router,
    state: &IonState,
    queue: &[QueueEntry],
    busy: &[bool],
    cap: u32,
) -> Vec<Move> {
    let mut admitted: Vec<Move> = Vec::new();
    let mut drains: Vec<Option<usize>> = vec![None; graph.pzs().len()];
    let mut claims = Claims::new(graph);

    for entry in queue {
        let e = state.ion_edge(entry.ion);
        let zone = graph.zone(e);
        let planned: Option<Move> = match entry.action {
            QueueAction::Exit => match zone {
                Zone::PzCore(p) | Zone::PzExit(p) if p == entry.target && !busy[p.index()] => {
                    match plan_exit_path(graph, router, state, p, entry.ion) {
                        Ok(ExitPlan::Admissible(mv)) => Some(mv),
                        _ => None,
                    }
                }
                Zone::PzEntry(p) if p == entry.target && !busy[p.index()] => {
                    match plan_entry_path(graph, state, entry.ion, p) {
                        Ok(EntryPlan::Admissible(mv)) => Some(mv),
                        _ => None,
                    }
                }
                _ => None,
            },
            QueueAction::Enter => match zone {
                Zone::PzCore(p) if p == entry.target => None,
                Zone::PzCore(p) | Zone::PzExit(p) => {
                    // stuck inside (or leaving) the wrong zone: drain first
                    if busy[p.index()] {
                        None
                    } else {
                        match plan_exit_path(graph, router, state, p, entry.ion) {
                            Ok(ExitPlan::Admissible(mv)) => Some(mv),
                            _ => None,
                        }
                    }
                }
                Zone::PzEntry(p) => {
                    // entry chains are one-way: push on toward that core
                    if busy[p.index()] {
                        None
                    } else {
                        match plan_entry_path(graph, state, entry.ion, p) {
                            Ok(EntryPlan::Admissible(mv)) => Some(mv),
                            Ok(EntryPlan::Blocked) => {
                                merge_entry_drain(graph, state, entry.ion, p, &mut admitted, &mut drains, &mut claims)
                            }
                            Err(_) => None,
                        }
                    }
                }
                Zone::Mz => match desired_next_edge(graph, router, state, entry.ion, entry.target) {
                    NextHop::Step(next) if graph.zone(next).is_mz() => {
                        find_cycle(graph, router, state, entry.ion, next, cap).ok()
                    }
                    NextHop::Step(next) => {
                        let p = graph.zone(next).pz().unwrap();
                        if busy[p.index()] {
                            None
                        } else {
                            match plan_entry_path(graph, state, entry.ion, p) {
                                Ok(EntryPlan::Admissible(mv)) => Some(mv),
                                Ok(EntryPlan::Blocked) => merge_entry_drain(
                                    graph, state, entry.ion, p, &mut admitted, &mut drains, &mut claims,
                                ),
                                Err(_) => None,
                            }
                        }
                    }
                    _ => None,
                },
            },
        };
        let Some(mv) = planned else { continue };
        if touches_busy(graph, &mv, busy) || !claims.disjoint(graph, &mv) {
            continue;
        }
        debug_assert!(check_move(graph, &mv).is_ok());
        claims.add(graph, &mv);
        if let Move::Path { edges, .. } = &mv {
            if let Zone::PzCore(p) = graph.zone(edges[0]) {
                drains[p.index()] = Some(admitted.len());
            }
        }
        admitted.push(mv);
    }
    admitted
}

/// Try to extend an admitted core drain of `pz` with the blocked entering
/// ion's chain segment, forming one combined push. Returns `None` (and leaves
/// the drain as-is) when the combination is illegal.
fn merge_entry_drain(
    graph: &DeviceGraph,
    state: &IonState,
    ion: IonId,
    pz: PzId,
    admitted: &mut [Move],
    drains: &mut [Option<usize>],
    claims: &mut Claims,
) -> Option<Move> {
    let ix = drains[pz.index()]?;
    let desc = graph.pz(pz);
    let e = state.ion_edge(ion);
    let mut segment: Vec<EdgeId> = Vec::new();
    match graph.zone(e) {
        Zone::PzEntry(p) if p == pz => {
            let pos = desc.entry.iter().position(|x| *x == e).unwrap();
            segment.extend(&desc.entry[pos..]);
        }
        Zone::Mz => {
            segment.push(e);
            segment.extend(&desc.entry);
        }
        _ => return None,
    }
    let Move::Path { edges: drain_edges, picks } = &admitted[ix] else {
        return None;
    };
    if drain_edges[0] != desc.core {
        return None;
    }
    let mut edges = segment;
    edges.extend(drain_edges);
    let merged = Move::Path { edges, picks: picks.clone() };
    if check_move(graph, &merged).is_err() {
        return None;
    }
    let others: Vec<Move> = admitted
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ix)
        .map(|(_, m)| m.clone())
        .collect();
    claims.rebuild(graph, &others);
    if !claims.disjoint(graph, &merged) {
        claims.rebuild(graph, admitted);
        return None;
    }
    admitted[ix] = merged;
    claims.rebuild(graph, admitted);
    // the merged move replaces the drain in place; nothing new to admit
    None
}

/// Apply a planned step. Moves must be pairwise disjoint and individually
/// valid; violations surface as hard errors.
pub fn execute_moves(
    graph: &DeviceGraph,
    state: &mut IonState,
    moves: &[Move],
) -> Result<(), ShuttleError> {
    let mut relocations: Vec<(IonId, EdgeId)> = Vec::new();
    for mv in moves {
        match mv {
            Move::Cycle { edges } => {
                for (i, &e) in edges.iter().enumerate() {
                    if let Some(&ion) = state.occupants(e).first() {
                        relocations.push((ion, edges[(i + 1) % edges.len()]));
                    }
                }
            }
            Move::Path { edges, picks } => {
                for i in 0..edges.len() - 1 {
                    let e = edges[i];
                    let occ = state.occupants(e);
                    let mover = match occ.len() {
                        0 => continue,
                        1 => {
                            if let Some((_, p)) = picks.iter().find(|(pe, _)| *pe == e) {
                                if *p != occ[0] {
                                    return Err(ShuttleError::MissingIon(e));
                                }
                            }
                            occ[0]
                        }
                        _ => {
                            let Some((_, p)) = picks.iter().find(|(pe, _)| *pe == e) else {
                                return Err(ShuttleError::MissingIon(e));
                            };
                            if !occ.contains(p) {
                                return Err(ShuttleError::MissingIon(e));
                            }
                            *p
                        }
                    };
                    relocations.push((mover, edges[i + 1]));
                }
            }
        }
    }
    state.apply(&relocations);
    for (_, to) in &relocations {
        if state.occupants(*to).len() > graph.capacity(*to) as usize {
            return Err(ShuttleError::OverCapacity(*to));
        }
    }
    Ok(())
}
