//! Independent schedule validation: replays a schedule against the device
//! rules from scratch, sharing no planning logic with the compiler. Ion `i`
//! carries qubit `i`; anything beyond the qubit count is ballast.

use std::fmt;

use serde::Serialize;

use crate::device::{ArchConfig, DeviceGraph, EdgeId, EdgeInfo, NodeId, PzId};
use crate::schedule::Schedule;
use crate::shuttle::Move;
use crate::state::IonId;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    /// Structurally broken input (bad ids, bad placement, bad bookkeeping).
    Malformed { detail: String },
    /// A move references an edge the device does not have.
    UnknownEdge { t: u32, edge: u32 },
    /// Two moves in one step use the same edge.
    EdgeReuse { t: u32, edge: EdgeId },
    /// Two moves in one step touch the same node.
    NodeReuse { t: u32, node: NodeId },
    /// Consecutive move edges do not chain, repeat, or revisit a node.
    BadChain { t: u32, detail: String },
    /// A one-way edge is traversed against its direction.
    DirectionViolation { t: u32, edge: EdgeId },
    /// A rotation leaves the memory zone.
    CycleOutsideMemory { t: u32, edge: EdgeId },
    /// An edge ends a step with more ions than it can hold.
    OverCapacity { t: u32, edge: EdgeId, count: usize },
    /// A multi-ion edge moves without a pick, or the pick names an absent ion.
    BadPick { t: u32, edge: EdgeId },
    /// A gate starts without all its ions on the zone core.
    IonsNotResident { t: u32, gate: u32, pz: PzId },
    /// A gate starts while the zone is already running one.
    GateOverlap { t: u32, pz: PzId },
    /// A move touches a zone that is running a gate.
    ZoneBusyConflict { t: u32, pz: PzId },
    /// A gate starts before a predecessor on one of its qubits completes.
    DependencyViolation { t: u32, gate: u32 },
    /// A completion is listed for a gate that is not finishing now.
    WrongCompletion { t: u32, gate: u32 },
    /// A gate starts more than once.
    Restarted { t: u32, gate: u32 },
    /// A gate never completes.
    Unfinished { gate: u32 },
    /// The recorded final placement disagrees with the replay.
    FinalPlacementMismatch { ion: IonId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            Malformed { detail } => write!(f, "malformed schedule: {detail}"),
            UnknownEdge { t, edge } => write!(f, "step {t}: unknown edge {edge}"),
            EdgeReuse { t, edge } => write!(f, "step {t}: edge {edge} used by two moves"),
            NodeReuse { t, node } => write!(f, "step {t}: node {node} touched by two moves"),
            BadChain { t, detail } => write!(f, "step {t}: broken move chain: {detail}"),
            DirectionViolation { t, edge } => {
                write!(f, "step {t}: edge {edge} traversed against its direction")
            }
            CycleOutsideMemory { t, edge } => {
                write!(f, "step {t}: rotation through non-memory edge {edge}")
            }
            OverCapacity { t, edge, count } => {
                write!(f, "step {t}: edge {edge} holds {count} ions")
            }
            BadPick { t, edge } => write!(f, "step {t}: missing or stale pick on edge {edge}"),
            IonsNotResident { t, gate, pz } => {
                write!(f, "step {t}: gate {gate} starts at zone {pz} without its ions")
            }
            GateOverlap { t, pz } => write!(f, "step {t}: zone {pz} starts a second gate"),
            ZoneBusyConflict { t, pz } => {
                write!(f, "step {t}: move touches busy zone {pz}")
            }
            DependencyViolation { t, gate } => {
                write!(f, "step {t}: gate {gate} starts before its predecessors finish")
            }
            WrongCompletion { t, gate } => {
                write!(f, "step {t}: gate {gate} is not completing now")
            }
            Restarted { t, gate } => write!(f, "step {t}: gate {gate} started twice"),
            Unfinished { gate } => write!(f, "gate {gate} never completes"),
            FinalPlacementMismatch { ion } => {
                write!(f, "final placement disagrees with replay for ion {ion}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleStats {
    pub makespan: u32,
    pub total_moves: u64,
    pub total_ion_hops: u64,
    pub gates_per_pz: Vec<u32>,
    /// Fraction of steps each zone spends running gates.
    pub pz_utilization: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    pub stats: ScheduleStats,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn may_exit(info: &EdgeInfo, via: NodeId) -> bool {
    info.direction.map_or(true, |(_, to)| to == via)
}

fn may_enter(info: &EdgeInfo, via: NodeId) -> bool {
    info.direction.map_or(true, |(from, _)| from == via)
}

fn common_node(a: &EdgeInfo, b: &EdgeInfo) -> Option<NodeId> {
    [a.ends.0, a.ends.1]
        .into_iter()
        .find(|n| *n == b.ends.0 || *n == b.ends.1)
}

/// Structural legality of a single move; returns false when the move is too
/// broken to simulate.
fn check_structure(
    graph: &DeviceGraph,
    mv: &Move,
    t: u32,
    out: &mut Vec<Violation>,
) -> bool {
    let edges = mv.edges();
    if edges.len() < 2 {
        out.push(Violation::BadChain { t, detail: "fewer than two edges".into() });
        return false;
    }
    for e in edges {
        if e.index() >= graph.num_edges() {
            out.push(Violation::UnknownEdge { t, edge: e.0 });
            return false;
        }
    }
    let before = out.len();
    let mut sorted: Vec<EdgeId> = edges.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != edges.len() {
        out.push(Violation::BadChain { t, detail: "repeated edge".into() });
    }
    if mv.is_cycle() {
        for &e in edges {
            if !graph.zone(e).is_mz() {
                out.push(Violation::CycleOutsideMemory { t, edge: e });
            }
        }
    }
    let hops = if mv.is_cycle() { edges.len() } else { edges.len() - 1 };
    let mut transits: Vec<NodeId> = Vec::with_capacity(hops);
    for i in 0..hops {
        let a = edges[i];
        let b = edges[(i + 1) % edges.len()];
        let (ia, ib) = (graph.edge(a), graph.edge(b));
        match common_node(ia, ib) {
            None => {
                out.push(Violation::BadChain { t, detail: format!("edges {a} and {b} do not touch") });
            }
            Some(via) => {
                if !may_exit(ia, via) {
                    out.push(Violation::DirectionViolation { t, edge: a });
                }
                if !may_enter(ib, via) {
                    out.push(Violation::DirectionViolation { t, edge: b });
                }
                transits.push(via);
            }
        }
    }
    let mut tsorted = transits.clone();
    tsorted.sort_unstable();
    tsorted.dedup();
    if tsorted.len() != transits.len() {
        out.push(Violation::BadChain { t, detail: "a node is crossed twice".into() });
    }
    out.len() == before
}

/// Replay `schedule` and collect every rule violation, plus summary numbers.
pub fn verify(schedule: &Schedule) -> VerificationReport {
    let mut violations: Vec<Violation> = Vec::new();
    let num_pzs = schedule.meta.pzs.len();
    let mut stats = ScheduleStats {
        makespan: schedule.makespan,
        total_moves: 0,
        total_ion_hops: 0,
        gates_per_pz: vec![0; num_pzs],
        pz_utilization: vec![0.0; num_pzs],
    };
    let fail = |violations: Vec<Violation>, stats: ScheduleStats| VerificationReport {
        violations,
        stats,
    };

    let arch = ArchConfig { grid: schedule.meta.arch, pzs: schedule.meta.pzs.clone() };
    let graph = match DeviceGraph::from_arch(&arch) {
        Ok(g) => g,
        Err(e) => {
            violations.push(Violation::Malformed { detail: format!("architecture: {e}") });
            return fail(violations, stats);
        }
    };

    // initial placement, rebuilt from scratch
    let num_ions = schedule.meta.initial_placement.len();
    let mut ion_at: Vec<Option<EdgeId>> = vec![None; num_ions];
    let mut occ: Vec<Vec<IonId>> = vec![Vec::new(); graph.num_edges()];
    for (ion, e) in &schedule.meta.initial_placement {
        if ion.index() >= num_ions || e.index() >= graph.num_edges() {
            violations.push(Violation::Malformed {
                detail: format!("initial placement entry ({ion}, {e}) out of range"),
            });
            continue;
        }
        if !graph.zone(*e).is_mz() {
            violations.push(Violation::Malformed {
                detail: format!("ion {ion} starts outside the memory zone"),
            });
        }
        if ion_at[ion.index()].replace(*e).is_some() {
            violations.push(Violation::Malformed { detail: format!("ion {ion} placed twice") });
        }
        occ[e.index()].push(*ion);
    }
    for e in 0..graph.num_edges() {
        if occ[e].len() > graph.capacity(EdgeId(e as u32)) as usize {
            violations.push(Violation::Malformed {
                detail: format!("initial placement overfills edge {e}"),
            });
        }
    }
    if (schedule.meta.num_qubits as usize) > num_ions {
        violations.push(Violation::Malformed {
            detail: "fewer ions than qubits".into(),
        });
    }
    if !violations.is_empty() {
        return fail(violations, stats);
    }

    // dependency structure, recomputed from the gate list
    let gates = &schedule.meta.gates;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    {
        let mut last: Vec<Option<usize>> = vec![None; schedule.meta.num_qubits as usize];
        for (i, g) in gates.iter().enumerate() {
            for q in &g.qubits {
                if q.index() >= last.len() {
                    violations.push(Violation::Malformed {
                        detail: format!("gate {i} touches unknown qubit {q}"),
                    });
                    return fail(violations, stats);
                }
                if let Some(p) = last[q.index()] {
                    preds[i].push(p);
                }
                last[q.index()] = Some(i);
            }
            preds[i].sort_unstable();
            preds[i].dedup();
        }
    }

    if schedule.makespan != schedule.steps.len() as u32 {
        violations.push(Violation::Malformed {
            detail: format!(
                "makespan {} but {} steps",
                schedule.makespan,
                schedule.steps.len()
            ),
        });
    }

    let mut started_at: Vec<Option<(u32, PzId)>> = vec![None; gates.len()];
    let mut completed_at: Vec<Option<u32>> = vec![None; gates.len()];
    let mut busy: Vec<Option<(usize, u32)>> = vec![None; num_pzs];
    let mut busy_steps: Vec<u64> = vec![0; num_pzs];

    for (i, step) in schedule.steps.iter().enumerate() {
        let t = i as u32;
        if step.t != t {
            violations.push(Violation::Malformed {
                detail: format!("step {i} is labelled t={}", step.t),
            });
        }

        // gate starts
        for (gid, pz) in &step.gate_starts {
            let g = gid.index();
            if g >= gates.len() || pz.index() >= num_pzs {
                violations.push(Violation::Malformed {
                    detail: format!("start of unknown gate {gid} or zone {pz}"),
                });
                continue;
            }
            if started_at[g].is_some() {
                violations.push(Violation::Restarted { t, gate: gid.0 });
                continue;
            }
            started_at[g] = Some((t, *pz));
            for &p in &preds[g] {
                if !completed_at[p].is_some_and(|tc| tc < t) {
                    violations.push(Violation::DependencyViolation { t, gate: gid.0 });
                }
            }
            let core = graph.pz(*pz).core;
            let resident = gates[g]
                .qubits
                .iter()
                .all(|q| ion_at[q.index()] == Some(core));
            if !resident {
                violations.push(Violation::IonsNotResident { t, gate: gid.0, pz: *pz });
            }
            if busy[pz.index()].is_some() {
                violations.push(Violation::GateOverlap { t, pz: *pz });
            }
            busy[pz.index()] = Some((g, t + gates[g].duration));
            stats.gates_per_pz[pz.index()] += 1;
        }

        // moves
        let mut edge_used = vec![false; graph.num_edges()];
        let mut node_used = vec![false; graph.num_nodes()];
        let mut relocations: Vec<(IonId, EdgeId)> = Vec::new();
        for mv in &step.moves {
            stats.total_moves += 1;
            let simulate = check_structure(&graph, mv, t, &mut violations);
            if !simulate {
                continue;
            }
            let edges = mv.edges();
            for &e in edges {
                if edge_used[e.index()] {
                    violations.push(Violation::EdgeReuse { t, edge: e });
                }
                edge_used[e.index()] = true;
                let info = graph.edge(e);
                for n in [info.ends.0, info.ends.1] {
                    if node_used[n.index()] {
                        violations.push(Violation::NodeReuse { t, node: n });
                    }
                }
                if let Some(p) = graph.zone(e).pz() {
                    if busy[p.index()].is_some() {
                        violations.push(Violation::ZoneBusyConflict { t, pz: p });
                    }
                }
            }
            for &e in edges {
                let info = graph.edge(e);
                node_used[info.ends.0.index()] = true;
                node_used[info.ends.1.index()] = true;
            }

            match mv {
                Move::Cycle { edges } => {
                    for (j, &e) in edges.iter().enumerate() {
                        if let Some(&ion) = occ[e.index()].first() {
                            relocations.push((ion, edges[(j + 1) % edges.len()]));
                        }
                    }
                }
                Move::Path { edges, picks } => {
                    for j in 0..edges.len() - 1 {
                        let e = edges[j];
                        let residents = &occ[e.index()];
                        let pick = picks.iter().find(|(pe, _)| *pe == e);
                        let mover = match (residents.len(), pick) {
                            (0, _) => continue,
                            (1, None) => Some(residents[0]),
                            (1, Some((_, p))) if *p == residents[0] => Some(residents[0]),
                            (_, Some((_, p))) if residents.contains(p) => Some(*p),
                            _ => {
                                violations.push(Violation::BadPick { t, edge: e });
                                None
                            }
                        };
                        if let Some(m) = mover {
                            relocations.push((m, edges[j + 1]));
                        }
                    }
                }
            }
        }
        // everyone departs, then everyone lands
        for (ion, _) in &relocations {
            if let Some(from) = ion_at[ion.index()] {
                occ[from.index()].retain(|x| x != ion);
            }
        }
        for (ion, to) in &relocations {
            ion_at[ion.index()] = Some(*to);
            occ[to.index()].push(*ion);
        }
        stats.total_ion_hops += relocations.len() as u64;
        for (_, to) in &relocations {
            let n = occ[to.index()].len();
            if n > graph.capacity(*to) as usize {
                let already = violations
                    .iter()
                    .any(|v| matches!(v, Violation::OverCapacity { t: vt, edge, .. } if *vt == t && edge == to));
                if !already {
                    violations.push(Violation::OverCapacity { t, edge: *to, count: n });
                }
            }
        }

        // completions
        for gid in &step.gate_completions {
            let g = gid.index();
            if g >= gates.len() {
                violations.push(Violation::Malformed {
                    detail: format!("completion of unknown gate {gid}"),
                });
                continue;
            }
            let ok = started_at[g].is_some_and(|(_, pz)| {
                busy[pz.index()] == Some((g, t + 1))
            });
            if ok {
                let (_, pz) = started_at[g].unwrap();
                busy[pz.index()] = None;
                completed_at[g] = Some(t);
            } else {
                violations.push(Violation::WrongCompletion { t, gate: gid.0 });
            }
        }

        for (p, b) in busy.iter().enumerate() {
            if b.is_some() {
                busy_steps[p] += 1;
            }
        }
    }

    for (g, done) in completed_at.iter().enumerate() {
        if done.is_none() {
            violations.push(Violation::Unfinished { gate: g as u32 });
        }
    }

    if schedule.meta.final_placement.len() != num_ions {
        violations.push(Violation::Malformed {
            detail: "final placement size differs from initial".into(),
        });
    }
    for (ion, e) in &schedule.meta.final_placement {
        if ion.index() >= num_ions || ion_at[ion.index()] != Some(*e) {
            violations.push(Violation::FinalPlacementMismatch { ion: *ion });
        }
    }

    if schedule.makespan > 0 {
        for p in 0..num_pzs {
            stats.pz_utilization[p] = busy_steps[p] as f64 / f64::from(schedule.makespan);
        }
    }
    VerificationReport { violations, stats }
}
