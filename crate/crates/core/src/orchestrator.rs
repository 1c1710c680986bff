//! End-to-end compilation: pick a gate per processing zone, shuttle its ions
//! in, run it, repeat until the dependency graph is drained.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateDag, GateId};
use crate::device::{ArchConfig, DeviceGraph, PzId};
use crate::error::CompileError;
use crate::partition::{assign_gate_pz, partition, Partition};
use crate::route::Router;
use crate::schedule::{gate_records, GateTimes, Schedule, ScheduleMeta, TimeStep};
use crate::shuttle::{
    cycle_length_cap, execute_moves, plan_timestep, QueueAction, QueueEntry,
};
use crate::state::{initial_placement, IonId, IonState};

/// How the next gate per zone is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Dependency-aware: only gates whose predecessors finished are
    /// considered, cheapest ion haul first.
    Dag,
    /// Baseline: each zone chases its earliest pending gate in circuit
    /// order, ready or not.
    Naive,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Dag => "dag",
            Policy::Naive => "naive",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dag" => Ok(Policy::Dag),
            "naive" => Ok(Policy::Naive),
            other => Err(format!("unknown policy '{other}' (expected dag|naive)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileConfig {
    pub seed: u64,
    pub policy: Policy,
    /// Override the circuit's per-arity gate durations.
    pub gate_times: Option<GateTimes>,
    /// Override the rotation search cap; mainly for stress tests.
    pub max_cycle_len: Option<u32>,
    /// Steps without a gate start or completion before giving up.
    pub deadlock_window: Option<u32>,
}

impl Default for CompileConfig {
    fn default() -> Self {
        CompileConfig {
            seed: 0,
            policy: Policy::Dag,
            gate_times: None,
            max_cycle_len: None,
            deadlock_window: None,
        }
    }
}

fn dist_or_max(router: &Router, pz: PzId, edge: crate::device::EdgeId) -> u64 {
    router.distance_to_core(pz, edge).map_or(u64::MAX / 2, u64::from)
}

/// Per-zone gate candidates for this planning round. Active gates are never
/// candidates again.
fn gather_candidates(
    circuit: &Circuit,
    dag: &GateDag,
    part: &Partition,
    state: &IonState,
    router: &Router,
    active: &[Option<GateId>],
    policy: Policy,
) -> Vec<Vec<GateId>> {
    let num_pzs = router.num_pzs() as usize;
    let mut cands: Vec<Vec<GateId>> = vec![Vec::new(); num_pzs];
    let running: Vec<GateId> = active.iter().flatten().copied().collect();
    match policy {
        Policy::Dag => {
            for g in dag.front_layer() {
                if running.contains(&g) {
                    continue;
                }
                let pz = assign_gate_pz(circuit.gate(g), part, state, router);
                cands[pz.index()].push(g);
            }
        }
        Policy::Naive => {
            for i in 0..circuit.gate_count() {
                let g = GateId(i);
                if !dag.is_alive(g) || running.contains(&g) {
                    continue;
                }
                let pz = assign_gate_pz(circuit.gate(g), part, state, router);
                if cands[pz.index()].is_empty() {
                    cands[pz.index()].push(g);
                }
            }
        }
    }
    cands
}

/// Cheapest candidate per zone: minimal summed ion distance, ties to the
/// lower gate id.
fn select_gates(
    circuit: &Circuit,
    state: &IonState,
    router: &Router,
    candidates: &[Vec<GateId>],
) -> Vec<Option<GateId>> {
    candidates
        .iter()
        .enumerate()
        .map(|(pz, list)| {
            let pid = PzId(pz as u32);
            list.iter()
                .copied()
                .min_by_key(|g| {
                    let cost: u64 = circuit
                        .gate(*g)
                        .qubits
                        .iter()
                        .map(|q| dist_or_max(router, pid, state.ion_edge(IonId(q.0))))
                        .sum();
                    (cost, g.0)
                })
        })
        .collect()
}

/// Ion intents for one step, most urgent first: per zone, evictions clearing
/// core room then the chosen gate's ions; zones interleaved round-robin in
/// ascending order of their chosen gate (so when two zones tug at one ion,
/// the earlier gate wins and the later zone waits its turn). Warm-up pulls
/// for non-chosen candidates rank below every zone's primary intents, and
/// idle zones' one-way chains are flushed last. One intent per ion (first
/// wins).
fn build_queue(
    graph: &DeviceGraph,
    router: &Router,
    state: &IonState,
    circuit: &Circuit,
    candidates: &[Vec<GateId>],
    selected: &[Option<GateId>],
    busy: &[bool],
) -> Vec<QueueEntry> {
    let num_pzs = graph.pzs().len();
    let mut is_candidate_ion = vec![false; state.num_ions() as usize];
    for g in selected.iter().flatten() {
        for q in &circuit.gate(*g).qubits {
            is_candidate_ion[q.index()] = true;
        }
    }

    let mut primary: Vec<Vec<QueueEntry>> = vec![Vec::new(); num_pzs];
    let mut warmup: Vec<Vec<QueueEntry>> = vec![Vec::new(); num_pzs];
    for pz in 0..num_pzs {
        let pid = PzId(pz as u32);
        let Some(g) = selected[pz] else { continue };
        let core = graph.pz(pid).core;
        let gate_ions: Vec<IonId> =
            circuit.gate(g).qubits.iter().map(|q| IonId(q.0)).collect();
        let list = &mut primary[pz];

        if !busy[pz] {
            let occupants = state.occupants(core);
            let missing =
                gate_ions.iter().filter(|i| state.ion_edge(**i) != core).count();
            let free = graph.capacity(core) as usize - occupants.len();
            let need = missing.saturating_sub(free);
            if need > 0 {
                let mut spectators: Vec<IonId> = occupants
                    .iter()
                    .copied()
                    .filter(|i| !gate_ions.contains(i))
                    .collect();
                spectators.sort_by_key(|i| is_candidate_ion[i.index()]);
                for ion in spectators.into_iter().take(need) {
                    list.push(QueueEntry { ion, target: pid, action: QueueAction::Exit });
                }
            }
        }

        let mut movers: Vec<(u64, u32)> = gate_ions
            .iter()
            .filter(|i| state.ion_edge(**i) != core)
            .map(|i| (dist_or_max(router, pid, state.ion_edge(*i)), i.0))
            .collect();
        movers.sort_unstable();
        list.extend(movers.into_iter().map(|(_, ion)| QueueEntry {
            ion: IonId(ion),
            target: pid,
            action: QueueAction::Enter,
        }));

        let mut warm: Vec<(u64, u32)> = Vec::new();
        for cg in &candidates[pz] {
            if *cg == g {
                continue;
            }
            for q in &circuit.gate(*cg).qubits {
                let ion = IonId(q.0);
                if state.ion_edge(ion) != core {
                    warm.push((dist_or_max(router, pid, state.ion_edge(ion)), ion.0));
                }
            }
        }
        warm.sort_unstable();
        warm.dedup();
        warmup[pz].extend(warm.into_iter().map(|(_, ion)| QueueEntry {
            ion: IonId(ion),
            target: pid,
            action: QueueAction::Enter,
        }));
    }

    let mut order: Vec<usize> = (0..num_pzs).collect();
    order.sort_by_key(|pz| (selected[*pz].map_or(u32::MAX, |g| g.0), *pz));
    let mut queue: Vec<QueueEntry> = Vec::new();
    for tier in [&primary, &warmup] {
        let deepest = tier.iter().map(Vec::len).max().unwrap_or(0);
        for i in 0..deepest {
            for &pz in &order {
                if let Some(e) = tier[pz].get(i) {
                    queue.push(*e);
                }
            }
        }
    }

    for pz in 0..num_pzs {
        if busy[pz] {
            continue;
        }
        let pid = PzId(pz as u32);
        let desc = graph.pz(pid);
        for &e in &desc.exit {
            for &ion in state.occupants(e) {
                queue.push(QueueEntry { ion, target: pid, action: QueueAction::Exit });
            }
        }
        for &e in &desc.entry {
            for &ion in state.occupants(e) {
                queue.push(QueueEntry { ion, target: pid, action: QueueAction::Enter });
            }
        }
    }

    let mut seen = vec![false; state.num_ions() as usize];
    queue.retain(|e| {
        let dup = seen[e.ion.index()];
        seen[e.ion.index()] = true;
        !dup
    });
    queue
}

fn deadlock_diagnostic(
    circuit: &Circuit,
    dag: &GateDag,
    state: &IonState,
    selected: &[Option<GateId>],
) -> String {
    let mut parts = vec![format!("{} gates pending", dag.remaining())];
    for (pz, sel) in selected.iter().enumerate() {
        if let Some(g) = sel {
            let spots: Vec<String> = circuit
                .gate(*g)
                .qubits
                .iter()
                .map(|q| format!("{q}@{}", state.ion_edge(IonId(q.0))))
                .collect();
            parts.push(format!("pz {pz} wants gate {g} ({})", spots.join(", ")));
        }
    }
    parts.join("; ")
}

/// Uniform per-arity durations as present in the circuit (for the schedule
/// header).
fn observed_gate_times(circuit: &Circuit) -> GateTimes {
    let mut times = GateTimes::default();
    for g in circuit.gates() {
        if g.is_two_qubit() {
            times.two = g.duration;
        } else {
            times.single = g.duration;
        }
    }
    times
}

/// Compile a circuit onto an architecture. Deterministic in (arch, circuit,
/// config); the seed fixes the initial ion layout and partitioner restarts.
pub fn compile(
    arch: &ArchConfig,
    circuit: &Circuit,
    cfg: &CompileConfig,
) -> Result<Schedule, CompileError> {
    let graph = DeviceGraph::from_arch(arch)?;
    if graph.pzs().is_empty() {
        return Err(CompileError::NoProcessingZone);
    }
    let mz = graph.mz_edge_count();
    if circuit.num_qubits > mz {
        return Err(CompileError::TooFewEdges { required: circuit.num_qubits, available: mz });
    }
    let mut circuit = circuit.clone();
    if let Some(t) = cfg.gate_times {
        circuit.set_gate_times(t.single, t.two);
    }
    let router = Router::new(&graph);
    let num_pzs = graph.pzs().len();
    let part = partition(&circuit, num_pzs as u32, cfg.seed).expect("zone count is nonzero");
    let mut dag = GateDag::build(&circuit);
    let mut state = initial_placement(&graph, cfg.seed);
    let initial = state.placement_pairs();

    let cap = cfg.max_cycle_len.unwrap_or_else(|| cycle_length_cap(&graph.grid()));
    let window = cfg.deadlock_window.unwrap_or_else(|| (10 * graph.num_edges() as u32).max(200));

    let mut steps: Vec<TimeStep> = Vec::new();
    let mut active: Vec<Option<GateId>> = vec![None; num_pzs];
    let mut ends: Vec<u32> = vec![0; num_pzs];
    let mut t: u32 = 0;
    let mut idle_streak: u32 = 0;

    while !dag.is_empty() || active.iter().any(Option::is_some) {
        let candidates =
            gather_candidates(&circuit, &dag, &part, &state, &router, &active, cfg.policy);
        let selected = select_gates(&circuit, &state, &router, &candidates);

        loop {
            let mut step = TimeStep::new(t);

            // start gates whose ions already sit on an idle core
            for pz in 0..num_pzs {
                if active[pz].is_some() {
                    continue;
                }
                let Some(g) = selected[pz] else { continue };
                if !dag.is_front(g) {
                    continue;
                }
                let gate = circuit.gate(g);
                let core = graph.pz(PzId(pz as u32)).core;
                if gate.qubits.iter().all(|q| state.ion_edge(IonId(q.0)) == core) {
                    active[pz] = Some(g);
                    ends[pz] = t + gate.duration;
                    step.gate_starts.push((g, PzId(pz as u32)));
                }
            }

            // shuttle around the running gates
            let busy: Vec<bool> = active.iter().map(Option::is_some).collect();
            let queue =
                build_queue(&graph, &router, &state, &circuit, &candidates, &selected, &busy);
            let moves = plan_timestep(&graph, &router, &state, &queue, &busy, cap);
            execute_moves(&graph, &mut state, &moves)?;
            step.moves = moves;

            // completions land at the end of the tick
            let mut done: Vec<GateId> = Vec::new();
            for pz in 0..num_pzs {
                if let Some(g) = active[pz] {
                    if ends[pz] == t + 1 {
                        step.gate_completions.push(g);
                        done.push(g);
                        active[pz] = None;
                    }
                }
            }

            if step.gate_starts.is_empty() && done.is_empty() {
                idle_streak += 1;
                if idle_streak >= window {
                    return Err(CompileError::Deadlock {
                        step: t,
                        window,
                        diagnostic: deadlock_diagnostic(&circuit, &dag, &state, &selected),
                    });
                }
            } else {
                idle_streak = 0;
            }

            steps.push(step);
            t += 1;
            if !done.is_empty() {
                dag.remove_gates(&done)?;
                break;
            }
        }
    }

    let makespan = steps.len() as u32;
    Ok(Schedule {
        meta: ScheduleMeta {
            arch: graph.grid(),
            pzs: arch.pzs.clone(),
            seed: cfg.seed,
            policy: cfg.policy.to_string(),
            gate_times: cfg.gate_times.unwrap_or_else(|| observed_gate_times(&circuit)),
            num_qubits: circuit.num_qubits,
            gates: gate_records(&circuit),
            initial_placement: initial,
            final_placement: state.placement_pairs(),
        },
        steps,
        makespan,
    })
}
