//! Qubit-to-PZ assignment: weighted interaction graph, Kernighan-Lin
//! bisection, and dynamic per-gate PZ selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, QubitId};
use crate::device::PzId;
use crate::error::PartitionError;
use crate::route::Router;
use crate::state::{IonId, IonState};

/// Qubit graph weighted by the number of two-qubit gates per pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    n: u32,
    weights: Vec<u64>,
}

impl InteractionGraph {
    pub fn from_circuit(circuit: &Circuit) -> Self {
        let n = circuit.num_qubits;
        let mut g = InteractionGraph { n, weights: vec![0; (n * n) as usize] };
        for gate in circuit.gates() {
            if gate.is_two_qubit() {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                g.weights[(a.0 * n + b.0) as usize] += 1;
                g.weights[(b.0 * n + a.0) as usize] += 1;
            }
        }
        g
    }

    pub fn num_qubits(&self) -> u32 {
        self.n
    }

    pub fn weight(&self, a: QubitId, b: QubitId) -> u64 {
        self.weights[(a.0 * self.n + b.0) as usize]
    }

    /// Qubits that appear in at least one gate of the circuit.
    fn active_qubits(circuit: &Circuit) -> Vec<bool> {
        let mut active = vec![false; circuit.num_qubits as usize];
        for gate in circuit.gates() {
            for q in &gate.qubits {
                active[q.index()] = true;
            }
        }
        active
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// Home part per qubit, indexed by qubit id.
    pub assignment: Vec<PzId>,
    pub num_parts: u32,
}

impl Partition {
    pub fn home(&self, q: QubitId) -> PzId {
        self.assignment[q.index()]
    }

    pub fn part_sizes(&self) -> Vec<u32> {
        let mut sizes = vec![0; self.num_parts as usize];
        for pz in &self.assignment {
            sizes[pz.index()] += 1;
        }
        sizes
    }

    pub fn members(&self, pz: PzId) -> Vec<QubitId> {
        (0..self.assignment.len() as u32)
            .filter(|q| self.assignment[*q as usize] == pz)
            .map(QubitId)
            .collect()
    }
}

/// Total weight of interaction edges whose endpoints live in different parts.
pub fn cut_weight(graph: &InteractionGraph, partition: &Partition) -> u64 {
    let n = graph.num_qubits();
    let mut cut = 0;
    for a in 0..n {
        for b in a + 1..n {
            if partition.assignment[a as usize] != partition.assignment[b as usize] {
                cut += graph.weight(QubitId(a), QubitId(b));
            }
        }
    }
    cut
}

fn split_cut(graph: &InteractionGraph, subset: &[u32], in_a: &[bool]) -> u64 {
    let mut cut = 0;
    for i in 0..subset.len() {
        for j in i + 1..subset.len() {
            if in_a[i] != in_a[j] {
                cut += graph.weight(QubitId(subset[i]), QubitId(subset[j]));
            }
        }
    }
    cut
}

/// External-minus-internal cost of each subset member under the current split.
fn gains(graph: &InteractionGraph, subset: &[u32], in_a: &[bool]) -> Vec<i64> {
    let s = subset.len();
    let mut d = vec![0i64; s];
    for i in 0..s {
        for j in 0..s {
            if i == j {
                continue;
            }
            let w = graph.weight(QubitId(subset[i]), QubitId(subset[j])) as i64;
            if in_a[i] != in_a[j] {
                d[i] += w;
            } else {
                d[i] -= w;
            }
        }
    }
    d
}

/// One KL improvement pass over an existing split; mutates `in_a` to the best
/// prefix of the greedy swap sequence. Returns the (non-negative) improvement.
fn kl_pass(graph: &InteractionGraph, subset: &[u32], in_a: &mut [bool]) -> i64 {
    let s = subset.len();
    let mut locked = vec![false; s];
    let mut swaps: Vec<(usize, usize)> = Vec::new();
    let mut cumulative = Vec::new();
    let mut total = 0i64;
    loop {
        let d = gains(graph, subset, in_a);
        let mut best: Option<(i64, usize, usize)> = None;
        for a in 0..s {
            if locked[a] || !in_a[a] {
                continue;
            }
            for b in 0..s {
                if locked[b] || in_a[b] {
                    continue;
                }
                let w = graph.weight(QubitId(subset[a]), QubitId(subset[b])) as i64;
                let gain = d[a] + d[b] - 2 * w;
                if best.map_or(true, |(g, ba, bb)| gain > g || (gain == g && (a, b) < (ba, bb))) {
                    best = Some((gain, a, b));
                }
            }
        }
        let Some((gain, a, b)) = best else { break };
        in_a[a] = false;
        in_a[b] = true;
        locked[a] = true;
        locked[b] = true;
        total += gain;
        swaps.push((a, b));
        cumulative.push(total);
    }
    let mut best_prefix = 0;
    let mut best_gain = 0i64;
    for (k, &g) in cumulative.iter().enumerate() {
        if g > best_gain {
            best_gain = g;
            best_prefix = k + 1;
        }
    }
    for &(a, b) in swaps[best_prefix..].iter().rev() {
        in_a[a] = true;
        in_a[b] = false;
    }
    best_gain
}

const RESTARTS: u64 = 4;

/// Split `subset` into parts of size `size_a` and `len - size_a`, minimizing
/// the interaction cut. Seeded random starts refined by repeated KL passes;
/// the best of four restarts wins.
fn kl_bisect_sized(
    graph: &InteractionGraph,
    subset: &[u32],
    size_a: usize,
    seed: u64,
) -> (Vec<u32>, Vec<u32>) {
    assert!(size_a >= 1 && size_a < subset.len());
    let mut best: Option<(u64, Vec<bool>, Vec<u32>)> = None;
    for r in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ r.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut order: Vec<u32> = subset.to_vec();
        order.shuffle(&mut rng);
        let mut in_a: Vec<bool> = (0..order.len()).map(|i| i < size_a).collect();
        while kl_pass(graph, &order, &mut in_a) > 0 {}
        let cut = split_cut(graph, &order, &in_a);
        if best.as_ref().map_or(true, |(c, _, _)| cut < *c) {
            best = Some((cut, in_a, order));
        }
    }
    let (_, in_a, order) = best.unwrap();
    let mut a: Vec<u32> = Vec::with_capacity(size_a);
    let mut b: Vec<u32> = Vec::with_capacity(order.len() - size_a);
    for (i, q) in order.iter().enumerate() {
        if in_a[i] {
            a.push(*q);
        } else {
            b.push(*q);
        }
    }
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

/// Balanced bisection (extra qubit on the first side).
pub fn kl_bisect(
    graph: &InteractionGraph,
    subset: &[QubitId],
    seed: u64,
) -> Result<(Vec<QubitId>, Vec<QubitId>), PartitionError> {
    if subset.len() < 2 {
        return Err(PartitionError::TooFewQubits(subset.len(), 2));
    }
    let raw: Vec<u32> = subset.iter().map(|q| q.0).collect();
    let (a, b) = kl_bisect_sized(graph, &raw, (raw.len() + 1) / 2, seed);
    Ok((a.into_iter().map(QubitId).collect(), b.into_iter().map(QubitId).collect()))
}

/// Recursively split `members` into `quota` final parts, sized proportionally
/// to the sub-quotas so that k disjoint equal components can land in k parts
/// without forced cuts.
fn split_recursive(
    graph: &InteractionGraph,
    members: Vec<u32>,
    quota: u32,
    seed: u64,
    out: &mut Vec<Vec<u32>>,
) {
    if quota <= 1 {
        out.push(members);
        return;
    }
    let qa = (quota + 1) / 2;
    let qb = quota - qa;
    let len = members.len();
    let size_a = (len * qa as usize).div_ceil(quota as usize);
    let (a, b) = kl_bisect_sized(graph, &members, size_a, seed);
    split_recursive(graph, a, qa, seed, out);
    split_recursive(graph, b, qb, seed, out);
}

/// Partition all qubits into min(num_pzs, num_qubits) non-empty home parts.
/// Qubits that appear in no gate are spread over the smallest parts afterward.
pub fn partition(
    circuit: &Circuit,
    num_pzs: u32,
    seed: u64,
) -> Result<Partition, PartitionError> {
    if num_pzs == 0 {
        return Err(PartitionError::ZeroParts);
    }
    let n = circuit.num_qubits;
    let k = num_pzs.min(n);
    let graph = InteractionGraph::from_circuit(circuit);
    let active_mask = InteractionGraph::active_qubits(circuit);
    let active: Vec<u32> = (0..n).filter(|q| active_mask[*q as usize]).collect();

    let mut parts: Vec<Vec<u32>> = Vec::new();
    if !active.is_empty() {
        let quota = k.min(active.len() as u32);
        split_recursive(&graph, active, quota, seed, &mut parts);
    }
    parts.resize(k as usize, Vec::new());

    for q in 0..n {
        if !active_mask[q as usize] {
            let smallest = (0..parts.len()).min_by_key(|i| (parts[*i].len(), *i)).unwrap();
            parts[smallest].push(q);
        }
    }

    let mut assignment = vec![PzId(0); n as usize];
    for (i, part) in parts.iter().enumerate() {
        for &q in part {
            assignment[q as usize] = PzId(i as u32);
        }
    }
    Ok(Partition { assignment, num_parts: k })
}

/// PZ chosen to run a gate. Single-qubit gates run at the qubit's home part;
/// a two-qubit gate whose qubits share a home also runs there, and otherwise
/// goes to the PZ minimizing the summed ion distances to its core (ties to
/// the lower PZ id).
pub fn assign_gate_pz(
    gate: &Gate,
    partition: &Partition,
    state: &IonState,
    router: &Router,
) -> PzId {
    if !gate.is_two_qubit() {
        return partition.home(gate.qubits[0]);
    }
    let (a, b) = (gate.qubits[0], gate.qubits[1]);
    if partition.home(a) == partition.home(b) {
        return partition.home(a);
    }
    let ea = state.ion_edge(IonId(a.0));
    let eb = state.ion_edge(IonId(b.0));
    let mut best = (u64::MAX, PzId(0));
    for pz in 0..router.num_pzs() {
        let pz = PzId(pz);
        let da = router.distance_to_core(pz, ea).map_or(u64::MAX / 2, u64::from);
        let db = router.distance_to_core(pz, eb).map_or(u64::MAX / 2, u64::from);
        let cost = da + db;
        if cost < best.0 {
            best = (cost, pz);
        }
    }
    best.1
}
