//! Circuit representation: native gates, generators, and the dependency DAG.
//!
//! The native set is RX/RY/RZ on one qubit and RZZ on two. Durations are in
//! discrete time steps (default 1 for single-qubit gates, 3 for RZZ).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use crate::error::CircuitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

impl QubitId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateId(pub u32);

impl GateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Rzz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        if self == GateKind::Rzz {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Rzz => "rzz",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    pub kind: GateKind,
    pub qubits: Vec<QubitId>,
    pub angle: f64,
    pub duration: u32,
}

impl Gate {
    pub fn is_two_qubit(&self) -> bool {
        self.kind == GateKind::Rzz
    }
}

pub const DEFAULT_SINGLE_QUBIT_TIME: u32 = 1;
pub const DEFAULT_TWO_QUBIT_TIME: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: u32,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: u32) -> Self {
        Circuit { num_qubits, gates: Vec::new() }
    }

    pub fn push_single(
        &mut self,
        kind: GateKind,
        q: QubitId,
        angle: f64,
    ) -> Result<GateId, CircuitError> {
        assert_ne!(kind, GateKind::Rzz);
        self.check_qubit(q)?;
        Ok(self.push_gate(kind, vec![q], angle, DEFAULT_SINGLE_QUBIT_TIME))
    }

    pub fn push_two(
        &mut self,
        a: QubitId,
        b: QubitId,
        angle: f64,
    ) -> Result<GateId, CircuitError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(CircuitError::DuplicateQubit(a));
        }
        Ok(self.push_gate(GateKind::Rzz, vec![a, b], angle, DEFAULT_TWO_QUBIT_TIME))
    }

    fn push_gate(&mut self, kind: GateKind, qubits: Vec<QubitId>, angle: f64, duration: u32) -> GateId {
        let id = GateId(self.gates.len() as u32);
        self.gates.push(Gate { id, kind, qubits, angle, duration });
        id
    }

    fn check_qubit(&self, q: QubitId) -> Result<(), CircuitError> {
        if q.0 >= self.num_qubits {
            return Err(CircuitError::QubitOutOfRange(q, self.num_qubits));
        }
        Ok(())
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.index()]
    }

    pub fn gate_count(&self) -> u32 {
        self.gates.len() as u32
    }

    /// Overwrite all durations with the given single-/two-qubit gate times.
    pub fn set_gate_times(&mut self, single: u32, two: u32) {
        for g in &mut self.gates {
            g.duration = if g.is_two_qubit() { two } else { single };
        }
    }

    /// Total duration-weighted gate work.
    pub fn total_gate_time(&self) -> u64 {
        self.gates.iter().map(|g| g.duration as u64).sum()
    }

    /// Duration-weighted longest dependency chain; no schedule can finish
    /// sooner than this.
    pub fn critical_path_time(&self) -> u64 {
        let mut finish = vec![0u64; self.gates.len()];
        let mut last_on: Vec<Option<usize>> = vec![None; self.num_qubits as usize];
        for (i, g) in self.gates.iter().enumerate() {
            let ready = g
                .qubits
                .iter()
                .filter_map(|q| last_on[q.index()])
                .map(|p| finish[p])
                .max()
                .unwrap_or(0);
            finish[i] = ready + g.duration as u64;
            for q in &g.qubits {
                last_on[q.index()] = Some(i);
            }
        }
        finish.into_iter().max().unwrap_or(0)
    }
}

/// Hadamard in the native set: RY(pi/2) then RX(pi).
fn push_h(c: &mut Circuit, q: QubitId) {
    c.push_single(GateKind::Ry, q, FRAC_PI_2).unwrap();
    c.push_single(GateKind::Rx, q, PI).unwrap();
}

/// GHZ state preparation on a line: H on qubit 0, then a CX template per
/// link i -> i+1. Gate count is 2 + 5(n-1).
pub fn gen_ghz(n: u32) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::TooFewQubits { min: 2, got: n });
    }
    let mut c = Circuit::new(n);
    push_h(&mut c, QubitId(0));
    for i in 0..n - 1 {
        let ctl = QubitId(i);
        let tgt = QubitId(i + 1);
        c.push_single(GateKind::Ry, tgt, -FRAC_PI_2).unwrap();
        c.push_two(ctl, tgt, FRAC_PI_2).unwrap();
        c.push_single(GateKind::Rz, ctl, -FRAC_PI_2).unwrap();
        c.push_single(GateKind::Rx, tgt, FRAC_PI_2).unwrap();
        c.push_single(GateKind::Ry, tgt, FRAC_PI_2).unwrap();
    }
    Ok(c)
}

/// Quantum Fourier transform: per qubit a Hadamard template plus a
/// controlled-phase template (RZ, RZ, RZZ) for every later qubit. Gate count
/// is 2n + 3n(n-1)/2.
pub fn gen_qft(n: u32) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::TooFewQubits { min: 2, got: n });
    }
    let mut c = Circuit::new(n);
    for i in 0..n {
        push_h(&mut c, QubitId(i));
        for j in i + 1..n {
            let theta = PI / f64::powi(2.0, (j - i) as i32);
            c.push_single(GateKind::Rz, QubitId(i), theta / 2.0).unwrap();
            c.push_single(GateKind::Rz, QubitId(j), theta / 2.0).unwrap();
            c.push_two(QubitId(i), QubitId(j), -theta / 2.0).unwrap();
        }
    }
    Ok(c)
}

/// Random circuit, as deep as wide: n layers, each packing the qubits into
/// disjoint gates. Kinds are drawn uniformly from the native set; an RZZ
/// without a free partner degrades to a uniform single-qubit gate.
pub fn gen_random(n: u32, seed: u64) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::TooFewQubits { min: 2, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    let singles = [GateKind::Rx, GateKind::Ry, GateKind::Rz];
    for _ in 0..n {
        let mut order: Vec<u32> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut cursor = 0usize;
        while cursor < order.len() {
            let q = QubitId(order[cursor]);
            cursor += 1;
            let angle = rng.gen_range(0.0..TAU);
            let two = rng.gen_range(0..4) == 3 && cursor < order.len();
            if two {
                let partner = QubitId(order[cursor]);
                cursor += 1;
                c.push_two(q, partner, angle).unwrap();
            } else {
                let kind = singles[rng.gen_range(0..3)];
                c.push_single(kind, q, angle).unwrap();
            }
        }
    }
    Ok(c)
}

/// Gate dependency DAG with per-qubit transitive reduction: each gate depends
/// on the most recent earlier gate on each of its qubits.
#[derive(Debug, Clone)]
pub struct GateDag {
    succ: Vec<Vec<GateId>>,
    pred_count: Vec<u32>,
    alive: Vec<bool>,
    remaining: usize,
}

impl GateDag {
    pub fn build(circuit: &Circuit) -> Self {
        let n = circuit.gates().len();
        let mut succ: Vec<Vec<GateId>> = vec![Vec::new(); n];
        let mut pred_count = vec![0u32; n];
        let mut last: Vec<Option<GateId>> = vec![None; circuit.num_qubits as usize];
        for gate in circuit.gates() {
            let mut preds: Vec<GateId> = gate
                .qubits
                .iter()
                .filter_map(|q| last[q.index()])
                .collect();
            preds.sort_unstable();
            preds.dedup();
            for p in preds {
                succ[p.index()].push(gate.id);
                pred_count[gate.id.index()] += 1;
            }
            for q in &gate.qubits {
                last[q.index()] = Some(gate.id);
            }
        }
        GateDag { succ, pred_count, alive: vec![true; n], remaining: n }
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn is_alive(&self, g: GateId) -> bool {
        self.alive[g.index()]
    }

    pub fn is_front(&self, g: GateId) -> bool {
        self.alive[g.index()] && self.pred_count[g.index()] == 0
    }

    /// Gates with no unfinished predecessors, ascending by id.
    pub fn front_layer(&self) -> Vec<GateId> {
        (0..self.alive.len() as u32)
            .map(GateId)
            .filter(|g| self.is_front(*g))
            .collect()
    }

    /// Remove executed gates; they must all be in the current front layer.
    pub fn remove_gates(&mut self, gates: &[GateId]) -> Result<(), CircuitError> {
        for &g in gates {
            if g.index() >= self.alive.len() {
                return Err(CircuitError::UnknownGate(g.0));
            }
            if !self.is_front(g) {
                return Err(CircuitError::NotInFront(g.0));
            }
        }
        for &g in gates {
            self.alive[g.index()] = false;
            self.remaining -= 1;
            for s in &self.succ[g.index()] {
                self.pred_count[s.index()] -= 1;
            }
        }
        Ok(())
    }
}
