//! Serializable compilation output: per-step moves and gate events plus
//! enough metadata to replay the run from scratch.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateId, GateKind, QubitId};
use crate::error::CircuitError;
use crate::device::{EdgeId, GridParams, PzAttach, PzId};
use crate::shuttle::Move;
use crate::state::IonId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateTimes {
    pub single: u32,
    pub two: u32,
}

impl Default for GateTimes {
    fn default() -> Self {
        GateTimes {
            single: crate::circuit::DEFAULT_SINGLE_QUBIT_TIME,
            two: crate::circuit::DEFAULT_TWO_QUBIT_TIME,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: GateKind,
    pub qubits: Vec<QubitId>,
    pub angle: f64,
    pub duration: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMeta {
    pub arch: GridParams,
    pub pzs: Vec<PzAttach>,
    pub seed: u64,
    pub policy: String,
    pub gate_times: GateTimes,
    pub num_qubits: u32,
    pub gates: Vec<GateRecord>,
    pub initial_placement: Vec<(IonId, EdgeId)>,
    pub final_placement: Vec<(IonId, EdgeId)>,
}

/// One tick: moves execute simultaneously, `gate_starts` begin at the tick's
/// start, `gate_completions` land at its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStep {
    pub t: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moves: Vec<Move>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gate_starts: Vec<(GateId, PzId)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gate_completions: Vec<GateId>,
}

impl TimeStep {
    pub fn new(t: u32) -> Self {
        TimeStep { t, moves: Vec::new(), gate_starts: Vec::new(), gate_completions: Vec::new() }
    }

    pub fn is_idle(&self) -> bool {
        self.moves.is_empty() && self.gate_starts.is_empty() && self.gate_completions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub meta: ScheduleMeta,
    pub steps: Vec<TimeStep>,
    pub makespan: u32,
}

impl Schedule {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schedule serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Rebuild the gate list as a circuit; used to replay a schedule against
    /// the same dependency structure the compiler saw.
    pub fn circuit(&self) -> Result<Circuit, CircuitError> {
        let mut c = Circuit::new(self.meta.num_qubits);
        for g in &self.meta.gates {
            match g.qubits.len() {
                1 => c.push_single(g.kind, g.qubits[0], g.angle)?,
                _ => c.push_two(g.qubits[0], g.qubits[1], g.angle)?,
            };
        }
        c.set_gate_times(self.meta.gate_times.single, self.meta.gate_times.two);
        Ok(c)
    }
}

pub fn gate_records(circuit: &Circuit) -> Vec<GateRecord> {
    circuit
        .gates()
        .iter()
        .map(|g| GateRecord {
            kind: g.kind,
            qubits: g.qubits.clone(),
            angle: g.angle,
            duration: g.duration,
        })
        .collect()
}
