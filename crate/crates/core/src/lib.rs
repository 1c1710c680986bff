//! Compilation and discrete-time simulation of quantum circuits on
//! grid-based trapped-ion hardware.
//!
//! The device model is a rectangular memory grid of ion-holding edges with
//! linear processing zones hanging off its perimeter; ions shuttle along
//! edges, meet in zone cores, and execute gates there. [`compile`] turns a
//! [`Circuit`] plus an [`ArchConfig`] into a step-by-step [`Schedule`];
//! [`verify`] replays a schedule independently and reports every rule
//! violation.

pub mod circuit;
pub mod device;
pub mod error;
pub mod orchestrator;
pub mod partition;
pub mod qasm;
pub mod route;
pub mod schedule;
pub mod shuttle;
pub mod state;
pub mod verify;

pub use circuit::{
    gen_ghz, gen_qft, gen_random, Circuit, Gate, GateDag, GateId, GateKind, QubitId,
};
pub use device::{
    ArchConfig, DeviceGraph, EdgeId, GridParams, NodeId, NodeKind, PzAttach, PzDescriptor,
    PzId, Zone,
};
pub use error::{
    CircuitError, CompileError, DeviceError, PartitionError, QasmError, ShuttleError,
};
pub use orchestrator::{compile, CompileConfig, Policy};
pub use partition::{assign_gate_pz, partition, InteractionGraph, Partition};
pub use qasm::{parse_qasm, serialize_qasm};
pub use route::{edge_distance, Router};
pub use schedule::{GateRecord, GateTimes, Schedule, ScheduleMeta, TimeStep};
pub use shuttle::{
    cycle_length_cap, desired_next_edge, execute_moves, find_cycle, plan_entry_path,
    plan_exit_path, plan_timestep, EntryPlan, ExitPlan, Move, NextHop, QueueAction,
    QueueEntry,
};
pub use state::{initial_placement, IonId, IonState};
pub use verify::{verify, ScheduleStats, VerificationReport, Violation};
