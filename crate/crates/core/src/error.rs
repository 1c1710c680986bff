//! Error types shared across the crate.

use thiserror::Error;

use crate::circuit::QubitId;
use crate::device::{EdgeId, NodeId};

/// Errors raised while constructing a device graph.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceError {
    #[error("grid needs at least 2x2 junctions, got {m}x{n}")]
    GridTooSmall { m: u32, n: u32 },
    #[error("segment subdivisions must be at least 1, got v={v}, h={h}")]
    SegmentTooShort { v: u32, h: u32 },
    #[error("node {0} is not a perimeter junction")]
    NotPerimeter(NodeId),
    #[error("junction {0} already has a processing zone attached")]
    JunctionOccupied(NodeId),
    #[error("processing zone capacity must be at least 2, got {0}")]
    CapacityTooSmall(u8),
    #[error("entry and exit paths need at least one edge each")]
    EmptyAccessPath,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// Errors raised by circuit construction and the generators.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("qubit {0} is out of range for a circuit on {1} qubits")]
    QubitOutOfRange(QubitId, u32),
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    DuplicateQubit(QubitId),
    #[error("generator needs at least {min} qubits, got {got}")]
    TooFewQubits { min: u32, got: u32 },
    #[error("gate {0} is not in the dependency front; it still has unfinished predecessors")]
    NotInFront(u32),
    #[error("unknown gate id {0}")]
    UnknownGate(u32),
}

/// Parse failure for the OpenQASM subset, with source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct QasmError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl QasmError {
    pub fn new(line: u32, col: u32, msg: impl Into<String>) -> Self {
        QasmError { line, col, msg: msg.into() }
    }
}

/// Errors raised by the qubit partitioner.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("cannot split {0} qubits into {1} non-empty parts")]
    TooFewQubits(usize, usize),
    #[error("partition requires at least one part")]
    ZeroParts,
}

/// Errors raised by shuttling primitives. Congestion and blocked paths are
/// ordinary planning outcomes, not errors; these cover misuse and internal
/// invariant breaches.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShuttleError {
    #[error("edges {0} and {1} are not adjacent memory-zone edges")]
    NotAdjacent(EdgeId, EdgeId),
    #[error("no rotation cycle through {start} -> {first} within {cap} edges")]
    NoCycle { start: EdgeId, first: EdgeId, cap: u32 },
    #[error("ion {0} is not inside processing zone {1}")]
    IonNotInZone(u32, u32),
    #[error("move references edge {0} with no ion to shift")]
    MissingIon(EdgeId),
    #[error("edge {0} would exceed its capacity")]
    OverCapacity(EdgeId),
}

/// Errors raised by the orchestrator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("placement needs {required} memory-zone edges but the graph has {available}")]
    TooFewEdges { required: u32, available: u32 },
    #[error("device has no processing zone to execute gates on")]
    NoProcessingZone,
    #[error("qubit {0} has no ion in the initial placement")]
    MissingIon(QubitId),
    #[error("no ion moved and no gate progressed for {window} steps (aborted at step {step})\n{diagnostic}")]
    Deadlock { step: u32, window: u32, diagnostic: String },
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Shuttle(#[from] ShuttleError),
}
