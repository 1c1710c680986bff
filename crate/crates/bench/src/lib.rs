//! Shared fixtures for the criterion benches.

use qccd_core::{gen_qft, ArchConfig, Circuit, CompileConfig, GridParams, Policy};

pub fn arch(m: u32, n: u32, pzs: u32) -> ArchConfig {
    ArchConfig::with_default_pzs(GridParams { m, n, v: 1, h: 1 }, pzs).unwrap()
}

pub fn workload(qubits: u32) -> Circuit {
    gen_qft(qubits).unwrap()
}

pub fn config(policy: Policy, seed: u64) -> CompileConfig {
    CompileConfig { seed, policy, ..CompileConfig::default() }
}
