//! Command-line plumbing: workload specs, timed runs over seed batches, and
//! CSV reporting.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use qccd_core::{
    compile, gen_ghz, gen_qft, gen_random, parse_qasm, verify, ArchConfig, Circuit,
    CompileConfig, GateTimes, GridParams, Policy, Schedule,
};

/// Grid shorthand `MxNxVxH`: junction columns x rows, ions per vertical and
/// horizontal segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchSpec(pub GridParams);

impl FromStr for ArchSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('x').collect();
        if parts.len() != 4 {
            return Err(format!("'{s}' is not MxNxVxH (e.g. 3x3x1x1)"));
        }
        let mut nums = [0u32; 4];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| format!("'{part}' is not a number"))?;
        }
        Ok(ArchSpec(GridParams { m: nums[0], n: nums[1], v: nums[2], h: nums[3] }))
    }
}

impl fmt::Display for ArchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let GridParams { m, n, v, h } = self.0;
        write!(f, "{m}x{n}x{v}x{h}")
    }
}

/// Workload shorthand: `ghz:N`, `qft:N`, `random:N` (generator seed 1),
/// `random:N:SEED`, or a path to an OpenQASM file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircuitSpec {
    Ghz(u32),
    Qft(u32),
    Random(u32, u64),
    Qasm(PathBuf),
}

impl FromStr for CircuitSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.ends_with(".qasm") {
            return Ok(CircuitSpec::Qasm(PathBuf::from(s)));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let qubits = |p: &str| p.parse::<u32>().map_err(|_| format!("'{p}' is not a number"));
        match parts.as_slice() {
            ["ghz", n] => Ok(CircuitSpec::Ghz(qubits(n)?)),
            ["qft", n] => Ok(CircuitSpec::Qft(qubits(n)?)),
            ["random", n] => Ok(CircuitSpec::Random(qubits(n)?, 1)),
            ["random", n, seed] => {
                let seed = seed.parse().map_err(|_| format!("'{seed}' is not a seed"))?;
                Ok(CircuitSpec::Random(qubits(n)?, seed))
            }
            _ => Err(format!(
                "'{s}' is not ghz:N, qft:N, random:N[:SEED], or a .qasm file"
            )),
        }
    }
}

impl fmt::Display for CircuitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitSpec::Ghz(n) => write!(f, "ghz:{n}"),
            CircuitSpec::Qft(n) => write!(f, "qft:{n}"),
            CircuitSpec::Random(n, seed) => write!(f, "random:{n}:{seed}"),
            CircuitSpec::Qasm(p) => write!(f, "{}", p.display()),
        }
    }
}

impl CircuitSpec {
    pub fn build(&self) -> Result<Circuit> {
        match self {
            CircuitSpec::Ghz(n) => Ok(gen_ghz(*n)?),
            CircuitSpec::Qft(n) => Ok(gen_qft(*n)?),
            CircuitSpec::Random(n, seed) => Ok(gen_random(*n, *seed)?),
            CircuitSpec::Qasm(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_qasm(&text).with_context(|| format!("parsing {}", path.display()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub seed: u64,
    pub gate_count: u32,
    pub makespan: u32,
    pub cpu_secs: f64,
}

/// Compile once, re-verify the result, and time the whole thing.
pub fn compile_once(
    arch: &ArchConfig,
    circuit: &Circuit,
    policy: Policy,
    seed: u64,
    gate_times: Option<GateTimes>,
) -> Result<(Schedule, RunOutcome)> {
    let start = Instant::now();
    let cfg = CompileConfig { seed, policy, gate_times, ..Default::default() };
    let schedule = compile(arch, circuit, &cfg)?;
    let report = verify(&schedule);
    let cpu_secs = start.elapsed().as_secs_f64();
    if !report.is_valid() {
        bail!(
            "schedule failed re-verification ({} violations, first: {})",
            report.violations.len(),
            report.violations[0]
        );
    }
    let outcome = RunOutcome {
        seed,
        gate_count: circuit.gate_count(),
        makespan: schedule.makespan,
        cpu_secs,
    };
    Ok((schedule, outcome))
}

/// Compile the same workload under seeds `0..seeds`, in parallel.
pub fn run_seeds(
    arch: &ArchConfig,
    circuit: &Circuit,
    policy: Policy,
    seeds: u32,
    gate_times: Option<GateTimes>,
) -> Result<Vec<RunOutcome>> {
    (0..u64::from(seeds))
        .into_par_iter()
        .map(|seed| compile_once(arch, circuit, policy, seed, gate_times).map(|(_, o)| o))
        .collect()
}

pub const RUN_CSV_HEADER: &str =
    "arch,m,n,v,h,pzs,circuit,policy,seed,gates,makespan,t_cpu";

fn run_csv_row(
    grid: GridParams,
    pzs: u32,
    circuit: &str,
    policy: Policy,
    o: &RunOutcome,
) -> String {
    format!(
        "{arch},{m},{n},{v},{h},{pzs},{circuit},{policy},{seed},{gates},{makespan},{t:.6}",
        arch = ArchSpec(grid),
        m = grid.m,
        n = grid.n,
        v = grid.v,
        h = grid.h,
        seed = o.seed,
        gates = o.gate_count,
        makespan = o.makespan,
        t = o.cpu_secs,
    )
}

/// Per-seed rows plus a `mean` aggregate row.
pub fn benchmark_csv(
    grid: GridParams,
    pzs: u32,
    circuit: &str,
    policy: Policy,
    outcomes: &[RunOutcome],
) -> String {
    let mut out = String::from(RUN_CSV_HEADER);
    out.push('\n');
    for o in outcomes {
        out.push_str(&run_csv_row(grid, pzs, circuit, policy, o));
        out.push('\n');
    }
    if !outcomes.is_empty() {
        let k = outcomes.len() as f64;
        let mean_span = outcomes.iter().map(|o| f64::from(o.makespan)).sum::<f64>() / k;
        let mean_cpu = outcomes.iter().map(|o| o.cpu_secs).sum::<f64>() / k;
        out.push_str(&format!(
            "{arch},{m},{n},{v},{h},{pzs},{circuit},{policy},mean,{gates},{span:.1},{cpu:.6}\n",
            arch = ArchSpec(grid),
            m = grid.m,
            n = grid.n,
            v = grid.v,
            h = grid.h,
            gates = outcomes[0].gate_count,
            span = mean_span,
            cpu = mean_cpu,
        ));
    }
    out
}

pub const SWEEP_CSV_HEADER: &str =
    "arch,m,n,v,h,pzs,circuit,policy,seeds,gates,mean_makespan,improvement";

/// One row per zone count; `improvement` is the fractional makespan saving
/// against the first row's zone count.
pub fn sweep_csv(
    grid: GridParams,
    circuit: &str,
    policy: Policy,
    runs: &[(u32, Vec<RunOutcome>)],
) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    let mut baseline: Option<f64> = None;
    for (pzs, outcomes) in runs {
        let k = outcomes.len() as f64;
        let mean = outcomes.iter().map(|o| f64::from(o.makespan)).sum::<f64>() / k;
        let base = *baseline.get_or_insert(mean);
        out.push_str(&format!(
            "{arch},{m},{n},{v},{h},{pzs},{circuit},{policy},{seeds},{gates},{mean:.1},{imp:.3}\n",
            arch = ArchSpec(grid),
            m = grid.m,
            n = grid.n,
            v = grid.v,
            h = grid.h,
            seeds = outcomes.len(),
            gates = outcomes.first().map_or(0, |o| o.gate_count),
            imp = (base - mean) / base,
        ));
    }
    out
}
