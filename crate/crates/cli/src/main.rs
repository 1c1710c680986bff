use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use qccd_cli::{benchmark_csv, compile_once, run_seeds, sweep_csv, ArchSpec, CircuitSpec};
use qccd_core::{verify, ArchConfig, GateTimes, Policy, Schedule};

#[derive(Parser)]
#[command(name = "qccd", version, about = "Compile circuits onto grid-based trapped-ion hardware")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a workload and emit the schedule (or a seed-batch CSV)
    Compile {
        /// Grid shorthand MxNxVxH
        #[arg(long, default_value = "3x3x1x1")]
        arch: ArchSpec,
        /// Number of processing zones on the grid perimeter
        #[arg(long, default_value_t = 1)]
        pzs: u32,
        /// ghz:N | qft:N | random:N[:SEED] | path/to/file.qasm
        #[arg(long)]
        circuit: CircuitSpec,
        /// Gate selection policy (dag | naive)
        #[arg(long, default_value = "dag")]
        policy: Policy,
        /// Placement/partition seed for a single run
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Benchmark seeds 0..N instead of one run; emits CSV
        #[arg(long, conflicts_with = "seed")]
        seeds: Option<u32>,
        /// Write the schedule JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the benchmark CSV here instead of stdout
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Single-qubit gate duration in steps
        #[arg(long)]
        single_time: Option<u32>,
        /// Two-qubit gate duration in steps
        #[arg(long)]
        two_time: Option<u32>,
    },
    /// Replay a schedule file and report every rule violation
    Verify {
        schedule: PathBuf,
        /// Emit the full report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Benchmark one workload across zone counts
    Sweep {
        #[arg(long, default_value = "4x4x1x1")]
        arch: ArchSpec,
        /// Zone counts 1..=N
        #[arg(long, default_value_t = 4)]
        max_pzs: u32,
        #[arg(long)]
        circuit: CircuitSpec,
        #[arg(long, default_value = "dag")]
        policy: Policy,
        /// Seeds 0..N per zone count
        #[arg(long, default_value_t = 5)]
        seeds: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn gate_times(single: Option<u32>, two: Option<u32>) -> Option<GateTimes> {
    if single.is_none() && two.is_none() {
        return None;
    }
    let default = GateTimes::default();
    Some(GateTimes {
        single: single.unwrap_or(default.single),
        two: two.unwrap_or(default.two),
    })
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Compile {
            arch,
            pzs,
            circuit,
            policy,
            seed,
            seeds,
            out,
            csv,
            single_time,
            two_time,
        } => {
            let config = ArchConfig::with_default_pzs(arch.0, pzs)?;
            let workload = circuit.build()?;
            let times = gate_times(single_time, two_time);
            match seeds {
                Some(n) => {
                    let outcomes = run_seeds(&config, &workload, policy, n, times)?;
                    let text =
                        benchmark_csv(arch.0, pzs, &circuit.to_string(), policy, &outcomes);
                    emit(&text, csv.as_ref())?;
                }
                None => {
                    let (schedule, outcome) =
                        compile_once(&config, &workload, policy, seed, times)?;
                    emit(&schedule.to_json(), out.as_ref())?;
                    if out.is_some() {
                        eprintln!(
                            "{} gates in {} steps ({:.3}s)",
                            outcome.gate_count, outcome.makespan, outcome.cpu_secs
                        );
                    }
                    if let Some(path) = csv {
                        let text = benchmark_csv(
                            arch.0,
                            pzs,
                            &circuit.to_string(),
                            policy,
                            &[outcome],
                        );
                        emit(&text, Some(&path))?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { schedule, json } => {
            let text = std::fs::read_to_string(&schedule)
                .with_context(|| format!("reading {}", schedule.display()))?;
            let sched = Schedule::from_json(&text)
                .with_context(|| format!("parsing {}", schedule.display()))?;
            let report = verify(&sched);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for v in &report.violations {
                    println!("violation: {v}");
                }
                println!(
                    "{}: {} steps, {} moves, {} gates",
                    if report.is_valid() { "valid" } else { "INVALID" },
                    report.stats.makespan,
                    report.stats.total_moves,
                    report.stats.gates_per_pz.iter().sum::<u32>(),
                );
            }
            Ok(if report.is_valid() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Cmd::Sweep { arch, max_pzs, circuit, policy, seeds, csv } => {
            let workload = circuit.build()?;
            let mut runs = Vec::new();
            for pzs in 1..=max_pzs {
                let config = ArchConfig::with_default_pzs(arch.0, pzs)?;
                runs.push((pzs, run_seeds(&config, &workload, policy, seeds, None)?));
            }
            let text = sweep_csv(arch.0, &circuit.to_string(), policy, &runs);
            emit(&text, csv.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
