//! End-to-end checks: compile real workloads, replay them through the
//! verifier, and hold the compiler to its structural guarantees.

use qccd_core::{
    compile, gen_ghz, gen_qft, gen_random, parse_qasm, serialize_qasm, verify, ArchConfig,
    Circuit, CompileConfig, GridParams, Policy, Schedule,
};

fn grid(m: u32, n: u32) -> GridParams {
    GridParams { m, n, v: 1, h: 1 }
}

fn compile_ok(arch: &ArchConfig, circuit: &Circuit, cfg: &CompileConfig) -> Schedule {
    let sched = compile(arch, circuit, cfg).unwrap();
    let report = verify(&sched);
    assert!(
        report.is_valid(),
        "policy {} seed {}: {} violations, first: {:?}",
        cfg.policy,
        cfg.seed,
        report.violations.len(),
        report.violations.first()
    );
    sched
}

#[test]
fn workload_matrix_compiles_and_verifies_clean() {
    let circuits: Vec<(&str, Circuit)> = vec![
        ("ghz", gen_ghz(8).unwrap()),
        ("qft", gen_qft(8).unwrap()),
        ("random", gen_random(8, 1).unwrap()),
    ];
    for pzs in [1, 2, 3] {
        let arch = ArchConfig::with_default_pzs(grid(3, 3), pzs).unwrap();
        for (name, circuit) in &circuits {
            for seed in [0, 1] {
                for policy in [Policy::Dag, Policy::Naive] {
                    let cfg = CompileConfig { seed, policy, ..Default::default() };
                    let sched = compile_ok(&arch, circuit, &cfg);
                    assert!(
                        u64::from(sched.makespan) >= circuit.critical_path_time(),
                        "{name}: makespan below the dependency bound"
                    );
                }
            }
        }
    }
}

#[test]
fn dependency_aware_policy_beats_the_baseline_here() {
    let arch = ArchConfig::with_default_pzs(grid(3, 3), 2).unwrap();
    let circuit = gen_qft(12).unwrap();
    let dag = compile_ok(&arch, &circuit, &CompileConfig { seed: 0, ..Default::default() });
    let naive = compile_ok(
        &arch,
        &circuit,
        &CompileConfig { seed: 0, policy: Policy::Naive, ..Default::default() },
    );
    assert!(
        dag.makespan < naive.makespan,
        "dag {} vs naive {}",
        dag.makespan,
        naive.makespan
    );
}

#[test]
fn schedules_are_reproducible_bytes() {
    let arch = ArchConfig::with_default_pzs(grid(3, 3), 3).unwrap();
    let circuit = gen_ghz(10).unwrap();
    let cfg = CompileConfig { seed: 9, ..Default::default() };
    let a = compile(&arch, &circuit, &cfg).unwrap().to_json();
    let b = compile(&arch, &circuit, &cfg).unwrap().to_json();
    assert_eq!(a, b);
    let reparsed = Schedule::from_json(&a).unwrap();
    assert_eq!(reparsed.to_json(), a);
}

#[test]
fn qasm_round_trip_preserves_the_schedule() {
    let arch = ArchConfig::with_default_pzs(grid(3, 3), 2).unwrap();
    let circuit = gen_random(6, 42).unwrap();
    let text = serialize_qasm(&circuit);
    let reparsed = parse_qasm(&text).unwrap();
    let cfg = CompileConfig { seed: 5, ..Default::default() };
    let a = compile(&arch, &circuit, &cfg).unwrap();
    let b = compile(&arch, &reparsed, &cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn sparse_circuits_ride_along_with_ballast_ions() {
    // 4 working qubits among 24 ions; the rest are shuffled around as cargo
    let arch = ArchConfig::with_default_pzs(grid(4, 4), 2).unwrap();
    let circuit = gen_ghz(4).unwrap();
    for seed in [0, 3] {
        let cfg = CompileConfig { seed, ..Default::default() };
        let sched = compile_ok(&arch, &circuit, &cfg);
        assert_eq!(sched.meta.final_placement.len(), 24);
        assert_eq!(sched.meta.num_qubits, 4);
    }
}

#[test]
fn wider_workloads_use_every_zone() {
    let arch = ArchConfig::with_default_pzs(grid(4, 4), 4).unwrap();
    let circuit = gen_qft(12).unwrap();
    let sched = compile_ok(&arch, &circuit, &CompileConfig::default());
    let report = verify(&sched);
    assert!(report.stats.gates_per_pz.iter().all(|c| *c > 0), "{:?}", report.stats.gates_per_pz);
}
