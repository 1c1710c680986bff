//! End-to-end acceptance checks. Each test covers one numbered criterion and
//! prints a single `[acceptance] criterion N (...): PASS|FAIL` line; run
//! `cargo test --test acceptance -- --nocapture` to see the full report.

use std::collections::VecDeque;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use qccd_core::partition::cut_weight;
use qccd_core::{
    compile, desired_next_edge, edge_distance, execute_moves, gen_ghz, gen_qft, gen_random,
    partition, plan_exit_path, verify, ArchConfig, Circuit, CompileConfig, DeviceGraph,
    EdgeId, ExitPlan, GridParams, InteractionGraph, IonState, Move, NextHop, Policy, PzId,
    QubitId, Router, Schedule,
};

fn report(n: u32, what: &str, detail: &str, failures: &[String]) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {n} ({what}): {verdict} ({detail})");
    assert!(failures.is_empty(), "criterion {n}:\n  {}", failures.join("\n  "));
}

fn grid(m: u32, n: u32, v: u32, h: u32) -> GridParams {
    GridParams { m, n, v, h }
}

fn arch(g: GridParams, pzs: u32) -> ArchConfig {
    ArchConfig::with_default_pzs(g, pzs).unwrap()
}

fn budget(failures: &mut Vec<String>, elapsed: Duration, cap_secs: u64) {
    if elapsed >= Duration::from_secs(cap_secs) {
        failures.push(format!("took {:.1}s, budget {cap_secs}s", elapsed.as_secs_f64()));
    }
}

#[test]
fn criterion_1_grid_edge_counts() {
    let t0 = Instant::now();
    let table = [
        ((3, 3, 1, 1), 12u32),
        ((4, 4, 1, 1), 24),
        ((3, 3, 3, 3), 36),
        ((5, 5, 1, 1), 40),
        ((3, 3, 5, 5), 60),
        ((4, 4, 3, 3), 72),
    ];
    let mut failures = Vec::new();
    for ((m, n, v, h), want) in table {
        let g = DeviceGraph::build_grid(m, n, v, h).unwrap();
        if g.mz_edge_count() != want || g.num_edges() as u32 != want {
            failures.push(format!(
                "{m}x{n}x{v}x{h}: {} memory edges, want {want}",
                g.mz_edge_count()
            ));
        }
    }
    let dt = t0.elapsed();
    budget(&mut failures, dt, 1);
    report(
        1,
        "memory-grid edge counts",
        &format!("6 architectures, {:.3}s", dt.as_secs_f64()),
        &failures,
    );
}

struct MatrixRun {
    label: String,
    schedule: Schedule,
    critical_path: u64,
}

fn build_family(family: &str, qubits: u32) -> Circuit {
    match family {
        "ghz" => gen_ghz(qubits).unwrap(),
        "qft" => gen_qft(qubits).unwrap(),
        _ => gen_random(qubits, 1).unwrap(),
    }
}

/// Every schedule in the validity matrix, compiled once and shared between
/// the criteria that consume it.
fn validity_matrix() -> &'static (Vec<MatrixRun>, Duration) {
    static MATRIX: OnceLock<(Vec<MatrixRun>, Duration)> = OnceLock::new();
    MATRIX.get_or_init(|| {
        let t0 = Instant::now();
        let mut jobs = Vec::new();
        for (g, qubits) in [(grid(3, 3, 1, 1), 12u32), (grid(4, 4, 1, 1), 24)] {
            for family in ["ghz", "qft", "random"] {
                for pzs in 1..=4u32 {
                    for seed in 0..5u64 {
                        jobs.push((g, qubits, family, pzs, seed));
                    }
                }
            }
        }
        let runs: Vec<MatrixRun> = jobs
            .into_par_iter()
            .map(|(g, qubits, family, pzs, seed)| {
                let circuit = build_family(family, qubits);
                let cfg = CompileConfig { seed, ..CompileConfig::default() };
                let label =
                    format!("{family}:{qubits} on {}x{} with {pzs} pzs, seed {seed}", g.m, g.n);
                let schedule = compile(&arch(g, pzs), &circuit, &cfg)
                    .unwrap_or_else(|e| panic!("{label}: {e}"));
                MatrixRun { label, schedule, critical_path: circuit.critical_path_time() }
            })
            .collect();
        (runs, t0.elapsed())
    })
}

#[test]
fn criterion_2_validity_matrix() {
    let (runs, build_time) = validity_matrix();
    let t0 = Instant::now();
    let mut failures: Vec<String> = runs
        .par_iter()
        .filter_map(|run| {
            let rep = verify(&run.schedule);
            if rep.is_valid() {
                None
            } else {
                Some(format!(
                    "{}: {} violations, first: {}",
                    run.label,
                    rep.violations.len(),
                    rep.violations[0]
                ))
            }
        })
        .collect();
    let total = *build_time + t0.elapsed();
    budget(&mut failures, total, 300);
    report(
        2,
        "verifier-clean schedule matrix",
        &format!("{} schedules, {:.1}s", runs.len(), total.as_secs_f64()),
        &failures,
    );
}

#[test]
fn criterion_3_selection_policy_speedup() {
    let t0 = Instant::now();
    let a = arch(grid(3, 3, 1, 1), 2);
    let circuit = gen_qft(12).unwrap();
    let mean = |policy: Policy| -> f64 {
        let total: u64 = (0..5u64)
            .into_par_iter()
            .map(|seed| {
                let cfg = CompileConfig { seed, policy, ..CompileConfig::default() };
                let s = compile(&a, &circuit, &cfg).unwrap();
                assert!(verify(&s).is_valid(), "{policy} seed {seed} failed verification");
                u64::from(s.makespan)
            })
            .sum();
        total as f64 / 5.0
    };
    let dag = mean(Policy::Dag);
    let naive = mean(Policy::Naive);
    let ratio = dag / naive;
    let mut failures = Vec::new();
    if !(ratio <= 0.7) {
        failures.push(format!("mean makespan ratio {ratio:.3} exceeds 0.700"));
    }
    let dt = t0.elapsed();
    budget(&mut failures, dt, 120);
    report(
        3,
        "dependency-aware selection beats in-order",
        &format!("mean {dag:.1} vs {naive:.1}, ratio {ratio:.3} <= 0.700, {:.1}s", dt.as_secs_f64()),
        &failures,
    );
}

#[test]
fn criterion_4_more_zones_shrink_the_makespan() {
    let t0 = Instant::now();
    let circuit = gen_qft(24).unwrap();
    let means: Vec<f64> = (1..=4u32)
        .map(|pzs| {
            let a = arch(grid(4, 4, 1, 1), pzs);
            let total: u64 = (0..5u64)
                .into_par_iter()
                .map(|seed| {
                    let cfg = CompileConfig { seed, ..CompileConfig::default() };
                    let s = compile(&a, &circuit, &cfg).unwrap();
                    assert!(verify(&s).is_valid(), "{pzs} pzs seed {seed} failed verification");
                    u64::from(s.makespan)
                })
                .sum();
            total as f64 / 5.0
        })
        .collect();
    let ratio = means[3] / means[0];
    let mut failures = Vec::new();
    if !(ratio <= 0.8) {
        failures.push(format!("4-zone/1-zone ratio {ratio:.3} exceeds 0.800"));
    }
    for k in 0..3 {
        if means[k + 1] > 1.05 * means[k] {
            failures.push(format!(
                "mean makespan rises from {:.1} ({} pzs) to {:.1} ({} pzs)",
                means[k],
                k + 1,
                means[k + 1],
                k + 2
            ));
        }
    }
    let dt = t0.elapsed();
    budget(&mut failures, dt, 600);
    report(
        4,
        "makespan shrinks with added zones",
        &format!(
            "means {:.1}/{:.1}/{:.1}/{:.1}, 4pz vs 1pz {ratio:.3} <= 0.800, {:.1}s",
            means[0],
            means[1],
            means[2],
            means[3],
            dt.as_secs_f64()
        ),
        &failures,
    );
}

#[test]
fn criterion_5_makespan_dominates_the_critical_path() {
    let (runs, _) = validity_matrix();
    let mut failures = Vec::new();
    for run in runs {
        if u64::from(run.schedule.makespan) < run.critical_path {
            failures.push(format!(
                "{}: makespan {} below critical path {}",
                run.label, run.schedule.makespan, run.critical_path
            ));
        }
    }
    report(
        5,
        "makespan dominates the gate critical path",
        &format!("{} schedules", runs.len()),
        &failures,
    );
}

/// Successor relation derived straight from the device primitives, bypassing
/// the routing tables under test.
fn raw_successors(g: &DeviceGraph, e: EdgeId) -> Vec<EdgeId> {
    let ends = g.edge(e).ends;
    let mut out = Vec::new();
    for via in [ends.0, ends.1] {
        if !g.can_exit(e, via) {
            continue;
        }
        for &f in g.incident_edges(via) {
            if f != e && g.can_enter(f, via) {
                out.push(f);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn raw_bfs(g: &DeviceGraph, from: EdgeId, admissible: &dyn Fn(EdgeId) -> bool) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.num_edges()];
    dist[from.index()] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(e) = queue.pop_front() {
        let d = dist[e.index()].unwrap();
        for f in raw_successors(g, e) {
            if admissible(f) && dist[f.index()].is_none() {
                dist[f.index()] = Some(d + 1);
                queue.push_back(f);
            }
        }
    }
    dist
}

/// Distance to `pz`'s core for every edge, restricted to the memory zone and
/// the target zone itself, computed by reverse BFS on the raw relation.
fn raw_dist_to_core(g: &DeviceGraph, pz: PzId) -> Vec<Option<u32>> {
    let admissible = |e: EdgeId| {
        let z = g.zone(e);
        z.is_mz() || z.pz() == Some(pz)
    };
    let mut rev: Vec<Vec<EdgeId>> = vec![Vec::new(); g.num_edges()];
    for e in (0..g.num_edges() as u32).map(EdgeId) {
        if !admissible(e) {
            continue;
        }
        for f in raw_successors(g, e) {
            if admissible(f) {
                rev[f.index()].push(e);
            }
        }
    }
    let core = g.pz(pz).core;
    let mut dist = vec![None; g.num_edges()];
    dist[core.index()] = Some(0u32);
    let mut queue = VecDeque::from([core]);
    while let Some(e) = queue.pop_front() {
        let d = dist[e.index()].unwrap();
        for &p in &rev[e.index()] {
            if dist[p.index()].is_none() {
                dist[p.index()] = Some(d + 1);
                queue.push_back(p);
            }
        }
    }
    dist
}

/// Shortest memory-zone walk length from `pz`'s boundary junction to each
/// free edge, over (edge, entered-via-node) states; returns the nearest free
/// edge and its walk length.
fn raw_exit_target(g: &DeviceGraph, pz: PzId, free: &[EdgeId]) -> Option<(EdgeId, u32)> {
    let j = g.pz(pz).attach;
    let mz = g.mz_edge_count();
    let side = |e: EdgeId, via| usize::from(g.edge(e).ends.1 == via);
    let mut dist = vec![u32::MAX; mz as usize * 2];
    let mut queue = VecDeque::new();
    for &f in g.incident_edges(j) {
        if f.0 < mz && g.can_enter(f, j) {
            let s = f.index() * 2 + side(f, j);
            if dist[s] == u32::MAX {
                dist[s] = 1;
                queue.push_back((f, j));
            }
        }
    }
    while let Some((e, via)) = queue.pop_front() {
        let d = dist[e.index() * 2 + side(e, via)];
        let out = g.other_end(e, via);
        if !g.can_exit(e, out) {
            continue;
        }
        for &f in g.incident_edges(out) {
            if f == e || f.0 >= mz || !g.can_enter(f, out) {
                continue;
            }
            let s = f.index() * 2 + side(f, out);
            if dist[s] == u32::MAX {
                dist[s] = d + 1;
                queue.push_back((f, out));
            }
        }
    }
    free.iter()
        .map(|&f| (f, dist[f.index() * 2].min(dist[f.index() * 2 + 1])))
        .filter(|&(_, d)| d != u32::MAX)
        .min_by_key(|&(f, d)| (d, f.0))
}

#[test]
fn criterion_6_routing_matches_brute_force() {
    let t0 = Instant::now();
    let g = DeviceGraph::from_arch(&arch(grid(3, 3, 1, 1), 2)).unwrap();
    let router = Router::new(&g);
    let mz = g.mz_edge_count();
    let n_edges = g.num_edges() as u32;
    let mut failures = Vec::new();

    // All-pairs edge distances against the raw BFS.
    for from in (0..n_edges).map(EdgeId) {
        let oracle = raw_bfs(&g, from, &|_| true);
        for to in (0..n_edges).map(EdgeId) {
            let got = edge_distance(&g, from, to);
            if got != oracle[to.index()] {
                failures.push(format!(
                    "distance {from}->{to}: got {got:?}, oracle {:?}",
                    oracle[to.index()]
                ));
            }
        }
    }

    // Next-hop choice for every (start edge, target zone) pair.
    for pz in g.pzs() {
        let dist = raw_dist_to_core(&g, pz.id);
        for e in (0..n_edges).map(EdgeId) {
            let mut state = IonState::empty(&g);
            let ion = state.add_ion(&g, e).unwrap();
            let got = desired_next_edge(&g, &router, &state, ion, pz.id);
            let want = if e == pz.core {
                NextHop::Arrived
            } else {
                raw_successors(&g, e)
                    .into_iter()
                    .filter_map(|f| dist[f.index()].map(|d| (d, f)))
                    .min()
                    .map_or(NextHop::Unreachable, |(_, f)| NextHop::Step(f))
            };
            if got != want {
                failures.push(format!("next hop from {e} to zone {}: got {got:?}, want {want:?}", pz.id));
            }
        }
    }

    // Exit targets for every free-edge configuration with at most 3 free
    // edges: all other memory edges hold a blocker, one ion drains from the
    // core.
    let mut free_sets: Vec<Vec<EdgeId>> = vec![Vec::new()];
    for a in 0..mz {
        free_sets.push(vec![EdgeId(a)]);
        for b in a + 1..mz {
            free_sets.push(vec![EdgeId(a), EdgeId(b)]);
            for c in b + 1..mz {
                free_sets.push(vec![EdgeId(a), EdgeId(b), EdgeId(c)]);
            }
        }
    }
    for pz in g.pzs() {
        for free in &free_sets {
            let mut state = IonState::empty(&g);
            for e in (0..mz).map(EdgeId) {
                if !free.contains(&e) {
                    state.add_ion(&g, e).unwrap();
                }
            }
            let ion = state.add_ion(&g, pz.core).unwrap();
            let plan = plan_exit_path(&g, &router, &state, pz.id, ion).unwrap();
            let want = raw_exit_target(&g, pz.id, free);
            match (plan, want) {
                (ExitPlan::Congested, None) => {}
                (ExitPlan::Congested, Some((f, _))) => {
                    failures.push(format!("zone {}: congested despite free edge {f}", pz.id));
                }
                (ExitPlan::Admissible(_), None) => {
                    failures.push(format!("zone {}: drained with no free edge", pz.id));
                }
                (ExitPlan::Admissible(mv), Some((f, len))) => {
                    let edges = mv.edges();
                    let tail = edges.iter().filter(|e| e.0 < mz).count() as u32;
                    if edges.last() != Some(&f) || tail != len {
                        failures.push(format!(
                            "zone {} free {free:?}: path ends at {:?} after {tail} grid edges, oracle {f} after {len}",
                            pz.id,
                            edges.last()
                        ));
                    }
                    let mut probe = state.clone();
                    if let Err(e) = execute_moves(&g, &mut probe, std::slice::from_ref(&mv)) {
                        failures.push(format!("zone {} free {free:?}: plan fails to execute: {e}", pz.id));
                    }
                }
            }
            if failures.len() > 5 {
                break;
            }
        }
    }

    let dt = t0.elapsed();
    budget(&mut failures, dt, 30);
    report(
        6,
        "routing matches brute-force search",
        &format!(
            "{n_edges}x{n_edges} distances, {} next hops, {} drain configs, {:.1}s",
            2 * n_edges,
            2 * free_sets.len(),
            dt.as_secs_f64()
        ),
        &failures,
    );
}

fn clique_circuit(k: u32, q: u32) -> Circuit {
    let mut c = Circuit::new(k * q);
    for part in 0..k {
        let base = part * q;
        for i in 0..q {
            for j in i + 1..q {
                c.push_two(QubitId(base + i), QubitId(base + j), 0.5).unwrap();
            }
        }
    }
    c
}

fn enumerate_min_cut(
    g: &InteractionGraph,
    quotas: &mut [u32],
    assign: &mut [u32],
    pos: usize,
    cut_so_far: u64,
    best: &mut u64,
) {
    if pos == assign.len() {
        *best = (*best).min(cut_so_far);
        return;
    }
    for part in 0..quotas.len() {
        if quotas[part] == 0 {
            continue;
        }
        let mut added = 0;
        for prev in 0..pos {
            if assign[prev] != part as u32 {
                added += g.weight(QubitId(prev as u32), QubitId(pos as u32));
            }
        }
        quotas[part] -= 1;
        assign[pos] = part as u32;
        enumerate_min_cut(g, quotas, assign, pos + 1, cut_so_far + added, best);
        quotas[part] += 1;
    }
}

#[test]
fn criterion_7_partitioner_is_optimal_on_separable_inputs() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut cases = Vec::new();
    for (k, q) in [(2u32, 6u32), (3, 4), (4, 3)] {
        let circuit = clique_circuit(k, q);
        let graph = InteractionGraph::from_circuit(&circuit);
        let part = partition(&circuit, k, 0).unwrap();
        let ours = cut_weight(&graph, &part);
        let mut best = u64::MAX;
        let n = (k * q) as usize;
        enumerate_min_cut(&graph, &mut vec![q; k as usize], &mut vec![0; n], 0, 0, &mut best);
        if best != 0 {
            failures.push(format!("{k} cliques of {q}: enumeration found min cut {best}, not 0"));
        }
        if ours != best {
            failures.push(format!("{k} cliques of {q}: cut {ours}, optimum {best}"));
        }
        if part.part_sizes() != vec![q; k as usize] {
            failures.push(format!("{k} cliques of {q}: uneven parts {:?}", part.part_sizes()));
        }
        cases.push(format!("{k}x{q}"));
    }
    let dt = t0.elapsed();
    budget(&mut failures, dt, 30);
    report(
        7,
        "zero-cut partitions on disjoint cliques",
        &format!("{}, {:.1}s", cases.join(" "), dt.as_secs_f64()),
        &failures,
    );
}

#[test]
fn criterion_8_byte_identical_reruns() {
    let a = arch(grid(3, 3, 1, 1), 2);
    let circuit = gen_qft(12).unwrap();
    let mut failures = Vec::new();
    for policy in [Policy::Dag, Policy::Naive] {
        let cfg = CompileConfig { seed: 3, policy, ..CompileConfig::default() };
        let first = compile(&a, &circuit, &cfg).unwrap().to_json();
        let second = compile(&a, &circuit, &cfg).unwrap().to_json();
        if first != second {
            failures.push(format!("{policy}: reruns differ"));
        }
    }
    report(8, "byte-identical schedules per config", "qft:12, both policies", &failures);
}

fn mutate_drop_a_move(s: &mut Schedule) -> bool {
    for step in &mut s.steps {
        if !step.moves.is_empty() {
            step.moves.remove(0);
            return true;
        }
    }
    false
}

fn mutate_scramble_a_rotation(s: &mut Schedule) -> bool {
    for step in &mut s.steps {
        for mv in &mut step.moves {
            if let Move::Cycle { edges } = mv {
                if edges.len() >= 3 {
                    edges.swap(1, 2);
                    return true;
                }
            }
        }
    }
    false
}

fn mutate_duplicate_a_move(s: &mut Schedule) -> bool {
    for step in &mut s.steps {
        if let Some(mv) = step.moves.first().cloned() {
            step.moves.push(mv);
            return true;
        }
    }
    false
}

fn mutate_reverse_a_zone_path(s: &mut Schedule) -> bool {
    let mz = {
        let g = DeviceGraph::build_grid(s.meta.arch.m, s.meta.arch.n, s.meta.arch.v, s.meta.arch.h);
        g.unwrap().mz_edge_count()
    };
    for step in &mut s.steps {
        for mv in &mut step.moves {
            if let Move::Path { edges, .. } = mv {
                if edges.iter().any(|e| e.0 >= mz) {
                    edges.reverse();
                    return true;
                }
            }
        }
    }
    false
}

fn mutate_drop_a_completion(s: &mut Schedule) -> bool {
    for step in s.steps.iter_mut().rev() {
        if !step.gate_completions.is_empty() {
            step.gate_completions.pop();
            return true;
        }
    }
    false
}

fn mutate_start_a_step_early(s: &mut Schedule) -> bool {
    for t in 1..s.steps.len() {
        if !s.steps[t].gate_starts.is_empty() {
            let start = s.steps[t].gate_starts.remove(0);
            s.steps[t - 1].gate_starts.push(start);
            return true;
        }
    }
    false
}

fn mutate_double_start(s: &mut Schedule) -> bool {
    for step in &mut s.steps {
        if let Some(&start) = step.gate_starts.first() {
            step.gate_starts.push(start);
            return true;
        }
    }
    false
}

fn mutate_corrupt_a_pick(s: &mut Schedule) -> bool {
    for step in &mut s.steps {
        for mv in &mut step.moves {
            if let Move::Path { picks, .. } = mv {
                if let Some(pick) = picks.first_mut() {
                    pick.1 .0 += 1000;
                    return true;
                }
            }
        }
    }
    false
}

fn mutate_forge_final_placement(s: &mut Schedule) -> bool {
    let fp = &mut s.meta.final_placement;
    for i in 1..fp.len() {
        if fp[i].1 != fp[0].1 {
            let (a, b) = (fp[0].1, fp[i].1);
            fp[0].1 = b;
            fp[i].1 = a;
            return true;
        }
    }
    false
}

fn mutate_corrupt_makespan(s: &mut Schedule) -> bool {
    s.makespan += 1;
    true
}

#[test]
fn criterion_9_verifier_kills_every_mutation() {
    let a = arch(grid(3, 3, 1, 1), 2);
    let circuit = gen_qft(8).unwrap();
    let cfg = CompileConfig::default();
    let base = compile(&a, &circuit, &cfg).unwrap();
    assert!(verify(&base).is_valid(), "baseline schedule must verify clean");

    let mutations: [(&str, fn(&mut Schedule) -> bool); 10] = [
        ("drop a move", mutate_drop_a_move),
        ("scramble a rotation", mutate_scramble_a_rotation),
        ("duplicate a move", mutate_duplicate_a_move),
        ("reverse a zone path", mutate_reverse_a_zone_path),
        ("drop a completion", mutate_drop_a_completion),
        ("start a step early", mutate_start_a_step_early),
        ("double start", mutate_double_start),
        ("corrupt a pick", mutate_corrupt_a_pick),
        ("forge final placement", mutate_forge_final_placement),
        ("corrupt makespan", mutate_corrupt_makespan),
    ];
    let mut failures = Vec::new();
    let mut killed = 0;
    for (name, mutate) in mutations {
        let mut mutant = base.clone();
        if !mutate(&mut mutant) {
            failures.push(format!("{name}: nothing to mutate in the baseline"));
            continue;
        }
        let rep = verify(&mutant);
        if rep.is_valid() {
            failures.push(format!("{name}: verifier accepted the mutant"));
        } else {
            killed += 1;
        }
    }
    report(
        9,
        "verifier kills every schedule mutation",
        &format!("{killed}/{} mutation kinds flagged", mutations.len()),
        &failures,
    );
}
