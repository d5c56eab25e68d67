//! Acceptance gate. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use makespan_map::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

/// Evaluate agrees bit-exactly with the naive evaluator on 1000 random
/// instances (|V| <= 30, |B| <= 8, tree and routed, routers, weights, k <= 3).
fn objective_oracle() -> Outcome {
    const INSTANCES: u64 = 1000;
    let start = Instant::now();
    let failures: Vec<String> = (0..INSTANCES)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng(10_000 + i);
            let inst = random_instance(&mut rng, Shape::default());
            for _ in 0..3 {
                let mapping = inst.random_mapping(&mut rng);
                let rep =
                    evaluate(&inst.graph, &mapping, &inst.topology, inst.oracle.as_ref()).unwrap();
                let naive = naive_evaluate(&inst.raw, mapping.as_slice());
                if !matches_naive(&rep, &naive) {
                    return Some(format!("instance {i}: {rep:?} vs {naive:?}"));
                }
            }
            None
        })
        .collect();
    if let Some(f) = failures.first() {
        return Err(format!("{} mismatches, first: {f}", failures.len()));
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "{INSTANCES} instances x 3 mappings in {:.2?}",
        start.elapsed()
    ))
}

fn small_shape() -> Shape {
    Shape {
        max_vertices: 8,
        max_compute: 3,
        ..Shape::default()
    }
}

/// exact_solve equals exhaustive enumeration on 200 instances with
/// |V| <= 8 and at most 3 compute bins, and its mapping attains the optimum.
fn exact_oracle() -> Outcome {
    const INSTANCES: u64 = 200;
    let start = Instant::now();
    let failures: Vec<String> = (0..INSTANCES)
        .into_par_iter()
        .filter_map(|i| {
            let inst = random_instance(&mut rng(20_000 + i), small_shape());
            let (optimum, _) = brute_force(&inst.raw);
            let res = exact_solve(
                &inst.graph,
                &inst.topology,
                inst.oracle.as_ref(),
                &SolveConfig::default(),
            )
            .unwrap();
            let attained = naive_evaluate(&inst.raw, res.mapping.as_slice()).makespan;
            (res.report.makespan != optimum || attained != optimum || !res.proven_optimal).then(
                || {
                    format!(
                        "instance {i}: enumeration {optimum}, exact {} (attains {attained})",
                        res.report.makespan
                    )
                },
            )
        })
        .collect();
    if let Some(f) = failures.first() {
        return Err(format!("{} mismatches, first: {f}", failures.len()));
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{INSTANCES} instances in {:.2?}", start.elapsed()))
}

/// exact <= heuristic solve <= total weight; local search never worsens its start.
fn heuristic_sandwich() -> Outcome {
    const INSTANCES: u64 = 200;
    let heuristic = SolveConfig {
        exact_limit: 0,
        ..SolveConfig::default()
    };
    let failures: Vec<String> = (0..INSTANCES)
        .into_par_iter()
        .filter_map(|i| {
            let inst = random_instance(&mut rng(20_000 + i), small_shape());
            let (optimum, _) = brute_force(&inst.raw);
            let oracle = inst.oracle.as_ref();
            let h = solve(&inst.graph, &inst.topology, oracle, &heuristic).unwrap();
            let total = r(inst.graph.total_weight() as i64);
            if (h.proven_optimal && inst.graph.num_vertices() > 0)
                || !(optimum <= h.report.makespan && h.report.makespan <= total)
            {
                return Some(format!(
                    "instance {i}: optimum {optimum}, heuristic {}, total {total}",
                    h.report.makespan
                ));
            }
            let mut rng = rng(30_000 + i);
            for _ in 0..5 {
                let start = inst.random_mapping(&mut rng);
                let before = evaluate(&inst.graph, &start, &inst.topology, oracle)
                    .unwrap()
                    .makespan;
                let cfg = SolveConfig {
                    seed: rng.gen(),
                    ..SolveConfig::default()
                };
                let after =
                    local_search(&inst.graph, &inst.topology, oracle, &start, &cfg).unwrap();
                if after.report.makespan > before {
                    return Some(format!(
                        "instance {i}: local search {before} -> {}",
                        after.report.makespan
                    ));
                }
            }
            None
        })
        .collect();
    match failures.first() {
        Some(f) => Err(format!("{} violations, first: {f}", failures.len())),
        None => Ok(format!("{INSTANCES} instances, 5 local search starts each")),
    }
}

fn star_fixture(f: Rational) -> (Topology, TreeOracle) {
    let t = Topology::tree(4, &[(0, 1), (0, 2), (0, 3)], &[0], f).unwrap();
    let o = TreeOracle::new(&t).unwrap();
    (t, o)
}

/// One randomized trial of the invariant suite. Returns the violated invariant.
fn invariant_trial(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let inst = random_instance(&mut rng, Shape::default());
    let oracle = inst.oracle.as_ref();
    let mapping = inst.random_mapping(&mut rng);
    let rep = evaluate(&inst.graph, &mapping, &inst.topology, oracle).unwrap();

    // communication conservation
    let comm_sum: Rational = rep.comm_per_link.iter().sum();
    if comm_sum != weighted_route_length_total(&inst, &mapping) {
        return Err("comm conservation".into());
    }

    // route set weights and symmetry
    let bins = inst.compute_bins();
    for &a in &bins {
        for &b in &bins {
            let rs = oracle.routes(a, b).unwrap();
            let total: Rational = rs.paths().iter().map(|_| rs.per_path_weight()).sum();
            if rs.per_path_weight() * r(rs.k() as i64) != r(1) || total != r(1) {
                return Err(format!("route weights for ({a}, {b})"));
            }
            if rs.link_shares() != oracle.routes(b, a).unwrap().link_shares() {
                return Err(format!("route symmetry for ({a}, {b})"));
            }
        }
    }

    // monotonicity in the global factor
    let bump = Rational::new(rng.gen_range(0..8), rng.gen_range(1..4));
    let raised = inst
        .topology
        .with_global_factor(inst.topology.global_factor() + bump)
        .unwrap();
    let rep_raised = evaluate(&inst.graph, &mapping, &raised, oracle).unwrap();
    if rep_raised.makespan < rep.makespan {
        return Err("F monotonicity".into());
    }

    // automorphism invariance on a star with three identical leaves
    let (star, star_oracle) = star_fixture(Rational::new(rng.gen_range(1..5), rng.gen_range(1..3)));
    let leaves = [1usize, 2, 3];
    let star_map = Mapping::new(
        (0..inst.graph.num_vertices())
            .map(|_| *leaves.choose(&mut rng).unwrap())
            .collect(),
    );
    let mut perm = leaves;
    perm.shuffle(&mut rng);
    let permuted = Mapping::new(star_map.as_slice().iter().map(|&b| perm[b - 1]).collect());
    let m1 = evaluate(&inst.graph, &star_map, &star, &star_oracle)
        .unwrap()
        .makespan;
    let m2 = evaluate(&inst.graph, &permuted, &star, &star_oracle)
        .unwrap()
        .makespan;
    if m1 != m2 {
        return Err("automorphism invariance".into());
    }

    // incremental / full agreement over a 100-move random walk
    if inst.graph.num_vertices() > 0 {
        let cache = RouteCache::new(&inst.topology, oracle).unwrap();
        let mut state = LoadState::new(&inst.graph, &cache, &mapping).unwrap();
        let mut current = mapping.into_vec();
        for step in 0..100 {
            let v = rng.gen_range(0..current.len());
            let t = *bins.choose(&mut rng).unwrap();
            let delta = state.move_delta(v, t).unwrap();
            current[v] = t;
            let full = evaluate(
                &inst.graph,
                &Mapping::new(current.clone()),
                &inst.topology,
                oracle,
            )
            .unwrap();
            if delta.makespan != full.makespan {
                return Err(format!("move_delta makespan at step {step}"));
            }
            for &(b, c) in &delta.comp {
                if full.comp_per_bin[b] != c {
                    return Err(format!("move_delta comp at step {step}"));
                }
            }
            for &(l, c) in &delta.comm {
                if full.comm_per_link[l] != c {
                    return Err(format!("move_delta comm at step {step}"));
                }
            }
            state.apply_move(v, t).unwrap();
            if state.report() != full {
                return Err(format!("incremental report at step {step}"));
            }
        }
    }
    Ok(())
}

fn invariant_suite() -> Outcome {
    const TRIALS: u64 = 10_000;
    let start = Instant::now();
    let failures: Vec<String> = (0..TRIALS)
        .into_par_iter()
        .filter_map(|i| {
            invariant_trial(40_000 + i)
                .err()
                .map(|e| format!("trial {i}: {e}"))
        })
        .collect();
    match failures.first() {
        Some(f) => Err(format!("{} violations, first: {f}", failures.len())),
        None => Ok(format!(
            "{TRIALS} trials, 0 violations in {:.2?}",
            start.elapsed()
        )),
    }
}

fn spot_values() -> Outcome {
    let k2 = WorkloadGraph::from_edges(2, &[(0, 1)]).unwrap();
    let line = Topology::tree(2, &[(0, 1)], &[], r(1)).unwrap();
    let line_oracle = TreeOracle::new(&line).unwrap();
    let cfg = SolveConfig::default();

    let f1 = exact_solve(&k2, &line, &line_oracle, &cfg).map_err(|e| e.to_string())?;
    let line3 = line.with_global_factor(r(3)).unwrap();
    let f3 = exact_solve(&k2, &line3, &line_oracle, &cfg).map_err(|e| e.to_string())?;
    if f1.report.makespan != r(1) || f3.report.makespan != r(2) {
        return Err(format!(
            "K2 optima {} / {}",
            f1.report.makespan, f3.report.makespan
        ));
    }

    // compute bins 0 and 1 joined through two routers: 0-2-1 and 0-3-1
    let square = Topology::routed(4, &[(0, 2), (2, 1), (0, 3), (3, 1)], &[2, 3], r(1)).unwrap();
    let two_way = TableOracle::new(&square, [((0, 1), vec![vec![0, 1], vec![2, 3]])]).unwrap();
    let rep =
        evaluate(&k2, &Mapping::new(vec![0, 1]), &square, &two_way).map_err(|e| e.to_string())?;
    if rep.comm_per_link != vec![Rational::new(1, 2); 4] {
        return Err(format!("multipath loads {:?}", rep.comm_per_link));
    }

    let (star, star_oracle) = star_fixture(r(1));
    let tri = WorkloadGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let solved = solve(&tri, &star, &star_oracle, &cfg).map_err(|e| e.to_string())?;
    if solved.report.comp_per_bin[0] != 0 {
        return Err("router carries compute load".into());
    }
    if evaluate(&tri, &Mapping::new(vec![0, 1, 2]), &star, &star_oracle)
        != Err(ObjectiveError::InfeasibleMapping { vertex: 0, bin: 0 })
    {
        return Err("mapping onto a router accepted".into());
    }
    Ok("K2 optimum 1 (F=1) vs 2 (F=3); k=2 loads 1/2; router comp 0".into())
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let graph = dir.path().join("mesh.graph");
    let topo = dir.path().join("fat_tree.topo");
    fs::write(&graph, grid_graph_text(100, 100)).map_err(|e| e.to_string())?;
    fs::write(&topo, fat_tree_text(4, 4, "1")).map_err(|e| e.to_string())?;

    let start = Instant::now();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let mapping = dir.path().join(format!("run{run}.map"));
        let report = dir.path().join(format!("run{run}.report"));
        let status = Command::new(env!("CARGO_BIN_EXE_makespan-map"))
            .args(["--mode", "solve", "--seed", "7"])
            .arg("--topology")
            .arg(&topo)
            .arg("--graph")
            .arg(&graph)
            .arg("--out-mapping")
            .arg(&mapping)
            .arg("--out-report")
            .arg(&report)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("run {run} exited with {status}"));
        }
        outputs.push((fs::read(&mapping).unwrap(), fs::read(&report).unwrap()));
    }
    let elapsed = start.elapsed();
    if outputs[0] != outputs[1] {
        return Err("outputs differ between identical runs".into());
    }
    within(elapsed, Duration::from_secs(60))?;
    let report = String::from_utf8(outputs[0].1.clone()).unwrap();
    let makespan = report.lines().next().unwrap_or_default().to_string();
    Ok(format!(
        "10000-vertex mesh, two runs identical in {elapsed:.2?}, {makespan}"
    ))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 6] = [
        ("objective-definition oracle", objective_oracle),
        ("exact-solver oracle", exact_oracle),
        ("heuristic sandwich", heuristic_sandwich),
        ("invariant suite", invariant_suite),
        ("pinned spot values", spot_values),
        ("CLI determinism on 10k mesh", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
