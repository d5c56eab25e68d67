//! Solvers for the makespan mapping problem.
//!
//! [`exact_solve`] is a branch-and-bound search for desk-scale instances and
//! doubles as the correctness oracle for the heuristics. [`greedy_construct`]
//! and [`local_search`] scale to realistic graphs; [`solve`] picks between
//! them and runs independent restarts in parallel.

mod exact;
mod greedy;
mod local_search;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::objective::{evaluate, LoadState, MakespanReport, Mapping, ObjectiveError, RouteCache};
use crate::topology::{RoutingOracle, Topology};
use crate::workload::{VertexId, WorkloadGraph};
use crate::Rational;

pub use exact::exact_solve;
pub use greedy::greedy_construct;
pub use local_search::local_search;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("instance needs {needed} enumeration nodes, exact limit is {limit}")]
    TooLarge { needed: String, limit: u64 },
    #[error("no compute bin available for a nonempty graph")]
    Infeasible,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub seed: u64,
    /// Independent greedy + local search pipelines run by [`solve`].
    pub restarts: usize,
    /// Upper bound on local search passes over all vertices.
    pub max_passes: usize,
    /// Largest `|compute bins|^|V|` handed to the exact solver. `0` forces the
    /// heuristic path in [`solve`] for every nonempty graph.
    pub exact_limit: u64,
    /// Wall-clock bound. When it expires, searches stop and return their best
    /// mapping so far; results then depend on timing.
    pub time_budget: Option<Duration>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 4,
            max_passes: 100,
            exact_limit: 1 << 24,
            time_budget: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.restarts == 0 {
            return Err(SolveError::BadConfig("restarts must be at least 1".into()));
        }
        if self.max_passes == 0 {
            return Err(SolveError::BadConfig(
                "max_passes must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn deadline(&self) -> Option<Instant> {
        self.time_budget.map(|d| Instant::now() + d)
    }

    /// Generator for restart `index`: one ChaCha stream per restart.
    pub(crate) fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Branch-and-bound nodes expanded.
    pub nodes: u64,
    /// Accepted local search moves.
    pub moves: u64,
    pub passes: u64,
    pub restarts: u64,
}

/// One accepted local search move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub vertex: VertexId,
    pub from: usize,
    pub to: usize,
    /// Makespan after the move.
    pub makespan: Rational,
    pub(crate) key: crate::objective::SearchKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub mapping: Mapping,
    pub report: MakespanReport,
    pub proven_optimal: bool,
    pub iterations: SolveStats,
    /// Accepted moves of the winning local search run, in order.
    pub trace: Vec<TraceEntry>,
}

/// `base^exp`, saturating at `u128::MAX`.
pub(crate) fn enumeration_size(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

pub(crate) fn within_exact_limit(graph: &WorkloadGraph, topology: &Topology, limit: u64) -> bool {
    graph.num_vertices() == 0
        || enumeration_size(topology.compute_bins().len(), graph.num_vertices()) <= limit as u128
}

pub(crate) fn finish(
    graph: &WorkloadGraph,
    topology: &Topology,
    oracle: &dyn RoutingOracle,
    mapping: Mapping,
    proven_optimal: bool,
    iterations: SolveStats,
    trace: Vec<TraceEntry>,
) -> Result<SolveResult, SolveError> {
    let report = evaluate(graph, &mapping, topology, oracle)?;
    Ok(SolveResult {
        mapping,
        report,
        proven_optimal,
        iterations,
        trace,
    })
}

struct RestartOutcome {
    makespan: i64,
    mapping: Mapping,
    stats: SolveStats,
    trace: Vec<TraceEntry>,
}

/// Greedy construction followed by local search, from restart stream `index`.
pub(crate) fn pipeline<'a>(
    graph: &'a WorkloadGraph,
    cache: &'a RouteCache,
    config: &SolveConfig,
    index: usize,
    deadline: Option<Instant>,
) -> Result<(LoadState<'a>, local_search::Outcome), SolveError> {
    let mut rng = config.rng(index);
    let mut state = greedy::construct(graph, cache, &mut rng)?;
    let outcome = local_search::improve(&mut state, config.max_passes, &mut rng, deadline);
    Ok((state, outcome))
}

/// Multistart driver: exact search for small instances, otherwise the best
/// of `restarts` independent greedy + local search runs.
pub fn solve(
    graph: &WorkloadGraph,
    topology: &Topology,
    oracle: &dyn RoutingOracle,
    config: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    if within_exact_limit(graph, topology, config.exact_limit) {
        return exact_solve(graph, topology, oracle, config);
    }
    let cache = RouteCache::new(topology, oracle)?;
    let deadline = config.deadline();
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|i| {
            let (state, ls) = pipeline(graph, &cache, config, i, deadline)?;
            Ok(RestartOutcome {
                makespan: state.makespan_ticks(),
                mapping: state.mapping().expect("greedy places every vertex"),
                stats: SolveStats {
                    nodes: 0,
                    moves: ls.trace.len() as u64,
                    passes: ls.passes,
                    restarts: 1,
                },
                trace: ls.trace,
            })
        })
        .collect::<Result<_, SolveError>>()?;

    let mut totals = SolveStats::default();
    for o in &outcomes {
        totals.moves += o.stats.moves;
        totals.passes += o.stats.passes;
        totals.restarts += 1;
    }
    // lowest makespan, earliest restart on ties
    let mut best = outcomes
        .into_iter()
        .enumerate()
        .min_by_key(|(i, o)| (o.makespan, *i))
        .map(|(_, o)| o)
        .expect("at least one restart");

    // Co-locating everything on one compute bin costs exactly the total
    // weight; fall back to a local search from there if every restart is worse.
    let colocated = graph.total_weight() as i64 * cache.tick_scale();
    if best.makespan > colocated {
        let start = Mapping::uniform(graph.num_vertices(), cache.compute_bins()[0]);
        let mut state = LoadState::new(graph, &cache, &start)?;
        let ls = local_search::improve(
            &mut state,
            config.max_passes,
            &mut config.rng(config.restarts),
            deadline,
        );
        totals.moves += ls.trace.len() as u64;
        totals.passes += ls.passes;
        totals.restarts += 1;
        best = RestartOutcome {
            makespan: state.makespan_ticks(),
            mapping: state.mapping().expect("total mapping"),
            stats: SolveStats::default(),
            trace: ls.trace,
        };
    }
    log::info!(
        "best of {} restarts: makespan {}",
        totals.restarts,
        Rational::new(best.makespan, cache.tick_scale())
    );
    finish(
        graph,
        topology,
        oracle,
        best.mapping,
        false,
        totals,
        best.trace,
    )
}
