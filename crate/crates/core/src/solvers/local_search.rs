use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{finish, SolveConfig, SolveError, SolveResult, SolveStats, TraceEntry};
use crate::objective::{LoadState, Mapping, RouteCache, Scratch};
use crate::topology::{RoutingOracle, Topology};
use crate::workload::WorkloadGraph;
use crate::Rational;

pub(crate) struct Outcome {
    pub passes: u64,
    pub trace: Vec<TraceEntry>,
}

/// Best-improvement single-vertex moves.
///
/// Each pass visits every vertex once in a shuffled order and applies its
/// best move if that strictly lowers the search key (makespan, then the sum
/// of squared scaled link loads, then the sum of squared compute loads).
/// The makespan therefore never increases. Stops after a pass without an
/// accepted move, after `max_passes`, or at the deadline.
pub(crate) fn improve<R: Rng>(
    state: &mut LoadState<'_>,
    max_passes: usize,
    rng: &mut R,
    deadline: Option<Instant>,
) -> Outcome {
    let graph = state.graph();
    let bins = state.cache().compute_bins().to_vec();
    let scale = state.cache().tick_scale();
    let mut order: Vec<usize> = (0..graph.num_vertices()).collect();
    let mut scratch = Scratch::default();
    let mut trace = Vec::new();
    let mut passes = 0;
    while passes < max_passes as u64 {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        passes += 1;
        order.shuffle(rng);
        let mut moved = false;
        for &v in &order {
            let Some(src) = state.bin_of(v) else { continue };
            let current = state.key();
            let mut best = (current, src);
            for &b in &bins {
                if b == src {
                    continue;
                }
                let key = state.price(v, Some(b), &mut scratch);
                if key < best.0 {
                    best = (key, b);
                }
            }
            if best.1 != src {
                state.set(v, Some(best.1), &mut scratch);
                debug_assert_eq!(state.key(), best.0);
                trace.push(TraceEntry {
                    vertex: v,
                    from: src,
                    to: best.1,
                    makespan: Rational::new(best.0.makespan, scale),
                    key: best.0,
                });
                moved = true;
            }
        }
        log::debug!("pass {passes}: makespan {}", state.makespan());
        if !moved {
            break;
        }
    }
    Outcome { passes, trace }
}

/// Improves `start` by local search, using the seed in `config`.
pub fn local_search(
    graph: &WorkloadGraph,
    topology: &Topology,
    oracle: &dyn RoutingOracle,
    start: &Mapping,
    config: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    let cache = RouteCache::new(topology, oracle)?;
    let mut state = LoadState::new(graph, &cache, start)?;
    let outcome = improve(
        &mut state,
        config.max_passes,
        &mut config.rng(0),
        config.deadline(),
    );
    let stats = SolveStats {
        moves: outcome.trace.len() as u64,
        passes: outcome.passes,
        ..SolveStats::default()
    };
    let mapping = state.mapping().expect("start mapping is total");
    finish(
        graph,
        topology,
        oracle,
        mapping,
        false,
        stats,
        outcome.trace,
    )
}
