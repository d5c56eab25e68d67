use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{SolveConfig, SolveError};
use crate::objective::{LoadState, Mapping, RouteCache, Scratch};
use crate::topology::{RoutingOracle, Topology};
use crate::workload::WorkloadGraph;

/// Breadth-first vertex order. The first root is a random vertex; further
/// components start from the next unvisited vertex of a random permutation.
pub(crate) fn bfs_order<R: Rng>(graph: &WorkloadGraph, rng: &mut R) -> Vec<usize> {
    let n = graph.num_vertices();
    let mut roots: Vec<usize> = (0..n).collect();
    roots.shuffle(rng);
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for root in roots {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in graph.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order
}

/// Places each vertex, in BFS order, on the compute bin that minimises the
/// partial makespan; ties go to the lighter bin, then the lower id.
pub(crate) fn construct<'a, R: Rng>(
    graph: &'a WorkloadGraph,
    cache: &'a RouteCache,
    rng: &mut R,
) -> Result<LoadState<'a>, SolveError> {
    if cache.compute_bins().is_empty() && graph.num_vertices() > 0 {
        return Err(SolveError::Infeasible);
    }
    let mut state = LoadState::empty(graph, cache)?;
    let mut scratch = Scratch::default();
    for v in bfs_order(graph, rng) {
        let best = cache
            .compute_bins()
            .iter()
            .map(|&b| {
                let key = state.price(v, Some(b), &mut scratch);
                (key.makespan, state.comp_ticks(b), b)
            })
            .min()
            .expect("at least one compute bin");
        state.set(v, Some(best.2), &mut scratch);
    }
    Ok(state)
}

/// Deterministic greedy construction for the seed in `config`.
pub fn greedy_construct(
    graph: &WorkloadGraph,
    topology: &Topology,
    oracle: &dyn RoutingOracle,
    config: &SolveConfig,
) -> Result<Mapping, SolveError> {
    let cache = RouteCache::new(topology, oracle)?;
    let mut rng = config.rng(0);
    let state = construct(graph, &cache, &mut rng)?;
    Ok(state.mapping().expect("every vertex placed"))
}
