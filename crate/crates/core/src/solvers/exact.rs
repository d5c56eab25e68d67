use std::collections::HashMap;
use std::time::Instant;

use super::{
    enumeration_size, finish, pipeline, within_exact_limit, SolveConfig, SolveError, SolveResult,
    SolveStats,
};
use crate::objective::{LoadState, Mapping, RouteCache, Scratch};
use crate::topology::{BinId, LinkId, RoutingOracle, Topology};
use crate::workload::WorkloadGraph;

/// Symmetry detection is quartic in the number of compute bins; above this
/// the search runs without it.
const SYMMETRY_MAX_BINS: usize = 64;

/// Groups compute bins into classes whose members can be swapped pairwise
/// without changing any makespan: the transposition preserves links, link
/// factors and every route load between compute bins.
///
/// Transpositions that are automorphisms generate an equivalence relation,
/// so testing each bin against one representative per class suffices.
fn symmetry_classes(cache: &RouteCache) -> Vec<usize> {
    let topo = cache.topology();
    let bins = cache.compute_bins();
    let mut class = vec![usize::MAX; topo.num_bins()];
    if bins.len() > SYMMETRY_MAX_BINS {
        for (i, &b) in bins.iter().enumerate() {
            class[b] = i;
        }
        return class;
    }
    let link_ids: HashMap<(BinId, BinId), LinkId> = topo
        .links()
        .iter()
        .enumerate()
        .map(|(l, &(a, b))| ((a.min(b), a.max(b)), l))
        .collect();
    let mut reps: Vec<BinId> = Vec::new();
    for &b in bins {
        match reps.iter().position(|&r| swappable(cache, &link_ids, r, b)) {
            Some(c) => class[b] = c,
            None => {
                class[b] = reps.len();
                reps.push(b);
            }
        }
    }
    class
}

fn swappable(
    cache: &RouteCache,
    link_ids: &HashMap<(BinId, BinId), LinkId>,
    a: BinId,
    b: BinId,
) -> bool {
    let topo = cache.topology();
    let swap = |x: BinId| {
        if x == a {
            b
        } else if x == b {
            a
        } else {
            x
        }
    };
    let mut link_map = vec![0; topo.num_links()];
    for (l, &(x, y)) in topo.links().iter().enumerate() {
        let (sx, sy) = (swap(x), swap(y));
        match link_ids.get(&(sx.min(sy), sx.max(sy))) {
            Some(&m) if cache.link_mult(m) == cache.link_mult(l) => link_map[l] = m,
            _ => return false,
        }
    }
    let bins = cache.compute_bins();
    for (i, &x) in bins.iter().enumerate() {
        for &y in &bins[i + 1..] {
            let mut mapped: Vec<(LinkId, i64)> = cache
                .pair_loads(x, y)
                .iter()
                .map(|&(l, u)| (link_map[l], u))
                .collect();
            mapped.sort_unstable();
            if mapped.as_slice() != cache.pair_loads(swap(x), swap(y)) {
                return false;
            }
        }
    }
    true
}

/// Heavy, well-connected vertices first, then breadth-first, so that
/// partial makespans grow early.
fn branching_order(graph: &WorkloadGraph) -> Vec<usize> {
    let n = graph.num_vertices();
    let mut by_priority: Vec<usize> = (0..n).collect();
    by_priority.sort_by_key(|&v| (std::cmp::Reverse((graph.weight(v), graph.degree(v))), v));
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in by_priority {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        order.push(root);
        let mut head = start;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = graph
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| !seen[u])
                .collect();
            next.sort_by_key(|&u| (std::cmp::Reverse(graph.weight(u)), u));
            for u in next {
                seen[u] = true;
                order.push(u);
            }
        }
    }
    order
}

struct Search<'s, 'a> {
    order: Vec<usize>,
    class: Vec<usize>,
    bins: Vec<BinId>,
    lower_bound: i64,
    incumbent: i64,
    best: Vec<BinId>,
    current: Vec<BinId>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
    scratch: Scratch,
    state: &'s mut LoadState<'a>,
}

impl Search<'_, '_> {
    /// Returns true once the search should stop (bound reached or deadline).
    fn descend(&mut self, depth: usize) -> bool {
        self.nodes += 1;
        if depth == self.order.len() {
            let m = self.state.makespan_ticks();
            if m < self.incumbent {
                self.incumbent = m;
                self.best.clone_from(&self.current);
            }
            return self.incumbent <= self.lower_bound;
        }
        if self.nodes.is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
            return true;
        }
        let v = self.order[depth];
        let mut candidates: Vec<(i64, BinId)> = Vec::with_capacity(self.bins.len());
        let mut class_opened = vec![false; self.bins.len()];
        for &b in &self.bins {
            // among still-empty bins of one symmetry class, only the first is tried
            if self.state.comp_ticks(b) == 0 {
                let c = self.class[b];
                if class_opened[c] {
                    continue;
                }
                class_opened[c] = true;
            }
            let key = self.state.price(v, Some(b), &mut self.scratch);
            if key.makespan < self.incumbent {
                candidates.push((key.makespan, b));
            }
        }
        candidates.sort_unstable();
        for (m, b) in candidates {
            if m >= self.incumbent {
                break;
            }
            self.state.set(v, Some(b), &mut self.scratch);
            self.current[v] = b;
            let stop = self.descend(depth + 1);
            self.state.set(v, None, &mut self.scratch);
            if stop {
                return true;
            }
        }
        false
    }
}

/// Branch-and-bound over vertex-to-bin assignments.
///
/// The incumbent starts from one greedy + local search run. Subtrees whose
/// partial makespan already reaches the incumbent are cut (loads only grow as
/// vertices are added), the search ends as soon as the incumbent meets
/// `ceil(total_weight / |compute bins|)`, and interchangeable empty bins are
/// opened in a fixed order.
pub fn exact_solve(
    graph: &WorkloadGraph,
    topology: &Topology,
    oracle: &dyn RoutingOracle,
    config: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    let c = topology.compute_bins().len();
    if graph.num_vertices() == 0 {
        return finish(
            graph,
            topology,
            oracle,
            Mapping::new(Vec::new()),
            true,
            SolveStats::default(),
            Vec::new(),
        );
    }
    if c == 0 {
        return Err(SolveError::Infeasible);
    }
    if !within_exact_limit(graph, topology, config.exact_limit) {
        return Err(SolveError::TooLarge {
            needed: format!("{c}^{}", graph.num_vertices()),
            limit: config.exact_limit,
        });
    }
    debug_assert!(enumeration_size(c, graph.num_vertices()) <= config.exact_limit as u128);

    let cache = RouteCache::new(topology, oracle)?;
    let deadline = config.deadline();
    let (start, ls) = pipeline(graph, &cache, config, 0, deadline)?;
    let incumbent = start.makespan_ticks();
    let best = start
        .mapping()
        .expect("greedy places every vertex")
        .into_vec();

    let mut state = LoadState::empty(graph, &cache)?;
    let mut search = Search {
        order: branching_order(graph),
        class: symmetry_classes(&cache),
        bins: cache.compute_bins().to_vec(),
        lower_bound: cache.compute_lower_bound(graph.total_weight()),
        incumbent,
        current: best.clone(),
        best,
        nodes: 0,
        deadline,
        timed_out: false,
        scratch: Scratch::default(),
        state: &mut state,
    };
    if search.incumbent > search.lower_bound {
        search.descend(0);
    }
    log::debug!(
        "exact search: {} nodes, timed out: {}",
        search.nodes,
        search.timed_out
    );
    let stats = SolveStats {
        nodes: search.nodes,
        moves: ls.trace.len() as u64,
        passes: ls.passes,
        restarts: 1,
    };
    let proven = !search.timed_out;
    finish(
        graph,
        topology,
        oracle,
        Mapping::new(search.best),
        proven,
        stats,
        Vec::new(),
    )
}
