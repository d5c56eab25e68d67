//! Random instances and deliberately naive reference computations shared by
//! the integration tests. Nothing here goes through the crate's evaluation
//! code: routes are recomputed by breadth-first search (or read from the raw
//! table the generator produced) and loads are accumulated edge by edge.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use makespan_map::prelude::*;
use makespan_map::topology::{Path, RouteEntry};
use rand::seq::SliceRandom;
use rand::Rng;

/// Raw description of an instance, kept alongside the validated objects.
#[derive(Debug, Clone)]
pub struct RawInstance {
    pub num_bins: usize,
    pub links: Vec<(usize, usize)>,
    pub routers: Vec<bool>,
    /// Effective factor per link.
    pub factors: Vec<Rational>,
    pub explicit: Vec<Option<Rational>>,
    pub global: Rational,
    /// `None` for tree topologies; otherwise oriented `a -> b` entries, `a < b`.
    pub table: Option<HashMap<(usize, usize), Vec<Path>>>,
    pub weights: Vec<u64>,
    pub edges: Vec<(usize, usize)>,
}

pub struct Instance {
    pub raw: RawInstance,
    pub topology: Topology,
    pub graph: WorkloadGraph,
    pub oracle: Box<dyn RoutingOracle>,
}

impl Instance {
    pub fn compute_bins(&self) -> Vec<usize> {
        (0..self.raw.num_bins)
            .filter(|&b| !self.raw.routers[b])
            .collect()
    }

    pub fn random_mapping<R: Rng>(&self, rng: &mut R) -> Mapping {
        let bins = self.compute_bins();
        Mapping::new(
            (0..self.raw.weights.len())
                .map(|_| *bins.choose(rng).unwrap())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_vertices: usize,
    pub min_bins: usize,
    pub max_bins: usize,
    /// Upper bound on the number of compute bins.
    pub max_compute: usize,
    pub routed: bool,
    pub routers: bool,
    pub weighted: bool,
    pub max_k: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            max_vertices: 30,
            min_bins: 1,
            max_bins: 8,
            max_compute: 8,
            routed: true,
            routers: true,
            weighted: true,
            max_k: 3,
        }
    }
}

const FACTORS: [(i64, i64); 6] = [(1, 1), (1, 2), (2, 1), (3, 1), (3, 2), (1, 4)];

fn random_factor<R: Rng>(rng: &mut R) -> Rational {
    let (p, q) = FACTORS[rng.gen_range(0..FACTORS.len())];
    Rational::new(p, q)
}

/// Every simple path from `a` to `b` as a link sequence (small graphs only).
pub fn simple_paths(
    num_bins: usize,
    links: &[(usize, usize)],
    a: usize,
    b: usize,
) -> Vec<Vec<usize>> {
    fn dfs(
        cur: usize,
        b: usize,
        links: &[(usize, usize)],
        visited: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur == b {
            out.push(path.clone());
            return;
        }
        if out.len() >= 64 {
            return;
        }
        for (l, &(x, y)) in links.iter().enumerate() {
            let next = if x == cur {
                y
            } else if y == cur {
                x
            } else {
                continue;
            };
            if visited[next] {
                continue;
            }
            visited[next] = true;
            path.push(l);
            dfs(next, b, links, visited, path, out);
            path.pop();
            visited[next] = false;
        }
    }
    let mut visited = vec![false; num_bins];
    visited[a] = true;
    let mut out = Vec::new();
    dfs(a, b, links, &mut visited, &mut Vec::new(), &mut out);
    out
}

pub fn random_instance<R: Rng>(rng: &mut R, shape: Shape) -> Instance {
    let num_bins = rng.gen_range(shape.min_bins..=shape.max_bins);
    // random tree, relabelled so that bin 0 is not always the root
    let mut perm: Vec<usize> = (0..num_bins).collect();
    perm.shuffle(rng);
    let mut links: Vec<(usize, usize)> = (1..num_bins)
        .map(|i| {
            let p = rng.gen_range(0..i);
            if rng.gen_bool(0.5) {
                (perm[i], perm[p])
            } else {
                (perm[p], perm[i])
            }
        })
        .collect();
    let routed = shape.routed && num_bins >= 3 && rng.gen_bool(0.5);
    if routed {
        for _ in 0..rng.gen_range(1..=num_bins) {
            let a = rng.gen_range(0..num_bins);
            let b = rng.gen_range(0..num_bins);
            if a != b
                && !links
                    .iter()
                    .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
            {
                links.push((a, b));
            }
        }
    }
    links.shuffle(rng);

    let mut routers = vec![false; num_bins];
    if shape.routers && rng.gen_bool(0.5) {
        for r in routers.iter_mut() {
            *r = rng.gen_bool(0.4);
        }
    }
    // respect the compute cap, keep at least one compute bin
    let mut compute: Vec<usize> = (0..num_bins).filter(|&b| !routers[b]).collect();
    compute.shuffle(rng);
    if compute.is_empty() {
        let b = rng.gen_range(0..num_bins);
        routers[b] = false;
        compute.push(b);
    }
    for &b in compute.iter().skip(shape.max_compute) {
        routers[b] = true;
    }

    let global = random_factor(rng);
    let explicit: Vec<Option<Rational>> = links
        .iter()
        .map(|_| rng.gen_bool(0.3).then(|| random_factor(rng)))
        .collect();
    let factors: Vec<Rational> = explicit.iter().map(|f| f.unwrap_or(global)).collect();

    let router_ids: Vec<usize> = (0..num_bins).filter(|&b| routers[b]).collect();
    let kind = if routed {
        TopologyKind::Routed
    } else {
        TopologyKind::Tree
    };
    let topology =
        Topology::new(kind, num_bins, &links, &router_ids, Some(&explicit), global).unwrap();

    let n = rng.gen_range(0..=shape.max_vertices);
    let weights: Vec<u64> = (0..n)
        .map(|_| {
            if shape.weighted && rng.gen_bool(0.5) {
                rng.gen_range(1..=5)
            } else {
                1
            }
        })
        .collect();
    let density = rng.gen_range(0.05..0.5);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    let graph = WorkloadGraph::from_weighted_edges(weights.clone(), &edges).unwrap();

    let (table, oracle): (_, Box<dyn RoutingOracle>) = if routed {
        let mut table = HashMap::new();
        let bins: Vec<usize> = (0..num_bins).filter(|&b| !routers[b]).collect();
        for (i, &a) in bins.iter().enumerate() {
            for &b in &bins[i + 1..] {
                let mut paths = simple_paths(num_bins, &links, a, b);
                paths.shuffle(rng);
                let k = rng.gen_range(1..=shape.max_k).min(paths.len());
                paths.truncate(k);
                table.insert((a, b), paths);
            }
        }
        // feed entries in random orientation to exercise reversal
        let entries: Vec<RouteEntry> = table
            .iter()
            .map(|(&(a, b), paths)| {
                if rng.gen_bool(0.5) {
                    (
                        (b, a),
                        paths
                            .iter()
                            .map(|p| p.iter().rev().copied().collect())
                            .collect(),
                    )
                } else {
                    ((a, b), paths.clone())
                }
            })
            .collect();
        let oracle = TableOracle::new(&topology, entries).unwrap();
        (Some(table), Box::new(oracle))
    } else {
        (None, Box::new(TreeOracle::new(&topology).unwrap()))
    };

    Instance {
        raw: RawInstance {
            num_bins,
            links,
            routers,
            factors,
            explicit,
            global,
            table,
            weights,
            edges,
        },
        topology,
        graph,
        oracle,
    }
}

/// Breadth-first shortest path in the link graph.
pub fn bfs_path(num_bins: usize, links: &[(usize, usize)], a: usize, b: usize) -> Vec<usize> {
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; num_bins];
    let mut seen = vec![false; num_bins];
    seen[a] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(x) = queue.pop_front() {
        if x == b {
            break;
        }
        for (l, &(p, q)) in links.iter().enumerate() {
            let y = if p == x {
                q
            } else if q == x {
                p
            } else {
                continue;
            };
            if !seen[y] {
                seen[y] = true;
                prev[y] = Some((x, l));
                queue.push_back(y);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = b;
    while cur != a {
        let (p, l) = prev[cur].expect("connected");
        path.push(l);
        cur = p;
    }
    path.reverse();
    path
}

pub fn naive_routes(raw: &RawInstance, a: usize, b: usize) -> Vec<Vec<usize>> {
    if a == b {
        return vec![Vec::new()];
    }
    match &raw.table {
        None => vec![bfs_path(raw.num_bins, &raw.links, a, b)],
        Some(t) => {
            if a < b {
                t[&(a, b)].clone()
            } else {
                t[&(b, a)]
                    .iter()
                    .map(|p| p.iter().rev().copied().collect())
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveReport {
    pub comp: Vec<u64>,
    pub comm: Vec<Rational>,
    pub scaled: Vec<Rational>,
    pub makespan: Rational,
    pub bottleneck: Bottleneck,
}

/// Literal evaluation: every edge is routed on its own, every link counted.
pub fn naive_evaluate(raw: &RawInstance, mapping: &[usize]) -> NaiveReport {
    let mut comp = vec![0u64; raw.num_bins];
    for (v, &b) in mapping.iter().enumerate() {
        comp[b] += raw.weights[v];
    }
    let mut comm = vec![Rational::from_integer(0); raw.links.len()];
    for &(u, v) in &raw.edges {
        let routes = naive_routes(raw, mapping[u], mapping[v]);
        let k = routes.len() as i64;
        for (l, slot) in comm.iter_mut().enumerate() {
            let hits = routes.iter().filter(|p| p.contains(&l)).count() as i64;
            *slot += Rational::new(hits, k);
        }
    }
    let scaled: Vec<Rational> = comm.iter().zip(&raw.factors).map(|(c, f)| c * f).collect();
    let max_comp = comp.iter().copied().max().unwrap_or(0);
    let max_scaled = scaled.iter().copied().max().unwrap_or_default();
    let max_comp_r = Rational::from_integer(max_comp as i64);
    let (makespan, bottleneck) = if max_comp_r >= max_scaled {
        (
            max_comp_r,
            Bottleneck::Compute(comp.iter().position(|&c| c == max_comp).unwrap()),
        )
    } else {
        (
            max_scaled,
            Bottleneck::Communication(scaled.iter().position(|&s| s == max_scaled).unwrap()),
        )
    };
    NaiveReport {
        comp,
        comm,
        scaled,
        makespan,
        bottleneck,
    }
}

pub fn matches_naive(report: &MakespanReport, naive: &NaiveReport) -> bool {
    report.comp_per_bin == naive.comp
        && report.comm_per_link == naive.comm
        && report.scaled_comm_per_link == naive.scaled
        && report.makespan == naive.makespan
        && report.bottleneck == naive.bottleneck
}

/// Minimum makespan over all `|compute|^|V|` mappings, with one minimiser.
pub fn brute_force(raw: &RawInstance) -> (Rational, Vec<usize>) {
    let bins: Vec<usize> = (0..raw.num_bins).filter(|&b| !raw.routers[b]).collect();
    let n = raw.weights.len();
    let mut digits = vec![0usize; n];
    let mut best: Option<(Rational, Vec<usize>)> = None;
    loop {
        let mapping: Vec<usize> = digits.iter().map(|&d| bins[d]).collect();
        let m = naive_evaluate(raw, &mapping).makespan;
        if best.as_ref().is_none_or(|(b, _)| m < *b) {
            best = Some((m, mapping));
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return best.unwrap();
            }
            digits[i] += 1;
            if digits[i] < bins.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Sum over links of comm, computed from route lengths: each cut edge adds
/// `sum(|path|) / k`.
pub fn weighted_route_length_total(inst: &Instance, mapping: &Mapping) -> Rational {
    let mut total = Rational::from_integer(0);
    for &(u, v) in &inst.raw.edges {
        let (a, b) = (mapping.bin(u), mapping.bin(v));
        if a == b {
            continue;
        }
        let rs = inst.oracle.routes(a, b).unwrap();
        let len: usize = rs.paths().iter().map(Vec::len).sum();
        total += Rational::new(len as i64, rs.k() as i64);
    }
    total
}

/// 2D grid graph in METIS format (`rows * cols` vertices).
pub fn grid_graph_text(rows: usize, cols: usize) -> String {
    let id = |r: usize, c: usize| r * cols + c + 1;
    let mut lines = Vec::with_capacity(rows * cols + 1);
    let edges = rows * (cols - 1) + cols * (rows - 1);
    lines.push(format!("{} {}", rows * cols, edges));
    for r in 0..rows {
        for c in 0..cols {
            let mut nb = Vec::new();
            if r > 0 {
                nb.push(id(r - 1, c));
            }
            if c > 0 {
                nb.push(id(r, c - 1));
            }
            if c + 1 < cols {
                nb.push(id(r, c + 1));
            }
            if r + 1 < rows {
                nb.push(id(r + 1, c));
            }
            lines.push(
                nb.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
            );
        }
    }
    lines.join("\n") + "\n"
}

/// Two-level fat tree: one core router, `switches` edge routers, `hosts`
/// compute bins per switch. Uplinks carry a quarter of the host-link factor.
pub fn fat_tree_text(switches: usize, hosts: usize, global: &str) -> String {
    let bins = 1 + switches + switches * hosts;
    let links = switches + switches * hosts;
    let mut out = format!("% two-level fat tree\ntopology tree {bins} {links} {global}\n");
    for b in 0..=switches {
        out += &format!("bin {b} router\n");
    }
    for b in switches + 1..bins {
        out += &format!("bin {b}\n");
    }
    let mut l = 0;
    for s in 1..=switches {
        out += &format!("link {l} 0 {s} 0.25\n");
        l += 1;
    }
    for s in 1..=switches {
        for h in 0..hosts {
            let host = switches + 1 + (s - 1) * hosts + h;
            out += &format!("link {l} {s} {host}\n");
            l += 1;
        }
    }
    out
}
