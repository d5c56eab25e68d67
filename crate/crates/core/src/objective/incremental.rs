use super::{MakespanReport, Mapping, ObjectiveError};
use crate::ratio::{checked_lcm, Rational};
use crate::topology::{BinId, LinkId, RoutingOracle, Topology};
use crate::workload::{VertexId, WorkloadGraph};

/// Largest tick value any single load may reach; keeps sums of squares
/// comfortably inside `u128`.
const TICK_LIMIT: i128 = 1 << 50;

const UNASSIGNED: u32 = u32::MAX;

/// Routes between all pairs of compute bins, flattened to integer link loads.
///
/// A route with `k` paths adds `denom / k` units per path to each of its
/// links, where `denom` is the lcm of every `k` seen, so all communication
/// loads are integers in units of `1 / denom`. Scaled loads and compute
/// loads share a finer integer unit, the tick (`1 / (denom * factor_denom)`).
#[derive(Debug, Clone)]
pub struct RouteCache {
    topology: Topology,
    compute: Vec<BinId>,
    compute_index: Vec<Option<usize>>,
    pair_loads: Vec<Vec<(LinkId, i64)>>,
    denom: i64,
    link_mult: Vec<i64>,
    tick_scale: i64,
}

impl RouteCache {
    pub fn new(topology: &Topology, oracle: &dyn RoutingOracle) -> Result<Self, ObjectiveError> {
        let compute = topology.compute_bins();
        let c = compute.len();
        let mut compute_index = vec![None; topology.num_bins()];
        for (i, &b) in compute.iter().enumerate() {
            compute_index[b] = Some(i);
        }
        let overflow = || ObjectiveError::Overflow("route or factor denominators".into());

        let mut routes = Vec::with_capacity(c * c.saturating_sub(1) / 2);
        let mut denom = 1i64;
        for i in 0..c {
            for j in i + 1..c {
                let rs = oracle.routes(compute[i], compute[j])?;
                for &l in rs.paths().iter().flatten() {
                    if l >= topology.num_links() {
                        return Err(ObjectiveError::UnknownLink(l));
                    }
                }
                denom = checked_lcm(denom, rs.k() as i64).ok_or_else(overflow)?;
                routes.push((i, j, rs));
            }
        }

        let mut pair_loads = vec![Vec::new(); c * c];
        for (i, j, rs) in routes {
            let per_path = denom / rs.k() as i64;
            let mut loads: Vec<(LinkId, i64)> = Vec::new();
            for &l in rs.paths().iter().flatten() {
                loads.push((l, per_path));
            }
            loads.sort_unstable();
            loads.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 += next.1;
                    true
                } else {
                    false
                }
            });
            pair_loads[j * c + i] = loads.clone();
            pair_loads[i * c + j] = loads;
        }

        let factors: Vec<Rational> = (0..topology.num_links())
            .map(|l| topology.link_factor(l))
            .collect();
        let mut factor_denom = 1i64;
        for f in &factors {
            factor_denom = checked_lcm(factor_denom, *f.denom()).ok_or_else(overflow)?;
        }
        let link_mult = factors
            .iter()
            .map(|f| {
                f.numer()
                    .checked_mul(factor_denom / f.denom())
                    .ok_or_else(overflow)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tick_scale = denom.checked_mul(factor_denom).ok_or_else(overflow)?;

        Ok(Self {
            topology: topology.clone(),
            compute,
            compute_index,
            pair_loads,
            denom,
            link_mult,
            tick_scale,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn compute_bins(&self) -> &[BinId] {
        &self.compute
    }

    /// Link loads (in units of `1 / comm_denom`) of one cut edge between two
    /// compute bins. Empty when `a == b`.
    pub fn pair_loads(&self, a: BinId, b: BinId) -> &[(LinkId, i64)] {
        let c = self.compute.len();
        let i = self.compute_index[a].expect("compute bin");
        let j = self.compute_index[b].expect("compute bin");
        &self.pair_loads[i * c + j]
    }

    pub fn comm_denom(&self) -> i64 {
        self.denom
    }

    /// Ticks per unit of compute load.
    pub fn tick_scale(&self) -> i64 {
        self.tick_scale
    }

    /// Ticks per communication unit on `link`.
    pub fn link_mult(&self, link: LinkId) -> i64 {
        self.link_mult[link]
    }

    pub fn is_compute(&self, bin: BinId) -> bool {
        self.compute_index.get(bin).is_some_and(Option::is_some)
    }

    /// `ceil(total_weight / |compute bins|)` in ticks.
    pub(crate) fn compute_lower_bound(&self, total_weight: u64) -> i64 {
        let c = self.compute.len() as u64;
        total_weight.div_ceil(c) as i64 * self.tick_scale
    }
}

/// Lexicographic search key: makespan first, then sum of squared scaled link
/// loads, then sum of squared compute loads. All in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct SearchKey {
    pub makespan: i64,
    pub comm_sq: u128,
    pub comp_sq: u128,
}

/// Reusable buffers for pricing moves.
#[derive(Debug, Clone, Default)]
pub(crate) struct Scratch {
    link_delta: Vec<i64>,
    marked: Vec<bool>,
    touched: Vec<LinkId>,
}

impl Scratch {
    fn add(&mut self, l: LinkId, units: i64) {
        if !self.marked[l] {
            self.marked[l] = true;
            self.touched.push(l);
        }
        self.link_delta[l] += units;
    }

    fn clear(&mut self) {
        for &l in &self.touched {
            self.link_delta[l] = 0;
            self.marked[l] = false;
        }
        self.touched.clear();
    }
}

/// The result of pricing a move: the makespan afterwards and every load it changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveDelta {
    pub makespan: Rational,
    /// New compute load per affected bin.
    pub comp: Vec<(BinId, u64)>,
    /// New communication load per affected link.
    pub comm: Vec<(LinkId, Rational)>,
}

/// Incrementally maintained loads for a (possibly partial) mapping.
///
/// Unassigned vertices contribute nothing, and edges to them are not counted.
#[derive(Debug, Clone)]
pub struct LoadState<'a> {
    graph: &'a WorkloadGraph,
    cache: &'a RouteCache,
    assign: Vec<u32>,
    comp: Vec<i64>,
    units: Vec<i64>,
    comp_sq: u128,
    comm_sq: u128,
    makespan: i64,
}

fn sq(x: i64) -> u128 {
    let a = x.unsigned_abs() as u128;
    a * a
}

impl<'a> LoadState<'a> {
    /// State with no vertex placed.
    pub fn empty(graph: &'a WorkloadGraph, cache: &'a RouteCache) -> Result<Self, ObjectiveError> {
        let topo = cache.topology();
        let max_comp = graph.total_weight() as i128 * cache.tick_scale as i128;
        let max_mult = cache.link_mult.iter().copied().max().unwrap_or(0) as i128;
        let max_comm = graph.num_edges() as i128 * cache.denom as i128 * max_mult;
        if max_comp > TICK_LIMIT || max_comm > TICK_LIMIT {
            return Err(ObjectiveError::Overflow(format!(
                "instance too large for exact tick arithmetic (scale {})",
                cache.tick_scale
            )));
        }
        Ok(Self {
            graph,
            cache,
            assign: vec![UNASSIGNED; graph.num_vertices()],
            comp: vec![0; topo.num_bins()],
            units: vec![0; topo.num_links()],
            comp_sq: 0,
            comm_sq: 0,
            makespan: 0,
        })
    }

    pub fn new(
        graph: &'a WorkloadGraph,
        cache: &'a RouteCache,
        mapping: &Mapping,
    ) -> Result<Self, ObjectiveError> {
        mapping.check(graph, cache.topology())?;
        let mut state = Self::empty(graph, cache)?;
        for (v, &b) in mapping.as_slice().iter().enumerate() {
            state.assign[v] = b as u32;
            state.comp[b] += graph.weight(v) as i64 * cache.tick_scale;
        }
        for (u, v) in graph.edges() {
            for &(l, units) in cache.pair_loads(mapping.bin(u), mapping.bin(v)) {
                state.units[l] += units;
            }
        }
        state.comp_sq = state.comp.iter().map(|&c| sq(c)).sum();
        state.comm_sq = (0..state.units.len()).map(|l| sq(state.scaled(l))).sum();
        state.makespan = state.scan_makespan();
        Ok(state)
    }

    fn scaled(&self, l: LinkId) -> i64 {
        self.units[l] * self.cache.link_mult[l]
    }

    fn scan_makespan(&self) -> i64 {
        let comp = self.comp.iter().copied().max().unwrap_or(0);
        let comm = (0..self.units.len())
            .map(|l| self.scaled(l))
            .max()
            .unwrap_or(0);
        comp.max(comm)
    }

    pub fn graph(&self) -> &'a WorkloadGraph {
        self.graph
    }

    pub fn cache(&self) -> &'a RouteCache {
        self.cache
    }

    pub fn bin_of(&self, v: VertexId) -> Option<BinId> {
        match self.assign[v] {
            UNASSIGNED => None,
            b => Some(b as BinId),
        }
    }

    pub fn makespan(&self) -> Rational {
        Rational::new(self.makespan, self.cache.tick_scale)
    }

    pub(crate) fn makespan_ticks(&self) -> i64 {
        self.makespan
    }

    pub(crate) fn comp_ticks(&self, bin: BinId) -> i64 {
        self.comp[bin]
    }

    pub(crate) fn key(&self) -> SearchKey {
        SearchKey {
            makespan: self.makespan,
            comm_sq: self.comm_sq,
            comp_sq: self.comp_sq,
        }
    }

    /// The mapping, if every vertex is placed.
    pub fn mapping(&self) -> Option<Mapping> {
        (0..self.assign.len())
            .map(|v| self.bin_of(v))
            .collect::<Option<Vec<_>>>()
            .map(Mapping::new)
    }

    /// Report of the current (partial) assignment.
    pub fn report(&self) -> MakespanReport {
        let comp = self
            .comp
            .iter()
            .map(|&t| (t / self.cache.tick_scale) as u64)
            .collect();
        let comm = self
            .units
            .iter()
            .map(|&u| Rational::new(u, self.cache.denom))
            .collect();
        MakespanReport::from_loads(comp, comm, self.cache.topology())
    }

    fn check_target(&self, target: BinId) -> Result<(), ObjectiveError> {
        if self.cache.is_compute(target) {
            Ok(())
        } else {
            Err(ObjectiveError::InfeasibleTarget(target))
        }
    }

    /// Link deltas of moving `v` from its bin to `target` (either may be
    /// `None` for unplaced), accumulated into `scratch`.
    fn collect_link_delta(&self, v: VertexId, target: Option<BinId>, scratch: &mut Scratch) {
        if scratch.link_delta.len() != self.units.len() {
            scratch.link_delta = vec![0; self.units.len()];
            scratch.marked = vec![false; self.units.len()];
        }
        scratch.clear();
        let src = self.bin_of(v);
        if src == target {
            return;
        }
        for &u in self.graph.neighbors(v) {
            let Some(bu) = self.bin_of(u) else { continue };
            if let Some(s) = src {
                for &(l, units) in self.cache.pair_loads(s, bu) {
                    scratch.add(l, -units);
                }
            }
            if let Some(t) = target {
                for &(l, units) in self.cache.pair_loads(t, bu) {
                    scratch.add(l, units);
                }
            }
        }
    }

    /// Prices moving `v` to `target` (or unplacing it). Leaves `scratch` clean.
    pub(crate) fn price(
        &self,
        v: VertexId,
        target: Option<BinId>,
        scratch: &mut Scratch,
    ) -> SearchKey {
        let src = self.bin_of(v);
        if src == target {
            return self.key();
        }
        self.collect_link_delta(v, target, scratch);
        let w = self.graph.weight(v) as i64 * self.cache.tick_scale;

        let mut comp_sq = self.comp_sq;
        let mut new_src = None;
        let mut new_tgt = None;
        if let Some(s) = src {
            let c = self.comp[s] - w;
            comp_sq = comp_sq - sq(self.comp[s]) + sq(c);
            new_src = Some((s, c));
        }
        if let Some(t) = target {
            let c = self.comp[t] + w;
            comp_sq = comp_sq - sq(self.comp[t]) + sq(c);
            new_tgt = Some((t, c));
        }

        let mut comm_sq = self.comm_sq;
        for &l in &scratch.touched {
            let old = self.scaled(l);
            let new = (self.units[l] + scratch.link_delta[l]) * self.cache.link_mult[l];
            comm_sq = comm_sq - sq(old) + sq(new);
        }

        // Max over all bins and links with the changed entries substituted.
        let mut makespan = 0i64;
        for (b, &c) in self.comp.iter().enumerate() {
            let c = match (new_src, new_tgt) {
                (Some((s, cs)), _) if s == b => cs,
                (_, Some((t, ct))) if t == b => ct,
                _ => c,
            };
            makespan = makespan.max(c);
        }
        for (l, (&u, &m)) in self.units.iter().zip(&self.cache.link_mult).enumerate() {
            makespan = makespan.max((u + scratch.link_delta[l]) * m);
        }

        scratch.clear();
        SearchKey {
            makespan,
            comm_sq,
            comp_sq,
        }
    }

    /// Moves `v` to `target` (or unplaces it), updating every cached load.
    pub(crate) fn set(&mut self, v: VertexId, target: Option<BinId>, scratch: &mut Scratch) {
        let src = self.bin_of(v);
        if src == target {
            return;
        }
        self.collect_link_delta(v, target, scratch);
        let w = self.graph.weight(v) as i64 * self.cache.tick_scale;
        if let Some(s) = src {
            self.comp_sq -= sq(self.comp[s]);
            self.comp[s] -= w;
            self.comp_sq += sq(self.comp[s]);
        }
        if let Some(t) = target {
            self.comp_sq -= sq(self.comp[t]);
            self.comp[t] += w;
            self.comp_sq += sq(self.comp[t]);
        }
        for &l in &scratch.touched {
            self.comm_sq -= sq(self.scaled(l));
            self.units[l] += scratch.link_delta[l];
            self.comm_sq += sq(self.scaled(l));
        }
        scratch.clear();
        self.assign[v] = target.map_or(UNASSIGNED, |t| t as u32);
        self.makespan = self.scan_makespan();
    }

    /// Makespan and changed loads after moving `v` to `target`; the state is untouched.
    pub fn move_delta(&self, v: VertexId, target: BinId) -> Result<MoveDelta, ObjectiveError> {
        self.check_target(target)?;
        let mut scratch = Scratch::default();
        let key = self.price(v, Some(target), &mut scratch);
        let src = self.bin_of(v);
        let mut comp = Vec::new();
        if src != Some(target) {
            let w = self.graph.weight(v) as i64 * self.cache.tick_scale;
            if let Some(s) = src {
                comp.push((s, ((self.comp[s] - w) / self.cache.tick_scale) as u64));
            }
            comp.push((
                target,
                ((self.comp[target] + w) / self.cache.tick_scale) as u64,
            ));
        }
        self.collect_link_delta(v, Some(target), &mut scratch);
        let mut comm: Vec<(LinkId, Rational)> = scratch
            .touched
            .iter()
            .filter(|&&l| scratch.link_delta[l] != 0)
            .map(|&l| {
                (
                    l,
                    Rational::new(self.units[l] + scratch.link_delta[l], self.cache.denom),
                )
            })
            .collect();
        comm.sort_unstable_by_key(|&(l, _)| l);
        Ok(MoveDelta {
            makespan: Rational::new(key.makespan, self.cache.tick_scale),
            comp,
            comm,
        })
    }

    /// Applies a move, touching only the routes of `v`'s incident edges.
    pub fn apply_move(&mut self, v: VertexId, target: BinId) -> Result<(), ObjectiveError> {
        self.check_target(target)?;
        let mut scratch = Scratch::default();
        self.set(v, Some(target), &mut scratch);
        Ok(())
    }

    /// Places a previously unplaced vertex, or moves a placed one.
    pub fn place(&mut self, v: VertexId, target: BinId) -> Result<(), ObjectiveError> {
        self.apply_move(v, target)
    }

    pub fn unplace(&mut self, v: VertexId) {
        let mut scratch = Scratch::default();
        self.set(v, None, &mut scratch);
    }
}
