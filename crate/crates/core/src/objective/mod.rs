//! Exact makespan evaluation.
//!
//! `evaluate` works from scratch with rational arithmetic; [`LoadState`]
//! keeps integer load counters so local search can price a move without
//! touching the edges of unaffected vertices.

mod incremental;

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::ratio::Rational;
use crate::topology::{BinId, LinkId, RoutingOracle, Topology, TopologyError};
use crate::workload::{VertexId, WorkloadGraph};

pub use incremental::{LoadState, MoveDelta, RouteCache};
pub(crate) use incremental::{Scratch, SearchKey};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObjectiveError {
    #[error("vertex {vertex} is mapped to router bin {bin}")]
    InfeasibleMapping { vertex: VertexId, bin: BinId },
    #[error("vertex {vertex} is mapped to nonexistent bin {bin}")]
    BadAssignment { vertex: VertexId, bin: BinId },
    #[error("mapping covers {got} vertices, graph has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bin {0} cannot receive work")]
    InfeasibleTarget(BinId),
    #[error("oracle returned link {0}, which the topology does not have")]
    UnknownLink(LinkId),
    #[error("load values exceed the exact integer range: {0}")]
    Overflow(String),
    #[error(transparent)]
    Route(#[from] TopologyError),
}

/// Total assignment of workload vertices to bins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    assignment: Vec<BinId>,
}

impl Mapping {
    pub fn new(assignment: Vec<BinId>) -> Self {
        Self { assignment }
    }

    /// Every vertex on `bin`.
    pub fn uniform(n: usize, bin: BinId) -> Self {
        Self::new(vec![bin; n])
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn bin(&self, v: VertexId) -> BinId {
        self.assignment[v]
    }

    pub fn as_slice(&self) -> &[BinId] {
        &self.assignment
    }

    pub fn into_vec(self) -> Vec<BinId> {
        self.assignment
    }

    /// Totality and router-freeness against a graph and topology.
    pub fn check(&self, graph: &WorkloadGraph, topology: &Topology) -> Result<(), ObjectiveError> {
        if self.len() != graph.num_vertices() {
            return Err(ObjectiveError::LengthMismatch {
                expected: graph.num_vertices(),
                got: self.len(),
            });
        }
        for (vertex, &bin) in self.assignment.iter().enumerate() {
            if bin >= topology.num_bins() {
                return Err(ObjectiveError::BadAssignment { vertex, bin });
            }
            if topology.is_router(bin) {
                return Err(ObjectiveError::InfeasibleMapping { vertex, bin });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bottleneck {
    Compute(BinId),
    Communication(LinkId),
}

/// Loads and makespan of one mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MakespanReport {
    pub comp_per_bin: Vec<u64>,
    pub comm_per_link: Vec<Rational>,
    pub scaled_comm_per_link: Vec<Rational>,
    pub makespan: Rational,
    pub bottleneck: Bottleneck,
}

impl MakespanReport {
    /// Scales `comm` by each link's factor and picks the bottleneck. Ties
    /// prefer compute over communication, then the lowest id.
    pub fn from_loads(
        comp_per_bin: Vec<u64>,
        comm_per_link: Vec<Rational>,
        topology: &Topology,
    ) -> Self {
        let scaled_comm_per_link: Vec<Rational> = comm_per_link
            .iter()
            .enumerate()
            .map(|(l, c)| c * topology.link_factor(l))
            .collect();
        // first index attaining the max
        let mut comp_max = (0u64, 0usize);
        for (b, &c) in comp_per_bin.iter().enumerate() {
            if c > comp_max.0 {
                comp_max = (c, b);
            }
        }
        let mut comm_max: Option<(Rational, LinkId)> = None;
        for (l, s) in scaled_comm_per_link.iter().enumerate() {
            if comm_max.is_none_or(|(m, _)| *s > m) {
                comm_max = Some((*s, l));
            }
        }
        let comp_value = Rational::from_integer(comp_max.0 as i64);
        let (makespan, bottleneck) = match comm_max {
            Some((m, l)) if m > comp_value => (m, Bottleneck::Communication(l)),
            _ => (comp_value, Bottleneck::Compute(comp_max.1)),
        };
        Self {
            comp_per_bin,
            comm_per_link,
            scaled_comm_per_link,
            makespan,
            bottleneck,
        }
    }
}

/// Total weight placed on `bin`.
pub fn comp_load(graph: &WorkloadGraph, mapping: &Mapping, bin: BinId) -> u64 {
    mapping
        .as_slice()
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b == bin)
        .map(|(v, _)| graph.weight(v))
        .sum()
}

/// Number of cut edges per unordered bin pair, keyed `(a, b)` with `a < b`.
fn cut_pairs(graph: &WorkloadGraph, mapping: &Mapping) -> BTreeMap<(BinId, BinId), i64> {
    let mut pairs = BTreeMap::new();
    for (u, v) in graph.edges() {
        let (a, b) = (mapping.bin(u), mapping.bin(v));
        if a != b {
            *pairs.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    pairs
}

/// Communication volume on one link: cut edges whose route uses it, each
/// path of a `k`-path route counting `1/k`.
pub fn comm_load(
    graph: &WorkloadGraph,
    mapping: &Mapping,
    oracle: &dyn RoutingOracle,
    link: LinkId,
) -> Result<Rational, ObjectiveError> {
    let mut total = Rational::zero();
    for ((a, b), count) in cut_pairs(graph, mapping) {
        let routes = oracle.routes(a, b)?;
        let hits = routes.paths().iter().filter(|p| p.contains(&link)).count() as i64;
        total += routes.per_path_weight() * hits * count;
    }
    Ok(total)
}

/// Full evaluation of `M(P)`.
pub fn evaluate(
    graph: &WorkloadGraph,
    mapping: &Mapping,
    topology: &Topology,
    oracle: &dyn RoutingOracle,
) -> Result<MakespanReport, ObjectiveError> {
    mapping.check(graph, topology)?;
    let mut comp = vec![0u64; topology.num_bins()];
    for (v, &b) in mapping.as_slice().iter().enumerate() {
        comp[b] += graph.weight(v);
    }
    let mut comm = vec![Rational::zero(); topology.num_links()];
    for ((a, b), count) in cut_pairs(graph, mapping) {
        let routes = oracle.routes(a, b)?;
        let share = routes.per_path_weight() * count;
        for &l in routes.paths().iter().flatten() {
            *comm.get_mut(l).ok_or(ObjectiveError::UnknownLink(l))? += share;
        }
    }
    Ok(MakespanReport::from_loads(comp, comm, topology))
}
