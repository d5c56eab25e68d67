//! Classical partitioning metrics (edge cut and communication volume) for
//! comparing makespan-driven mappings with cut-driven ones.
//!
//! Edge weights are fixed at 1 and the per-vertex volume factor is the vertex
//! weight. Blocks are the nonempty bins of the mapping.

use std::collections::BTreeMap;

use crate::objective::Mapping;
use crate::topology::BinId;
use crate::workload::{VertexId, WorkloadGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineMetrics {
    /// Number of edges whose endpoints lie in different blocks.
    pub total_cut: u64,
    /// Largest number of cut edges between any single pair of blocks.
    pub max_cut: u64,
    /// `(block, cvol)` for every nonempty block, by increasing bin id.
    pub cvol_per_block: Vec<(BinId, u64)>,
    pub cvol_total: u64,
    pub cvol_max: u64,
}

/// Number of foreign blocks in which `v` has a neighbour.
pub fn foreign_blocks(graph: &WorkloadGraph, mapping: &Mapping, v: VertexId) -> usize {
    let own = mapping.bin(v);
    let mut blocks: Vec<BinId> = graph
        .neighbors(v)
        .iter()
        .map(|&u| mapping.bin(u))
        .filter(|&b| b != own)
        .collect();
    blocks.sort_unstable();
    blocks.dedup();
    blocks.len()
}

pub fn baseline_metrics(graph: &WorkloadGraph, mapping: &Mapping) -> BaselineMetrics {
    let mut between: BTreeMap<(BinId, BinId), u64> = BTreeMap::new();
    for (u, v) in graph.edges() {
        let (a, b) = (mapping.bin(u), mapping.bin(v));
        if a != b {
            *between.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut cvol: BTreeMap<BinId, u64> = BTreeMap::new();
    for v in 0..graph.num_vertices() {
        *cvol.entry(mapping.bin(v)).or_default() +=
            graph.weight(v) * foreign_blocks(graph, mapping, v) as u64;
    }
    let cvol_per_block: Vec<(BinId, u64)> = cvol.into_iter().collect();
    BaselineMetrics {
        total_cut: between.values().sum(),
        max_cut: between.values().copied().max().unwrap_or(0),
        cvol_total: cvol_per_block.iter().map(|&(_, c)| c).sum(),
        cvol_max: cvol_per_block.iter().map(|&(_, c)| c).max().unwrap_or(0),
        cvol_per_block,
    }
}
