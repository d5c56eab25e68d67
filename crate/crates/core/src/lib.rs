//! Graph-constrained makespan partitioning.
//!
//! A workload graph `G = (V, E)` is mapped onto the compute bins of a machine
//! topology `C = (B, L)`. The quality of a mapping `P` is its makespan
//!
//! ```text
//! M(P) = max( max_b comp(b), max_l F_l * comm(l) )
//! ```
//!
//! where `comp(b)` is the total vertex weight placed on bin `b` and `comm(l)`
//! is the (possibly fractional, under multipath routing) number of cut edges
//! whose route crosses link `l`. Router bins carry traffic but no work.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`]: the machine model and routing oracles (tree paths and
//!   explicit route tables).
//! - [`workload`]: the weighted workload graph and its adjacency text format.
//! - [`objective`]: exact makespan evaluation and incremental move deltas.
//! - [`metrics`]: classical cut and communication-volume metrics.
//! - [`solvers`]: branch-and-bound, greedy construction, local search and the
//!   multistart driver.
//! - [`cli`]: the batch front-end behind the `makespan-map` binary.
//!
//! ```
//! use makespan_map::prelude::*;
//!
//! let topo = Topology::tree(2, &[(0, 1)], &[], Rational::from_integer(1)).unwrap();
//! let oracle = TreeOracle::new(&topo).unwrap();
//! let graph = WorkloadGraph::from_edges(2, &[(0, 1)]).unwrap();
//! let result = solve(&graph, &topo, &oracle, &SolveConfig::default()).unwrap();
//! assert_eq!(result.report.makespan, Rational::from_integer(1));
//! assert!(result.proven_optimal);
//! ```

pub mod cli;
pub mod metrics;
pub mod objective;
pub mod ratio;
pub mod solvers;
pub mod topology;
pub mod workload;

pub use ratio::Rational;

pub mod prelude {
    pub use crate::metrics::{baseline_metrics, BaselineMetrics};
    pub use crate::objective::{
        comm_load, comp_load, evaluate, Bottleneck, LoadState, MakespanReport, Mapping,
        ObjectiveError, RouteCache,
    };
    pub use crate::ratio::Rational;
    pub use crate::solvers::{
        exact_solve, greedy_construct, local_search, solve, SolveConfig, SolveError, SolveResult,
    };
    pub use crate::topology::{
        RouteSet, RoutingOracle, TableOracle, Topology, TopologyError, TopologyKind, TreeOracle,
    };
    pub use crate::workload::{GraphError, WorkloadGraph};
}
