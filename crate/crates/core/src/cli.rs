//! Batch front-end: load a topology and a workload graph, then solve,
//! evaluate, compute baseline metrics, or sweep the global factor.
//!
//! Mapping files hold one 0-based bin id per line, line `i` for the `i`-th
//! vertex of the graph file. Reports are flat `key=value` lines:
//!
//! ```text
//! makespan=3
//! bottleneck=communication:0
//! F=3
//! optimal=true
//! comp.0=2
//! comm.0=1
//! scaled_comm.0=3
//! ```
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 malformed or
//! invalid input file, 4 infeasible mapping or instance, 5 missing route,
//! 6 other solver failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, ValueEnum};

use crate::metrics::{baseline_metrics, BaselineMetrics};
use crate::objective::{evaluate, Bottleneck, MakespanReport, Mapping, ObjectiveError};
use crate::ratio::{format_factor, format_rational, parse_factor, Rational};
use crate::solvers::{solve, SolveConfig, SolveError, SolveResult};
use crate::topology::{
    parse_route_table, parse_topology, RoutingOracle, Topology, TopologyError, TopologyKind,
    TreeOracle,
};
use crate::workload::{parse_graph, WorkloadGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Solve,
    Evaluate,
    Metrics,
    Sweep,
}

/// Command-line arguments of the `makespan-map` binary.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "makespan-map",
    version,
    about = "Map workload graphs onto interconnect topologies minimising the makespan"
)]
pub struct RunSpec {
    #[arg(long, value_enum, default_value = "solve")]
    pub mode: Mode,
    /// Topology file.
    #[arg(long)]
    pub topology: PathBuf,
    /// Workload graph in METIS adjacency format.
    #[arg(long)]
    pub graph: PathBuf,
    /// Route table; required for routed topologies.
    #[arg(long)]
    pub routes: Option<PathBuf>,
    /// Mapping file for evaluate and metrics modes.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Override the topology's global communication factor.
    #[arg(long = "F")]
    pub factor: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long = "max-passes", default_value_t = 100)]
    pub max_passes: usize,
    /// Largest |compute bins|^|V| solved exactly.
    #[arg(long = "exact-limit", default_value_t = 1 << 24)]
    pub exact_limit: u64,
    /// Wall-clock budget in seconds; makes results timing-dependent.
    #[arg(long = "time-budget")]
    pub time_budget: Option<f64>,
    #[arg(long = "out-mapping")]
    pub out_mapping: Option<PathBuf>,
    #[arg(long = "out-report")]
    pub out_report: Option<PathBuf>,
    /// Global factors to sweep, comma separated.
    #[arg(long = "sweep-F", value_delimiter = ',')]
    pub sweep: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("missing route between bins {0} and {1}")]
    MissingRoute(usize, usize),
    #[error("solver failed: {0}")]
    Solve(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Infeasible(_) => 4,
            CliError::MissingRoute(..) => 5,
            CliError::Solve(_) => 6,
        }
    }
}

impl From<ObjectiveError> for CliError {
    fn from(e: ObjectiveError) -> Self {
        match e {
            ObjectiveError::Route(TopologyError::MissingRoute(a, b)) => {
                CliError::MissingRoute(a, b)
            }
            ObjectiveError::InfeasibleMapping { .. }
            | ObjectiveError::BadAssignment { .. }
            | ObjectiveError::LengthMismatch { .. }
            | ObjectiveError::InfeasibleTarget(_) => CliError::Infeasible(e.to_string()),
            other => CliError::Solve(other.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Objective(o) => o.into(),
            SolveError::Infeasible => CliError::Infeasible(e.to_string()),
            other => CliError::Solve(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, detail: impl ToString) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

/// Reads a mapping file: one bin id per line, `%` comments allowed.
pub fn parse_mapping(text: &str) -> Result<Mapping, String> {
    let mut bins = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let bin = line
            .parse()
            .map_err(|_| format!("line {}: invalid bin id `{line}`", i + 1))?;
        bins.push(bin);
    }
    Ok(Mapping::new(bins))
}

pub fn write_mapping(mapping: &Mapping) -> String {
    let mut out = String::with_capacity(mapping.len() * 3);
    for &b in mapping.as_slice() {
        writeln!(out, "{b}").unwrap();
    }
    out
}

/// Renders a report as `key=value` lines.
pub fn format_report(
    report: &MakespanReport,
    topology: &Topology,
    optimal: Option<bool>,
    metrics: Option<&BaselineMetrics>,
) -> String {
    let mut out = String::new();
    writeln!(out, "makespan={}", format_rational(&report.makespan)).unwrap();
    match report.bottleneck {
        Bottleneck::Compute(b) => writeln!(out, "bottleneck=compute:{b}").unwrap(),
        Bottleneck::Communication(l) => writeln!(out, "bottleneck=communication:{l}").unwrap(),
    }
    writeln!(out, "F={}", format_factor(&topology.global_factor())).unwrap();
    if let Some(opt) = optimal {
        writeln!(out, "optimal={opt}").unwrap();
    }
    for (b, c) in report.comp_per_bin.iter().enumerate() {
        writeln!(out, "comp.{b}={c}").unwrap();
    }
    for (l, c) in report.comm_per_link.iter().enumerate() {
        writeln!(out, "comm.{l}={}", format_rational(c)).unwrap();
    }
    for (l, c) in report.scaled_comm_per_link.iter().enumerate() {
        writeln!(out, "scaled_comm.{l}={}", format_rational(c)).unwrap();
    }
    if let Some(m) = metrics {
        writeln!(out, "cut.total={}", m.total_cut).unwrap();
        writeln!(out, "cut.max={}", m.max_cut).unwrap();
        writeln!(out, "cvol.total={}", m.cvol_total).unwrap();
        writeln!(out, "cvol.max={}", m.cvol_max).unwrap();
        for (b, c) in &m.cvol_per_block {
            writeln!(out, "cvol.{b}={c}").unwrap();
        }
    }
    out
}

/// Everything loaded from the input files.
struct Instance {
    topology: Topology,
    graph: WorkloadGraph,
    oracle: Box<dyn RoutingOracle>,
}

fn load(spec: &RunSpec) -> Result<Instance, CliError> {
    let mut topology =
        parse_topology(&read(&spec.topology)?).map_err(|e| parse_error(&spec.topology, e))?;
    if let Some(f) = &spec.factor {
        let f = parse_factor(f).map_err(|e| CliError::Usage(format!("--F: {e}")))?;
        topology = topology
            .with_global_factor(f)
            .map_err(|e| CliError::Usage(format!("--F: {e}")))?;
    }
    let graph = parse_graph(&read(&spec.graph)?).map_err(|e| parse_error(&spec.graph, e))?;
    let oracle: Box<dyn RoutingOracle> = match &spec.routes {
        Some(path) => {
            Box::new(parse_route_table(&read(path)?, &topology).map_err(|e| parse_error(path, e))?)
        }
        None if topology.kind() == TopologyKind::Tree => {
            Box::new(TreeOracle::new(&topology).map_err(|e| parse_error(&spec.topology, e))?)
        }
        None => return Err(CliError::Usage("routed topologies require --routes".into())),
    };
    Ok(Instance {
        topology,
        graph,
        oracle,
    })
}

fn config(spec: &RunSpec) -> Result<SolveConfig, CliError> {
    let time_budget = match spec.time_budget {
        Some(s) if !(s.is_finite() && s > 0.0) => {
            return Err(CliError::Usage(
                "--time-budget must be a positive number of seconds".into(),
            ))
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let config = SolveConfig {
        seed: spec.seed,
        restarts: spec.restarts,
        max_passes: spec.max_passes,
        exact_limit: spec.exact_limit,
        time_budget,
    };
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn load_mapping(spec: &RunSpec) -> Result<Mapping, CliError> {
    let path = spec
        .mapping
        .as_ref()
        .ok_or_else(|| CliError::Usage("this mode requires --mapping".into()))?;
    parse_mapping(&read(path)?).map_err(|e| parse_error(path, e))
}

fn solved(
    inst: &Instance,
    topology: &Topology,
    cfg: &SolveConfig,
) -> Result<SolveResult, CliError> {
    Ok(solve(&inst.graph, topology, inst.oracle.as_ref(), cfg)?)
}

fn suffixed(path: &Path, factor: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(format!(".F{factor}"));
    PathBuf::from(s)
}

/// Executes one run. Returns the report text that was not written to a
/// file (empty when `--out-report` was given).
pub fn run(spec: &RunSpec) -> Result<String, CliError> {
    let inst = load(spec)?;
    let mut stdout = String::new();
    let mut emit = |path: Option<&PathBuf>, text: &str| -> Result<(), CliError> {
        match path {
            Some(p) => write(p, text),
            None => {
                stdout.push_str(text);
                Ok(())
            }
        }
    };
    match spec.mode {
        Mode::Solve => {
            let cfg = config(spec)?;
            let res = solved(&inst, &inst.topology, &cfg)?;
            if let Some(p) = &spec.out_mapping {
                write(p, &write_mapping(&res.mapping))?;
            }
            let text = format_report(&res.report, &inst.topology, Some(res.proven_optimal), None);
            emit(spec.out_report.as_ref(), &text)?;
        }
        Mode::Evaluate | Mode::Metrics => {
            let mapping = load_mapping(spec)?;
            let report = evaluate(&inst.graph, &mapping, &inst.topology, inst.oracle.as_ref())?;
            let metrics =
                (spec.mode == Mode::Metrics).then(|| baseline_metrics(&inst.graph, &mapping));
            let text = format_report(&report, &inst.topology, None, metrics.as_ref());
            emit(spec.out_report.as_ref(), &text)?;
        }
        Mode::Sweep => {
            if spec.sweep.is_empty() {
                return Err(CliError::Usage("sweep mode requires --sweep-F".into()));
            }
            let cfg = config(spec)?;
            for (i, f) in spec.sweep.iter().enumerate() {
                let factor: Rational =
                    parse_factor(f).map_err(|e| CliError::Usage(format!("--sweep-F: {e}")))?;
                let topology = inst
                    .topology
                    .with_global_factor(factor)
                    .map_err(|e| CliError::Usage(format!("--sweep-F: {e}")))?;
                let res = solved(&inst, &topology, &cfg)?;
                if let Some(p) = &spec.out_mapping {
                    write(&suffixed(p, f), &write_mapping(&res.mapping))?;
                }
                let text = format_report(&res.report, &topology, Some(res.proven_optimal), None);
                match &spec.out_report {
                    Some(p) => write(&suffixed(p, f), &text)?,
                    None => {
                        if i > 0 {
                            emit(None, "\n")?;
                        }
                        emit(None, &text)?;
                    }
                }
            }
        }
    }
    Ok(stdout)
}
