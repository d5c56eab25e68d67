//! Workload graph `G = (V, E)` with positive integer vertex weights.
//!
//! Files use the METIS adjacency format: a header `n m [fmt [ncon]]`, then one
//! line per vertex listing its 1-based neighbours, preceded by the vertex
//! weight when `fmt` sets the vertex-weight digit (`10`). Lines starting with
//! `%` are comments. Vertex `i` on line `i` of the file is vertex `i - 1` in
//! memory; every API in this crate uses the 0-based ids.

use std::fmt::Write as _;

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Vertex ids are 0-based; the message shows the 1-based file numbering.
    #[error("vertex {} lists {} as neighbour but not vice versa", .from + 1, .to + 1)]
    AsymmetricEdge { from: VertexId, to: VertexId },
    #[error("vertex {} has a self-loop", .0 + 1)]
    SelfLoop(VertexId),
    #[error("vertex {} lists neighbour {} twice", .from + 1, .to + 1)]
    DuplicateEdge { from: VertexId, to: VertexId },
    #[error("vertex {} has weight {weight}, weights must be at least 1", .vertex + 1)]
    BadWeight { vertex: VertexId, weight: i64 },
    #[error("neighbour {} of vertex {} out of range", .to + 1, .from + 1)]
    BadVertex { from: VertexId, to: VertexId },
}

/// Undirected simple graph in compressed adjacency form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadGraph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    weights: Vec<u64>,
}

impl WorkloadGraph {
    /// Builds from per-vertex neighbour lists. Lists need not be sorted but must
    /// be symmetric, loop-free and free of duplicates.
    pub fn from_adjacency(
        adjacency: Vec<Vec<VertexId>>,
        weights: Vec<u64>,
    ) -> Result<Self, GraphError> {
        let n = adjacency.len();
        assert_eq!(weights.len(), n, "one weight per vertex");
        if let Some(v) = weights.iter().position(|&w| w == 0) {
            return Err(GraphError::BadWeight {
                vertex: v,
                weight: 0,
            });
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(adjacency.iter().map(Vec::len).sum());
        offsets.push(0);
        for (v, mut list) in adjacency.into_iter().enumerate() {
            list.sort_unstable();
            for (i, &u) in list.iter().enumerate() {
                if u >= n {
                    return Err(GraphError::BadVertex { from: v, to: u });
                }
                if u == v {
                    return Err(GraphError::SelfLoop(v));
                }
                if i > 0 && list[i - 1] == u {
                    return Err(GraphError::DuplicateEdge { from: v, to: u });
                }
            }
            neighbors.extend(list);
            offsets.push(neighbors.len());
        }
        let g = Self {
            offsets,
            neighbors,
            weights,
        };
        for v in 0..n {
            for &u in g.neighbors(v) {
                if g.neighbors(u).binary_search(&v).is_err() {
                    return Err(GraphError::AsymmetricEdge { from: v, to: u });
                }
            }
        }
        Ok(g)
    }

    /// Unit-weight graph from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        Self::from_weighted_edges(vec![1; n], edges)
    }

    pub fn from_weighted_edges(
        weights: Vec<u64>,
        edges: &[(VertexId, VertexId)],
    ) -> Result<Self, GraphError> {
        let n = weights.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::BadVertex {
                    from: u.min(v),
                    to: u.max(v),
                });
            }
            adj[u].push(v);
            if u != v {
                adj[v].push(u);
            }
        }
        Self::from_adjacency(adj, weights)
    }

    pub fn num_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Sorted neighbours of `v`.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn weight(&self, v: VertexId) -> u64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Sum of all vertex weights.
    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn is_unit_weighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1)
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in increasing order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.num_vertices()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }
}

fn perr(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a METIS-style adjacency document.
pub fn parse_graph(text: &str) -> Result<WorkloadGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('%'));
    let (hline, header) = loop {
        match lines.next() {
            Some((_, "")) => continue,
            Some(h) => break h,
            None => return Err(perr(0, "missing header")),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if !(2..=4).contains(&fields.len()) {
        return Err(perr(hline, "header must be `n m [fmt [ncon]]`"));
    }
    let num = |tok: &str, what: &str| -> Result<usize, GraphError> {
        tok.parse()
            .map_err(|_| perr(hline, format!("invalid {what} `{tok}`")))
    };
    let n = num(fields[0], "vertex count")?;
    let m = num(fields[1], "edge count")?;
    let fmt = fields.get(2).copied().unwrap_or("0");
    if fmt.is_empty() || fmt.len() > 3 || !fmt.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(perr(hline, format!("invalid fmt `{fmt}`")));
    }
    let fmt = format!("{fmt:0>3}");
    let fmt = fmt.as_bytes();
    if fmt[0] == b'1' {
        return Err(perr(hline, "vertex sizes are not supported"));
    }
    if fmt[2] == b'1' {
        return Err(perr(hline, "edge weights are not supported"));
    }
    let has_weights = fmt[1] == b'1';
    if let Some(ncon) = fields.get(3) {
        if num(ncon, "constraint count")? != 1 || !has_weights {
            return Err(perr(hline, "only a single vertex weight is supported"));
        }
    }

    let mut adjacency = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for v in 0..n {
        // a truncated file is read as trailing vertices without neighbours
        let (ln, line) = lines.next().unwrap_or((0, ""));
        let mut toks = line.split_whitespace();
        let w = if has_weights {
            let tok = toks
                .next()
                .ok_or_else(|| perr(ln, format!("vertex {} lacks a weight", v + 1)))?;
            let w: i64 = tok
                .parse()
                .map_err(|_| perr(ln, format!("invalid weight `{tok}`")))?;
            if w < 1 {
                return Err(GraphError::BadWeight {
                    vertex: v,
                    weight: w,
                });
            }
            w as u64
        } else {
            1
        };
        let mut list = Vec::new();
        for tok in toks {
            let u: usize = tok
                .parse()
                .map_err(|_| perr(ln, format!("invalid neighbour `{tok}`")))?;
            if u == 0 || u > n {
                return Err(perr(ln, format!("neighbour {u} out of range 1..={n}")));
            }
            list.push(u - 1);
        }
        adjacency.push(list);
        weights.push(w);
    }
    for (ln, line) in lines {
        if !line.is_empty() {
            return Err(perr(ln, "unexpected content after the last vertex"));
        }
    }
    let g = WorkloadGraph::from_adjacency(adjacency, weights)?;
    if g.num_edges() != m {
        return Err(perr(
            hline,
            format!("header declares {m} edges, adjacency has {}", g.num_edges()),
        ));
    }
    Ok(g)
}

/// Serialises in the format accepted by [`parse_graph`]; the weight column is
/// emitted only when some weight differs from 1.
pub fn write_graph(g: &WorkloadGraph) -> String {
    let mut out = String::new();
    let weighted = !g.is_unit_weighted();
    if weighted {
        writeln!(out, "{} {} 10", g.num_vertices(), g.num_edges()).unwrap();
    } else {
        writeln!(out, "{} {}", g.num_vertices(), g.num_edges()).unwrap();
    }
    for v in 0..g.num_vertices() {
        let mut items: Vec<String> = Vec::with_capacity(g.degree(v) + 1);
        if weighted {
            items.push(g.weight(v).to_string());
        }
        items.extend(g.neighbors(v).iter().map(|u| (u + 1).to_string()));
        writeln!(out, "{}", items.join(" ")).unwrap();
    }
    out
}
