//! Machine model `C = (B, L)`: bins, links, router flags, per-link
//! communication factors, and the routing oracles that answer path queries.

mod format;
mod routing;

use std::collections::{HashSet, VecDeque};

use num_traits::Zero;

use crate::ratio::Rational;

pub use format::{parse_route_table, parse_topology, write_route_table, write_topology};
pub use routing::{Path, RouteEntry, RouteSet, RoutingOracle, TableOracle, TreeOracle};

/// Bin identifier, `0..num_bins`.
pub type BinId = usize;
/// Link identifier, `0..num_links`.
pub type LinkId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("links do not form a tree: {0}")]
    NotATree(String),
    #[error("every bin is a router, no vertex can be placed")]
    AllRouters,
    #[error("bad link {link}: {reason}")]
    BadLink { link: usize, reason: String },
    #[error("duplicate link between bins {0} and {1}")]
    DuplicateLink(BinId, BinId),
    #[error("bin id {0} out of range")]
    BadBin(usize),
    #[error("communication factor must be positive, got {0}")]
    BadFactor(Rational),
    #[error("no route between bins {0} and {1}")]
    MissingRoute(BinId, BinId),
    #[error("invalid route between bins {a} and {b}: {reason}")]
    InvalidPath { a: BinId, b: BinId, reason: String },
    #[error("inconsistent route entries for bins {0} and {1}")]
    InconsistentRoute(BinId, BinId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Tree,
    Routed,
}

impl TopologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Tree => "tree",
            TopologyKind::Routed => "routed",
        }
    }
}

/// Validated machine model. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    links: Vec<(BinId, BinId)>,
    is_router: Vec<bool>,
    explicit_factor: Vec<Option<Rational>>,
    global_factor: Rational,
    incident: Vec<Vec<(BinId, LinkId)>>,
}

/// Incremental construction of a [`Topology`]; validation happens in [`build`](Self::build).
#[derive(Debug, Clone)]
pub struct TopologyBuilder {
    kind: TopologyKind,
    num_bins: usize,
    links: Vec<(BinId, BinId)>,
    factors: Vec<Option<Rational>>,
    routers: Vec<BinId>,
    global_factor: Rational,
}

impl TopologyBuilder {
    pub fn new(kind: TopologyKind, num_bins: usize) -> Self {
        Self {
            kind,
            num_bins,
            links: Vec::new(),
            factors: Vec::new(),
            routers: Vec::new(),
            global_factor: Rational::from_integer(1),
        }
    }

    pub fn link(mut self, a: BinId, b: BinId) -> Self {
        self.links.push((a, b));
        self.factors.push(None);
        self
    }

    pub fn link_with_factor(mut self, a: BinId, b: BinId, factor: Rational) -> Self {
        self.links.push((a, b));
        self.factors.push(Some(factor));
        self
    }

    pub fn router(mut self, bin: BinId) -> Self {
        self.routers.push(bin);
        self
    }

    pub fn global_factor(mut self, f: Rational) -> Self {
        self.global_factor = f;
        self
    }

    pub fn build(self) -> Result<Topology, TopologyError> {
        Topology::new(
            self.kind,
            self.num_bins,
            &self.links,
            &self.routers,
            Some(&self.factors),
            self.global_factor,
        )
    }
}

impl Topology {
    /// Validates and builds a topology.
    ///
    /// `link_factors`, when given, must have one entry per link; `None`
    /// entries fall back to `global_factor`.
    pub fn new(
        kind: TopologyKind,
        num_bins: usize,
        links: &[(BinId, BinId)],
        routers: &[BinId],
        link_factors: Option<&[Option<Rational>]>,
        global_factor: Rational,
    ) -> Result<Self, TopologyError> {
        if global_factor <= Rational::zero() {
            return Err(TopologyError::BadFactor(global_factor));
        }
        let explicit_factor: Vec<Option<Rational>> = match link_factors {
            Some(f) if f.len() != links.len() => {
                return Err(TopologyError::BadLink {
                    link: f.len().min(links.len()),
                    reason: format!("{} factors given for {} links", f.len(), links.len()),
                })
            }
            Some(f) => f.to_vec(),
            None => vec![None; links.len()],
        };
        if let Some(bad) = explicit_factor
            .iter()
            .flatten()
            .find(|f| **f <= Rational::zero())
        {
            return Err(TopologyError::BadFactor(*bad));
        }

        let mut incident = vec![Vec::new(); num_bins];
        let mut seen = HashSet::with_capacity(links.len());
        for (id, &(a, b)) in links.iter().enumerate() {
            if a >= num_bins || b >= num_bins {
                return Err(TopologyError::BadLink {
                    link: id,
                    reason: format!("endpoint out of range ({a}, {b}) with {num_bins} bins"),
                });
            }
            if a == b {
                return Err(TopologyError::BadLink {
                    link: id,
                    reason: format!("self-link on bin {a}"),
                });
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(TopologyError::DuplicateLink(a.min(b), a.max(b)));
            }
            incident[a].push((b, id));
            incident[b].push((a, id));
        }

        let mut is_router = vec![false; num_bins];
        for &r in routers {
            if r >= num_bins {
                return Err(TopologyError::BadBin(r));
            }
            is_router[r] = true;
        }

        if kind == TopologyKind::Tree {
            if num_bins == 0 || links.len() != num_bins - 1 {
                return Err(TopologyError::NotATree(format!(
                    "{} links on {} bins",
                    links.len(),
                    num_bins
                )));
            }
            if !is_connected(&incident) {
                return Err(TopologyError::NotATree("disconnected".into()));
            }
        }
        if is_router.iter().all(|&r| r) {
            return Err(TopologyError::AllRouters);
        }

        Ok(Self {
            kind,
            links: links.to_vec(),
            is_router,
            explicit_factor,
            global_factor,
            incident,
        })
    }

    /// Tree topology with every link using the global factor.
    pub fn tree(
        num_bins: usize,
        links: &[(BinId, BinId)],
        routers: &[BinId],
        global_factor: Rational,
    ) -> Result<Self, TopologyError> {
        Self::new(
            TopologyKind::Tree,
            num_bins,
            links,
            routers,
            None,
            global_factor,
        )
    }

    /// Non-tree topology; paths come from an explicit route table.
    pub fn routed(
        num_bins: usize,
        links: &[(BinId, BinId)],
        routers: &[BinId],
        global_factor: Rational,
    ) -> Result<Self, TopologyError> {
        Self::new(
            TopologyKind::Routed,
            num_bins,
            links,
            routers,
            None,
            global_factor,
        )
    }

    pub fn builder(kind: TopologyKind, num_bins: usize) -> TopologyBuilder {
        TopologyBuilder::new(kind, num_bins)
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn num_bins(&self) -> usize {
        self.is_router.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[(BinId, BinId)] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> (BinId, BinId) {
        self.links[id]
    }

    pub fn is_router(&self, bin: BinId) -> bool {
        self.is_router[bin]
    }

    /// Neighbouring bins of `bin` together with the connecting link.
    pub fn incident(&self, bin: BinId) -> &[(BinId, LinkId)] {
        &self.incident[bin]
    }

    /// Bins that may receive work, in increasing id order.
    pub fn compute_bins(&self) -> Vec<BinId> {
        (0..self.num_bins())
            .filter(|&b| !self.is_router[b])
            .collect()
    }

    pub fn global_factor(&self) -> Rational {
        self.global_factor
    }

    /// The factor set explicitly on a link, if any.
    pub fn explicit_factor(&self, link: LinkId) -> Option<Rational> {
        self.explicit_factor[link]
    }

    /// Effective factor `F_l`: the explicit one, else the global `F`.
    pub fn link_factor(&self, link: LinkId) -> Rational {
        self.explicit_factor[link].unwrap_or(self.global_factor)
    }

    /// Copy with a different global factor. Explicit link factors are kept.
    pub fn with_global_factor(&self, f: Rational) -> Result<Self, TopologyError> {
        if f <= Rational::zero() {
            return Err(TopologyError::BadFactor(f));
        }
        let mut t = self.clone();
        t.global_factor = f;
        Ok(t)
    }

    /// True when the link set is a spanning tree of the bins, whatever the kind.
    pub fn is_tree_shaped(&self) -> bool {
        self.num_bins() > 0
            && self.links.len() == self.num_bins() - 1
            && is_connected(&self.incident)
    }

    pub(crate) fn check_bin(&self, bin: BinId) -> Result<(), TopologyError> {
        if bin < self.num_bins() {
            Ok(())
        } else {
            Err(TopologyError::BadBin(bin))
        }
    }
}

fn is_connected(incident: &[Vec<(BinId, LinkId)>]) -> bool {
    if incident.is_empty() {
        return true;
    }
    let mut seen = vec![false; incident.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(b) = queue.pop_front() {
        for &(n, _) in &incident[b] {
            if !seen[n] {
                seen[n] = true;
                count += 1;
                queue.push_back(n);
            }
        }
    }
    count == incident.len()
}
