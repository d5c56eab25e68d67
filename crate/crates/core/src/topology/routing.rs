use std::collections::{BTreeMap, VecDeque};

use super::{BinId, LinkId, Topology, TopologyError};
use crate::ratio::Rational;

/// Link ids of one path, in travel order.
pub type Path = Vec<LinkId>;

/// One route-table entry: a bin pair and its paths.
pub type RouteEntry = ((BinId, BinId), Vec<Path>);

/// The paths an oracle returns for one bin pair. Each of the `k` paths
/// carries weight `1/k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RouteSet {
    paths: Vec<Vec<LinkId>>,
}

impl RouteSet {
    /// Panics if `paths` is empty.
    pub fn new(paths: Vec<Vec<LinkId>>) -> Self {
        assert!(!paths.is_empty(), "a route set needs at least one path");
        Self { paths }
    }

    pub fn single(path: Vec<LinkId>) -> Self {
        Self { paths: vec![path] }
    }

    /// The route between a bin and itself.
    pub fn empty() -> Self {
        Self::single(Vec::new())
    }

    pub fn paths(&self) -> &[Vec<LinkId>] {
        &self.paths
    }

    pub fn k(&self) -> usize {
        self.paths.len()
    }

    pub fn per_path_weight(&self) -> Rational {
        Rational::new(1, self.paths.len() as i64)
    }

    /// Fraction of this route set's traffic that crosses each link, sorted by link id.
    pub fn link_shares(&self) -> Vec<(LinkId, Rational)> {
        let w = self.per_path_weight();
        let mut acc: BTreeMap<LinkId, Rational> = BTreeMap::new();
        for &l in self.paths.iter().flatten() {
            *acc.entry(l).or_default() += w;
        }
        acc.into_iter().collect()
    }
}

/// Answers `(bin, bin) -> RouteSet` queries. Implementations must be
/// deterministic and symmetric, and return a single empty path for `(b, b)`.
pub trait RoutingOracle: Sync {
    fn routes(&self, a: BinId, b: BinId) -> Result<RouteSet, TopologyError>;
}

/// Unique tree paths, found by walking both endpoints up to their lowest
/// common ancestor (root = bin 0).
#[derive(Debug, Clone)]
pub struct TreeOracle {
    parent: Vec<Option<(BinId, LinkId)>>,
    depth: Vec<usize>,
}

impl TreeOracle {
    pub fn new(topology: &Topology) -> Result<Self, TopologyError> {
        if !topology.is_tree_shaped() {
            return Err(TopologyError::NotATree(
                "tree oracle requires a spanning tree".into(),
            ));
        }
        let n = topology.num_bins();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(b) = queue.pop_front() {
            for &(c, l) in topology.incident(b) {
                if !seen[c] {
                    seen[c] = true;
                    parent[c] = Some((b, l));
                    depth[c] = depth[b] + 1;
                    queue.push_back(c);
                }
            }
        }
        Ok(Self { parent, depth })
    }

    /// Link sequence from `a` to `b` along the tree.
    pub fn path(&self, a: BinId, b: BinId) -> Result<Vec<LinkId>, TopologyError> {
        let n = self.depth.len();
        for x in [a, b] {
            if x >= n {
                return Err(TopologyError::BadBin(x));
            }
        }
        let (mut x, mut y) = (a, b);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[x] > self.depth[y] {
            let (p, l) = self.parent[x].expect("non-root has a parent");
            up.push(l);
            x = p;
        }
        while self.depth[y] > self.depth[x] {
            let (p, l) = self.parent[y].expect("non-root has a parent");
            down.push(l);
            y = p;
        }
        while x != y {
            let (px, lx) = self.parent[x].expect("non-root has a parent");
            let (py, ly) = self.parent[y].expect("non-root has a parent");
            up.push(lx);
            down.push(ly);
            x = px;
            y = py;
        }
        up.extend(down.into_iter().rev());
        Ok(up)
    }
}

impl RoutingOracle for TreeOracle {
    fn routes(&self, a: BinId, b: BinId) -> Result<RouteSet, TopologyError> {
        self.path(a, b).map(RouteSet::single)
    }
}

/// Explicit route table, stored per unordered bin pair with paths oriented
/// from the smaller to the larger bin id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableOracle {
    num_bins: usize,
    table: BTreeMap<(BinId, BinId), Vec<Vec<LinkId>>>,
}

impl TableOracle {
    /// Validates every entry against `topology`. A pair may be listed more
    /// than once (in either orientation) only if the path lists agree.
    pub fn new<I>(topology: &Topology, entries: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = RouteEntry>,
    {
        let mut table: BTreeMap<(BinId, BinId), Vec<Vec<LinkId>>> = BTreeMap::new();
        for ((a, b), paths) in entries {
            topology.check_bin(a)?;
            topology.check_bin(b)?;
            let invalid = |reason: String| TopologyError::InvalidPath { a, b, reason };
            if a == b {
                return Err(invalid("route from a bin to itself".into()));
            }
            if paths.is_empty() {
                return Err(invalid("no paths listed".into()));
            }
            for path in &paths {
                check_path(topology, a, b, path).map_err(invalid)?;
            }
            let mut oriented = paths;
            if a > b {
                oriented.iter_mut().for_each(|p| p.reverse());
            }
            for (i, p) in oriented.iter().enumerate() {
                if oriented[..i].contains(p) {
                    return Err(invalid("path listed twice".into()));
                }
            }
            let key = (a.min(b), a.max(b));
            match table.get(&key) {
                Some(existing) if *existing != oriented => {
                    return Err(TopologyError::InconsistentRoute(key.0, key.1))
                }
                Some(_) => {}
                None => {
                    table.insert(key, oriented);
                }
            }
        }
        Ok(Self {
            num_bins: topology.num_bins(),
            table,
        })
    }

    /// Entries in canonical orientation (`a < b`).
    pub fn entries(&self) -> impl Iterator<Item = ((BinId, BinId), &[Vec<LinkId>])> {
        self.table.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    /// First unordered pair of distinct bins from `bins` that has no entry.
    pub fn first_missing(&self, bins: &[BinId]) -> Option<(BinId, BinId)> {
        for (i, &a) in bins.iter().enumerate() {
            for &b in &bins[i + 1..] {
                if !self.table.contains_key(&(a.min(b), a.max(b))) {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

impl RoutingOracle for TableOracle {
    fn routes(&self, a: BinId, b: BinId) -> Result<RouteSet, TopologyError> {
        for x in [a, b] {
            if x >= self.num_bins {
                return Err(TopologyError::BadBin(x));
            }
        }
        if a == b {
            return Ok(RouteSet::empty());
        }
        let paths = self
            .table
            .get(&(a.min(b), a.max(b)))
            .ok_or(TopologyError::MissingRoute(a, b))?;
        let mut paths = paths.clone();
        if a > b {
            paths.iter_mut().for_each(|p| p.reverse());
        }
        Ok(RouteSet::new(paths))
    }
}

fn check_path(topology: &Topology, a: BinId, b: BinId, path: &[LinkId]) -> Result<(), String> {
    if path.is_empty() {
        return Err("empty path between distinct bins".into());
    }
    let mut visited = vec![a];
    let mut cur = a;
    for &l in path {
        if l >= topology.num_links() {
            return Err(format!("link {l} does not exist"));
        }
        let (x, y) = topology.link(l);
        cur = if cur == x {
            y
        } else if cur == y {
            x
        } else {
            return Err(format!("link {l} does not touch bin {cur}"));
        };
        if visited.contains(&cur) {
            return Err(format!("path revisits bin {cur}"));
        }
        visited.push(cur);
    }
    if cur != b {
        return Err(format!("path ends at bin {cur}"));
    }
    Ok(())
}
