//! Line-oriented text formats for topologies and route tables.
//!
//! ```text
//! % fat tree with one switch
//! topology tree 3 2 1
//! bin 0 router
//! bin 1
//! bin 2
//! link 0 0 1
//! link 1 0 2 0.5
//! ```
//!
//! Route tables list `route <a> <b> <k>` followed by `k` lines of link ids.
//! `%` starts a comment line.

use std::fmt::Write as _;

use super::{BinId, LinkId, RouteEntry, TableOracle, Topology, TopologyError, TopologyKind};
use crate::ratio::{format_factor, parse_factor, Rational};

fn parse_err(line: usize, msg: impl Into<String>) -> TopologyError {
    TopologyError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn parse_id(line: usize, tok: Option<&str>, what: &str) -> Result<usize, TopologyError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_positive_factor(line: usize, tok: &str) -> Result<Rational, TopologyError> {
    let f = parse_factor(tok).map_err(|e| parse_err(line, e.to_string()))?;
    if f <= Rational::from_integer(0) {
        return Err(parse_err(
            line,
            format!("factor must be positive, got `{tok}`"),
        ));
    }
    Ok(f)
}

pub fn parse_topology(text: &str) -> Result<Topology, TopologyError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty topology file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("topology") {
        return Err(parse_err(
            hline,
            "expected `topology <tree|routed> <bins> <links> <F>`",
        ));
    }
    let kind = match toks.next() {
        Some("tree") => TopologyKind::Tree,
        Some("routed") => TopologyKind::Routed,
        other => return Err(parse_err(hline, format!("unknown topology kind {other:?}"))),
    };
    let num_bins = parse_id(hline, toks.next(), "bin count")?;
    let num_links = parse_id(hline, toks.next(), "link count")?;
    let global = parse_positive_factor(
        hline,
        toks.next()
            .ok_or_else(|| parse_err(hline, "missing global factor"))?,
    )?;
    if let Some(extra) = toks.next() {
        return Err(parse_err(hline, format!("unexpected token `{extra}`")));
    }

    let mut bin_seen = vec![false; num_bins];
    let mut routers = Vec::new();
    let mut links: Vec<Option<(BinId, BinId, Option<Rational>)>> = vec![None; num_links];
    for (ln, line) in lines {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("bin") => {
                let id = parse_id(ln, toks.next(), "bin id")?;
                if id >= num_bins {
                    return Err(parse_err(ln, format!("bin {id} out of range")));
                }
                if std::mem::replace(&mut bin_seen[id], true) {
                    return Err(parse_err(ln, format!("bin {id} declared twice")));
                }
                match toks.next() {
                    None => {}
                    Some("router") => routers.push(id),
                    Some(t) => return Err(parse_err(ln, format!("unexpected token `{t}`"))),
                }
            }
            Some("link") => {
                let id = parse_id(ln, toks.next(), "link id")?;
                let a = parse_id(ln, toks.next(), "bin id")?;
                let b = parse_id(ln, toks.next(), "bin id")?;
                let factor = toks
                    .next()
                    .map(|t| parse_positive_factor(ln, t))
                    .transpose()?;
                if let Some(t) = toks.next() {
                    return Err(parse_err(ln, format!("unexpected token `{t}`")));
                }
                let slot = links
                    .get_mut(id)
                    .ok_or_else(|| parse_err(ln, format!("link {id} out of range")))?;
                if slot.replace((a, b, factor)).is_some() {
                    return Err(parse_err(ln, format!("link {id} declared twice")));
                }
            }
            Some(other) => return Err(parse_err(ln, format!("unknown record `{other}`"))),
            None => unreachable!("blank lines are filtered"),
        }
    }

    let mut pairs = Vec::with_capacity(num_links);
    let mut factors = Vec::with_capacity(num_links);
    for (id, l) in links.into_iter().enumerate() {
        let (a, b, f) = l.ok_or_else(|| parse_err(0, format!("link {id} missing")))?;
        pairs.push((a, b));
        factors.push(f);
    }
    Topology::new(kind, num_bins, &pairs, &routers, Some(&factors), global)
}

pub fn write_topology(topology: &Topology) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "topology {} {} {} {}",
        topology.kind().as_str(),
        topology.num_bins(),
        topology.num_links(),
        format_factor(&topology.global_factor())
    )
    .unwrap();
    for b in 0..topology.num_bins() {
        if topology.is_router(b) {
            writeln!(out, "bin {b} router").unwrap();
        } else {
            writeln!(out, "bin {b}").unwrap();
        }
    }
    for (id, &(a, b)) in topology.links().iter().enumerate() {
        match topology.explicit_factor(id) {
            Some(f) => writeln!(out, "link {id} {a} {b} {}", format_factor(&f)).unwrap(),
            None => writeln!(out, "link {id} {a} {b}").unwrap(),
        }
    }
    out
}

pub fn parse_route_table(text: &str, topology: &Topology) -> Result<TableOracle, TopologyError> {
    let mut lines = content_lines(text);
    let mut entries: Vec<RouteEntry> = Vec::new();
    while let Some((ln, line)) = lines.next() {
        let mut toks = line.split_whitespace();
        if toks.next() != Some("route") {
            return Err(parse_err(ln, "expected `route <a> <b> <k>`"));
        }
        let a = parse_id(ln, toks.next(), "bin id")?;
        let b = parse_id(ln, toks.next(), "bin id")?;
        let k = parse_id(ln, toks.next(), "path count")?;
        if let Some(t) = toks.next() {
            return Err(parse_err(ln, format!("unexpected token `{t}`")));
        }
        if k == 0 {
            return Err(parse_err(ln, "route needs at least one path"));
        }
        let mut paths = Vec::with_capacity(k);
        for _ in 0..k {
            let (pl, pline) = lines
                .next()
                .ok_or_else(|| parse_err(ln, format!("route {a} {b}: expected {k} path lines")))?;
            let path = pline
                .split_whitespace()
                .map(|t| {
                    t.parse::<LinkId>()
                        .map_err(|_| parse_err(pl, format!("invalid link id `{t}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            paths.push(path);
        }
        entries.push(((a, b), paths));
    }
    TableOracle::new(topology, entries)
}

pub fn write_route_table(table: &TableOracle) -> String {
    let mut out = String::new();
    for ((a, b), paths) in table.entries() {
        writeln!(out, "route {a} {b} {}", paths.len()).unwrap();
        for p in paths {
            let ids: Vec<String> = p.iter().map(ToString::to_string).collect();
            writeln!(out, "{}", ids.join(" ")).unwrap();
        }
    }
    out
}
