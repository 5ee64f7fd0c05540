//! Undirected weighted graphs, shortest-path primitives, nearest-in-set
//! computation and the restricted graph `G_S`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use ordered_float::OrderedFloat;
use rand::Rng;

use crate::error::{invalid, Error, Result};

pub const INF: f64 = f64::INFINITY;
/// Marker for "no vertex" in pivot and parent arrays.
pub const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    adj: Vec<(usize, f64)>,
    unweighted: bool,
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops are dropped and parallel
    /// edges keep their minimum weight.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut list = Vec::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { line: 0, id: u.max(v), n });
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight { line: 0, weight: w });
            }
            if u != v {
                list.push((u.min(v), u.max(v), w));
            }
        }
        Ok(Self::from_clean(n, list))
    }

    fn from_clean(n: usize, mut list: Vec<(usize, usize, f64)>) -> Graph {
        list.sort_by(|a, b| (a.0, a.1, OrderedFloat(a.2)).cmp(&(b.0, b.1, OrderedFloat(b.2))));
        list.dedup_by(|next, kept| next.0 == kept.0 && next.1 == kept.1);

        let mut deg = vec![0usize; n + 1];
        for &(u, v, _) in &list {
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for u in 0..n {
            offsets[u + 1] = offsets[u] + deg[u];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0usize, 0.0f64); offsets[n]];
        for &(u, v, w) in &list {
            adj[fill[u]] = (v, w);
            fill[u] += 1;
            adj[fill[v]] = (u, w);
            fill[v] += 1;
        }
        for u in 0..n {
            adj[offsets[u]..offsets[u + 1]].sort_by_key(|e| e.0);
        }
        let unweighted = list.iter().all(|e| e.2 == 1.0);
        Graph { n, edges: list, offsets, adj, unweighted }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v, w)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn is_unweighted(&self) -> bool {
        self.unweighted
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let nb = self.neighbors(u);
        nb.binary_search_by_key(&v, |e| e.0).ok().map(|i| nb[i].1)
    }

    /// Subgraph on the same vertex set keeping the edges accepted by `keep`.
    pub fn filter_edges<F: Fn(usize, usize, f64) -> bool>(&self, keep: F) -> Graph {
        let list = self.edges.iter().copied().filter(|&(u, v, w)| keep(u, v, w)).collect();
        Self::from_clean(self.n, list)
    }

    /// Adds edges, collapsing parallels to the lighter weight.
    pub fn with_extra_edges<I>(&self, extra: I) -> Graph
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut list = self.edges.clone();
        list.extend(
            extra
                .into_iter()
                .filter(|&(u, v, _)| u != v)
                .map(|(u, v, w)| (u.min(v), u.max(v), w)),
        );
        Self::from_clean(self.n, list)
    }

    /// Parses the line-oriented `p sp <n> <m>` / `e <u> <v> [w]` format.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut header: Option<(usize, usize)> = None;
        let mut list = Vec::new();
        let mut seen = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let mut tok = raw.split_whitespace();
            let Some(first) = tok.next() else { continue };
            match first {
                "c" => continue,
                "p" => {
                    if header.is_some() {
                        return Err(parse_err(line, "duplicate header"));
                    }
                    if tok.next() != Some("sp") {
                        return Err(parse_err(line, "expected `p sp <n> <m>`"));
                    }
                    let n = parse_num(tok.next(), line, "n")?;
                    let m = parse_num(tok.next(), line, "m")?;
                    if tok.next().is_some() {
                        return Err(parse_err(line, "trailing tokens in header"));
                    }
                    header = Some((n, m));
                }
                "e" => {
                    let Some((n, _)) = header else {
                        return Err(parse_err(line, "edge before header"));
                    };
                    let u = parse_num(tok.next(), line, "u")?;
                    let v = parse_num(tok.next(), line, "v")?;
                    let w = match tok.next() {
                        None => 1.0,
                        Some(s) => s
                            .parse::<f64>()
                            .map_err(|_| parse_err(line, format!("bad weight `{s}`")))?,
                    };
                    if tok.next().is_some() {
                        return Err(parse_err(line, "trailing tokens in edge line"));
                    }
                    for id in [u, v] {
                        if id == 0 || id > n {
                            return Err(Error::VertexOutOfRange { line, id: id.wrapping_sub(1), n });
                        }
                    }
                    if w < 0.0 {
                        return Err(Error::NegativeWeight { line, weight: w });
                    }
                    if !w.is_finite() {
                        return Err(parse_err(line, "weight must be finite"));
                    }
                    seen += 1;
                    if u != v {
                        list.push(((u - 1).min(v - 1), (u - 1).max(v - 1), w));
                    }
                }
                other => return Err(parse_err(line, format!("unknown line type `{other}`"))),
            }
        }
        let (n, m) = header.ok_or_else(|| parse_err(0, "missing `p sp` header"))?;
        if seen != m {
            return Err(parse_err(0, format!("header declares {m} edges, found {seen}")));
        }
        Ok(Self::from_clean(n, list))
    }

    /// Serializes to the text format; `comments` become leading `c` lines.
    pub fn to_text(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "c {c}");
        }
        let _ = writeln!(out, "p sp {} {}", self.n, self.m());
        for &(u, v, w) in &self.edges {
            if self.unweighted {
                let _ = writeln!(out, "e {} {}", u + 1, v + 1);
            } else {
                let _ = writeln!(out, "e {} {} {}", u + 1, v + 1, w);
            }
        }
        out
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_num(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let s = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    s.parse().map_err(|_| parse_err(line, format!("bad {what} `{s}`")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    pub source: usize,
    pub dist: Vec<f64>,
    pub parent: Vec<Option<usize>>,
}

pub fn dijkstra(g: &Graph, source: usize) -> DistanceMap {
    dijkstra_filtered(g, source, |_, _, _| true)
}

/// Single-source shortest paths using only the edges accepted by `keep`.
pub fn dijkstra_filtered<F>(g: &Graph, source: usize, keep: F) -> DistanceMap
where
    F: Fn(usize, usize, f64) -> bool,
{
    let n = g.n();
    let mut dist = vec![INF; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), source)));
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in g.neighbors(u) {
            if done[v] || !keep(u, v, w) {
                continue;
            }
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = Some(u);
                heap.push(Reverse((OrderedFloat(nd), v)));
            }
        }
    }
    DistanceMap { source, dist, parent }
}

/// Hop distances; only meaningful on unweighted graphs.
pub fn bfs(g: &Graph, source: usize) -> Vec<f64> {
    let mut dist = vec![INF; g.n()];
    let mut queue = std::collections::VecDeque::new();
    dist[source] = 0.0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in g.neighbors(u) {
            if dist[v] == INF {
                dist[v] = dist[u] + 1.0;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Exact distances from `source`, using BFS when the graph is unweighted.
pub fn distances_from(g: &Graph, source: usize) -> Vec<f64> {
    if g.is_unweighted() {
        bfs(g, source)
    } else {
        dijkstra(g, source).dist
    }
}

/// `h_S(u) = d(u, S)` and the nearest member `p_S(u)` for every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestInfo {
    pub members: Vec<bool>,
    pub h: Vec<f64>,
    pub p: Vec<usize>,
}

impl NearestInfo {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.members[u]
    }

    pub fn set(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&u| self.members[u]).collect()
    }
}

/// Multi-source Dijkstra from `set`. Labels are compared as `(distance,
/// source id)`, so ties go to the smaller source id.
pub fn nearest_in_set(g: &Graph, set: &[usize]) -> Result<NearestInfo> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = g.n();
    let mut members = vec![false; n];
    let mut h = vec![INF; n];
    let mut p = vec![NONE; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in set {
        if s >= n {
            return Err(invalid(format!("set member {s} out of range for n = {n}")));
        }
        members[s] = true;
        h[s] = 0.0;
        p[s] = s;
        heap.push(Reverse((OrderedFloat(0.0), s, s)));
    }
    while let Some(Reverse((OrderedFloat(d), src, u))) = heap.pop() {
        if done[u] || (d, src) != (h[u], p[u]) {
            continue;
        }
        done[u] = true;
        for &(v, w) in g.neighbors(u) {
            if done[v] {
                continue;
            }
            let nd = d + w;
            if (OrderedFloat(nd), src) < (OrderedFloat(h[v]), p[v]) {
                h[v] = nd;
                p[v] = src;
                heap.push(Reverse((OrderedFloat(nd), src, v)));
            }
        }
    }
    Ok(NearestInfo { members, h, p })
}

/// `G_S`: keeps `(u, v, w)` iff `w <= max(h_S(u), h_S(v))`.
pub fn restricted_graph(g: &Graph, info: &NearestInfo) -> Graph {
    g.filter_edges(|u, v, w| w <= info.h[u].max(info.h[v]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: usize,
    /// `(vertex, distance)` sorted by vertex id.
    pub members: Vec<(usize, f64)>,
}

/// `B_S(u) = { v : d(u, v) < h_S(u) }` by truncated Dijkstra.
pub fn ball(g: &Graph, u: usize, info: &NearestInfo) -> Ball {
    let radius = info.h[u];
    let mut members = Vec::new();
    if radius > 0.0 {
        let mut dist = std::collections::HashMap::new();
        let mut heap = BinaryHeap::new();
        dist.insert(u, 0.0);
        heap.push(Reverse((OrderedFloat(0.0), u)));
        while let Some(Reverse((OrderedFloat(d), x))) = heap.pop() {
            if d > dist[&x] {
                continue;
            }
            members.push((x, d));
            for &(y, w) in g.neighbors(x) {
                let nd = d + w;
                if nd < radius && dist.get(&y).is_none_or(|&old| nd < old) {
                    dist.insert(y, nd);
                    heap.push(Reverse((OrderedFloat(nd), y)));
                }
            }
        }
        members.sort_by_key(|m| m.0);
        members.dedup_by_key(|m| m.0);
    }
    Ball { center: u, members }
}

const SAMPLE_RETRIES: usize = 32;

/// Keeps each member of `universe` with probability `target / |universe|`,
/// resampling until the size lands in `[target/2, 2 target]`. The result is
/// sorted and never empty.
pub fn sample_subset<R: Rng + ?Sized>(universe: &[usize], target: f64, rng: &mut R) -> Result<Vec<usize>> {
    if universe.is_empty() {
        return Err(Error::EmptySet);
    }
    let size = universe.len() as f64;
    if !(target > 0.0 && target <= size) {
        return Err(invalid(format!("target size {target} outside (0, {size}]")));
    }
    let p = target / size;
    let mut out = Vec::new();
    for _ in 0..=SAMPLE_RETRIES {
        out = universe.iter().copied().filter(|_| rng.random::<f64>() < p).collect();
        let len = out.len() as f64;
        if len >= target / 2.0 && len <= 2.0 * target {
            break;
        }
    }
    if out.is_empty() {
        out.push(universe[rng.random_range(0..universe.len())]);
    }
    out.sort_unstable();
    Ok(out)
}
