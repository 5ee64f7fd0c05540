//! Level sampling, pivots and bunches, and the two-sided bunch query shared by
//! the classic oracle and its parameterized variants.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use ordered_float::OrderedFloat;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::graph::{nearest_in_set, sample_subset, Graph, INF, NONE};
use crate::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Classic,
    Parameterized,
    Restricted,
}

impl Mode {
    pub fn tag(self) -> u8 {
        match self {
            Mode::Classic => 0,
            Mode::Parameterized => 1,
            Mode::Restricted => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Mode> {
        match tag {
            0 => Some(Mode::Classic),
            1 => Some(Mode::Parameterized),
            2 => Some(Mode::Restricted),
            _ => None,
        }
    }
}

/// Nested sets `A_0 ⊇ A_1 ⊇ ... ⊇ A_top`, each sorted; the level above the
/// top is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Levels {
    pub sets: Vec<Vec<usize>>,
}

impl Levels {
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Levels> {
        if sets.is_empty() || sets.iter().any(|s| s.is_empty()) {
            return Err(Error::EmptySet);
        }
        Ok(Levels { sets })
    }

    pub fn count(&self) -> usize {
        self.sets.len()
    }

    pub fn top(&self) -> usize {
        self.sets.len() - 1
    }

    /// Nesting check: every level is a subset of the one below it.
    pub fn is_nested(&self) -> bool {
        self.sets.windows(2).all(|w| {
            let lower: std::collections::HashSet<_> = w[0].iter().collect();
            w[1].iter().all(|x| lower.contains(x))
        })
    }
}

/// Classic levels: `A_0 = V` and `A_i` sampled from `A_{i-1}` with target
/// size `n^{1-i/k}`.
pub fn build_levels<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Levels> {
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    if n == 0 {
        return Err(Error::EmptySet);
    }
    let mut sets = vec![(0..n).collect::<Vec<_>>()];
    for i in 1..k {
        let prev = sets.last().unwrap();
        let target = (n as f64).powf(1.0 - i as f64 / k as f64).min(prev.len() as f64);
        sets.push(sample_subset(prev, target, rng)?);
    }
    Levels::new(sets)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// `(p_i(u), h_i(u))` per level; `(NONE, INF)` when `A_i` is unreachable.
    pub pivots: Vec<(usize, f64)>,
    pub bunch: HashMap<usize, f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    /// Edge scans performed while growing clusters.
    pub relaxations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BunchOracle {
    mode: Mode,
    k: usize,
    n: usize,
    seed: u64,
    levels: Levels,
    rows: Vec<Row>,
    slot: Vec<usize>,
}

/// Per-direction record of one query evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionTrace {
    pub estimate: f64,
    pub lookups: usize,
    /// Loop index at which the direction returned.
    pub exit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryTrace {
    pub estimate: f64,
    /// Early-exit loop started from `u`.
    pub forward: DirectionTrace,
    /// Early-exit loop started from `v`.
    pub backward: DirectionTrace,
    /// Every level's candidate, `p_i(u)` looked up in `v`'s bunch.
    pub scan_u: DirectionTrace,
    /// Every level's candidate, `p_i(v)` looked up in `u`'s bunch.
    pub scan_v: DirectionTrace,
}

impl BunchOracle {
    /// Classic oracle with parameter `k`, levels drawn from `seed`.
    pub fn build_classic(g: &Graph, k: usize, seed: u64) -> Result<BunchOracle> {
        let levels = build_levels(g.n(), k, &mut seeded_rng(seed))?;
        Ok(build_bunches(g, levels, BunchSpec { mode: Mode::Classic, k, seed, stored: None }).0)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    pub fn has_row(&self, u: usize) -> bool {
        u < self.n && self.slot[u] != NONE
    }

    /// Vertices with stored tables, ascending.
    pub fn stored_vertices(&self) -> Vec<usize> {
        (0..self.n).filter(|&u| self.slot[u] != NONE).collect()
    }

    pub fn row(&self, u: usize) -> Option<&Row> {
        self.slot.get(u).and_then(|&s| (s != NONE).then(|| &self.rows[s]))
    }

    pub fn pivot(&self, u: usize, i: usize) -> (usize, f64) {
        self.row(u).expect("vertex outside the stored domain").pivots[i]
    }

    pub fn bunch_distance(&self, u: usize, w: usize) -> Option<f64> {
        self.row(u).and_then(|r| r.bunch.get(&w).copied())
    }

    /// Total number of stored bunch entries.
    pub fn bunch_entries(&self) -> usize {
        self.rows.iter().map(|r| r.bunch.len()).sum()
    }

    pub fn pivot_entries(&self) -> usize {
        self.rows.iter().map(|r| r.pivots.len()).sum()
    }

    /// Members of `B_i(u)` with distances, sorted by vertex id.
    pub fn bunch_level(&self, u: usize, i: usize) -> Vec<(usize, f64)> {
        let Some(row) = self.row(u) else { return Vec::new() };
        let mut out: Vec<_> = row
            .bunch
            .iter()
            .filter(|(w, _)| self.level_of(**w) == i)
            .map(|(&w, &d)| (w, d))
            .collect();
        out.sort_by_key(|e| e.0);
        out
    }

    /// Highest level containing `w`.
    pub fn level_of(&self, w: usize) -> usize {
        self.levels
            .sets
            .iter()
            .rposition(|s| s.binary_search(&w).is_ok())
            .unwrap_or(0)
    }

    pub fn try_query(&self, u: usize, v: usize) -> Result<f64> {
        for x in [u, v] {
            if !self.has_row(x) {
                return Err(Error::OutsideDomain(x));
            }
        }
        Ok(self.estimate(u, v))
    }

    /// Panics outside the stored domain.
    pub fn query(&self, u: usize, v: usize) -> f64 {
        self.try_query(u, v).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Minimum over all levels `i` of `h_i(a) + d(b, p_i(a))` for
    /// `(a, b) ∈ {(u, v), (v, u)}` whenever `p_i(a)` is in `b`'s bunch.
    /// This is never larger than either early-exit loop, whose answers are
    /// among these candidates.
    pub fn query_trace(&self, u: usize, v: usize) -> QueryTrace {
        let forward = self.query_direction(u, v);
        let backward = self.query_direction(v, u);
        let scan_u = self.scan_direction(u, v);
        let scan_v = self.scan_direction(v, u);
        let estimate = if u == v { 0.0 } else { scan_u.estimate.min(scan_v.estimate) };
        QueryTrace { estimate, forward, backward, scan_u, scan_v }
    }

    fn estimate(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.scan_direction(u, v).estimate.min(self.scan_direction(v, u).estimate)
    }

    /// All-level lookups of `a`'s pivots in `b`'s bunch.
    pub fn scan_direction(&self, a: usize, b: usize) -> DirectionTrace {
        let mut best = INF;
        let mut exit = None;
        let mut lookups = 0;
        for i in 0..self.levels.count() {
            let (w, h) = self.pivot(a, i);
            if w == NONE {
                continue;
            }
            lookups += 1;
            if let Some(d) = self.bunch_distance(b, w) {
                if h + d < best {
                    best = h + d;
                    exit = Some(i);
                }
            }
        }
        DirectionTrace { estimate: best, lookups, exit }
    }

    /// One pass of the level loop starting with `u`'s pivots, swapping roles
    /// after every miss.
    pub fn query_direction(&self, u: usize, v: usize) -> DirectionTrace {
        let (mut a, mut b) = (u, v);
        let mut lookups = 0;
        for i in 0..self.levels.count() {
            let (w, h) = self.pivot(a, i);
            if w != NONE {
                lookups += 1;
                if let Some(d) = self.bunch_distance(b, w) {
                    return DirectionTrace { estimate: h + d, lookups, exit: Some(i) };
                }
            }
            std::mem::swap(&mut a, &mut b);
        }
        DirectionTrace { estimate: INF, lookups, exit: None }
    }

    pub(crate) fn from_parts(
        mode: Mode,
        k: usize,
        n: usize,
        seed: u64,
        levels: Levels,
        rows: Vec<(usize, Row)>,
    ) -> BunchOracle {
        let mut slot = vec![NONE; n];
        let mut out = Vec::with_capacity(rows.len());
        for (u, row) in rows {
            slot[u] = out.len();
            out.push(row);
        }
        BunchOracle { mode, k, n, seed, levels, rows: out, slot }
    }
}

/// What to build on top of a level structure.
#[derive(Debug, Clone, Copy)]
pub struct BunchSpec<'a> {
    pub mode: Mode,
    pub k: usize,
    pub seed: u64,
    /// Vertices whose tables are retained; `None` keeps all.
    pub stored: Option<&'a [bool]>,
}

/// Computes pivots for every level and bunches by cluster growth: for each
/// `w ∈ A_i \ A_{i+1}`, a Dijkstra from `w` that only settles vertices `x`
/// with `d(x, w) < h_{i+1}(x)`. In the parameterized modes `B_0(u) = {u}`.
pub fn build_bunches(g: &Graph, levels: Levels, spec: BunchSpec<'_>) -> (BunchOracle, BuildStats) {
    let n = g.n();
    let count = levels.count();
    let keep = |u: usize| spec.stored.is_none_or(|s| s[u]);

    let mut h: Vec<Vec<f64>> = Vec::with_capacity(count + 1);
    let mut p: Vec<Vec<usize>> = Vec::with_capacity(count);
    for set in &levels.sets {
        let info = nearest_in_set(g, set).expect("levels are nonempty");
        h.push(info.h);
        p.push(info.p);
    }
    h.push(vec![INF; n]);

    let mut rows: Vec<(usize, Row)> = (0..n)
        .filter(|&u| keep(u))
        .map(|u| {
            let pivots = (0..count).map(|i| (p[i][u], h[i][u])).collect();
            (u, Row { pivots, bunch: HashMap::new() })
        })
        .collect();
    let mut row_of = vec![NONE; n];
    for (idx, (u, _)) in rows.iter().enumerate() {
        row_of[*u] = idx;
    }

    let singleton_base = spec.mode != Mode::Classic;
    let mut stats = BuildStats::default();
    for i in 0..count {
        if i == 0 && singleton_base {
            for (u, row) in rows.iter_mut() {
                row.bunch.insert(*u, 0.0);
            }
            continue;
        }
        let next_members: Vec<bool> = if i + 1 < count {
            let mut m = vec![false; n];
            for &x in &levels.sets[i + 1] {
                m[x] = true;
            }
            m
        } else {
            vec![false; n]
        };
        let sources: Vec<usize> = levels.sets[i].iter().copied().filter(|&w| !next_members[w]).collect();
        let limit = &h[i + 1];
        let clusters: Vec<(Vec<(usize, f64)>, u64)> = sources
            .par_iter()
            .map_init(
                || Scratch::new(n),
                |scratch, &w| grow_cluster(g, w, limit, scratch),
            )
            .collect();
        for (&w, (members, scans)) in sources.iter().zip(clusters) {
            stats.relaxations += scans;
            for (x, d) in members {
                if row_of[x] != NONE {
                    rows[row_of[x]].1.bunch.insert(w, d);
                }
            }
        }
    }

    let oracle = BunchOracle::from_parts(spec.mode, spec.k, n, spec.seed, levels, rows);
    (oracle, stats)
}

struct Scratch {
    dist: Vec<f64>,
    touched: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Scratch {
        Scratch { dist: vec![INF; n], touched: Vec::new() }
    }
}

/// Cluster `C(w) = { x : d(x, w) < limit[x] }` with exact distances.
fn grow_cluster(g: &Graph, w: usize, limit: &[f64], s: &mut Scratch) -> (Vec<(usize, f64)>, u64) {
    let mut members = Vec::new();
    let mut scans = 0u64;
    if !(0.0 < limit[w]) {
        return (members, scans);
    }
    let mut heap = BinaryHeap::new();
    s.dist[w] = 0.0;
    s.touched.push(w);
    heap.push(Reverse((OrderedFloat(0.0), w)));
    while let Some(Reverse((OrderedFloat(d), x))) = heap.pop() {
        if d > s.dist[x] {
            continue;
        }
        s.dist[x] = f64::NEG_INFINITY;
        members.push((x, d));
        for &(y, wt) in g.neighbors(x) {
            scans += 1;
            let nd = d + wt;
            if nd < limit[y] && nd < s.dist[y] {
                if s.dist[y] == INF {
                    s.touched.push(y);
                }
                s.dist[y] = nd;
                heap.push(Reverse((OrderedFloat(nd), y)));
            }
        }
    }
    for &x in &s.touched {
        s.dist[x] = INF;
    }
    s.touched.clear();
    members.sort_by_key(|m| m.0);
    (members, scans)
}
