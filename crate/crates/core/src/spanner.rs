//! Clustering spanners: the weighted `(2k-1)`-spanner, an unweighted
//! `(k, k-1)`-spanner, and pivot-edge augmentation.

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, NearestInfo, NONE};
use crate::seeded_rng;

/// Retries allowed when a spanner exceeds `SIZE_FACTOR` times its budget.
pub const SIZE_RETRIES: usize = 8;
pub const SIZE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SpannerResult {
    pub h: Graph,
    pub k_spanner: usize,
    /// Additive error: `0` for the multiplicative spanner, `k - 1` otherwise.
    pub additive: usize,
    /// `n^{1 + 1/k}`.
    pub edge_budget: f64,
    pub attempts: usize,
    /// Edges above `SIZE_FACTOR * edge_budget` when every attempt overflowed.
    pub overage: Option<usize>,
}

impl SpannerResult {
    /// Distance bound promised for a pair at distance `d`.
    pub fn bound(&self, d: f64) -> f64 {
        if self.additive == 0 {
            (2 * self.k_spanner - 1) as f64 * d
        } else {
            self.k_spanner as f64 * d + self.additive as f64
        }
    }

    pub fn to_text(&self) -> String {
        self.h.to_text(&[format!("spanner k={} additive={}", self.k_spanner, self.additive)])
    }
}

type Once = fn(&Graph, usize, &mut dyn RngCore) -> Vec<(usize, usize, f64)>;

fn with_retries(g: &Graph, k: usize, additive: usize, seed: u64, once: Once) -> SpannerResult {
    let n = g.n();
    let edge_budget = (n as f64).powf(1.0 + 1.0 / k as f64);
    let cap = SIZE_FACTOR * edge_budget;
    let mut master = seeded_rng(seed);
    let mut best: Option<Graph> = None;
    let mut attempts = 0;
    while attempts <= SIZE_RETRIES {
        attempts += 1;
        let mut rng = seeded_rng(master.next_u64());
        let h = Graph::from_edges(n, once(g, k, &mut rng)).expect("spanner edges come from the input");
        let fits = h.m() as f64 <= cap;
        if best.as_ref().is_none_or(|b| h.m() < b.m()) {
            best = Some(h);
        }
        if fits {
            break;
        }
    }
    let h = best.unwrap();
    let overage = (h.m() as f64 > cap).then(|| h.m() - cap.floor() as usize);
    SpannerResult { h, k_spanner: k, additive, edge_budget, attempts, overage }
}

/// Weighted `(2k-1)`-spanner by cluster sampling at rate `n^{-1/k}` over
/// `k - 1` rounds followed by a joining round. Ties between edges break by
/// weight, then by the smaller endpoint id.
pub fn baswana_sen_spanner(g: &Graph, k: usize, seed: u64) -> Result<SpannerResult> {
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(with_retries(g, k, 0, seed, baswana_sen_once))
}

fn baswana_sen_once(g: &Graph, k: usize, rng: &mut dyn RngCore) -> Vec<(usize, usize, f64)> {
    let n = g.n();
    if k == 1 {
        return g.edges().to_vec();
    }
    let p = (n as f64).powf(-1.0 / k as f64);
    let edges = g.edges();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, &(u, v, _)) in edges.iter().enumerate() {
        incident[u].push(idx);
        incident[v].push(idx);
    }
    let other = |idx: usize, x: usize| if edges[idx].0 == x { edges[idx].1 } else { edges[idx].0 };
    let mut alive = vec![true; edges.len()];
    let mut chosen = vec![false; edges.len()];
    let mut cluster: Vec<usize> = (0..n).collect();

    // best alive edge from `v` into each adjacent cluster, keyed by (weight, neighbor)
    let best_per_cluster = |v: usize, cluster: &[usize], alive: &[bool]| {
        let mut cand: Vec<(usize, f64, usize, usize)> = incident[v]
            .iter()
            .filter(|&&e| alive[e])
            .map(|&e| {
                let y = other(e, v);
                (cluster[y], edges[e].2, y, e)
            })
            .filter(|c| c.0 != NONE)
            .collect();
        cand.sort_by(|a, b| (a.0, a.1, a.2).partial_cmp(&(b.0, b.1, b.2)).unwrap());
        cand.dedup_by_key(|c| c.0);
        cand
    };

    for _ in 1..k {
        let mut centers: Vec<usize> = cluster.iter().copied().filter(|&c| c != NONE).collect();
        centers.sort_unstable();
        centers.dedup();
        let mut sampled = vec![false; n];
        for &c in &centers {
            sampled[c] = rng.random::<f64>() < p;
        }
        let mut next = vec![NONE; n];
        for v in 0..n {
            let c = cluster[v];
            if c == NONE {
                continue;
            }
            if sampled[c] {
                next[v] = c;
                continue;
            }
            let best = best_per_cluster(v, &cluster, &alive);
            let join = best
                .iter()
                .filter(|b| sampled[b.0])
                .min_by(|a, b| (a.1, a.2).partial_cmp(&(b.1, b.2)).unwrap())
                .copied();
            match join {
                None => {
                    for b in &best {
                        chosen[b.3] = true;
                    }
                    for &e in &incident[v] {
                        alive[e] = false;
                    }
                }
                Some((jc, jw, jy, je)) => {
                    chosen[je] = true;
                    next[v] = jc;
                    let drop: Vec<usize> = best
                        .iter()
                        .filter(|b| b.0 == jc || (b.1, b.2) < (jw, jy))
                        .map(|b| {
                            if b.0 != jc {
                                chosen[b.3] = true;
                            }
                            b.0
                        })
                        .collect();
                    for &e in &incident[v] {
                        if alive[e] && drop.contains(&cluster[other(e, v)]) {
                            alive[e] = false;
                        }
                    }
                }
            }
        }
        cluster = next;
        for (idx, &(u, v, _)) in edges.iter().enumerate() {
            if alive[idx] && (cluster[u] == NONE || cluster[u] == cluster[v]) {
                alive[idx] = false;
            }
        }
    }
    for v in 0..n {
        for b in best_per_cluster(v, &cluster, &alive) {
            chosen[b.3] = true;
        }
    }
    edges.iter().zip(&chosen).filter(|(_, &c)| c).map(|(&e, _)| e).collect()
}

/// Unweighted `(k, k-1)`-spanner: `k - 1` rounds of cluster sampling at rate
/// `n^{-1/k}`. A vertex adjacent to a sampled cluster joins it through one
/// edge; otherwise it keeps one edge into every adjacent cluster and leaves
/// the clustering. Survivors of the last round keep one edge into every
/// other adjacent cluster.
pub fn bkmp_spanner_unweighted(g: &Graph, k: usize, seed: u64) -> Result<SpannerResult> {
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    if !g.is_unweighted() {
        return Err(Error::Weighted);
    }
    Ok(with_retries(g, k, k - 1, seed, additive_once))
}

fn additive_once(g: &Graph, k: usize, rng: &mut dyn RngCore) -> Vec<(usize, usize, f64)> {
    let n = g.n();
    if k == 1 {
        return g.edges().to_vec();
    }
    let p = (n as f64).powf(-1.0 / k as f64);
    let mut out = Vec::new();
    let mut cluster: Vec<usize> = (0..n).collect();

    // first neighbor (by id) in each adjacent cluster
    let adjacent = |v: usize, cluster: &[usize]| {
        let mut seen: Vec<(usize, usize)> =
            g.neighbors(v).iter().map(|&(y, _)| (cluster[y], y)).filter(|c| c.0 != NONE).collect();
        seen.sort_unstable();
        seen.dedup_by_key(|c| c.0);
        seen
    };

    for _ in 1..k {
        let mut centers: Vec<usize> = cluster.iter().copied().filter(|&c| c != NONE).collect();
        centers.sort_unstable();
        centers.dedup();
        let mut sampled = vec![false; n];
        for &c in &centers {
            sampled[c] = rng.random::<f64>() < p;
        }
        let mut next = vec![NONE; n];
        for v in 0..n {
            let c = cluster[v];
            if c == NONE {
                continue;
            }
            if sampled[c] {
                next[v] = c;
                continue;
            }
            let near = adjacent(v, &cluster);
            match near.iter().filter(|a| sampled[a.0]).min_by_key(|a| a.1) {
                Some(&(jc, y)) => {
                    out.push((v, y, 1.0));
                    next[v] = jc;
                }
                None => out.extend(near.iter().map(|&(_, y)| (v, y, 1.0))),
            }
        }
        cluster = next;
    }
    for v in 0..n {
        if cluster[v] == NONE {
            continue;
        }
        for (c, y) in adjacent(v, &cluster) {
            if c != cluster[v] {
                out.push((v, y, 1.0));
            }
        }
    }
    out
}

/// Adds `(u, p(u))` with weight `h(u)` for every vertex with a reachable pivot
/// other than itself.
pub fn augment_with_pivots(sp: &SpannerResult, nearest: &NearestInfo) -> SpannerResult {
    let extra = (0..nearest.n())
        .filter(|&u| nearest.p[u] != NONE && nearest.p[u] != u)
        .map(|u| (u, nearest.p[u], nearest.h[u]));
    SpannerResult { h: sp.h.with_extra_edges(extra), ..sp.clone() }
}
