#![allow(dead_code)]

use tzoracle::audit::{gen_graph, Model, WeightDist};
use tzoracle::{Graph, INF};

/// Edge-list relaxation until a fixpoint.
pub fn bellman_ford(g: &Graph, s: usize) -> Vec<f64> {
    let mut d = vec![INF; g.n()];
    d[s] = 0.0;
    for _ in 0..g.n() {
        let mut changed = false;
        for &(u, v, w) in g.edges() {
            if d[u] + w < d[v] {
                d[v] = d[u] + w;
                changed = true;
            }
            if d[v] + w < d[u] {
                d[u] = d[v] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    d
}

pub fn floyd_warshall(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut d = vec![vec![INF; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0.0;
    }
    for &(u, v, w) in g.edges() {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub fn gnm(n: usize, m: usize, seed: u64) -> Graph {
    gen_graph(Model::Gnm, n, m, WeightDist::Unit, seed).unwrap()
}

pub fn gnm_weighted(n: usize, m: usize, seed: u64) -> Graph {
    gen_graph(Model::Gnm, n, m, WeightDist::Uniform(100), seed).unwrap()
}

pub fn gnm_exp(n: usize, m: usize, seed: u64) -> Graph {
    gen_graph(Model::Gnm, n, m, WeightDist::Exp(1.0), seed).unwrap()
}

/// Floyd–Warshall on the spanner compared to exact distances of the input.
pub fn all_pairs(g: &Graph) -> Vec<Vec<f64>> {
    floyd_warshall(g)
}
