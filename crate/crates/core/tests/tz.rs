mod common;

use common::{floyd_warshall, gnm, gnm_weighted};
use tzoracle::audit::{gen_graph, Model, WeightDist};
use tzoracle::bunch::{build_bunches, build_levels, BunchOracle, BunchSpec, Levels, Mode};
use tzoracle::graph::dijkstra;
use tzoracle::{seeded_rng, Graph, INF};

const EPS: f64 = 1e-9;

fn leq(a: f64, b: f64) -> bool {
    a <= b + EPS * b.abs().max(1.0)
}

/// `h_i(u)` for every level, recomputed from an APSP matrix; `h_k = ∞`.
fn level_heights(o: &BunchOracle, d: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = d.len();
    let mut out: Vec<Vec<f64>> = o
        .levels()
        .sets
        .iter()
        .map(|set| (0..n).map(|u| set.iter().map(|&w| d[u][w]).fold(INF, f64::min)).collect())
        .collect();
    out.push(vec![INF; n]);
    out
}

#[test]
fn stored_distances_are_exact() {
    let g = gnm(300, 1500, 11);
    let o = BunchOracle::build_classic(&g, 3, 5).unwrap();
    for u in 0..g.n() {
        let dm = dijkstra(&g, u);
        for (&w, &dw) in &o.row(u).unwrap().bunch {
            assert_eq!(dw, dm.dist[w], "bunch entry ({u}, {w})");
        }
        for i in 0..o.levels().count() {
            let (p, h) = o.pivot(u, i);
            assert_eq!(h, dm.dist[p]);
        }
    }
}

#[test]
fn bunches_match_definition() {
    let g = gnm_weighted(150, 600, 2);
    let d = floyd_warshall(&g);
    for k in 1..=4 {
        let o = BunchOracle::build_classic(&g, k, 40 + k as u64).unwrap();
        let h = level_heights(&o, &d);
        let top = o.levels().top();
        for u in 0..g.n() {
            for (i, row) in h.iter().enumerate().take(top + 1) {
                assert_eq!(o.pivot(u, i).1, row[u]);
            }
            for i in 0..top {
                assert!(h[i][u] <= h[i + 1][u]);
            }
            for i in 0..=top {
                let expected: Vec<usize> = o.levels().sets[i]
                    .iter()
                    .copied()
                    .filter(|&w| o.level_of(w) == i && d[u][w] < h[i + 1][u])
                    .collect();
                let got: Vec<usize> = o.bunch_level(u, i).into_iter().map(|e| e.0).collect();
                assert_eq!(got, expected, "k={k} u={u} level {i}");
            }
        }
    }
}

#[test]
fn stretch_exhaustive() {
    let graphs = [gnm(300, 1200, 1), gnm_weighted(300, 1500, 2), gen_graph(Model::Grid, 289, 0, WeightDist::Unit, 0).unwrap()];
    for g in &graphs {
        let d = floyd_warshall(g);
        for k in 1..=4 {
            let o = BunchOracle::build_classic(g, k, k as u64).unwrap();
            let mut worst: f64 = 1.0;
            for u in 0..g.n() {
                for v in 0..g.n() {
                    let est = o.query(u, v);
                    assert!(est >= d[u][v] - EPS, "underestimate at ({u}, {v})");
                    assert!(leq(est, (2 * k - 1) as f64 * d[u][v]), "k={k} ({u}, {v}) est {est} d {}", d[u][v]);
                    if d[u][v] > 0.0 {
                        worst = worst.max(est / d[u][v]);
                    }
                }
            }
            assert!(worst <= (2 * k - 1) as f64 + EPS);
        }
    }
}

#[test]
fn g200_k2_stretch_at_most_three() {
    let g = gnm(200, 800, 9);
    let d = floyd_warshall(&g);
    let o = BunchOracle::build_classic(&g, 2, 9).unwrap();
    let worst = (0..200)
        .flat_map(|u| (0..200).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v)
        .map(|(u, v)| o.query(u, v) / d[u][v])
        .fold(1.0, f64::max);
    assert!(worst <= 3.0, "{worst}");
}

#[test]
fn top_level_lemma_and_disjunction() {
    for (idx, g) in [gnm(120, 400, 3), gnm_weighted(120, 500, 4)].iter().enumerate() {
        let d = floyd_warshall(g);
        for k in 1..=4 {
            for seed in 0..3 {
                let o = BunchOracle::build_classic(g, k, seed * 10 + idx as u64).unwrap();
                let h = level_heights(&o, &d);
                let top = o.levels().top();
                for u in 0..g.n() {
                    for v in 0..g.n() {
                        let est = o.query(u, v);
                        let duv = d[u][v];
                        let hmin = |i: usize| h[i][u].min(h[i][v]);
                        assert!(leq(est, 2.0 * hmin(top) + duv), "k={k} ({u}, {v}) est {est} d {duv}");
                        for i in 1..=top + 1 {
                            let first = leq(hmin(i), hmin(i - 1) + duv);
                            let second = leq(est, 2.0 * hmin(i - 1) + duv);
                            assert!(first || second, "k={k} ({u}, {v}) level {i}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn lookups_bounded_by_level_count() {
    let g = gnm_weighted(250, 1000, 5);
    for k in 1..=5 {
        let o = BunchOracle::build_classic(&g, k, 77).unwrap();
        for u in 0..g.n() {
            for v in (0..g.n()).step_by(7) {
                let t = o.query_trace(u, v);
                assert!(t.forward.lookups <= k && t.backward.lookups <= k);
                assert!(t.scan_u.lookups <= k && t.scan_v.lookups <= k);
                assert!(t.forward.exit.is_some() && t.backward.exit.is_some());
                assert!(t.estimate <= t.forward.estimate.min(t.backward.estimate));
            }
        }
    }
}

#[test]
fn space_within_constant() {
    for k in 2..=3 {
        for seed in 0..3 {
            let g = gnm(2000, 10_000, seed);
            let o = BunchOracle::build_classic(&g, k, seed).unwrap();
            let bound = 8.0 * k as f64 * 2000f64.powf(1.0 + 1.0 / k as f64);
            assert!((o.bunch_entries() as f64) <= bound);
        }
    }
}

#[test]
fn self_queries_and_two_vertices() {
    let g = gnm(50, 120, 1);
    let o = BunchOracle::build_classic(&g, 3, 1).unwrap();
    assert!((0..50).all(|u| o.query(u, u) == 0.0));

    for k in 1..=4 {
        let k2 = Graph::from_edges(2, [(0, 1, 2.5)]).unwrap();
        for seed in 0..10 {
            let o = BunchOracle::build_classic(&k2, k, seed).unwrap();
            assert_eq!(o.query(0, 1), 2.5);
            assert_eq!(o.query(1, 0), 2.5);
        }
    }
}

#[test]
fn disconnected_pairs_are_infinite() {
    let g = Graph::from_edges(6, [(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0)]).unwrap();
    for k in 1..=3 {
        let o = BunchOracle::build_classic(&g, k, 4).unwrap();
        assert_eq!(o.query(0, 4), INF);
        assert!(o.query(0, 2).is_finite());
    }
}

#[test]
fn star_bunches() {
    let g = Graph::from_edges(11, (1..=10).map(|l| (0, l, 1.0))).unwrap();
    let levels = Levels::new(vec![(0..11).collect(), vec![0]]).unwrap();
    let (o, _) = build_bunches(&g, levels, BunchSpec { mode: Mode::Classic, k: 2, seed: 0, stored: None });
    for leaf in 1..=10 {
        assert_eq!(o.bunch_level(leaf, 0), vec![(leaf, 0.0)]);
        assert_eq!(o.bunch_level(leaf, 1), vec![(0, 1.0)]);
        assert_eq!(o.pivot(leaf, 1), (0, 1.0));
    }
    assert_eq!(o.bunch_level(0, 0), vec![]);
}

#[test]
fn level_sampling_sizes() {
    let levels = build_levels(10_000, 2, &mut seeded_rng(8)).unwrap();
    assert!((50..=200).contains(&levels.sets[1].len()));
    let levels = build_levels(10_000, 4, &mut seeded_rng(8)).unwrap();
    for (i, target) in [10_000.0, 1000.0, 100.0, 10.0].iter().enumerate() {
        let len = levels.sets[i].len() as f64;
        assert!(len >= target / 2.0 && len <= target * 2.0);
    }
}
