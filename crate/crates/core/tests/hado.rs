mod common;

use common::{floyd_warshall, gnm, gnm_weighted};
use tzoracle::graph::{nearest_in_set, restricted_graph};
use tzoracle::hado::{ladder_depth, x_closed_form, x_limit, x_sequence, Hado};
use tzoracle::{Graph, INF};

const EPS: f64 = 1e-9;

fn leq(a: f64, b: f64) -> bool {
    a <= b + EPS * b.abs().max(1.0)
}

/// APSP of `G_{S_i}` for every ladder level.
fn restricted_apsp(g: &Graph, h: &Hado) -> Vec<Vec<Vec<f64>>> {
    h.s_sets()
        .iter()
        .map(|s| floyd_warshall(&restricted_graph(g, &nearest_in_set(g, s).unwrap())))
        .collect()
}

fn h_of(d: &[Vec<f64>], set: &[usize]) -> Vec<f64> {
    (0..d.len()).map(|u| set.iter().map(|&s| d[u][s]).fold(INF, f64::min)).collect()
}

fn check_instance(g: &Graph, k: usize, x0: f64, seed: u64) -> (usize, usize) {
    let h = Hado::build(g, k, x0, seed).unwrap();
    let n = g.n();
    let d = floyd_warshall(g);
    let dr = restricted_apsp(g, &h);
    let hs: Vec<Vec<f64>> = h.s_sets().iter().map(|s| h_of(&d, s)).collect();
    let t = h.params().t;
    let bound = (2 * k - 1) as f64;
    let mut covered = 0;
    let mut pairs = 0;
    for u in 0..n {
        assert_eq!(h.nearest_t().h[u], hs[t][u]);
        for v in 0..n {
            if u == v || d[u][v] == INF {
                continue;
            }
            pairs += 1;
            let duv = d[u][v];
            let comps = h.component_estimates(u, v);
            let est = h.query(u, v);
            assert!(comps.iter().all(|&c| c >= duv - EPS), "unsound component at ({u}, {v})");
            if dr[t][u][v] != duv {
                continue;
            }
            covered += 1;
            assert!(leq(est, bound * duv), "k={k} seed={seed} ({u}, {v}): {est} vs d {duv}");

            let j = (0..=t).find(|&i| dr[i][u][v] == duv).unwrap();
            if j == 0 {
                assert!(leq(comps[0], bound * duv));
            } else {
                assert!(leq(hs[j - 1][u].max(hs[j - 1][v]), duv));
                assert!(leq(comps[j], bound * duv));
            }
            for i in 0..=t {
                let far = leq(hs[i][u].max(hs[i][v]), duv);
                let earlier = comps[..=i].iter().any(|&c| leq(c, bound * duv));
                assert!(far || earlier, "cascade at level {i} for ({u}, {v})");
            }
        }
    }
    (covered, pairs)
}

#[test]
fn conditional_stretch_and_cascade() {
    for k in [3, 4] {
        for seed in 0..2 {
            let (covered, pairs) = check_instance(&gnm(300, 1500, seed), k, 0.5, seed);
            assert!(covered > pairs / 10, "k={k}: {covered}/{pairs}");
            check_instance(&gnm_weighted(300, 1500, seed + 10), k, 0.5, seed);
        }
    }
    check_instance(&gnm_weighted(200, 1600, 3), 5, 0.3, 3);
    check_instance(&gnm(200, 1000, 4), 3, 1.0 / 3.0, 4);
}

#[test]
fn ladder_sizes() {
    let n = 1000;
    let g = gnm(n, 8000, 21);
    for seed in 0..5 {
        let h = Hado::build(&g, 4, 0.55, seed).unwrap();
        let p = h.params();
        assert_eq!(p.t, ladder_depth(n));
        for (i, s) in h.s_sets().iter().enumerate() {
            let target = (n as f64).powf(1.0 - p.xs[i]);
            let len = s.len() as f64;
            assert!(len >= target / 2.0 && len <= target * 2.0, "|S_{i}| = {len} vs {target}");
        }
        assert!(h.s_sets().windows(2).all(|w| w[1].iter().all(|x| w[0].binary_search(x).is_ok())));
        let len0 = h.s_sets()[0].len();
        assert!((11..=44).contains(&len0), "{len0}");
        let len1 = h.s_sets()[1].len();
        assert!((5..=22).contains(&len1), "{len1}");

        let s_t_bound = 4.0 * (n as f64).powf(1.0 - x_limit(4, 0.55));
        assert!((h.s_t().len() as f64) <= s_t_bound);

        let g0 = restricted_graph(&g, &nearest_in_set(&g, &h.s_sets()[0]).unwrap());
        assert!((g0.m() as f64) <= 10.0 * (n as f64).powf(1.55));

        let space = 8.0 * 4.0 * (n as f64).powf(1.25) * (p.t + 1) as f64;
        assert!((h.entries() as f64) <= space);
    }
}

#[test]
fn restricted_ladder_edges_on_heavy_tailed_weights() {
    let n = 2000;
    let g = tzoracle::audit::gen_graph(
        tzoracle::audit::Model::Gnm,
        n,
        40 * n,
        tzoracle::audit::WeightDist::Uniform(1_000_000),
        5,
    )
    .unwrap();
    let h = Hado::build(&g, 3, 0.6, 5).unwrap();
    for (i, s) in h.s_sets().iter().enumerate() {
        let gi = restricted_graph(&g, &nearest_in_set(&g, s).unwrap());
        let p = s.len() as f64 / n as f64;
        assert!((gi.m() as f64) <= 10.0 * n as f64 / p, "level {i}: {}", gi.m());
    }
}

#[test]
fn deterministic_by_seed() {
    let g = gnm_weighted(300, 1500, 2);
    let a = Hado::build(&g, 4, 0.5, 17).unwrap();
    let b = Hado::build(&g, 4, 0.5, 17).unwrap();
    assert_eq!(a, b);
    let c = Hado::build(&g, 4, 0.5, 18).unwrap();
    assert_ne!(a.s_sets(), c.s_sets());
}

#[test]
fn x_series_properties() {
    for k in 3..=20 {
        for x0 in [1.0 / k as f64, 0.4, 0.5, 0.75, 0.9] {
            if x0 < 1.0 / k as f64 {
                continue;
            }
            let xs = x_sequence(k, x0, 12).unwrap();
            for (j, &x) in xs.iter().enumerate() {
                assert!((x - x_closed_form(k, x0, j)).abs() < 1e-12, "k={k} x0={x0} j={j}");
            }
            assert!(xs.windows(2).all(|w| w[1] >= w[0] - 1e-15));
            for n in [100usize, 1000, 100_000, 10_000_000] {
                let t = ladder_depth(n);
                let gap = x_limit(k, x0) - xs[t.min(12)];
                assert!(gap >= -1e-12 && gap <= 1.0 / (n as f64).log2(), "k={k} x0={x0} n={n} gap {gap}");
            }
        }
    }
}

#[test]
fn self_queries_and_disconnected() {
    let g = Graph::from_edges(40, (0..19).map(|i| (i, i + 1, 1.0)).chain((20..39).map(|i| (i, i + 1, 2.0)))).unwrap();
    let h = Hado::build(&g, 3, 0.5, 1).unwrap();
    assert!((0..40).all(|u| h.query(u, u) == 0.0));
    assert_eq!(h.query(0, 30), INF);
}
