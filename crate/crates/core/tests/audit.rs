mod common;

use common::{floyd_warshall, gnm, gnm_weighted};
use tzoracle::audit::{
    audit_stretch, bench_build, exact_apsp, gen_graph, measure_space, AuditMode, BenchTarget, Model, WeightDist,
};
use tzoracle::bunch::BunchOracle;
use tzoracle::constructions::{Algo, CompositeOracle};
use tzoracle::hado::Hado;
use tzoracle::param::RestrictedParamOracle;
use tzoracle::serialize::OracleFile;
use tzoracle::Graph;

#[test]
fn apsp_matches_floyd_warshall() {
    let models = [Model::Gnm, Model::Grid, Model::Path, Model::Star, Model::Cycle, Model::Clustered];
    for (i, model) in models.into_iter().enumerate() {
        for weights in [WeightDist::Unit, WeightDist::Uniform(50), WeightDist::Exp(3.0)] {
            let g = gen_graph(model, 100, 300, weights, i as u64).unwrap();
            let (a, b) = (exact_apsp(&g, 2000).unwrap(), floyd_warshall(&g));
            for (ra, rb) in a.iter().zip(&b) {
                for (x, y) in ra.iter().zip(rb) {
                    assert!((x - y).abs() <= 1e-9 * y.max(1.0), "{model:?} {weights:?}: {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn generators_are_connected_and_deterministic() {
    for model in [Model::Gnm, Model::Clustered] {
        let a = gen_graph(model, 300, 900, WeightDist::Uniform(10), 5).unwrap();
        let b = gen_graph(model, 300, 900, WeightDist::Uniform(10), 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.m(), 900);
        assert!(exact_apsp(&a, 2000).unwrap()[0].iter().all(|d| d.is_finite()));
    }
}

#[test]
fn documented_audits_pass() {
    let g = gnm(200, 800, 1);
    let o = OracleFile::Bunch(BunchOracle::build_classic(&g, 2, 1).unwrap());
    let r = audit_stretch(&g, &o, AuditMode::Exhaustive, 0.0).unwrap();
    assert!(r.passed());
    assert_eq!(r.pairs, 200 * 199 / 2);
    assert!(r.max_mult_slack <= 3.0);
    assert_eq!(r.coverage_hado, None);

    let g = gnm_weighted(300, 4000, 2);
    let o = OracleFile::Composite(CompositeOracle::build(&g, Algo::WSpannerTable, 4, 2).unwrap());
    let r = audit_stretch(&g, &o, AuditMode::Exhaustive, 0.0).unwrap();
    assert!(r.passed() && r.max_mult_slack <= 7.0 && r.uncovered == 0);
    assert!((r.coverage().unwrap() - 1.0).abs() < 1e-12);

    let g = gnm(400, 3000, 3);
    let o = OracleFile::Composite(CompositeOracle::build(&g, Algo::UAdd2, 3, 3).unwrap());
    let r = audit_stretch(&g, &o, AuditMode::Exhaustive, 0.0).unwrap();
    assert!(r.passed() && r.max_mult_slack <= 5.0 && r.uncovered == 0);
    assert_eq!(r.beta, Some(2.0));
}

#[test]
fn sampled_mode_and_hado_cases() {
    let g = gnm_weighted(500, 3000, 4);
    let o = OracleFile::Hado(Hado::build(&g, 3, 0.5, 4).unwrap());
    let r = audit_stretch(&g, &o, AuditMode::Sampled { count: 5000, seed: 9 }, 0.0).unwrap();
    assert!(r.pairs <= 5000);
    assert!(r.passed());
    assert_eq!(r.uncovered, 0);
    assert!((r.coverage().unwrap() - 1.0).abs() < 1e-12);
    let again = audit_stretch(&g, &o, AuditMode::Sampled { count: 5000, seed: 9 }, 0.0).unwrap();
    assert_eq!(again.pairs, r.pairs);
    assert_eq!(again.max_mult_slack, r.max_mult_slack);
}

#[test]
fn violations_are_reported() {
    let path = Graph::from_edges(6, (0..5).map(|i| (i, i + 1, 10.0))).unwrap();
    let clique = Graph::from_edges(6, (0..6).flat_map(|a| (a + 1..6).map(move |b| (a, b, 1.0)))).unwrap();
    let o = OracleFile::Bunch(BunchOracle::build_classic(&path, 2, 0).unwrap());
    let r = audit_stretch(&clique, &o, AuditMode::Exhaustive, 0.0).unwrap();
    assert!(!r.passed());
    assert!(r.violations.iter().all(|v| v.estimate > 3.0 * v.d));
    assert!(audit_stretch(&gnm(7, 10, 0), &o, AuditMode::Exhaustive, 0.0).is_err());
}

#[test]
fn space_accounting() {
    let g = gnm(150, 500, 5);
    let s = measure_space(&OracleFile::Bunch(BunchOracle::build_classic(&g, 1, 0).unwrap()));
    assert_eq!(s.total, 150 * 150);

    for seed in 0..5 {
        let g = gnm(10_000, 40_000, seed);
        let s = measure_space(&OracleFile::Bunch(BunchOracle::build_classic(&g, 2, seed).unwrap()));
        assert!((s.total as f64) <= 8.0 * 10_000f64.powf(1.5));
    }

    let g = gnm(2000, 8000, 6);
    let set: Vec<usize> = (0..2000).step_by(20).collect();
    let r = RestrictedParamOracle::build(&g, 2, &set, 6).unwrap();
    assert!((r.entries() as f64) <= 8.0 * 100f64.powf(1.5));

    let c = OracleFile::Composite(CompositeOracle::build(&gnm_weighted(300, 2000, 1), Algo::WSubquadratic, 3, 1).unwrap());
    let s = measure_space(&c);
    assert_eq!(s.total, c.entries());
    assert_eq!(s.components.first().unwrap().0, "base");
    assert_eq!(s.components.last().unwrap().0, "far-param");
}

#[test]
fn bench_phases_account_for_total() {
    let g = gnm_weighted(3000, 30_000, 7);
    let b = bench_build(&g, BenchTarget::Composite { algo: Algo::WSpannerTable, k: 4 }, 7, 1).unwrap();
    let sum: f64 = b.phases.iter().map(|p| p.median_ms).sum();
    assert!((sum - b.total.median_ms).abs() <= 0.05 * b.total.median_ms, "{sum} vs {}", b.total.median_ms);
    assert!(bench_build(&g, BenchTarget::Classic { k: 2 }, 7, 0).is_err());
    let c = bench_build(&g, BenchTarget::Classic { k: 2 }, 7, 3).unwrap();
    assert_eq!(c.reps, 3);
}
