//! Ground truth for the oracles: seeded graph generators, exact all-pairs
//! distances, stretch and case audits, space accounting and build timing.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::bunch::BunchOracle;
use crate::constructions::{Algo, CompositeOracle, Far};
use crate::error::{invalid, Error, Result};
use crate::graph::{distances_from, restricted_graph, Graph, NearestInfo};
use crate::seeded_rng;
use crate::serialize::OracleFile;

pub const DEFAULT_APSP_CAP: usize = 2000;
/// Relative tolerance for comparisons between sums of real weights.
pub const REL_TOL: f64 = 1e-9;

pub fn leq(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * b.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Gnm,
    Grid,
    Path,
    Star,
    Cycle,
    Clustered,
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Model> {
        Ok(match s {
            "gnm" => Model::Gnm,
            "grid" => Model::Grid,
            "path" => Model::Path,
            "star" => Model::Star,
            "cycle" => Model::Cycle,
            "clustered" => Model::Clustered,
            _ => return Err(invalid(format!("unknown model {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDist {
    Unit,
    /// Integers drawn uniformly from `1..=W`.
    Uniform(u64),
    /// Exponential with the given mean.
    Exp(f64),
}

impl FromStr for WeightDist {
    type Err = Error;

    /// `unit`, `uniform[:W]` (default 100) or `exp[:MEAN]` (default 1).
    fn from_str(s: &str) -> Result<WeightDist> {
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        let bad = || invalid(format!("bad weight distribution {s:?}"));
        match name {
            "unit" if arg.is_none() => Ok(WeightDist::Unit),
            "uniform" => {
                let w = arg.map_or(Ok(100), |a| a.parse::<u64>()).map_err(|_| bad())?;
                if w < 1 {
                    return Err(bad());
                }
                Ok(WeightDist::Uniform(w))
            }
            "exp" => {
                let mean = arg.map_or(Ok(1.0), |a| a.parse::<f64>()).map_err(|_| bad())?;
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(bad());
                }
                Ok(WeightDist::Exp(mean))
            }
            _ => Err(bad()),
        }
    }
}

/// Seeded generator. `m` is the edge target for `gnm` and `clustered` and is
/// ignored by the structured models. Random models start from a random
/// spanning tree, so every output is connected.
pub fn gen_graph(model: Model, n: usize, m: usize, weights: WeightDist, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let pairs: Vec<(usize, usize)> = match model {
        Model::Path => (1..n).map(|i| (i - 1, i)).collect(),
        Model::Star => (1..n).map(|i| (0, i)).collect(),
        Model::Cycle => {
            if n < 3 {
                return Err(invalid("cycle needs n >= 3"));
            }
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        }
        Model::Grid => {
            let side = (n as f64).sqrt().ceil() as usize;
            let mut out = Vec::new();
            for v in 0..n {
                if (v + 1) % side != 0 && v + 1 < n {
                    out.push((v, v + 1));
                }
                if v + side < n {
                    out.push((v, v + side));
                }
            }
            out
        }
        Model::Gnm | Model::Clustered => {
            let max = n * (n - 1) / 2;
            if m + 1 < n || m > max {
                return Err(invalid(format!("m = {m} infeasible for n = {n} (need {} <= m <= {max})", n - 1)));
            }
            random_edges(model, n, m, &mut rng)
        }
    };
    let exp = match weights {
        WeightDist::Exp(mean) => Some(Exp::new(1.0 / mean).map_err(|e| invalid(e.to_string()))?),
        _ => None,
    };
    let edges: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .map(|(u, v)| {
            let w = match weights {
                WeightDist::Unit => 1.0,
                WeightDist::Uniform(top) => rng.random_range(1..=top) as f64,
                WeightDist::Exp(_) => exp.unwrap().sample(&mut rng),
            };
            (u, v, w)
        })
        .collect();
    Graph::from_edges(n, edges)
}

fn random_edges<R: Rng>(model: Model, n: usize, m: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut seen = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    for i in 1..n {
        let e = key(order[i], order[rng.random_range(0..i)]);
        seen.insert(e);
        out.push(e);
    }
    if 2 * m > n * (n - 1) / 2 {
        let mut rest: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|e| !seen.contains(e)).collect();
        rest.shuffle(rng);
        out.extend(rest.into_iter().take(m - out.len()));
        return out;
    }
    let clusters = ((n as f64).sqrt().round() as usize).max(1);
    let mut attempts = 0usize;
    while out.len() < m {
        attempts += 1;
        let u = rng.random_range(0..n);
        let v = if model == Model::Clustered && attempts < 50 * m && rng.random::<f64>() < 0.9 {
            let members = (n - 1 - u % clusters) / clusters + 1;
            u % clusters + clusters * rng.random_range(0..members)
        } else {
            rng.random_range(0..n)
        };
        if u != v && seen.insert(key(u, v)) {
            out.push(key(u, v));
        }
    }
    out
}

/// All-pairs distances by one single-source search per vertex.
pub fn exact_apsp(g: &Graph, cap: usize) -> Result<Vec<Vec<f64>>> {
    if g.n() > cap {
        return Err(Error::CapExceeded { n: g.n(), cap });
    }
    Ok((0..g.n()).into_par_iter().map(|s| distances_from(g, s)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuditMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub u: usize,
    pub v: usize,
    pub d: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub pairs: usize,
    pub violations: Vec<Violation>,
    pub max_mult_slack: f64,
    pub max_add_slack: f64,
    pub coverage_hado: Option<f64>,
    pub coverage_far: Option<f64>,
    pub entries: usize,
    pub ms_build: f64,
    pub ms_query_per_1k: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub finite_pairs: usize,
    /// Finite pairs whose case inequality chain failed.
    pub uncovered: usize,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn coverage(&self) -> Option<f64> {
        Some(self.coverage_hado? + self.coverage_far?)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        writeln!(f, "pairs {}", self.pairs)?;
        writeln!(f, "finite_pairs {}", self.finite_pairs)?;
        writeln!(f, "guarantee alpha={} beta={}", opt(self.alpha), opt(self.beta))?;
        writeln!(f, "violations {}", self.violations.len())?;
        writeln!(f, "max_mult_slack {:.6}", self.max_mult_slack)?;
        writeln!(f, "max_add_slack {:.6}", self.max_add_slack)?;
        writeln!(f, "coverage_hado {}", opt(self.coverage_hado))?;
        writeln!(f, "coverage_far {}", opt(self.coverage_far))?;
        writeln!(f, "uncovered {}", self.uncovered)?;
        writeln!(f, "entries {}", self.entries)?;
        writeln!(f, "ms_build {:.3}", self.ms_build)?;
        write!(f, "ms_query_per_1k {:.3}", self.ms_query_per_1k)
    }
}

enum Case {
    Hado,
    Far,
    Uncovered,
}

struct CaseContext<'a> {
    gst: Graph,
    nearest: &'a NearestInfo,
    k: usize,
    composite: Option<&'a CompositeOracle>,
    unweighted: bool,
}

impl CaseContext<'_> {
    fn classify(&self, o: &OracleFile, u: usize, v: usize, d: f64, d_st: f64) -> Case {
        let hado_est = match o {
            OracleFile::Hado(h) => h.query(u, v),
            OracleFile::Composite(c) => c.hado().query(u, v),
            OracleFile::Bunch(_) => unreachable!(),
        };
        if leq(d_st, d) {
            return if leq(hado_est, (2 * self.k - 1) as f64 * d) { Case::Hado } else { Case::Uncovered };
        }
        let (hu, hv) = (self.nearest.h[u], self.nearest.h[v]);
        let lemma = if self.unweighted { hu + hv <= d + 1.0 } else { leq(hu.max(hv), d) };
        let chain = self.composite.is_none_or(|c| leq(c.far_estimate(u, v), c.plan().far_bound(d)));
        if lemma && chain {
            Case::Far
        } else {
            Case::Uncovered
        }
    }
}

/// Checks `d <= estimate <= α d + β` on every selected pair, and for
/// hierarchical oracles classifies each finite pair as hado-case (some
/// shortest path survives in `G_{S_t}`) or far-case and verifies the
/// matching inequality chain.
pub fn audit_stretch(g: &Graph, oracle: &OracleFile, mode: AuditMode, ms_build: f64) -> Result<AuditReport> {
    let n = g.n();
    if oracle.n() != n {
        return Err(invalid(format!("oracle has n = {} but graph has n = {n}", oracle.n())));
    }
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    match mode {
        AuditMode::Exhaustive => {
            if n > DEFAULT_APSP_CAP {
                return Err(Error::CapExceeded { n, cap: DEFAULT_APSP_CAP });
            }
            for u in 0..n {
                by_source.insert(u, (u + 1..n).collect());
            }
        }
        AuditMode::Sampled { count, seed } => {
            let mut rng = seeded_rng(seed);
            for _ in 0..count {
                let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
                by_source.entry(u).or_default().push(v);
            }
        }
    }
    let guarantee = oracle.guarantee();
    let ctx = match oracle {
        OracleFile::Bunch(_) => None,
        OracleFile::Hado(h) => Some(CaseContext {
            gst: restricted_graph(g, h.nearest_t()),
            nearest: h.nearest_t(),
            k: h.k(),
            composite: None,
            unweighted: g.is_unweighted(),
        }),
        OracleFile::Composite(c) => Some(CaseContext {
            gst: restricted_graph(g, c.hado().nearest_t()),
            nearest: c.hado().nearest_t(),
            k: c.plan().k,
            composite: Some(c),
            unweighted: c.plan().algo.requires_unweighted(),
        }),
    };

    #[derive(Default)]
    struct Acc {
        pairs: usize,
        finite: usize,
        hado: usize,
        far: usize,
        uncovered: usize,
        mult: f64,
        add: f64,
        violations: Vec<Violation>,
    }
    let sources: Vec<(usize, Vec<usize>)> = by_source.into_iter().collect();
    let accs: Vec<Acc> = sources
        .par_iter()
        .map(|(u, targets)| {
            let u = *u;
            let dg = distances_from(g, u);
            let dst = ctx.as_ref().map(|c| distances_from(&c.gst, u));
            let mut acc = Acc { mult: f64::NEG_INFINITY, add: f64::NEG_INFINITY, ..Acc::default() };
            for &v in targets {
                acc.pairs += 1;
                let d = dg[v];
                let est = oracle.query(u, v);
                let violation = Violation { u, v, d, estimate: est };
                if u == v {
                    if est != 0.0 {
                        acc.violations.push(violation);
                    }
                    continue;
                }
                if d.is_infinite() {
                    if est.is_finite() {
                        acc.violations.push(violation);
                    }
                    continue;
                }
                acc.finite += 1;
                let mut ok = est >= d * (1.0 - REL_TOL);
                if let Some((alpha, beta)) = guarantee {
                    ok &= leq(est, alpha * d + beta);
                    if d > 0.0 {
                        acc.mult = acc.mult.max((est - beta) / d);
                    }
                    acc.add = acc.add.max(est - alpha * d);
                }
                if let (Some(c), Some(dst)) = (&ctx, &dst) {
                    match c.classify(oracle, u, v, d, dst[v]) {
                        Case::Hado => acc.hado += 1,
                        Case::Far => acc.far += 1,
                        Case::Uncovered => {
                            acc.uncovered += 1;
                            ok = false;
                        }
                    }
                }
                if !ok {
                    acc.violations.push(violation);
                }
            }
            acc
        })
        .collect();

    let mut total = Acc { mult: f64::NEG_INFINITY, add: f64::NEG_INFINITY, ..Acc::default() };
    for a in accs {
        total.pairs += a.pairs;
        total.finite += a.finite;
        total.hado += a.hado;
        total.far += a.far;
        total.uncovered += a.uncovered;
        total.mult = total.mult.max(a.mult);
        total.add = total.add.max(a.add);
        total.violations.extend(a.violations);
    }
    let frac = |x: usize| if total.finite == 0 { 1.0 } else { x as f64 / total.finite as f64 };
    let finite_or_zero = |x: f64| if x.is_finite() { x } else { 0.0 };
    Ok(AuditReport {
        pairs: total.pairs,
        violations: total.violations,
        max_mult_slack: finite_or_zero(total.mult),
        max_add_slack: finite_or_zero(total.add),
        coverage_hado: ctx.as_ref().map(|_| frac(total.hado)),
        coverage_far: ctx.as_ref().map(|_| frac(total.far)),
        entries: oracle.entries(),
        ms_build,
        ms_query_per_1k: time_queries(oracle, 1000, 0x5eed),
        alpha: guarantee.map(|g| g.0),
        beta: guarantee.map(|g| g.1),
        finite_pairs: total.finite,
        uncovered: total.uncovered,
    })
}

/// Wall time in milliseconds for `count` random queries.
pub fn time_queries(oracle: &OracleFile, count: usize, seed: u64) -> f64 {
    let n = oracle.n();
    let mut rng = seeded_rng(seed);
    let pairs: Vec<(usize, usize)> = (0..count).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
    let start = Instant::now();
    let mut sink = 0.0;
    for (u, v) in pairs {
        sink += oracle.query(u, v).min(1.0);
    }
    std::hint::black_box(sink);
    start.elapsed().as_secs_f64() * 1e3
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceReport {
    pub components: Vec<(String, usize)>,
    pub total: usize,
}

/// Stored distance entries per component.
pub fn measure_space(oracle: &OracleFile) -> SpaceReport {
    let mut components = Vec::new();
    let hado_parts = |h: &crate::hado::Hado, components: &mut Vec<(String, usize)>| {
        components.push(("base".to_string(), h.base().bunch_entries()));
        for (i, l) in h.levels().iter().enumerate() {
            components.push((format!("level{}", i + 1), l.entries()));
        }
    };
    match oracle {
        OracleFile::Bunch(o) => components.push(("bunches".to_string(), o.bunch_entries())),
        OracleFile::Hado(h) => hado_parts(h, &mut components),
        OracleFile::Composite(c) => {
            hado_parts(c.hado(), &mut components);
            let name = match c.far() {
                Far::Param(_) => "far-param",
                Far::Table(_) => "far-table",
                Far::Restricted(_) => "far-restricted",
            };
            components.push((name.to_string(), c.far().entries()));
        }
    }
    let total = components.iter().map(|c| c.1).sum();
    SpaceReport { components, total }
}

/// What `bench_build` constructs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchTarget {
    Classic { k: usize },
    Composite { algo: Algo, k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseStat {
    pub name: String,
    pub median_ms: f64,
    pub iqr_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub reps: usize,
    pub phases: Vec<PhaseStat>,
    pub total: PhaseStat,
}

fn summarize(name: &str, mut xs: Vec<f64>) -> PhaseStat {
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (xs.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        xs[lo] + (xs[hi] - xs[lo]) * (pos - lo as f64)
    };
    PhaseStat { name: name.to_string(), median_ms: q(0.5), iqr_ms: q(0.75) - q(0.25) }
}

/// Median and interquartile range of build wall time, total and per phase.
pub fn bench_build(g: &Graph, target: BenchTarget, seed: u64, reps: usize) -> Result<BenchSummary> {
    if reps < 1 {
        return Err(invalid("reps must be at least 1"));
    }
    let mut totals = Vec::with_capacity(reps);
    let mut phases: Vec<(String, Vec<f64>)> = Vec::new();
    for _ in 0..reps {
        let start = Instant::now();
        let report = match target {
            BenchTarget::Classic { k } => {
                BunchOracle::build_classic(g, k, seed)?;
                vec![("bunches".to_string(), start.elapsed().as_secs_f64() * 1e3)]
            }
            BenchTarget::Composite { algo, k } => CompositeOracle::build(g, algo, k, seed)?.report().phases.clone(),
        };
        totals.push(start.elapsed().as_secs_f64() * 1e3);
        for (name, ms) in report {
            match phases.iter_mut().find(|p| p.0 == name) {
                Some(p) => p.1.push(ms),
                None => phases.push((name, vec![ms])),
            }
        }
    }
    Ok(BenchSummary {
        reps,
        phases: phases.into_iter().map(|(name, xs)| summarize(&name, xs)).collect(),
        total: summarize("total", totals),
    })
}
