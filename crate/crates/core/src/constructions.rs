//! End-to-end builders: a hierarchical oracle plus a far-path component that
//! answers pairs whose shortest paths leave `G_{S_t}`, and the parameter
//! solvers behind each builder.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::graph::{dijkstra, Graph, INF, NONE};
use crate::hado::{x_limit, Hado};
use crate::param::{ParamOracle, RestrictedParamOracle};
use crate::seeded_rng;
use crate::spanner::{augment_with_pivots, baswana_sen_spanner, bkmp_spanner_unweighted, SpannerResult};

const X0_CEILING: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    WSubquadratic,
    WSpannerTable,
    WSpannerAdo,
    UAdd2,
    UAdd2k2,
    UAdd2k1,
}

impl Algo {
    pub const ALL: [Algo; 6] =
        [Algo::WSubquadratic, Algo::WSpannerTable, Algo::WSpannerAdo, Algo::UAdd2, Algo::UAdd2k2, Algo::UAdd2k1];

    pub fn name(self) -> &'static str {
        match self {
            Algo::WSubquadratic => "w-subquadratic",
            Algo::WSpannerTable => "w-spanner-table",
            Algo::WSpannerAdo => "w-spanner-ado",
            Algo::UAdd2 => "u-add2",
            Algo::UAdd2k2 => "u-add2k2",
            Algo::UAdd2k1 => "u-add2k1",
        }
    }

    pub fn tag(self) -> u8 {
        Algo::ALL.iter().position(|&a| a == self).unwrap() as u8
    }

    pub fn from_tag(tag: u8) -> Option<Algo> {
        Algo::ALL.get(tag as usize).copied()
    }

    pub fn min_k(self) -> usize {
        match self {
            Algo::WSubquadratic | Algo::UAdd2 | Algo::UAdd2k2 => 3,
            Algo::WSpannerTable => 4,
            Algo::WSpannerAdo => 16,
            Algo::UAdd2k1 => 13,
        }
    }

    pub fn requires_unweighted(self) -> bool {
        matches!(self, Algo::UAdd2 | Algo::UAdd2k2 | Algo::UAdd2k1)
    }

    /// `(α, β)` with `d <= estimate <= α d + β`.
    pub fn guarantee(self, k: usize) -> (f64, f64) {
        let alpha = (2 * k - 1) as f64;
        let beta = match self {
            Algo::WSubquadratic | Algo::WSpannerTable | Algo::WSpannerAdo => 0.0,
            Algo::UAdd2 => 2.0,
            Algo::UAdd2k2 => (2 * k - 2) as f64,
            Algo::UAdd2k1 => (2 * k - 1) as f64,
        };
        (alpha, beta)
    }

    /// Builder to suggest when `k` is below this builder's minimum.
    fn fallback(self) -> Algo {
        if self.requires_unweighted() {
            Algo::UAdd2
        } else {
            Algo::WSpannerTable
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algo> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid(format!("unknown algorithm {s:?}")))
    }
}

/// `max(1/k, (L k² - 2 L k - k² + 2k + 1) / (k(k-1)))` with `L = log_n m`,
/// kept below 1.
pub fn solve_x0_subquadratic(n: usize, m: usize, k: usize) -> Result<f64> {
    if k < 3 {
        return Err(invalid("k must be at least 3"));
    }
    if n < 2 || m < n {
        return Err(invalid(format!("need m >= n >= 2, got n = {n}, m = {m}")));
    }
    let kf = k as f64;
    let l = (m as f64).ln() / (n as f64).ln();
    let raw = (l * kf * kf - 2.0 * l * kf - kf * kf + 2.0 * kf + 1.0) / (kf * (kf - 1.0));
    Ok(raw.max(1.0 / kf).min(X0_CEILING))
}

/// Lower bound on `x0` keeping the `S_t × S_t` table within the space budget.
pub fn table_space_threshold(k: usize) -> f64 {
    let kf = k as f64;
    0.5 - 1.0 / kf + 1.0 / (kf * (kf - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableVariant {
    Weighted,
    Add2,
    Add2k2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableParams {
    pub x0: f64,
    pub k_prime: usize,
    /// Formula value before the space-threshold clamp.
    pub raw_x0: f64,
}

pub fn solve_params_spanner_table(k: usize, variant: TableVariant) -> Result<TableParams> {
    let min_k = if variant == TableVariant::Weighted { 4 } else { 3 };
    if k < min_k {
        return Err(invalid(format!("k = {k} below the minimum {min_k} for this variant")));
    }
    let kf = k as f64;
    let (raw_x0, k_prime) = match variant {
        TableVariant::Weighted => ((kf * kf - 2.0 * kf + 3.0) / (kf * (2.0 * kf - 3.0)), k - 2),
        TableVariant::Add2 => (
            (kf.powi(3) - 3.0 * kf * kf + 4.0 * kf - 3.0) / (kf * (2.0 * kf * kf - 5.0 * kf + 3.0)),
            k - 1,
        ),
        TableVariant::Add2k2 => (
            (2.0 * kf.powi(3) - 8.0 * kf * kf + 13.0 * kf - 9.0) / (kf * (2.0 * kf - 3.0).powi(2)),
            2 * k - 3,
        ),
    };
    let x0 = raw_x0.max(table_space_threshold(k)).clamp(1.0 / kf, X0_CEILING);
    Ok(TableParams { x0, k_prime, raw_x0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdoParams {
    pub x0: f64,
    pub k_prime: usize,
    pub k_dprime: usize,
    pub raw_k_prime: f64,
    pub raw_k_dprime: f64,
    pub raw_x0: f64,
}

/// Left side of the far-component stretch constraint, which must not exceed
/// `2k - 1`: `2 + (2k''-1)(2k'+1)` weighted, `1 + (2k''-1)(k'+1)` unweighted.
pub fn far_constraint(k_prime: usize, k_dprime: usize, unweighted: bool) -> usize {
    if unweighted {
        1 + (2 * k_dprime - 1) * (k_prime + 1)
    } else {
        2 + (2 * k_dprime - 1) * (2 * k_prime + 1)
    }
}

/// Solves `1/k' + (1 - x_t)/k'' = x0 + 1/k` for `x0`, where
/// `x_t = ((k-1)/(k-2)) x0 - 1/(k(k-2))`, clamped to `[1/k, 1)`.
pub fn rebalance_x0(k: usize, k_prime: usize, k_dprime: usize) -> f64 {
    let kf = k as f64;
    let (kp, kd) = (k_prime as f64, k_dprime as f64);
    let alpha = (kf - 1.0) / (kf - 2.0);
    let beta = 1.0 / (kf * (kf - 2.0));
    let x0 = (1.0 / kp + (1.0 + beta) / kd - 1.0 / kf) / (1.0 + alpha / kd);
    x0.clamp(1.0 / kf, X0_CEILING)
}

/// `1 + x0 + 1/k`, the exponent of the dominant build-cost term.
pub fn build_exponent(k: usize, x0: f64) -> f64 {
    1.0 + x0 + 1.0 / k as f64
}

pub fn solve_params_spanner_ado(k: usize, unweighted: bool) -> Result<AdoParams> {
    let min_k = if unweighted { 13 } else { 16 };
    if k < min_k {
        return Err(invalid(format!("k = {k} below the minimum {min_k} for this variant")));
    }
    let kf = k as f64;
    let (raw_k_prime, raw_k_dprime, raw_x0) = if unweighted {
        let r = (16.0 * kf.powi(3) - 15.0 * kf * kf - 32.0 * kf + 32.0).sqrt();
        (
            (r + 3.0 * kf - 4.0) / (4.0 * (kf - 1.0)),
            (r - 5.0 * kf + 4.0) / (4.0 * (kf - 2.0)),
            (kf * r - 5.0 * kf * kf + 5.0 * kf + 2.0) / (kf * (2.0 * kf * kf - kf - 2.0)),
        )
    } else {
        let r = (8.0 * kf.powi(3) - 32.0 * kf + 25.0).sqrt();
        (
            (r + 4.0 * kf - 5.0) / (4.0 * (kf - 1.0)),
            (r - 4.0 * kf + 3.0) / (4.0 * (kf - 2.0)),
            (r - 5.0 * kf + 6.0) / (kf * (kf - 1.0)),
        )
    };
    let round = |x: f64| [(x.floor() as usize).max(1), (x.ceil() as usize).max(1)];
    let mut best: Option<(f64, usize, usize, f64)> = None;
    for kp in round(raw_k_prime) {
        for kd in round(raw_k_dprime) {
            if far_constraint(kp, kd, unweighted) > 2 * k - 1 {
                continue;
            }
            let x0 = rebalance_x0(k, kp, kd);
            let cost = 1.0 / kp as f64 + (1.0 - x_limit(k, x0)) / kd as f64;
            if best.is_none_or(|b| cost < b.0) {
                best = Some((cost, kp, kd, x0));
            }
        }
    }
    let (_, k_prime, k_dprime, x0) =
        best.ok_or_else(|| invalid(format!("no integer (k', k'') satisfies the stretch constraint at k = {k}")))?;
    Ok(AdoParams { x0, k_prime, k_dprime, raw_k_prime, raw_k_dprime, raw_x0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildPlan {
    pub algo: Algo,
    pub k: usize,
    pub x0: f64,
    pub k_prime: Option<usize>,
    pub k_dprime: Option<usize>,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl BuildPlan {
    pub fn solve(algo: Algo, g: &Graph, k: usize, seed: u64) -> Result<BuildPlan> {
        if k < algo.min_k() {
            return Err(invalid(format!(
                "{algo} needs k >= {}; for k = {k} use {}",
                algo.min_k(),
                algo.fallback()
            )));
        }
        if algo.requires_unweighted() && !g.is_unweighted() {
            return Err(Error::Weighted);
        }
        let mut notes = Vec::new();
        let (x0, k_prime, k_dprime) = match algo {
            Algo::WSubquadratic => (solve_x0_subquadratic(g.n(), g.m().max(g.n()), k)?, None, None),
            Algo::WSpannerTable | Algo::UAdd2 | Algo::UAdd2k2 => {
                let variant = match algo {
                    Algo::WSpannerTable => TableVariant::Weighted,
                    Algo::UAdd2 => TableVariant::Add2,
                    _ => TableVariant::Add2k2,
                };
                let p = solve_params_spanner_table(k, variant)?;
                if p.x0 != p.raw_x0 {
                    notes.push(format!("x0 {:.6} raised to {:.6} for the table space bound", p.raw_x0, p.x0));
                }
                (p.x0, Some(p.k_prime), None)
            }
            Algo::WSpannerAdo | Algo::UAdd2k1 => {
                let p = solve_params_spanner_ado(k, algo == Algo::UAdd2k1)?;
                notes.push(format!(
                    "real optimum k'={:.4} k''={:.4} x0={:.6}; rounded to k'={} k''={}, x0 rebalanced to {:.6}",
                    p.raw_k_prime, p.raw_k_dprime, p.raw_x0, p.k_prime, p.k_dprime, p.x0
                ));
                (p.x0, Some(p.k_prime), Some(p.k_dprime))
            }
        };
        Ok(BuildPlan { algo, k, x0, k_prime, k_dprime, seed, notes })
    }

    pub fn guarantee(&self) -> (f64, f64) {
        self.algo.guarantee(self.k)
    }

    /// Bound on the far-path estimate for a pair at distance `d` whose
    /// shortest paths all leave `G_{S_t}`.
    pub fn far_bound(&self, d: f64) -> f64 {
        let k = self.k as f64;
        let kp = self.k_prime.unwrap_or(0) as f64;
        let kd = self.k_dprime.unwrap_or(0) as f64;
        match self.algo {
            Algo::WSubquadratic => (2.0 * k - 1.0) * d,
            Algo::WSpannerTable => (2.0 * kp + 3.0) * d,
            Algo::WSpannerAdo => (2.0 + (2.0 * kd - 1.0) * (2.0 * kp + 1.0)) * d,
            Algo::UAdd2 => (2.0 * kp + 1.0) * d + 2.0,
            Algo::UAdd2k2 => (kp + 2.0) * d + kp + 1.0,
            Algo::UAdd2k1 => (1.0 + (2.0 * kd - 1.0) * (kp + 1.0)) * d + 1.0 + (2.0 * kd - 1.0) * kp,
        }
    }

    pub fn exponent(&self) -> f64 {
        build_exponent(self.k, self.x0)
    }
}

/// Symmetric `|S| × |S|` distance matrix indexed through the sorted set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTable {
    pub(crate) set: Vec<usize>,
    pub(crate) dist: Vec<f64>,
}

impl ExactTable {
    pub fn build(h: &Graph, set: &[usize]) -> ExactTable {
        let rows: Vec<Vec<f64>> = set
            .par_iter()
            .map(|&s| {
                let d = dijkstra(h, s).dist;
                set.iter().map(|&t| d[t]).collect()
            })
            .collect();
        ExactTable { set: set.to_vec(), dist: rows.concat() }
    }

    pub fn set(&self) -> &[usize] {
        &self.set
    }

    pub fn get(&self, s1: usize, s2: usize) -> Option<f64> {
        let i = self.set.binary_search(&s1).ok()?;
        let j = self.set.binary_search(&s2).ok()?;
        Some(self.dist[i * self.set.len() + j])
    }

    pub fn entries(&self) -> usize {
        self.dist.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Far {
    Param(ParamOracle),
    Table(ExactTable),
    Restricted(RestrictedParamOracle),
}

impl Far {
    pub fn entries(&self) -> usize {
        match self {
            Far::Param(o) => o.entries(),
            Far::Table(t) => t.entries(),
            Far::Restricted(o) => o.entries(),
        }
    }
}

/// Build-time facts that are not part of the serialized oracle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildReport {
    /// `(phase, milliseconds)` in execution order.
    pub phases: Vec<(String, f64)>,
    pub warnings: Vec<String>,
    pub spanner_edges: Option<usize>,
    pub spanner_attempts: Option<usize>,
    pub spanner_overage: Option<usize>,
}

impl BuildReport {
    pub fn total_ms(&self) -> f64 {
        self.phases.iter().map(|p| p.1).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeOracle {
    pub(crate) plan: BuildPlan,
    pub(crate) hado: Hado,
    pub(crate) far: Far,
    pub(crate) report: BuildReport,
}

fn timed<T>(phases: &mut Vec<(String, f64)>, name: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    phases.push((name.to_string(), start.elapsed().as_secs_f64() * 1e3));
    out
}

impl CompositeOracle {
    pub fn build(g: &Graph, algo: Algo, k: usize, seed: u64) -> Result<CompositeOracle> {
        let plan = BuildPlan::solve(algo, g, k, seed)?;
        Self::build_plan(g, plan)
    }

    pub fn build_plan(g: &Graph, plan: BuildPlan) -> Result<CompositeOracle> {
        let mut rng = seeded_rng(plan.seed);
        let (hado_seed, spanner_seed, far_seed) = (rng.next_u64(), rng.next_u64(), rng.next_u64());
        let mut report = BuildReport::default();
        let hado = timed(&mut report.phases, "hado", || Hado::build(g, plan.k, plan.x0, hado_seed))?;
        report.warnings.extend(hado.warnings().iter().cloned());
        let s_t = hado.s_t().to_vec();

        let spanner = |phases: &mut Vec<(String, f64)>| -> Result<SpannerResult> {
            let kp = plan.k_prime.expect("spanner builders carry k'");
            let sp = timed(phases, "spanner", || {
                if plan.algo.requires_unweighted() && plan.algo != Algo::UAdd2 {
                    bkmp_spanner_unweighted(g, kp, spanner_seed)
                } else {
                    baswana_sen_spanner(g, kp, spanner_seed)
                }
            })?;
            Ok(timed(phases, "augment", || augment_with_pivots(&sp, hado.nearest_t())))
        };

        let far = match plan.algo {
            Algo::WSubquadratic => Far::Param(timed(&mut report.phases, "far", || {
                ParamOracle::build(g, plan.k - 1, &s_t, far_seed)
            })?),
            Algo::WSpannerTable | Algo::UAdd2 | Algo::UAdd2k2 => {
                let h = spanner(&mut report.phases)?;
                note_spanner(&mut report, &h);
                let budget = 16.0 * (g.n() as f64).powf(1.0 + 1.0 / plan.k as f64);
                if (s_t.len() * s_t.len()) as f64 > budget {
                    report.warnings.push(format!("|S_t|^2 = {} exceeds the space budget", s_t.len() * s_t.len()));
                }
                Far::Table(timed(&mut report.phases, "far", || ExactTable::build(&h.h, &s_t)))
            }
            Algo::WSpannerAdo | Algo::UAdd2k1 => {
                let h = spanner(&mut report.phases)?;
                note_spanner(&mut report, &h);
                let kd = plan.k_dprime.expect("ado builders carry k''");
                Far::Restricted(timed(&mut report.phases, "far", || {
                    RestrictedParamOracle::build(&h.h, kd, &s_t, far_seed)
                })?)
            }
        };
        Ok(CompositeOracle { plan, hado, far, report })
    }

    pub fn plan(&self) -> &BuildPlan {
        &self.plan
    }

    pub fn hado(&self) -> &Hado {
        &self.hado
    }

    pub fn far(&self) -> &Far {
        &self.far
    }

    /// Empty after deserialization.
    pub fn report(&self) -> &BuildReport {
        &self.report
    }

    pub fn n(&self) -> usize {
        self.hado.n()
    }

    pub fn guarantee(&self) -> (f64, f64) {
        self.plan.guarantee()
    }

    pub fn h(&self, u: usize) -> f64 {
        self.hado.nearest_t().h[u]
    }

    pub fn p(&self, u: usize) -> usize {
        self.hado.nearest_t().p[u]
    }

    /// Estimate from the far-path component alone.
    pub fn far_estimate(&self, u: usize, v: usize) -> f64 {
        if let Far::Param(o) = &self.far {
            return o.query(u, v);
        }
        let (pu, pv) = (self.p(u), self.p(v));
        if pu == NONE || pv == NONE {
            return INF;
        }
        let mid = match &self.far {
            Far::Table(t) => t.get(pu, pv).unwrap_or(INF),
            Far::Restricted(o) => o.query(pu, pv).unwrap_or(INF),
            Far::Param(_) => unreachable!(),
        };
        self.h(u) + mid + self.h(v)
    }

    pub fn query(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.hado.query(u, v).min(self.far_estimate(u, v))
    }

    /// Far-path lemma for a pair at distance `d`: `max(h(u), h(v)) <= d`
    /// weighted, `h(u) + h(v) <= d + 1` unweighted.
    pub fn far_lemma_holds(&self, u: usize, v: usize, d: f64) -> bool {
        let (hu, hv) = (self.h(u), self.h(v));
        if self.plan.algo.requires_unweighted() {
            hu + hv <= d + 1.0
        } else {
            hu.max(hv) <= d
        }
    }

    pub fn entries(&self) -> usize {
        self.hado.entries() + self.far.entries()
    }
}

fn note_spanner(report: &mut BuildReport, sp: &SpannerResult) {
    report.spanner_edges = Some(sp.h.m());
    report.spanner_attempts = Some(sp.attempts);
    report.spanner_overage = sp.overage;
    if let Some(over) = sp.overage {
        report.warnings.push(format!("spanner exceeds its size budget by {over} edges"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subquadratic_x0() {
        let n = 1000usize;
        let sparse = (n as f64).powf(1.0 + 1.0 / 3.0).round() as usize;
        assert!((solve_x0_subquadratic(n, sparse, 3).unwrap() - 1.0 / 3.0).abs() < 1e-3);
        assert!((solve_x0_subquadratic(n, n * n, 3).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(solve_x0_subquadratic(n, n * n, 12).unwrap() <= X0_CEILING);
        assert!(solve_x0_subquadratic(n, n, 2).is_err());
    }

    #[test]
    fn table_solver_values() {
        let w = solve_params_spanner_table(4, TableVariant::Weighted).unwrap();
        assert!((w.x0 - 0.55).abs() < 1e-12);
        assert_eq!(w.k_prime, 2);
        let a = solve_params_spanner_table(3, TableVariant::Add2).unwrap();
        assert!((a.x0 - 0.5).abs() < 1e-12);
        assert_eq!(a.k_prime, 2);
        let b = solve_params_spanner_table(3, TableVariant::Add2k2).unwrap();
        assert!((b.raw_x0 - 4.0 / 9.0).abs() < 1e-12);
        assert_eq!(b.k_prime, 3);
        assert!(b.x0 >= table_space_threshold(3));
        assert!(solve_params_spanner_table(3, TableVariant::Weighted).is_err());
    }

    #[test]
    fn ado_solver_weighted_k16() {
        let p = solve_params_spanner_ado(16, false).unwrap();
        assert!((p.raw_k_prime - 3.978).abs() < 1e-3);
        assert!((p.raw_k_dprime - 2.119).abs() < 1e-3);
        assert!((p.raw_x0 - 0.4403).abs() < 1e-4);
        assert_eq!((p.k_prime, p.k_dprime), (4, 2));
        assert_eq!(far_constraint(4, 2, false), 29);
        assert_eq!(far_constraint(5, 2, false), 35);
    }

    #[test]
    fn ado_solver_unweighted_k13() {
        let p = solve_params_spanner_ado(13, true).unwrap();
        assert!(far_constraint(p.k_prime, p.k_dprime, true) <= 25);
        assert_eq!((p.k_prime, p.k_dprime), (5, 2));
        assert!(solve_params_spanner_ado(12, true).is_err());
    }

    #[test]
    fn rebalanced_x0_equalizes_exponents() {
        let (k, kp, kd) = (16, 4, 2);
        let x0 = rebalance_x0(k, kp, kd);
        let lhs = 1.0 / kp as f64 + (1.0 - x_limit(k, x0)) / kd as f64;
        assert!((lhs - (x0 + 1.0 / k as f64)).abs() < 1e-12);
    }

    #[test]
    fn table_exponent_matches_closed_form() {
        for k in 4..12 {
            let x0 = solve_params_spanner_table(k, TableVariant::Weighted).unwrap().x0;
            let closed = 1.5 + 3.0 / (4.0 * k as f64 - 6.0);
            assert!((build_exponent(k, x0) - closed).abs() < 1e-12);
        }
        assert!((build_exponent(4, 0.55) - 1.8).abs() < 1e-12);
    }

    #[test]
    fn algo_names_round_trip() {
        for a in Algo::ALL {
            assert_eq!(a.name().parse::<Algo>().unwrap(), a);
            assert_eq!(Algo::from_tag(a.tag()), Some(a));
        }
        assert!("tz".parse::<Algo>().is_err());
    }

    #[test]
    fn small_k_is_refused_with_hint() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let err = BuildPlan::solve(Algo::WSpannerAdo, &g, 8, 0).unwrap_err().to_string();
        assert!(err.contains("w-spanner-table"), "{err}");
        let w = Graph::from_edges(3, [(0, 1, 2.0), (1, 2, 1.0)]).unwrap();
        assert!(matches!(BuildPlan::solve(Algo::UAdd2, &w, 3, 0), Err(Error::Weighted)));
    }
}
