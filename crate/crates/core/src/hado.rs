//! The hierarchical oracle: a ladder `S_0 ⊇ S_1 ⊇ ... ⊇ S_t` of sampled sets,
//! a classic oracle on `G_{S_0}`, and parameterized oracles on each
//! `G_{S_i}` relative to `S_{i-1}`.

use rand::RngCore;

use crate::bunch::{build_bunches, build_levels, BunchOracle, BunchSpec, Mode};
use crate::error::{invalid, Result};
use crate::graph::{nearest_in_set, restricted_graph, sample_subset, Graph, NearestInfo};
use crate::param::ParamOracle;
use crate::seeded_rng;

/// Ladder depth `max(1, ⌈log₂ log₂ n⌉)`.
pub fn ladder_depth(n: usize) -> usize {
    if n < 4 {
        return 1;
    }
    ((n as f64).log2().log2().ceil() as usize).max(1)
}

fn check_domain(k: usize, x0: f64) -> Result<()> {
    if k < 3 {
        return Err(invalid(format!("k = {k} must be at least 3")));
    }
    if !(x0 >= 1.0 / k as f64 - 1e-12 && x0 < 1.0) {
        return Err(invalid(format!("x0 = {x0} outside [1/k, 1)")));
    }
    Ok(())
}

/// `x_0..x_t` by the recurrence `x_i = x_0 - 1/(k(k-1)) + x_{i-1}/(k-1)`,
/// evaluated as `x_0 + (x_{i-1} - 1/k)/(k-1)` so that `x_0 = 1/k` is an
/// exact fixed point.
pub fn x_sequence(k: usize, x0: f64, t: usize) -> Result<Vec<f64>> {
    check_domain(k, x0)?;
    let kf = k as f64;
    let mut xs = vec![x0];
    for _ in 0..t {
        let prev = *xs.last().unwrap();
        xs.push(x0 + (prev - 1.0 / kf) / (kf - 1.0));
    }
    Ok(xs)
}

pub fn x_closed_form(k: usize, x0: f64, j: usize) -> f64 {
    let kf = k as f64;
    (kf - 1.0) / (kf - 2.0) * x0 - 1.0 / (kf * (kf - 2.0))
        + (1.0 - x0 * kf) / (kf * (kf - 2.0)) * (1.0 / (kf - 1.0)).powi(j as i32)
}

/// `lim x_j = ((k-1)/(k-2)) x_0 - 1/(k(k-2))`.
pub fn x_limit(k: usize, x0: f64) -> f64 {
    let kf = k as f64;
    (kf - 1.0) / (kf - 2.0) * x0 - 1.0 / (kf * (kf - 2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HadoParams {
    pub k: usize,
    pub x0: f64,
    pub t: usize,
    pub xs: Vec<f64>,
}

impl HadoParams {
    pub fn new(n: usize, k: usize, x0: f64) -> Result<HadoParams> {
        let t = ladder_depth(n);
        let xs = x_sequence(k, x0, t)?;
        Ok(HadoParams { k, x0, t, xs })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hado {
    pub(crate) params: HadoParams,
    pub(crate) seed: u64,
    pub(crate) s_sets: Vec<Vec<usize>>,
    pub(crate) base: BunchOracle,
    pub(crate) levels: Vec<ParamOracle>,
    pub(crate) nearest_t: NearestInfo,
    pub(crate) warnings: Vec<String>,
}

impl Hado {
    pub fn build(g: &Graph, k: usize, x0: f64, seed: u64) -> Result<Hado> {
        let n = g.n();
        let params = HadoParams::new(n, k, x0)?;
        let mut rng = seeded_rng(seed);
        let mut warnings = Vec::new();
        let nf = n as f64;

        let all: Vec<usize> = (0..n).collect();
        let mut s_sets = Vec::with_capacity(params.t + 1);
        for (i, &x) in params.xs.iter().enumerate() {
            let universe = s_sets.last().unwrap_or(&all);
            let raw = nf.powf(1.0 - x);
            let cap = universe.len() as f64;
            let target = raw.clamp(1.0, cap);
            if raw < 1.0 {
                warnings.push(format!("|S_{i}| target {raw:.3} clamped to 1"));
            } else if raw > cap {
                warnings.push(format!("|S_{i}| target {raw:.3} clamped to {cap}"));
            }
            let s = sample_subset(universe, target, &mut rng)?;
            s_sets.push(s);
        }
        let seeds: Vec<u64> = (0..=params.t).map(|_| rng.next_u64()).collect();

        let infos: Vec<NearestInfo> = s_sets.iter().map(|s| nearest_in_set(g, s)).collect::<Result<_>>()?;
        let g0 = restricted_graph(g, &infos[0]);
        let base_levels = build_levels(n, k, &mut seeded_rng(seeds[0]))?;
        let (base, _) = build_bunches(&g0, base_levels, BunchSpec { mode: Mode::Classic, k, seed: seeds[0], stored: None });
        let mut levels = Vec::with_capacity(params.t);
        for i in 1..=params.t {
            let gi = restricted_graph(g, &infos[i]);
            levels.push(ParamOracle::build(&gi, k - 1, &s_sets[i - 1], seeds[i])?);
        }
        let nearest_t = infos.into_iter().last().unwrap();
        Ok(Hado { params, seed, s_sets, base, levels, nearest_t, warnings })
    }

    pub fn params(&self) -> &HadoParams {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn s_sets(&self) -> &[Vec<usize>] {
        &self.s_sets
    }

    pub fn s_t(&self) -> &[usize] {
        self.s_sets.last().unwrap()
    }

    pub fn base(&self) -> &BunchOracle {
        &self.base
    }

    pub fn levels(&self) -> &[ParamOracle] {
        &self.levels
    }

    /// `(h_{S_t}, p_{S_t})` computed on the full graph.
    pub fn nearest_t(&self) -> &NearestInfo {
        &self.nearest_t
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Base estimate followed by one estimate per ladder level.
    pub fn component_estimates(&self, u: usize, v: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.levels.len() + 1);
        out.push(self.base.query(u, v));
        out.extend(self.levels.iter().map(|o| o.query(u, v)));
        out
    }

    pub fn query(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.component_estimates(u, v).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn entries(&self) -> usize {
        self.base.bunch_entries() + self.levels.iter().map(|o| o.entries()).sum::<usize>()
    }
}
