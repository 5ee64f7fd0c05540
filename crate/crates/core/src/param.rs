//! Oracles parameterized by a vertex set `S`: `A_0 = V`, `A_1 = S`, and
//! `A_2 ⊇ ... ⊇ A_k` thinned from `S` with per-step rate `|S|^{-1/k}`.
//! [`ParamOracle`] answers all of `V × V` with an additive `2 min(h_S)` slack;
//! [`RestrictedParamOracle`] keeps tables only for `S` and answers `S × S`.

use crate::bunch::{build_bunches, BuildStats, BunchOracle, BunchSpec, Levels, Mode};
use crate::error::{invalid, Error, Result};
use crate::graph::{sample_subset, Graph};
use crate::seeded_rng;

fn param_levels(n: usize, k: usize, set: &[usize], seed: u64) -> Result<Levels> {
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&x| x >= n) {
        return Err(invalid(format!("set member {bad} out of range for n = {n}")));
    }
    let size = s.len() as f64;
    let mut rng = seeded_rng(seed);
    let mut sets = vec![(0..n).collect::<Vec<_>>(), s];
    for i in 2..=k {
        let prev = sets.last().unwrap();
        let target = size.powf(1.0 - (i - 1) as f64 / k as f64).min(prev.len() as f64);
        sets.push(sample_subset(prev, target, &mut rng)?);
    }
    Levels::new(sets)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamOracle {
    inner: BunchOracle,
    stats: BuildStats,
}

impl ParamOracle {
    pub fn build(g: &Graph, k: usize, set: &[usize], seed: u64) -> Result<ParamOracle> {
        let levels = param_levels(g.n(), k, set, seed)?;
        let (inner, stats) =
            build_bunches(g, levels, BunchSpec { mode: Mode::Parameterized, k, seed, stored: None });
        Ok(ParamOracle { inner, stats })
    }

    pub(crate) fn from_inner(inner: BunchOracle) -> ParamOracle {
        ParamOracle { inner, stats: BuildStats::default() }
    }

    pub fn k(&self) -> usize {
        self.inner.k()
    }

    pub fn set(&self) -> &[usize] {
        &self.inner.levels().sets[1]
    }

    /// `h_S(u)` in the graph the oracle was built on.
    pub fn h_s(&self, u: usize) -> f64 {
        self.inner.pivot(u, 1).1
    }

    pub fn query(&self, u: usize, v: usize) -> f64 {
        self.inner.query(u, v)
    }

    pub fn inner(&self) -> &BunchOracle {
        &self.inner
    }

    pub fn entries(&self) -> usize {
        self.inner.bunch_entries()
    }

    /// Build-time instrumentation (zero after deserialization).
    pub fn stats(&self) -> BuildStats {
        self.stats
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedParamOracle {
    inner: BunchOracle,
    stats: BuildStats,
}

impl RestrictedParamOracle {
    pub fn build(g: &Graph, k: usize, set: &[usize], seed: u64) -> Result<RestrictedParamOracle> {
        let levels = param_levels(g.n(), k, set, seed)?;
        let mut stored = vec![false; g.n()];
        for &s in &levels.sets[1] {
            stored[s] = true;
        }
        let (inner, stats) = build_bunches(
            g,
            levels,
            BunchSpec { mode: Mode::Restricted, k, seed, stored: Some(&stored) },
        );
        Ok(RestrictedParamOracle { inner, stats })
    }

    pub(crate) fn from_inner(inner: BunchOracle) -> RestrictedParamOracle {
        RestrictedParamOracle { inner, stats: BuildStats::default() }
    }

    pub fn k(&self) -> usize {
        self.inner.k()
    }

    pub fn set(&self) -> &[usize] {
        &self.inner.levels().sets[1]
    }

    /// Errors when either argument lies outside `S`.
    pub fn query(&self, s1: usize, s2: usize) -> Result<f64> {
        self.inner.try_query(s1, s2)
    }

    pub fn inner(&self) -> &BunchOracle {
        &self.inner
    }

    pub fn entries(&self) -> usize {
        self.inner.bunch_entries()
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }
}
