//! Neighborhood growth radii.
//!
//! For a vertex `u` let `|B_u^r|` be the number of vertices within distance
//! `r`. Two per-vertex radii drive everything downstream:
//!
//! * `rho1(u)`: smallest `r >= 1` with `r * |B_u^r| * ln r >= ln n`
//! * `rho2(u)`: smallest `r >= 1` with `r * |B_u^r| >= ln n`
//!
//! `R1` and `R2` are the maxima over all vertices; the maximum load after
//! `n` balls scales with `R1` and the cover time with `R2 * n`. The
//! quantile variants `R^(gamma)` take the `ceil(n^(1/2+gamma))`-th largest
//! value of `rho - 1`, i.e. the largest radius that still fails the
//! threshold on a polynomially large vertex set.
//!
//! Logarithms are natural throughout. At `r = 1` the `R1` condition reads
//! `0 >= ln n` and so fails for every `n >= 2`.

use crate::graph::Graph;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("no radius r <= n satisfies the growth condition at vertex {vertex}")]
    NoSatisfyingRadius { vertex: u32 },
    #[error("gamma must lie in (0, 0.5], got {0}")]
    InvalidGamma(f64),
    #[error("quantile set size {k} exceeds vertex count {n}")]
    QuantileTooLarge { k: usize, n: usize },
}

/// Per-vertex growth radii of one graph, with the graph-level maxima.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthReport {
    pub n: usize,
    pub per_vertex_rho1: Vec<u32>,
    pub per_vertex_rho2: Vec<u32>,
    pub r1: u32,
    pub r2: u32,
}

/// JSON form of a growth report: radii plus requested quantile variants.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GrowthSummary {
    pub n: usize,
    pub r1: u32,
    pub r2: u32,
    pub r1_gamma: BTreeMap<String, u32>,
    pub r2_gamma: BTreeMap<String, u32>,
}

impl GrowthReport {
    /// Quantile variant of `R1` for `gamma` in `(0, 0.5]`: the k-th largest
    /// `rho1 - 1` with `k = ceil(n^(1/2+gamma))`; 0 when no radius `>= 1`
    /// fails the condition on a large enough set.
    pub fn r1_gamma(&self, gamma: f64) -> Result<u32, GrowthError> {
        quantile_radius(&self.per_vertex_rho1, gamma)
    }

    /// Quantile variant of `R2`, as [`GrowthReport::r1_gamma`].
    pub fn r2_gamma(&self, gamma: f64) -> Result<u32, GrowthError> {
        quantile_radius(&self.per_vertex_rho2, gamma)
    }

    pub fn summary(&self, gammas: &[f64]) -> Result<GrowthSummary, GrowthError> {
        let mut r1_gamma = BTreeMap::new();
        let mut r2_gamma = BTreeMap::new();
        for &g in gammas {
            r1_gamma.insert(format!("{g}"), self.r1_gamma(g)?);
            r2_gamma.insert(format!("{g}"), self.r2_gamma(g)?);
        }
        Ok(GrowthSummary {
            n: self.n,
            r1: self.r1,
            r2: self.r2,
            r1_gamma,
            r2_gamma,
        })
    }
}

fn quantile_radius(rhos: &[u32], gamma: f64) -> Result<u32, GrowthError> {
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(GrowthError::InvalidGamma(gamma));
    }
    let n = rhos.len();
    let k = (n as f64).powf(0.5 + gamma).ceil() as usize;
    let k = k.max(1);
    if k > n {
        return Err(GrowthError::QuantileTooLarge { k, n });
    }
    let mut sorted: Vec<u32> = rhos.iter().map(|&r| r - 1).collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sorted[k - 1])
}

/// Incremental BFS from `u` that stops at the first radius satisfying
/// `condition(r, ball_size)`. Scratch buffers are stamped per source so they
/// can be reused across calls.
struct RhoScratch {
    stamp: Vec<u32>,
    current: Vec<u32>,
    next: Vec<u32>,
}

impl RhoScratch {
    fn new(n: usize) -> Self {
        RhoScratch {
            stamp: vec![u32::MAX; n],
            current: Vec::new(),
            next: Vec::new(),
        }
    }

    fn rho(
        &mut self,
        g: &Graph,
        u: u32,
        condition: impl Fn(u64, u64) -> bool,
    ) -> Result<u32, GrowthError> {
        let n = g.vertex_count() as u64;
        self.current.clear();
        self.current.push(u);
        self.stamp[u as usize] = u;
        let mut ball = 1u64;
        for r in 1..=n {
            self.next.clear();
            for &x in &self.current {
                for &w in g.neighbors(x) {
                    if self.stamp[w as usize] != u {
                        self.stamp[w as usize] = u;
                        self.next.push(w);
                    }
                }
            }
            ball += self.next.len() as u64;
            std::mem::swap(&mut self.current, &mut self.next);
            if condition(r, ball) {
                return Ok(r as u32);
            }
        }
        Err(GrowthError::NoSatisfyingRadius { vertex: u })
    }
}

fn rho1_condition(ln_n: f64) -> impl Fn(u64, u64) -> bool {
    move |r, ball| (r * ball) as f64 * (r as f64).ln() >= ln_n
}

fn rho2_condition(ln_n: f64) -> impl Fn(u64, u64) -> bool {
    move |r, ball| (r * ball) as f64 >= ln_n
}

/// Computes per-vertex `rho1`/`rho2` and the graph radii `R1`/`R2`.
pub fn growth_report(g: &Graph) -> Result<GrowthReport, GrowthError> {
    let n = g.vertex_count();
    let ln_n = (n as f64).ln();
    let mut scratch = RhoScratch::new(n);
    let mut rho1 = Vec::with_capacity(n);
    let mut rho2 = Vec::with_capacity(n);
    for u in 0..n as u32 {
        rho1.push(scratch.rho(g, u, rho1_condition(ln_n))?);
        rho2.push(scratch.rho(g, u, rho2_condition(ln_n))?);
    }
    let r1 = *rho1.iter().max().expect("nonempty graph");
    let r2 = *rho2.iter().max().expect("nonempty graph");
    Ok(GrowthReport {
        n,
        per_vertex_rho1: rho1,
        per_vertex_rho2: rho2,
        r1,
        r2,
    })
}

/// Smallest radius `r` with `r * |B_u^r| * ln r >= ln n` for every vertex.
pub fn compute_r1(g: &Graph) -> Result<u32, GrowthError> {
    let ln_n = (g.vertex_count() as f64).ln();
    let mut scratch = RhoScratch::new(g.vertex_count());
    let mut best = 1;
    for u in 0..g.vertex_count() as u32 {
        best = best.max(scratch.rho(g, u, rho1_condition(ln_n))?);
    }
    Ok(best)
}

/// Smallest radius `r` with `r * |B_u^r| >= ln n` for every vertex.
pub fn compute_r2(g: &Graph) -> Result<u32, GrowthError> {
    let ln_n = (g.vertex_count() as f64).ln();
    let mut scratch = RhoScratch::new(g.vertex_count());
    let mut best = 1;
    for u in 0..g.vertex_count() as u32 {
        best = best.max(scratch.rho(g, u, rho2_condition(ln_n))?);
    }
    Ok(best)
}

/// Quantile variant of `R1`; see [`GrowthReport::r1_gamma`].
pub fn compute_r1_gamma(g: &Graph, gamma: f64) -> Result<u32, GrowthError> {
    growth_report(g)?.r1_gamma(gamma)
}

/// Quantile variant of `R2`; see [`GrowthReport::r2_gamma`].
pub fn compute_r2_gamma(g: &Graph, gamma: f64) -> Result<u32, GrowthError> {
    growth_report(g)?.r2_gamma(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_cycle, gen_edgeless, gen_torus};

    #[test]
    fn cycle_radii_at_scale() {
        // ln(2^20) ~ 13.86; r=2 gives 2*5*ln2 ~ 6.93 (and 2*5 = 10), r=3
        // gives 3*7*ln3 ~ 23.1 (and 3*7 = 21).
        let g = gen_cycle(1 << 20).unwrap();
        assert_eq!(compute_r1(&g).unwrap(), 3);
        assert_eq!(compute_r2(&g).unwrap(), 3);
    }

    #[test]
    fn complete_graph_radii() {
        let g = gen_complete(100).unwrap();
        assert_eq!(compute_r1(&g).unwrap(), 2);
        assert_eq!(compute_r2(&g).unwrap(), 1);
    }

    #[test]
    fn single_vertex_is_degenerate() {
        let g = gen_edgeless(1).unwrap();
        assert_eq!(compute_r1(&g).unwrap(), 1);
        assert_eq!(compute_r2(&g).unwrap(), 1);
    }

    #[test]
    fn vertex_transitive_gamma_identity() {
        for g in [gen_cycle(64).unwrap(), gen_torus(&[8, 8]).unwrap()] {
            let report = growth_report(&g).unwrap();
            for gamma in [0.1, 0.3, 0.5] {
                assert_eq!(report.r1, report.r1_gamma(gamma).unwrap() + 1);
                assert_eq!(report.r2, report.r2_gamma(gamma).unwrap() + 1);
            }
        }
    }

    #[test]
    fn gamma_validation() {
        let report = growth_report(&gen_cycle(16).unwrap()).unwrap();
        assert!(report.r1_gamma(0.0).is_err());
        assert!(report.r1_gamma(0.6).is_err());
    }

    #[test]
    fn gamma_non_increasing() {
        // Mixed-radius graph: a path has larger rho at its endpoints.
        let g = crate::graph::gen_path(200).unwrap();
        let report = growth_report(&g).unwrap();
        let mut last = u32::MAX;
        for gamma in [0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
            let v = report.r2_gamma(gamma).unwrap();
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn gamma_matches_subset_brute_force() {
        // Direct check of the subset definition on a small cycle: the
        // largest r such that at least ceil(n^(1/2+gamma)) vertices still
        // fail the threshold at radius r.
        let g = gen_cycle(16).unwrap();
        let report = growth_report(&g).unwrap();
        let n = 16usize;
        for gamma in [0.1, 0.5] {
            let k = (n as f64).powf(0.5 + gamma).ceil() as usize;
            let ln_n = (n as f64).ln();
            let mut best = 0u32;
            for r in 1..=n as u64 {
                let failing = (0..n as u32)
                    .filter(|&u| {
                        let ball = g.ball_sizes(u, r as usize).unwrap()[r as usize] as u64;
                        ((r * ball) as f64) * (r as f64).ln() < ln_n
                    })
                    .count();
                if failing >= k {
                    best = r as u32;
                }
            }
            assert_eq!(report.r1_gamma(gamma).unwrap(), best);
        }
    }

    #[test]
    fn summary_serializes_with_gamma_keys() {
        let g = gen_cycle(64).unwrap();
        let summary = growth_report(&g).unwrap().summary(&[0.1, 0.5]).unwrap();
        let json = serde_json::to_string(&summary).unwrap();
        assert!(json.contains("\"r1_gamma\":{\"0.1\""));
        assert!(json.contains("\"n\":64"));
    }

    #[test]
    fn rho_matches_full_ball_profile() {
        // Early-terminated BFS must agree with radii read off full ball-size
        // profiles.
        for g in [
            gen_cycle(48).unwrap(),
            gen_torus(&[4, 6]).unwrap(),
            crate::graph::gen_path(33).unwrap(),
        ] {
            let n = g.vertex_count();
            let ln_n = (n as f64).ln();
            let report = growth_report(&g).unwrap();
            for u in 0..n as u32 {
                let profile = g.ball_sizes(u, n).unwrap();
                let rho1_ref = (1..=n as u64)
                    .find(|&r| {
                        (r * profile[r as usize] as u64) as f64 * (r as f64).ln() >= ln_n
                    })
                    .unwrap() as u32;
                let rho2_ref = (1..=n as u64)
                    .find(|&r| (r * profile[r as usize] as u64) as f64 >= ln_n)
                    .unwrap() as u32;
                assert_eq!(report.per_vertex_rho1[u as usize], rho1_ref);
                assert_eq!(report.per_vertex_rho2[u as usize], rho2_ref);
            }
        }
    }

    #[test]
    fn cycle_radii_stay_under_sqrt_log_caps() {
        for exp in 4..=16 {
            let n = 1usize << exp;
            let g = gen_cycle(n).unwrap();
            let ln_n = (n as f64).ln();
            let r1 = compute_r1(&g).unwrap() as f64;
            let r2 = compute_r2(&g).unwrap() as f64;
            assert!(r1 <= (ln_n / ln_n.ln()).sqrt().ceil() + 2.0);
            assert!(r2 <= ln_n.sqrt().ceil() + 2.0);
        }
    }

    #[test]
    fn ordering_of_r1_and_r2_depends_on_the_graph() {
        // Neither ordering is universal with natural logs: the complete
        // graph has R1 > R2 (the ln r factor kills r = 1), while a long
        // path has R1 < R2 at its endpoints (ln r > 1 helps r = 3).
        let complete = gen_complete(100).unwrap();
        assert!(compute_r1(&complete).unwrap() > compute_r2(&complete).unwrap());

        let path = crate::graph::gen_path(200_000).unwrap();
        let r1 = compute_r1(&path).unwrap();
        let r2 = compute_r2(&path).unwrap();
        assert!(r1 < r2, "expected R1 < R2 on the long path, got {r1} vs {r2}");
    }
}
