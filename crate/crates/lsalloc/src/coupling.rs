//! Exact couplings between allocation processes, runnable as per-step
//! checks.
//!
//! All couplings share one [`RngPlan`]: both sides read the same tie-break
//! priorities at the same `(ball, vertex, neighbor)` addresses and, where
//! applicable, the same birthplaces. That makes each invariant below hold
//! deterministically (probability 1), not just in distribution:
//!
//! * **Majorization**: run local search and 1-choice in rank-coupled
//!   lockstep; the 1-choice weight vector majorizes the local search weight
//!   vector after every ball.
//! * **Birthplace swap**: changing the birthplace of one ball moves the
//!   final load vector by L1 distance at most 2.
//! * **Ball removal**: removing one ball (realized by rebirthing it on an
//!   added isolated vertex) moves the load vector by exactly 1.
//! * **Coupon subset**: the coupon-collector covered set stays inside the
//!   local search loaded set round by round.

use crate::alloc::{self, LoadVector, WeightFn};
use crate::graph::Graph;
use crate::rng::RngPlan;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("vectors have different sums: {0} vs {1}")]
    SumMismatch(i64, i64),
    #[error("ball index {i} out of range 1..={k}")]
    BallIndexOutOfRange { i: usize, k: usize },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Alloc(#[from] crate::alloc::AllocError),
}

/// True iff every prefix sum of `a`'s descending sort is at least the
/// corresponding prefix sum of `b`'s. Requires equal lengths and sums.
pub fn majorizes(a: &[i64], b: &[i64]) -> Result<bool, CouplingError> {
    if a.len() != b.len() {
        return Err(CouplingError::LengthMismatch(a.len(), b.len()));
    }
    let (sa, sb) = (a.iter().sum::<i64>(), b.iter().sum::<i64>());
    if sa != sb {
        return Err(CouplingError::SumMismatch(sa, sb));
    }
    let mut da = a.to_vec();
    let mut db = b.to_vec();
    da.sort_unstable_by(|x, y| y.cmp(x));
    db.sort_unstable_by(|x, y| y.cmp(x));
    let (mut pa, mut pb) = (0i64, 0i64);
    for (x, y) in da.iter().zip(&db) {
        pa += x;
        pb += y;
        if pa < pb {
            return Ok(false);
        }
    }
    Ok(true)
}

/// State snapshot of the first step at which majorization failed.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MajorizationViolation {
    pub ball: u64,
    pub rank: usize,
    pub local_search_weights: Vec<i64>,
    pub one_choice_weights: Vec<i64>,
}

/// Vertex ids ordered by descending weight, ties by ascending id; returns
/// the vertex at `rank` (0-based).
fn vertex_at_rank(weights: &[i64], rank: usize) -> u32 {
    let mut order: Vec<u32> = (0..weights.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        weights[b as usize]
            .cmp(&weights[a as usize])
            .then(a.cmp(&b))
    });
    order[rank]
}

/// Runs local search and 1-choice in rank-coupled lockstep for `m` balls
/// and checks after every ball that the 1-choice weights majorize the
/// local search weights. Returns the first violation, `None` when the
/// invariant held throughout (the expected outcome).
///
/// Each step draws one uniform rank; both processes birth their ball at
/// the vertex holding that rank in their *own* descending weight order, so
/// marginally every birthplace is still uniform. A naive shared-birthplace
/// coupling would not majorize.
pub fn coupled_majorization_run(
    g: &Graph,
    mu: &WeightFn,
    m: u64,
    plan: &RngPlan,
) -> Result<Option<MajorizationViolation>, CouplingError> {
    let n = g.vertex_count();
    let mut ls_loads = LoadVector::zeros(n);
    let mut oc_loads = LoadVector::zeros(n);
    for ball in 1..=m {
        let rank = plan.rank(ball, n);
        let ls_weights = mu.weights(&ls_loads);
        let oc_weights = mu.weights(&oc_loads);
        let ls_birth = vertex_at_rank(&ls_weights, rank);
        let oc_birth = vertex_at_rank(&oc_weights, rank);
        let (ls_alloc, _) = alloc::local_search_step(g, &ls_loads, ls_birth, |at, cands| {
            plan.pick_by_priority(ball, at, cands)
        });
        ls_loads.increment(ls_alloc);
        oc_loads.increment(oc_birth);
        if !majorizes(&mu.weights(&oc_loads), &mu.weights(&ls_loads))? {
            return Ok(Some(MajorizationViolation {
                ball,
                rank,
                local_search_weights: mu.weights(&ls_loads),
                one_choice_weights: mu.weights(&oc_loads),
            }));
        }
    }
    Ok(None)
}

/// Runs two local searches that differ only in the birthplace of ball `i`
/// (1-based) and share all tie-break priorities; returns the L1 distance of
/// the final load vectors. The coupling guarantees a result of at most 2.
pub fn coupled_lipschitz_run(
    g: &Graph,
    birthplaces: &[u32],
    i: usize,
    alt_birthplace: u32,
    plan: &RngPlan,
) -> Result<u64, CouplingError> {
    let k = birthplaces.len();
    if i == 0 || i > k {
        return Err(CouplingError::BallIndexOutOfRange { i, k });
    }
    let run = |swap: Option<u32>| -> LoadVector {
        let mut loads = LoadVector::zeros(g.vertex_count());
        for (idx, &birth) in birthplaces.iter().enumerate() {
            let ball = idx as u64 + 1;
            let birth = match swap {
                Some(alt) if idx + 1 == i => alt,
                _ => birth,
            };
            let (v, _) = alloc::local_search_step(g, &loads, birth, |at, cands| {
                plan.pick_by_priority(ball, at, cands)
            });
            loads.increment(v);
        }
        loads
    };
    let original = run(None);
    let swapped = run(Some(alt_birthplace));
    Ok(original.l1_distance(&swapped))
}

/// Compares a k-ball run against the same run with ball `i` removed,
/// realized by rebirthing ball `i` on an added isolated vertex; returns the
/// L1 distance over the original vertices. The coupling guarantees
/// exactly 1.
pub fn coupled_removal_run(
    g: &Graph,
    birthplaces: &[u32],
    i: usize,
    plan: &RngPlan,
) -> Result<u64, CouplingError> {
    let k = birthplaces.len();
    if i == 0 || i > k {
        return Err(CouplingError::BallIndexOutOfRange { i, k });
    }
    let extended = g.with_isolated_vertex();
    let isolated = g.vertex_count() as u32;
    let run = |swap: bool| -> LoadVector {
        let mut loads = LoadVector::zeros(extended.vertex_count());
        for (idx, &birth) in birthplaces.iter().enumerate() {
            let ball = idx as u64 + 1;
            let birth = if swap && idx + 1 == i { isolated } else { birth };
            let (v, _) = alloc::local_search_step(&extended, &loads, birth, |at, cands| {
                plan.pick_by_priority(ball, at, cands)
            });
            loads.increment(v);
        }
        loads
    };
    let full = run(false);
    let removed = run(true);
    let l1: u64 = (0..g.vertex_count() as u32)
        .map(|v| (full.get(v) as i64 - removed.get(v) as i64).unsigned_abs())
        .sum();
    Ok(l1)
}

/// State snapshot of the first round at which the covered set escaped the
/// loaded set.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SubsetViolation {
    pub round: u64,
    pub vertex: u32,
    pub covered: Vec<u32>,
    pub loads: Vec<u32>,
}

/// Outcome of a coupled coupon-collector / local-search run.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CouponCouplingReport {
    pub rounds: u64,
    /// Round at which the coupon process reached full coverage, if it did.
    pub coupon_cover_time: Option<u64>,
    /// Ball at which the local search reached full coverage, if it did.
    pub local_search_cover_time: Option<u64>,
    pub violation: Option<SubsetViolation>,
}

/// Runs the coupon-collector process and the local search in lockstep with
/// shared birthplaces and shared neighbor rankings, checking after every
/// round that every covered vertex is loaded.
pub fn coupled_coupon_run(g: &Graph, rounds: u64, plan: &RngPlan) -> CouponCouplingReport {
    let n = g.vertex_count();
    let mut covered = vec![false; n];
    let mut loads = LoadVector::zeros(n);
    let mut uncovered = n;
    let mut unloaded = n;
    let mut coupon_cover_time = None;
    let mut local_search_cover_time = None;
    let mut scratch = Vec::new();
    for round in 1..=rounds {
        let newly_covered = alloc::coupon_round(g, &mut covered, round, plan, &mut scratch);
        if newly_covered.is_some() {
            uncovered -= 1;
            if uncovered == 0 && coupon_cover_time.is_none() {
                coupon_cover_time = Some(round);
            }
        }
        let birth = plan.birthplace(round, n);
        let (v, _) = alloc::local_search_step(g, &loads, birth, |at, cands| {
            plan.pick_by_priority(round, at, cands)
        });
        if loads.get(v) == 0 {
            unloaded -= 1;
            if unloaded == 0 && local_search_cover_time.is_none() {
                local_search_cover_time = Some(round);
            }
        }
        loads.increment(v);
        // Loads never decrease, so checking the newly covered vertex each
        // round maintains the full subset invariant.
        if let Some(w) = newly_covered {
            if loads.get(w) == 0 {
                return CouponCouplingReport {
                    rounds: round,
                    coupon_cover_time,
                    local_search_cover_time,
                    violation: Some(SubsetViolation {
                        round,
                        vertex: w,
                        covered: (0..n as u32).filter(|&x| covered[x as usize]).collect(),
                        loads: loads.as_slice().to_vec(),
                    }),
                };
            }
        }
    }
    CouponCouplingReport {
        rounds,
        coupon_cover_time,
        local_search_cover_time,
        violation: None,
    }
}

/// Summary of a randomized suite of coupling checks; serializes to JSON for
/// the command-line checkers. `violations` is expected to stay empty.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport<V: Serialize> {
    pub cases: u64,
    pub violations: Vec<V>,
}

impl<V: Serialize> SuiteReport<V> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LipschitzViolation {
    pub case: u64,
    pub balls: u64,
    pub swapped_ball: usize,
    pub alt_birthplace: u32,
    pub l1_distance: u64,
}

/// Randomized birthplace-swap cases: k balls, a uniformly chosen ball gets
/// a uniformly chosen alternative birthplace; flags any case with L1 > 2.
pub fn lipschitz_suite(
    g: &Graph,
    max_balls: u64,
    cases: u64,
    seed: u64,
) -> Result<SuiteReport<LipschitzViolation>, CouplingError> {
    let n = g.vertex_count();
    let mut violations = Vec::new();
    for case in 0..cases {
        let plan = RngPlan::new(seed).for_trial(case);
        let k = 1 + plan.param(0, max_balls as usize) as usize;
        let birthplaces: Vec<u32> = (0..k).map(|j| plan.birthplace(j as u64 + 1, n)).collect();
        let i = 1 + plan.param(1, k) as usize;
        let alt = plan.param(2, n);
        let l1 = coupled_lipschitz_run(g, &birthplaces, i, alt, &plan)?;
        if l1 > 2 {
            violations.push(LipschitzViolation {
                case,
                balls: k as u64,
                swapped_ball: i,
                alt_birthplace: alt,
                l1_distance: l1,
            });
        }
    }
    Ok(SuiteReport { cases, violations })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RemovalViolation {
    pub case: u64,
    pub balls: u64,
    pub removed_ball: usize,
    pub l1_distance: u64,
}

/// Randomized ball-removal cases; flags any case where the L1 distance is
/// not exactly 1.
pub fn removal_suite(
    g: &Graph,
    max_balls: u64,
    cases: u64,
    seed: u64,
) -> Result<SuiteReport<RemovalViolation>, CouplingError> {
    let n = g.vertex_count();
    let mut violations = Vec::new();
    for case in 0..cases {
        let plan = RngPlan::new(seed).for_trial(case);
        let k = 1 + plan.param(0, max_balls as usize) as usize;
        let birthplaces: Vec<u32> = (0..k).map(|j| plan.birthplace(j as u64 + 1, n)).collect();
        let i = 1 + plan.param(1, k) as usize;
        let l1 = coupled_removal_run(g, &birthplaces, i, &plan)?;
        if l1 != 1 {
            violations.push(RemovalViolation {
                case,
                balls: k as u64,
                removed_ball: i,
                l1_distance: l1,
            });
        }
    }
    Ok(SuiteReport { cases, violations })
}

/// Randomized rank-coupled majorization cases.
pub fn majorization_suite(
    g: &Graph,
    mu: &WeightFn,
    balls: u64,
    cases: u64,
    seed: u64,
) -> Result<SuiteReport<MajorizationViolation>, CouplingError> {
    let mut violations = Vec::new();
    for case in 0..cases {
        let plan = RngPlan::new(seed).for_trial(case);
        if let Some(v) = coupled_majorization_run(g, mu, balls, &plan)? {
            violations.push(v);
        }
    }
    Ok(SuiteReport { cases, violations })
}

/// Randomized coupon-subset cases.
pub fn coupon_suite(
    g: &Graph,
    rounds: u64,
    cases: u64,
    seed: u64,
) -> Result<SuiteReport<SubsetViolation>, CouplingError> {
    let mut violations = Vec::new();
    for case in 0..cases {
        let plan = RngPlan::new(seed).for_trial(case);
        let report = coupled_coupon_run(g, rounds, &plan);
        if let Some(v) = report.violation {
            violations.push(v);
        }
    }
    Ok(SuiteReport { cases, violations })
}
