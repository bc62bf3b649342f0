//! The allocation processes.
//!
//! Local search allocation: each ball is born at a uniformly random vertex
//! and repeatedly moves to a neighbor of strictly smaller load — uniformly
//! among the minimum-load neighbors — until no neighbor is strictly
//! smaller, where it is placed. The 1-choice and d-choice processes ignore
//! the edge structure; the coupon-collector process covers vertices instead
//! of counting balls.
//!
//! Every source of randomness is an addressed draw from an [`RngPlan`], so a
//! run is a pure function of `(plan, parameters)` and two processes sharing
//! a plan consume identical randomness at identical addresses.

use crate::graph::Graph;
use crate::rng::RngPlan;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocError {
    #[error("blanket delta must exceed 1, got {0}")]
    InvalidDelta(f64),
    #[error("d-choice needs d >= 1")]
    InvalidChoiceCount,
    #[error("poisson mean must be positive, got {0}")]
    InvalidPoissonMean(f64),
    #[error("weight instrumentation only applies to the local search process")]
    WeightFnUnsupported,
    #[error("weight function has |mu(u) - mu(v)| > 1 on edge ({u}, {v})")]
    WeightNotSmooth { u: u32, v: u32 },
    #[error("weight function needs one value per vertex: got {got}, expected {expected}")]
    WeightLengthMismatch { got: usize, expected: usize },
    #[error("weight function is undefined on disconnected graphs (vertex {0} unreachable)")]
    WeightUnreachable(u32),
    #[error(
        "weight descent violated at ball {ball}: allocated {allocated} (weight {allocated_weight}) \
         from birthplace {birthplace} (weight {birthplace_weight})"
    )]
    WeightDescentViolation {
        ball: u64,
        birthplace: u32,
        birthplace_weight: i64,
        allocated: u32,
        allocated_weight: i64,
    },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// Per-vertex ball counts with the total cached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadVector {
    loads: Vec<u32>,
    total: u64,
}

impl LoadVector {
    pub fn zeros(n: usize) -> Self {
        LoadVector {
            loads: vec![0; n],
            total: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    #[inline]
    pub fn get(&self, v: u32) -> u32 {
        self.loads[v as usize]
    }

    #[inline]
    pub fn increment(&mut self, v: u32) {
        self.loads[v as usize] += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.loads
    }

    pub fn max_load(&self) -> u32 {
        self.loads.iter().copied().max().unwrap_or(0)
    }

    pub fn min_load(&self) -> u32 {
        self.loads.iter().copied().min().unwrap_or(0)
    }

    pub fn l1_distance(&self, other: &LoadVector) -> u64 {
        assert_eq!(self.len(), other.len());
        self.loads
            .iter()
            .zip(&other.loads)
            .map(|(&a, &b)| (a as i64 - b as i64).unsigned_abs())
            .sum()
    }

    /// First edge whose endpoint loads differ by more than 1, if any.
    pub fn smoothness_violation(&self, g: &Graph) -> Option<(u32, u32)> {
        g.edges().find(|&(u, v)| {
            (self.loads[u as usize] as i64 - self.loads[v as usize] as i64).abs() > 1
        })
    }
}

/// Integer vertex weights whose values differ by at most 1 across every
/// edge. Adding them to a load vector yields the weights that the
/// majorization couplings compare.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightFn {
    mu: Vec<i64>,
}

impl WeightFn {
    /// Validates the neighbor-difference condition on construction.
    pub fn new(g: &Graph, mu: Vec<i64>) -> Result<Self, AllocError> {
        if mu.len() != g.vertex_count() {
            return Err(AllocError::WeightLengthMismatch {
                got: mu.len(),
                expected: g.vertex_count(),
            });
        }
        for (u, v) in g.edges() {
            if (mu[u as usize] - mu[v as usize]).abs() > 1 {
                return Err(AllocError::WeightNotSmooth { u, v });
            }
        }
        Ok(WeightFn { mu })
    }

    pub fn zero(n: usize) -> Self {
        WeightFn { mu: vec![0; n] }
    }

    /// `mu(w) = d(v, w)`. Errors on disconnected graphs.
    pub fn distance_to(g: &Graph, v: u32) -> Result<Self, AllocError> {
        let dist = g.bfs_distances(v)?;
        let mu = dist
            .iter()
            .enumerate()
            .map(|(w, &d)| {
                if d == u32::MAX {
                    Err(AllocError::WeightUnreachable(w as u32))
                } else {
                    Ok(d as i64)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WeightFn { mu })
    }

    /// `mu(w) = -d(v, w)`. Errors on disconnected graphs.
    pub fn negative_distance_to(g: &Graph, v: u32) -> Result<Self, AllocError> {
        let positive = Self::distance_to(g, v)?;
        Ok(WeightFn {
            mu: positive.mu.iter().map(|&x| -x).collect(),
        })
    }

    #[inline]
    pub fn value(&self, v: u32) -> i64 {
        self.mu[v as usize]
    }

    pub fn values(&self) -> &[i64] {
        &self.mu
    }

    #[inline]
    pub fn weight(&self, loads: &LoadVector, v: u32) -> i64 {
        loads.get(v) as i64 + self.mu[v as usize]
    }

    pub fn weights(&self, loads: &LoadVector) -> Vec<i64> {
        self.mu
            .iter()
            .enumerate()
            .map(|(v, &m)| loads.get(v as u32) as i64 + m)
            .collect()
    }
}

/// When a run ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StopRule {
    /// Allocate exactly this many balls.
    Balls(u64),
    /// Run until every vertex has load >= 1 (capped, see [`cover_cap`]).
    UntilCover,
    /// Run until every load is strictly inside `(m/(delta n), delta m/n)`.
    UntilBlanket(f64),
}

/// Ball cap for open-ended stop rules, `max(ceil(10 n ln n), 2n)`; runs
/// that exceed it report the metric as not reached.
pub fn cover_cap(n: usize) -> u64 {
    let soft = (10.0 * n as f64 * (n as f64).ln()).ceil() as u64;
    soft.max(2 * n as u64)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions<'a> {
    /// Verify per ball that allocation never moves to a larger weight.
    pub mu: Option<&'a WeightFn>,
    /// Blanket thresholds to record (each > 1).
    pub deltas: Vec<f64>,
    /// Record one trace entry per ball.
    pub trace: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub ball: u64,
    pub birthplace: u32,
    pub allocated: u32,
    pub path_length: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlanketTime {
    pub delta: f64,
    /// First ball count with every load strictly inside the interval;
    /// `None` when the run ended first.
    pub time: Option<u64>,
}

/// Outcome of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    /// Balls actually allocated.
    pub balls: u64,
    pub final_loads: LoadVector,
    pub max_load: u32,
    /// First ball count at which every vertex had load >= 1, if reached.
    pub cover_time: Option<u64>,
    pub blanket_times: Vec<BlanketTime>,
    pub trace: Option<Vec<TraceEntry>>,
}

impl RunRecord {
    pub fn min_load(&self) -> u32 {
        self.final_loads.min_load()
    }

    pub fn blanket_time(&self, delta: f64) -> Option<u64> {
        self.blanket_times
            .iter()
            .find(|b| b.delta == delta)
            .and_then(|b| b.time)
    }

    /// Trace rows as CSV with columns `ball,birthplace,allocated,path_length`.
    pub fn trace_csv(&self) -> Option<String> {
        let trace = self.trace.as_ref()?;
        let mut out = String::from("ball,birthplace,allocated,path_length\n");
        for t in trace {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t.ball, t.birthplace, t.allocated, t.path_length
            ));
        }
        Some(out)
    }
}

/// One local search: from `birthplace`, follow strictly smaller loads to the
/// first local minimum. `tie_break` picks among the minimum-load neighbors.
/// Returns the allocation vertex and the number of hops. The caller
/// increments the load.
pub fn local_search_step(
    g: &Graph,
    loads: &LoadVector,
    birthplace: u32,
    tie_break: impl FnMut(u32, &[u32]) -> u32,
) -> (u32, u32) {
    let mut scratch = Vec::new();
    local_search_step_scratch(g, loads, birthplace, tie_break, &mut scratch)
}

fn local_search_step_scratch(
    g: &Graph,
    loads: &LoadVector,
    birthplace: u32,
    mut tie_break: impl FnMut(u32, &[u32]) -> u32,
    candidates: &mut Vec<u32>,
) -> (u32, u32) {
    let mut at = birthplace;
    let mut hops = 0u32;
    loop {
        let here = loads.get(at);
        let mut best = u32::MAX;
        for &w in g.neighbors(at) {
            best = best.min(loads.get(w));
        }
        if best >= here {
            return (at, hops);
        }
        candidates.clear();
        candidates.extend(g.neighbors(at).iter().copied().filter(|&w| loads.get(w) == best));
        let next = if candidates.len() == 1 {
            candidates[0]
        } else {
            tie_break(at, candidates)
        };
        debug_assert!(candidates.contains(&next));
        at = next;
        hops += 1;
    }
}

/// Incremental min/max/coverage tracking; every update is O(1) via
/// per-level counts.
struct RunState {
    loads: LoadVector,
    level_counts: Vec<u64>,
    max: u32,
    min: u32,
    uncovered: usize,
}

impl RunState {
    fn new(n: usize) -> Self {
        RunState {
            loads: LoadVector::zeros(n),
            level_counts: vec![n as u64],
            max: 0,
            min: 0,
            uncovered: n,
        }
    }

    fn add_ball(&mut self, v: u32) {
        let level = self.loads.get(v);
        self.loads.increment(v);
        self.level_counts[level as usize] -= 1;
        if self.level_counts.len() == level as usize + 1 {
            self.level_counts.push(0);
        }
        self.level_counts[level as usize + 1] += 1;
        if level + 1 > self.max {
            self.max = level + 1;
        }
        if level == 0 {
            self.uncovered -= 1;
        }
        if level == self.min && self.level_counts[level as usize] == 0 {
            self.min = level + 1;
        }
    }

    fn covered(&self) -> bool {
        self.uncovered == 0
    }

    /// Every load strictly inside `(m/(delta n), delta m/n)`.
    fn in_blanket(&self, m: u64, delta: f64) -> bool {
        let n = self.loads.len() as f64;
        let lower = m as f64 / (delta * n);
        let upper = delta * m as f64 / n;
        (self.min as f64) > lower && (self.max as f64) < upper
    }
}

fn validate_deltas(stop: StopRule, opts: &RunOptions) -> Result<Vec<f64>, AllocError> {
    let mut deltas = opts.deltas.clone();
    if let StopRule::UntilBlanket(d) = stop {
        if !deltas.contains(&d) {
            deltas.push(d);
        }
    }
    for &d in &deltas {
        if !(d > 1.0) {
            return Err(AllocError::InvalidDelta(d));
        }
    }
    Ok(deltas)
}

/// Shared run engine: `place` maps a ball index and the current loads to
/// `(birthplace, allocated vertex, path length)`.
fn run_process(
    g: &Graph,
    stop: StopRule,
    opts: &RunOptions,
    mut place: impl FnMut(u64, &LoadVector, &mut Vec<u32>) -> (u32, u32, u32),
) -> Result<RunRecord, AllocError> {
    let n = g.vertex_count();
    let deltas = validate_deltas(stop, opts)?;
    let cap = match stop {
        StopRule::Balls(m) => m,
        StopRule::UntilCover | StopRule::UntilBlanket(_) => cover_cap(n),
    };
    let mut state = RunState::new(n);
    let mut scratch = Vec::new();
    let mut cover_time = None;
    let mut blanket: Vec<BlanketTime> = deltas
        .iter()
        .map(|&delta| BlanketTime { delta, time: None })
        .collect();
    let mut trace = opts.trace.then(Vec::new);
    let mut balls = 0u64;

    for ball in 1..=cap {
        let (birthplace, allocated, path_length) = place(ball, &state.loads, &mut scratch);
        if let Some(mu) = opts.mu {
            let bw = mu.weight(&state.loads, birthplace);
            let aw = mu.weight(&state.loads, allocated);
            if aw > bw {
                return Err(AllocError::WeightDescentViolation {
                    ball,
                    birthplace,
                    birthplace_weight: bw,
                    allocated,
                    allocated_weight: aw,
                });
            }
        }
        state.add_ball(allocated);
        balls = ball;
        if let Some(t) = trace.as_mut() {
            t.push(TraceEntry {
                ball,
                birthplace,
                allocated,
                path_length,
            });
        }
        if cover_time.is_none() && state.covered() {
            cover_time = Some(ball);
        }
        for b in blanket.iter_mut() {
            if b.time.is_none() && state.in_blanket(ball, b.delta) {
                b.time = Some(ball);
            }
        }
        match stop {
            StopRule::Balls(_) => {}
            StopRule::UntilCover => {
                if cover_time.is_some() {
                    break;
                }
            }
            StopRule::UntilBlanket(d) => {
                let reached = blanket
                    .iter()
                    .any(|b| b.delta == d && b.time.is_some());
                if reached {
                    break;
                }
            }
        }
    }

    Ok(RunRecord {
        n,
        balls,
        max_load: state.max,
        cover_time,
        blanket_times: blanket,
        trace,
        final_loads: state.loads,
    })
}

/// Runs the local search allocation.
///
/// Birthplaces are uniform per ball from the plan; tie-breaks use the plan's
/// per-`(ball, vertex, neighbor)` priorities. With `opts.mu` set, every ball
/// is checked to never be allocated at a pre-allocation weight above its
/// birthplace's.
pub fn run_local_search(
    g: &Graph,
    stop: StopRule,
    plan: &RngPlan,
    opts: &RunOptions,
) -> Result<RunRecord, AllocError> {
    let n = g.vertex_count();
    run_process(g, stop, opts, |ball, loads, scratch| {
        let birthplace = plan.birthplace(ball, n);
        let (allocated, path_length) = local_search_step_scratch(
            g,
            loads,
            birthplace,
            |at, cands| plan.pick_by_priority(ball, at, cands),
            scratch,
        );
        // Each hop strictly decreases the load, so the walk length is
        // bounded by the birthplace load (and revisits are impossible).
        debug_assert!(path_length <= loads.get(birthplace));
        (birthplace, allocated, path_length)
    })
}

/// Runs the d-choice process: each ball picks `d` bins uniformly at random
/// and joins the least loaded, ties uniform. Graph edges are ignored.
pub fn run_d_choice(
    g: &Graph,
    stop: StopRule,
    d: u32,
    plan: &RngPlan,
    opts: &RunOptions,
) -> Result<RunRecord, AllocError> {
    if d < 1 {
        return Err(AllocError::InvalidChoiceCount);
    }
    if opts.mu.is_some() {
        return Err(AllocError::WeightFnUnsupported);
    }
    let n = g.vertex_count();
    run_process(g, stop, opts, |ball, loads, scratch| {
        scratch.clear();
        for slot in 0..d {
            let pick = plan.choice(ball, slot, n);
            if !scratch.contains(&pick) {
                scratch.push(pick);
            }
        }
        let best = scratch.iter().map(|&v| loads.get(v)).min().unwrap();
        scratch.retain(|&v| loads.get(v) == best);
        let allocated = if scratch.len() == 1 {
            scratch[0]
        } else {
            plan.pick_by_priority(ball, u32::MAX, scratch)
        };
        (allocated, allocated, 0)
    })
}

/// 1-choice process: every ball lands on its uniform birthplace.
pub fn run_one_choice(
    g: &Graph,
    stop: StopRule,
    plan: &RngPlan,
    opts: &RunOptions,
) -> Result<RunRecord, AllocError> {
    run_d_choice(g, stop, 1, plan, opts)
}

/// Which process a Poissonized run wraps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoissonTarget {
    LocalSearch,
    OneChoice,
    DChoice(u32),
}

/// Poissonized run: the ball count is Poisson with mean `mean_m`, then the
/// chosen process allocates that many balls.
pub fn run_poissonized(
    g: &Graph,
    target: PoissonTarget,
    mean_m: f64,
    plan: &RngPlan,
    opts: &RunOptions,
) -> Result<RunRecord, AllocError> {
    if !(mean_m > 0.0) || !mean_m.is_finite() {
        return Err(AllocError::InvalidPoissonMean(mean_m));
    }
    let count = plan.poisson_count(mean_m);
    let stop = StopRule::Balls(count);
    match target {
        PoissonTarget::LocalSearch => run_local_search(g, stop, plan, opts),
        PoissonTarget::OneChoice => run_one_choice(g, stop, plan, opts),
        PoissonTarget::DChoice(d) => run_d_choice(g, stop, d, plan, opts),
    }
}

/// One round of the coupon-collector covering process; returns the vertex
/// covered this round, if any. Round indices share the birthplace and
/// tie-break address space with ball indices, which is what couples this
/// process to the local search.
pub(crate) fn coupon_round(
    g: &Graph,
    covered: &mut [bool],
    round: u64,
    plan: &RngPlan,
    scratch: &mut Vec<u32>,
) -> Option<u32> {
    let u = plan.birthplace(round, covered.len());
    if !covered[u as usize] {
        covered[u as usize] = true;
        return Some(u);
    }
    scratch.clear();
    scratch.extend(
        g.neighbors(u)
            .iter()
            .copied()
            .filter(|&w| !covered[w as usize]),
    );
    if scratch.is_empty() {
        return None;
    }
    let w = if scratch.len() == 1 {
        scratch[0]
    } else {
        plan.pick_by_priority(round, u, scratch)
    };
    covered[w as usize] = true;
    Some(w)
}

/// Outcome of a coupon-collector run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouponRecord {
    pub n: usize,
    /// Rounds until full coverage, `None` if the cap was hit first.
    pub rounds_to_cover: Option<u64>,
    pub rounds_run: u64,
    pub covered: Vec<bool>,
}

/// Runs the coupon-collector process until full coverage (capped).
///
/// Each round picks a uniform vertex; an uncovered pick covers itself,
/// a covered pick covers a uniformly random uncovered neighbor when one
/// exists. The neighbor choice takes the highest-priority uncovered
/// neighbor under the plan's per-round ranking of all neighbors.
pub fn run_coupon_collector(g: &Graph, plan: &RngPlan) -> CouponRecord {
    let n = g.vertex_count();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut scratch = Vec::new();
    let cap = cover_cap(n);
    let mut rounds_run = 0;
    for round in 1..=cap {
        rounds_run = round;
        if coupon_round(g, &mut covered, round, plan, &mut scratch).is_some() {
            remaining -= 1;
        }
        if remaining == 0 {
            return CouponRecord {
                n,
                rounds_to_cover: Some(round),
                rounds_run: round,
                covered,
            };
        }
    }
    CouponRecord {
        n,
        rounds_to_cover: None,
        rounds_run,
        covered,
    }
}
