//! Multi-trial measurement over graph grids.
//!
//! A sweep runs one process over a grid of graph specs, aggregates the
//! requested metrics across seeded trials, and attaches the growth radii of
//! each graph so metric columns can be normalized (`max_load / R1`,
//! `cover_time / (R2 n)`). Ratio band checks turn scaling claims into
//! pass/fail: across a grid, the normalized means must stay within a
//! bounded multiplicative spread.
//!
//! Everything is deterministic per master seed: grid points derive
//! independent seeds from `(seed, grid index)`, trials from the trial
//! index. Re-running a sweep reproduces every output byte.

use crate::alloc::{self, RunOptions, StopRule};
use crate::growth;
use crate::rng::{derive_seed, RngPlan};
use crate::specs::{GraphSpec, ProcessSpec};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error(transparent)]
    Spec(#[from] crate::specs::SpecError),
    #[error(transparent)]
    Growth(#[from] crate::growth::GrowthError),
    #[error(transparent)]
    Alloc(#[from] crate::alloc::AllocError),
    #[error("band check needs at least 2 grid points with data, found {0}")]
    InsufficientPoints(usize),
    #[error("zero denominator in band check at {0}")]
    ZeroDenominator(String),
    #[error("no rows for metric {0:?}")]
    MissingMetric(String),
    #[error("csv error: {0}")]
    Csv(String),
}

/// How many balls each trial allocates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BallBudget {
    /// Exactly this many balls.
    Fixed(u64),
    /// `ceil(c * n)` balls on a graph with n vertices.
    PerVertex(f64),
    /// Until every vertex is covered (capped, see [`alloc::cover_cap`]).
    UntilCover,
}

impl BallBudget {
    pub fn stop_rule(&self, n: usize) -> StopRule {
        match self {
            BallBudget::Fixed(m) => StopRule::Balls(*m),
            BallBudget::PerVertex(c) => StopRule::Balls((c * n as f64).ceil() as u64),
            BallBudget::UntilCover => StopRule::UntilCover,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Metric {
    MaxLoad,
    MinLoad,
    CoverTime,
    Blanket(f64),
}

impl Metric {
    pub fn name(&self) -> String {
        match self {
            Metric::MaxLoad => "max_load".to_string(),
            Metric::MinLoad => "min_load".to_string(),
            Metric::CoverTime => "cover_time".to_string(),
            Metric::Blanket(d) => format!("blanket:{d}"),
        }
    }

    pub fn parse(s: &str) -> Result<Metric, ExperimentError> {
        match s {
            "max_load" => Ok(Metric::MaxLoad),
            "min_load" => Ok(Metric::MinLoad),
            "cover_time" => Ok(Metric::CoverTime),
            other => {
                if let Some(d) = other.strip_prefix("blanket:") {
                    let delta: f64 = d
                        .parse()
                        .map_err(|_| ExperimentError::Config(format!("bad blanket delta {d:?}")))?;
                    Ok(Metric::Blanket(delta))
                } else {
                    Err(ExperimentError::Config(format!("unknown metric {other:?}")))
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub points: Vec<GraphSpec>,
    pub process: ProcessSpec,
    pub budget: BallBudget,
    pub trials: u32,
    pub seed: u64,
    pub metrics: Vec<Metric>,
}

/// One aggregated metric at one grid point.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub params: String,
    pub process: String,
    pub metric: String,
    /// Aggregates over the trials where the metric was reached; empty when
    /// no trial reached it.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub r1: u32,
    pub r2: u32,
    /// `mean / R1` for max_load, `mean / (R2 n)` for cover and blanket
    /// times.
    pub normalized: Option<f64>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV with the fixed column set
    /// `family,n,params,process,metric,mean,std,min,max,r1,r2,normalized`.
    pub fn to_csv(&self) -> Result<String, ExperimentError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer
                .serialize(row)
                .map_err(|e| ExperimentError::Csv(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| ExperimentError::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("rows serialize")
    }
}

fn validate(config: &SweepConfig) -> Result<(), ExperimentError> {
    if config.points.is_empty() {
        return Err(ExperimentError::Config("empty grid".into()));
    }
    if config.trials < 1 {
        return Err(ExperimentError::Config("trials must be >= 1".into()));
    }
    if config.metrics.is_empty() {
        return Err(ExperimentError::Config("no metrics requested".into()));
    }
    if matches!(config.process, ProcessSpec::Poisson { .. })
        && matches!(config.budget, BallBudget::UntilCover)
    {
        return Err(ExperimentError::Config(
            "poissonized runs need a ball budget for the mean".into(),
        ));
    }
    if matches!(config.process, ProcessSpec::Coupon) {
        let bad = config
            .metrics
            .iter()
            .any(|m| !matches!(m, Metric::CoverTime));
        if bad {
            return Err(ExperimentError::Config(
                "the coupon process only yields cover_time".into(),
            ));
        }
    }
    Ok(())
}

/// Per-trial metric samples; `None` marks a metric the trial did not reach.
fn run_trial(
    g: &crate::graph::Graph,
    process: &ProcessSpec,
    stop: StopRule,
    deltas: &[f64],
    metrics: &[Metric],
    plan: &RngPlan,
) -> Result<Vec<Option<f64>>, ExperimentError> {
    if matches!(process, ProcessSpec::Coupon) {
        let rec = alloc::run_coupon_collector(g, plan);
        return Ok(metrics
            .iter()
            .map(|_| rec.rounds_to_cover.map(|r| r as f64))
            .collect());
    }
    let opts = RunOptions {
        deltas: deltas.to_vec(),
        ..Default::default()
    };
    let record = match process {
        ProcessSpec::LocalSearch => alloc::run_local_search(g, stop, plan, &opts)?,
        ProcessSpec::OneChoice => alloc::run_one_choice(g, stop, plan, &opts)?,
        ProcessSpec::DChoice { d } => alloc::run_d_choice(g, stop, *d, plan, &opts)?,
        ProcessSpec::Poisson { inner } => {
            let mean = match stop {
                StopRule::Balls(m) => m as f64,
                _ => unreachable!("validated"),
            };
            let target = match **inner {
                ProcessSpec::LocalSearch => alloc::PoissonTarget::LocalSearch,
                ProcessSpec::OneChoice => alloc::PoissonTarget::OneChoice,
                ProcessSpec::DChoice { d } => alloc::PoissonTarget::DChoice(d),
                _ => unreachable!("validated at parse time"),
            };
            alloc::run_poissonized(g, target, mean, plan, &opts)?
        }
        ProcessSpec::Coupon => unreachable!("handled above"),
    };
    Ok(metrics
        .iter()
        .map(|m| match m {
            Metric::MaxLoad => Some(record.max_load as f64),
            Metric::MinLoad => Some(record.min_load() as f64),
            Metric::CoverTime => record.cover_time.map(|c| c as f64),
            Metric::Blanket(d) => record.blanket_time(*d).map(|b| b as f64),
        })
        .collect())
}

#[cfg(feature = "parallel")]
fn map_trials<T: Send>(
    trials: u32,
    f: impl Fn(u32) -> Result<T, ExperimentError> + Sync + Send,
) -> Result<Vec<T>, ExperimentError> {
    use rayon::prelude::*;
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_trials<T: Send>(
    trials: u32,
    f: impl Fn(u32) -> Result<T, ExperimentError> + Sync + Send,
) -> Result<Vec<T>, ExperimentError> {
    (0..trials).map(f).collect()
}

fn stats(samples: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    if samples.is_empty() {
        return (None, None, None, None);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = if samples.len() < 2 {
        0.0
    } else {
        (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (Some(mean), Some(std), Some(min), Some(max))
}

/// Runs every grid point of the sweep. Trials run concurrently; output is
/// deterministic per seed. Progress goes to standard error.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, ExperimentError> {
    validate(config)?;
    let deltas: Vec<f64> = config
        .metrics
        .iter()
        .filter_map(|m| match m {
            Metric::Blanket(d) => Some(*d),
            _ => None,
        })
        .collect();
    let mut rows = Vec::new();
    for (idx, spec) in config.points.iter().enumerate() {
        let point_seed = derive_seed(config.seed, idx as u64);
        let g = spec.build(point_seed)?;
        let n = g.vertex_count();
        let report = growth::growth_report(&g)?;
        let stop = config.budget.stop_rule(n);
        let samples: Vec<Vec<Option<f64>>> = map_trials(config.trials, |t| {
            let plan = RngPlan::new(point_seed).for_trial(t as u64);
            run_trial(&g, &config.process, stop, &deltas, &config.metrics, &plan)
        })?;
        for (mi, metric) in config.metrics.iter().enumerate() {
            let reached: Vec<f64> = samples.iter().filter_map(|s| s[mi]).collect();
            let (mean, std, min, max) = stats(&reached);
            let normalized = mean.and_then(|m| match metric {
                Metric::MaxLoad => Some(m / report.r1 as f64),
                Metric::CoverTime | Metric::Blanket(_) => {
                    Some(m / (report.r2 as f64 * n as f64))
                }
                Metric::MinLoad => None,
            });
            rows.push(SweepRow {
                family: spec.family().to_string(),
                n,
                params: spec.params_label(),
                process: config.process.to_string(),
                metric: metric.name(),
                mean,
                std,
                min,
                max,
                r1: report.r1,
                r2: report.r2,
                normalized,
            });
        }
        eprintln!(
            "sweep [{}/{}] {} trials={} done",
            idx + 1,
            config.points.len(),
            spec,
            config.trials
        );
    }
    Ok(SweepResult { rows })
}

/// First ball count at which every load sits strictly inside
/// `(m/(delta n), delta m/n)`; `None` when the cap was hit first.
pub fn blanket_time(
    g: &crate::graph::Graph,
    process: &ProcessSpec,
    delta: f64,
    plan: &RngPlan,
) -> Result<Option<u64>, ExperimentError> {
    let opts = RunOptions::default();
    let stop = StopRule::UntilBlanket(delta);
    let record = match process {
        ProcessSpec::LocalSearch => alloc::run_local_search(g, stop, plan, &opts)?,
        ProcessSpec::OneChoice => alloc::run_one_choice(g, stop, plan, &opts)?,
        ProcessSpec::DChoice { d } => alloc::run_d_choice(g, stop, *d, plan, &opts)?,
        _ => {
            return Err(ExperimentError::Config(
                "blanket time needs a ball-allocating process".into(),
            ))
        }
    };
    Ok(record.blanket_time(delta))
}

/// Reference curve a metric is divided by in a band check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Denominator {
    One,
    R1,
    R2,
    /// `R2 * n`
    R2TimesN,
    /// `n ln n`
    NLnN,
    /// `n * H_n` (harmonic sum)
    NHarmonic,
}

impl Denominator {
    fn eval(&self, row: &SweepRow) -> f64 {
        let n = row.n as f64;
        match self {
            Denominator::One => 1.0,
            Denominator::R1 => row.r1 as f64,
            Denominator::R2 => row.r2 as f64,
            Denominator::R2TimesN => row.r2 as f64 * n,
            Denominator::NLnN => n * n.ln(),
            Denominator::NHarmonic => n * (1..=row.n).map(|k| 1.0 / k as f64).sum::<f64>(),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Denominator::One => "1",
            Denominator::R1 => "r1",
            Denominator::R2 => "r2",
            Denominator::R2TimesN => "r2*n",
            Denominator::NLnN => "n*ln(n)",
            Denominator::NHarmonic => "n*H(n)",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BandRatio {
    pub point: String,
    pub n: usize,
    pub ratio: f64,
}

/// Outcome of a ratio band check.
#[derive(Clone, Debug, Serialize)]
pub struct BandReport {
    pub metric: String,
    pub denominator: String,
    pub ratios: Vec<BandRatio>,
    /// max ratio / min ratio across the grid.
    pub spread: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks that `mean(metric) / denominator` varies by at most `tolerance`
/// (multiplicatively) across the grid points of `result`.
pub fn band_check(
    result: &SweepResult,
    metric: &Metric,
    denominator: Denominator,
    tolerance: f64,
) -> Result<BandReport, ExperimentError> {
    let name = metric.name();
    let rows: Vec<&SweepRow> = result
        .rows
        .iter()
        .filter(|r| r.metric == name && r.mean.is_some())
        .collect();
    if result.rows.iter().all(|r| r.metric != name) {
        return Err(ExperimentError::MissingMetric(name));
    }
    if rows.len() < 2 {
        return Err(ExperimentError::InsufficientPoints(rows.len()));
    }
    let mut ratios = Vec::with_capacity(rows.len());
    for row in &rows {
        let denom = denominator.eval(row);
        if denom == 0.0 {
            return Err(ExperimentError::ZeroDenominator(format!(
                "{}:{}",
                row.family, row.params
            )));
        }
        ratios.push(BandRatio {
            point: format!("{}:{}", row.family, row.params),
            n: row.n,
            ratio: row.mean.unwrap() / denom,
        });
    }
    let max = ratios.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let spread = max / min;
    Ok(BandReport {
        metric: name,
        denominator: denominator.label().to_string(),
        ratios,
        spread,
        tolerance,
        pass: spread.is_finite() && spread <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(points: Vec<GraphSpec>, budget: BallBudget, metrics: Vec<Metric>) -> SweepConfig {
        SweepConfig {
            points,
            process: ProcessSpec::LocalSearch,
            budget,
            trials: 10,
            seed: 42,
            metrics,
        }
    }

    #[test]
    fn complete_graph_cover_is_exact() {
        let cfg = config(
            vec![GraphSpec::Complete { n: 16 }],
            BallBudget::UntilCover,
            vec![Metric::CoverTime],
        );
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.rows.len(), 1);
        let row = &result.rows[0];
        assert_eq!(row.mean, Some(16.0));
        assert_eq!(row.std, Some(0.0));
    }

    #[test]
    fn single_vertex_cover_time() {
        let cfg = config(
            vec![GraphSpec::Edgeless { n: 1 }],
            BallBudget::UntilCover,
            vec![Metric::CoverTime],
        );
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.rows[0].mean, Some(1.0));
    }

    #[test]
    fn normalized_columns_present_and_finite() {
        let cfg = config(
            vec![GraphSpec::Cycle { n: 1 << 10 }, GraphSpec::Cycle { n: 1 << 12 }],
            BallBudget::PerVertex(1.0),
            vec![Metric::MaxLoad, Metric::MinLoad],
        );
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.rows.len(), 4);
        for row in result.rows.iter().filter(|r| r.metric == "max_load") {
            let norm = row.normalized.unwrap();
            assert!(norm.is_finite() && norm > 0.0);
        }
        let csv = result.to_csv().unwrap();
        assert!(csv.starts_with("family,n,params,process,metric,mean,std,min,max,r1,r2,normalized"));
    }

    #[test]
    fn sweeps_are_reproducible() {
        let cfg = config(
            vec![GraphSpec::RandomRegular { n: 32, d: 3, seed: None }],
            BallBudget::PerVertex(2.0),
            vec![Metric::MaxLoad, Metric::CoverTime],
        );
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn invariants_of_aggregates() {
        let cfg = config(
            vec![GraphSpec::Cycle { n: 256 }],
            BallBudget::PerVertex(4.0),
            vec![Metric::MaxLoad, Metric::MinLoad],
        );
        let result = run_sweep(&cfg).unwrap();
        let max = result.rows.iter().find(|r| r.metric == "max_load").unwrap();
        let min = result.rows.iter().find(|r| r.metric == "min_load").unwrap();
        let average = 4.0 * 256.0 / 256.0;
        assert!(min.mean.unwrap() <= average);
        assert!(max.mean.unwrap() >= average);
    }

    #[test]
    fn band_check_constant_metric_passes() {
        let cfg = config(
            vec![GraphSpec::Complete { n: 8 }, GraphSpec::Complete { n: 8 }],
            BallBudget::UntilCover,
            vec![Metric::CoverTime],
        );
        let result = run_sweep(&cfg).unwrap();
        let report = band_check(&result, &Metric::CoverTime, Denominator::One, 1.001).unwrap();
        assert!(report.pass);
        assert!((report.spread - 1.0).abs() < 1e-12);
    }

    #[test]
    fn band_check_needs_two_points() {
        let cfg = config(
            vec![GraphSpec::Complete { n: 8 }],
            BallBudget::UntilCover,
            vec![Metric::CoverTime],
        );
        let result = run_sweep(&cfg).unwrap();
        assert!(matches!(
            band_check(&result, &Metric::CoverTime, Denominator::One, 2.0),
            Err(ExperimentError::InsufficientPoints(1))
        ));
    }

    #[test]
    fn config_validation() {
        let empty = config(vec![], BallBudget::UntilCover, vec![Metric::CoverTime]);
        assert!(run_sweep(&empty).is_err());
        let mut no_trials = config(
            vec![GraphSpec::Complete { n: 4 }],
            BallBudget::UntilCover,
            vec![Metric::CoverTime],
        );
        no_trials.trials = 0;
        assert!(run_sweep(&no_trials).is_err());
    }

    #[test]
    fn blanket_time_on_complete_graph() {
        // Loads on K_n stay within 1 of m/n, so delta = 2 is reached by the
        // time every vertex holds 2 balls.
        let g = crate::graph::gen_complete(16).unwrap();
        let t = blanket_time(&g, &ProcessSpec::LocalSearch, 2.0, &RngPlan::new(3))
            .unwrap()
            .unwrap();
        assert!(t <= 2 * 16);
    }

    #[test]
    fn metric_parsing() {
        assert_eq!(Metric::parse("max_load").unwrap(), Metric::MaxLoad);
        assert_eq!(Metric::parse("blanket:2.5").unwrap(), Metric::Blanket(2.5));
        assert!(Metric::parse("blanket:x").is_err());
        assert!(Metric::parse("p99").is_err());
    }
}
