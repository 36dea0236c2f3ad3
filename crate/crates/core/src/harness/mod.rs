//! Replicated experiments: configuration, execution, aggregation and result
//! files.
//!
//! Each replication derives its own seed from the master seed and its index,
//! so records do not depend on scheduling or the worker count. Aggregation is
//! an ordered reduction over replication ids.

mod config;
mod output;
mod problem;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, HistogramConfig, ProblemConfig, SuccessSpec};
pub use output::{read_records, write_outputs, write_sweep_table, RECORDS_FILE, SUMMARY_FILE};
pub use problem::Instance;

use crate::error::{Error, Result};
use crate::initpoint::{select_on, Strategy};
use crate::numeric::{mean, median};
use crate::optimize::{gd_run, success_test, SuccessRule};
use crate::rng::{derive_path, derive_seed, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication_id: usize,
    pub seed: u64,
    pub candidates: usize,
    pub diverged: usize,
    /// Candidate whose trajectory reached the convergent value.
    pub best_index: usize,
    /// Minimum final value over the candidates' trajectories.
    pub convergent_value: f64,
    pub success: bool,
    pub start: Vec<f64>,
    pub final_point: Vec<f64>,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub replication_id: usize,
    pub seed: u64,
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub normalized_by: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub replications: usize,
    pub completed: usize,
    pub failed: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Binomial standard error of `success_rate`.
    pub success_se: f64,
    pub mean_value: f64,
    pub median_value: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub histogram: Histogram,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub records: Vec<ReplicationRecord>,
    pub failures: Vec<FailureRecord>,
    pub summary: Summary,
    pub wall_time_ms: f64,
}

impl RunResult {
    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.convergent_value).collect()
    }
}

/// Equal-width histogram over `[min, max]` of `values / normalize_by`. When
/// all values coincide the range is widened by ±0.5 so exactly one bin is
/// occupied. The last bin is closed.
pub fn emit_histogram(values: &[f64], bins: usize, normalize_by: Option<f64>) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::NoData);
    }
    if bins == 0 {
        return Err(Error::InvalidConfig(
            "histogram needs at least one bin".into(),
        ));
    }
    if let Some(c) = normalize_by {
        if !(c != 0.0 && c.is_finite()) {
            return Err(Error::InvalidConfig(format!("cannot normalize by {c}")));
        }
    }
    let scaled: Vec<f64> = values
        .iter()
        .map(|v| normalize_by.map_or(*v, |c| v / c))
        .collect();
    if scaled.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "histogram values must be finite".into(),
        ));
    }
    let mut lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0usize; bins];
    for v in scaled {
        let i = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram {
        edges,
        counts,
        normalized_by: normalize_by,
    })
}

fn resolve_rule(spec: &SuccessSpec, inst: &Instance) -> Result<Option<SuccessRule>> {
    Ok(match spec {
        SuccessSpec::ValueGap { f_star, tol } => Some(SuccessRule::ValueGap {
            f_star: f_star.or(inst.f_star).ok_or_else(|| {
                Error::InvalidConfig("value_gap needs f_star for this problem".into())
            })?,
            tol: *tol,
        }),
        SuccessSpec::PointDistance { theta_star, tol } => Some(SuccessRule::PointDistance {
            theta_star: theta_star
                .clone()
                .or_else(|| inst.theta_star.clone())
                .ok_or_else(|| {
                    Error::InvalidConfig("point_distance needs theta_star for this problem".into())
                })?,
            tol: *tol,
        }),
        SuccessSpec::Below { threshold } => Some(SuccessRule::Below {
            threshold: *threshold,
        }),
        SuccessSpec::RelativeToBest { .. } => None,
    })
}

/// Runs one replication: outsourcing, initialization, one exploitation run
/// per candidate, and the success judgement.
pub fn run_replication(
    cfg: &ExperimentConfig,
    inst: &Instance,
    rule: Option<&SuccessRule>,
    replication_id: usize,
) -> Result<ReplicationRecord> {
    let clock = Instant::now();
    let seed = derive_seed(cfg.master_seed, replication_id as u64);
    let mut plan = cfg.init.clone();
    plan.seed = seed;
    if plan.strategy == Strategy::OipsSao && plan.inner.is_none() {
        plan.inner = Some(plan.inner_or(&cfg.optimizer));
    }
    let fhat = if plan.strategy.uses_sampler() {
        inst.empirical(plan.n_outsourced, derive_seed(seed, stream::OUTSOURCE))?
    } else {
        inst.objective.clone()
    };
    let candidates = select_on(&fhat, &plan)?;
    let runs: Vec<Result<_>> = candidates
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let obj =
                inst.exploitation_objective(derive_path(seed, &[stream::TRAJECTORY, i as u64]));
            gd_run(&*obj, p, &cfg.optimizer)
        })
        .collect();
    let mut best: Option<(usize, crate::optimize::Trajectory)> = None;
    let mut diverged = 0;
    let mut success = false;
    for (i, run) in runs.into_iter().enumerate() {
        let t = run?;
        if t.diverged {
            diverged += 1;
            continue;
        }
        if let Some(rule) = rule {
            success |= success_test(&t, rule);
        }
        if best
            .as_ref()
            .is_none_or(|(_, b)| t.final_value < b.final_value)
        {
            best = Some((i, t));
        }
    }
    let (best_index, t) = best.ok_or(Error::AllCandidatesDiverged {
        count: candidates.points.len(),
    })?;
    Ok(ReplicationRecord {
        replication_id,
        seed,
        candidates: candidates.points.len(),
        diverged,
        best_index,
        convergent_value: t.final_value,
        success,
        start: t.start,
        final_point: t.final_point,
        wall_time_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}

fn summarize(
    records: &[ReplicationRecord],
    failed: usize,
    hist: &HistogramConfig,
) -> Result<Summary> {
    let values: Vec<f64> = records.iter().map(|r| r.convergent_value).collect();
    let completed = records.len();
    let successes = records.iter().filter(|r| r.success).count();
    let rate = if completed == 0 {
        0.0
    } else {
        successes as f64 / completed as f64
    };
    let histogram = emit_histogram(&values, hist.bins, hist.normalize_by)?;
    Ok(Summary {
        replications: completed + failed,
        completed,
        failed,
        successes,
        success_rate: rate,
        success_se: (rate * (1.0 - rate) / completed.max(1) as f64).sqrt(),
        mean_value: mean(&values),
        median_value: median(&values),
        min_value: values.iter().cloned().fold(f64::INFINITY, f64::min),
        max_value: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        histogram,
    })
}

/// Judges records against `best + rel·|best|`.
fn apply_relative(records: &mut [ReplicationRecord], best: f64, rel: f64) {
    let threshold = best + rel * best.abs();
    for r in records {
        r.success = r.convergent_value <= threshold;
    }
}

/// Re-judges several results with a shared relative-to-best rule, `best`
/// being the lowest convergent value across all of them.
pub fn rescore_relative(results: &mut [RunResult], rel: f64) -> Result<f64> {
    let best = results
        .iter()
        .flat_map(|r| r.records.iter().map(|x| x.convergent_value))
        .fold(f64::INFINITY, f64::min);
    for r in results.iter_mut() {
        apply_relative(&mut r.records, best, rel);
        r.summary = summarize(&r.records, r.failures.len(), &r.config.histogram)?;
    }
    Ok(best)
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Runs every replication and aggregates the results.
///
/// Failed replications are recorded and excluded from the aggregates; more
/// than `max_failure_fraction` failures abort with `experiment-unstable`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let inst = Instance::build(&cfg.problem)?;
    run_experiment_on(cfg, &inst)
}

/// As [`run_experiment`] on an already constructed instance.
pub fn run_experiment_on(cfg: &ExperimentConfig, inst: &Instance) -> Result<RunResult> {
    cfg.validate()?;
    let clock = Instant::now();
    let rule = resolve_rule(&cfg.success, inst)?;
    let outcomes: Vec<Result<ReplicationRecord>> = thread_pool(cfg.workers)?.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|i| run_replication(cfg, inst, rule.as_ref(), i))
            .collect()
    });
    let mut records = Vec::with_capacity(cfg.replications);
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => records.push(r),
            Err(e) => failures.push(FailureRecord {
                replication_id: i,
                seed: derive_seed(cfg.master_seed, i as u64),
                code: e.code().to_string(),
                message: e.to_string(),
            }),
        }
    }
    let total = cfg.replications;
    if failures.len() as f64 > cfg.max_failure_fraction * total as f64 || records.is_empty() {
        return Err(Error::ExperimentUnstable {
            failed: failures.len(),
            total,
        });
    }
    if let SuccessSpec::RelativeToBest { rel } = cfg.success {
        let best = records
            .iter()
            .map(|r| r.convergent_value)
            .fold(f64::INFINITY, f64::min);
        apply_relative(&mut records, best, rel);
    }
    let summary = summarize(&records, failures.len(), &cfg.histogram)?;
    let result = RunResult {
        config: cfg.clone(),
        records,
        failures,
        summary,
        wall_time_ms: clock.elapsed().as_secs_f64() * 1e3,
    };
    if let Some(dir) = &cfg.output_dir {
        write_outputs(&result, dir)?;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Beta,
    N,
    L,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(SweepAxis::Beta),
            "n" => Ok(SweepAxis::N),
            "L" | "l" => Ok(SweepAxis::L),
            _ => Err(Error::InvalidConfig(format!(
                "unknown sweep axis {s:?} (expected beta, n or L)"
            ))),
        }
    }
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::N => "n",
            SweepAxis::L => "L",
        }
    }
}

fn as_count(v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(Error::InvalidConfig(format!(
            "sweep value {v} is not a positive integer"
        )))
    }
}

/// The config with `axis` set to `value`.
pub fn with_axis(cfg: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    if !cfg.init.strategy.uses_sampler() {
        return Err(Error::InvalidConfig(format!(
            "the random strategy has no {} to sweep",
            axis.as_str()
        )));
    }
    let mut c = cfg.clone();
    match axis {
        SweepAxis::Beta => c.init.beta = value,
        SweepAxis::L => c.init.samples = as_count(value)?,
        SweepAxis::N => {
            if !cfg.problem.has_data() {
                return Err(Error::InvalidConfig(format!(
                    "problem {} has no data to outsource",
                    cfg.problem.name()
                )));
            }
            c.init.n_outsourced = as_count(value)?;
        }
    }
    c.output_dir = cfg
        .output_dir
        .as_ref()
        .map(|d| d.join(format!("{}_{}", axis.as_str(), value)));
    c.validate()?;
    Ok(c)
}

/// One experiment per value, sharing the master seed. With an output
/// directory, each run writes into `<dir>/<axis>_<value>` and a
/// `sweep.csv` table is written to `<dir>`.
pub fn sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<(f64, RunResult)>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep needs at least one value".into(),
        ));
    }
    let cfgs = values
        .iter()
        .map(|&v| with_axis(cfg, axis, v))
        .collect::<Result<Vec<_>>>()?;
    let inst = Instance::build(&cfg.problem)?;
    let mut out = Vec::with_capacity(values.len());
    for (v, c) in values.iter().zip(&cfgs) {
        out.push((*v, run_experiment_on(c, &inst)?));
    }
    if let Some(dir) = &cfg.output_dir {
        write_sweep_table(dir, axis, &out)?;
    }
    Ok(out)
}
