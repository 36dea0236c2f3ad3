//! Initial-point strategies: uniform random start, SIPS (all Gibbs samples),
//! OIPS-annealing (the sample with the lowest empirical loss) and OIPS-SAO
//! (the best sample after an inner descent on the empirical loss).

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Dataset, Domain, LossSpec, Objective};
use crate::optimize::{gd_run, GdConfig};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::samplers::{draw, write_points_csv, GibbsTarget, SampleBatch, SamplerSpec};

/// Inner descent used by OIPS-SAO when none is configured.
pub const DEFAULT_INNER_ITERATIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Sips,
    OipsAnnealing,
    OipsSao,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Random,
        Strategy::Sips,
        Strategy::OipsAnnealing,
        Strategy::OipsSao,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Sips => "sips",
            Strategy::OipsAnnealing => "oips_annealing",
            Strategy::OipsSao => "oips_sao",
        }
    }

    pub fn uses_sampler(self) -> bool {
        self != Strategy::Random
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitPlan {
    pub strategy: Strategy,
    /// Size of the outsourced subset; ignored when the problem has no data.
    #[serde(default)]
    pub n_outsourced: usize,
    #[serde(default)]
    pub beta: f64,
    /// `L`.
    #[serde(default = "one")]
    pub samples: usize,
    /// Number of uniform starts for the random strategy.
    #[serde(default = "one")]
    pub starts: usize,
    #[serde(default)]
    pub sampler: SamplerSpec,
    /// Inner optimizer for OIPS-SAO.
    #[serde(default)]
    pub inner: Option<GdConfig>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl InitPlan {
    pub fn new(strategy: Strategy, beta: f64, samples: usize, sampler: SamplerSpec) -> Self {
        InitPlan {
            strategy,
            n_outsourced: 0,
            beta,
            samples,
            starts: 1,
            sampler,
            inner: None,
            seed: 0,
        }
    }

    pub fn random(starts: usize) -> Self {
        InitPlan {
            starts,
            ..Self::new(Strategy::Random, 0.0, 1, SamplerSpec::Uniform)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_inner(mut self, inner: GdConfig) -> Self {
        self.inner = Some(inner);
        self
    }

    pub fn with_outsourced(mut self, n: usize) -> Self {
        self.n_outsourced = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if self.samples == 0 || self.starts == 0 {
            return Err(Error::InvalidConfig(
                "L and the number of random starts must be at least 1".into(),
            ));
        }
        if self.strategy.uses_sampler() {
            self.sampler.validate()?;
        }
        if let Some(inner) = &self.inner {
            inner.validate()?;
        }
        Ok(())
    }

    /// The configured inner optimizer, or the exploitation optimizer run for
    /// [`DEFAULT_INNER_ITERATIONS`] steps.
    pub fn inner_or(&self, outer: &GdConfig) -> GdConfig {
        self.inner
            .unwrap_or_else(|| GdConfig::new(outer.step, DEFAULT_INNER_ITERATIONS))
    }
}

/// Points scored and selected by an OIPS strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredPool {
    /// Samples (annealing) or refined samples (SAO).
    pub points: Vec<Vec<f64>>,
    /// `F̂_n` at each point; `+∞` for excluded entries.
    pub scores: Vec<f64>,
    pub selected: usize,
    /// Indices whose inner descent diverged.
    pub excluded: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub strategy: Strategy,
    pub points: Vec<Vec<f64>>,
    pub scores: Option<Vec<f64>>,
    pub pool: Option<ScoredPool>,
    pub batch: Option<SampleBatch>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn selected_index(&self) -> Option<usize> {
        self.pool.as_ref().map(|p| p.selected)
    }

    /// Writes the candidates in the sample-batch CSV layout. OIPS sets write
    /// the whole scored pool with `score` and `selected` columns.
    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        match &self.pool {
            Some(pool) => write_points_csv(
                path,
                &pool.points,
                Some((&pool.scores, Some(pool.selected))),
            ),
            None => match &self.scores {
                Some(s) => write_points_csv(path, &self.points, Some((s, None))),
                None => write_points_csv(path, &self.points, None),
            },
        }
    }
}

/// `m` i.i.d. uniform points on the domain.
pub fn random_start(domain: &Domain, m: usize, seed: u64) -> Result<CandidateSet> {
    if m == 0 {
        return Err(Error::InvalidConfig("random start needs m >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok(CandidateSet {
        strategy: Strategy::Random,
        points: (0..m).map(|_| domain.sample_uniform(&mut rng)).collect(),
        scores: None,
        pool: None,
        batch: None,
    })
}

fn sample_target(fhat: &Arc<dyn Objective>, plan: &InitPlan) -> Result<SampleBatch> {
    let target = GibbsTarget::new(fhat.clone(), plan.beta)?;
    draw(
        &plan.sampler,
        &target,
        plan.samples,
        derive_seed(plan.seed, stream::SAMPLER),
    )
}

fn build(outsourced: &Dataset, loss: &dyn LossSpec) -> Result<Arc<dyn Objective>> {
    loss.build(outsourced)
}

fn expect(plan: &InitPlan, strategy: Strategy) -> Result<()> {
    plan.validate()?;
    if plan.strategy != strategy {
        return Err(Error::InvalidConfig(format!(
            "plan strategy is {}, expected {}",
            plan.strategy.as_str(),
            strategy.as_str()
        )));
    }
    Ok(())
}

/// SIPS on the empirical loss built from `outsourced`.
pub fn sips(outsourced: &Dataset, plan: &InitPlan, loss: &dyn LossSpec) -> Result<CandidateSet> {
    sips_on(&build(outsourced, loss)?, plan)
}

/// SIPS with `F̂_n` given directly.
pub fn sips_on(fhat: &Arc<dyn Objective>, plan: &InitPlan) -> Result<CandidateSet> {
    expect(plan, Strategy::Sips)?;
    let batch = sample_target(fhat, plan)?;
    Ok(CandidateSet {
        strategy: Strategy::Sips,
        points: batch.points.clone(),
        scores: None,
        pool: None,
        batch: Some(batch),
    })
}

pub fn oips_annealing(
    outsourced: &Dataset,
    plan: &InitPlan,
    loss: &dyn LossSpec,
) -> Result<CandidateSet> {
    oips_annealing_on(&build(outsourced, loss)?, plan)
}

pub fn oips_annealing_on(fhat: &Arc<dyn Objective>, plan: &InitPlan) -> Result<CandidateSet> {
    expect(plan, Strategy::OipsAnnealing)?;
    let batch = sample_target(fhat, plan)?;
    select_annealing(&**fhat, batch)
}

pub fn oips_sao(
    outsourced: &Dataset,
    plan: &InitPlan,
    loss: &dyn LossSpec,
) -> Result<CandidateSet> {
    oips_sao_on(&build(outsourced, loss)?, plan)
}

pub fn oips_sao_on(fhat: &Arc<dyn Objective>, plan: &InitPlan) -> Result<CandidateSet> {
    expect(plan, Strategy::OipsSao)?;
    let inner = plan
        .inner
        .ok_or_else(|| Error::InvalidConfig("OIPS-SAO needs an inner optimizer".into()))?;
    let batch = sample_target(fhat, plan)?;
    select_sao(&**fhat, batch, &inner)
}

/// Runs the plan's strategy on `fhat`; the random strategy only uses the
/// domain.
pub fn select_on(fhat: &Arc<dyn Objective>, plan: &InitPlan) -> Result<CandidateSet> {
    match plan.strategy {
        Strategy::Random => {
            plan.validate()?;
            random_start(
                fhat.domain(),
                plan.starts,
                derive_seed(plan.seed, stream::RANDOM_START),
            )
        }
        Strategy::Sips => sips_on(fhat, plan),
        Strategy::OipsAnnealing => oips_annealing_on(fhat, plan),
        Strategy::OipsSao => oips_sao_on(fhat, plan),
    }
}

/// Index of the smallest score; the lowest index wins ties and non-finite
/// scores never win.
fn argmin(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_finite() && best.is_none_or(|b| s < scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Criterion (2): the sample with the lowest `F̂_n`.
pub fn select_annealing(fhat: &dyn Objective, batch: SampleBatch) -> Result<CandidateSet> {
    let scores: Vec<f64> = batch.points.iter().map(|p| fhat.value(p)).collect();
    let selected = argmin(&scores).ok_or(Error::AllCandidatesDiverged {
        count: scores.len(),
    })?;
    let excluded = (0..scores.len())
        .filter(|&i| !scores[i].is_finite())
        .collect();
    Ok(CandidateSet {
        strategy: Strategy::OipsAnnealing,
        points: vec![batch.points[selected].clone()],
        scores: Some(vec![scores[selected]]),
        pool: Some(ScoredPool {
            points: batch.points.clone(),
            scores,
            selected,
            excluded,
        }),
        batch: Some(batch),
    })
}

/// Criterion (3): refine every sample with `inner` on `F̂_n` and keep the
/// refined point with the lowest `F̂_n`. Diverged refinements are excluded.
pub fn select_sao(
    fhat: &dyn Objective,
    batch: SampleBatch,
    inner: &GdConfig,
) -> Result<CandidateSet> {
    let runs: Vec<Result<_>> = batch
        .points
        .par_iter()
        .map(|p| gd_run(fhat, p, inner))
        .collect();
    let mut points = Vec::with_capacity(runs.len());
    let mut scores = Vec::with_capacity(runs.len());
    let mut excluded = Vec::new();
    for (i, run) in runs.into_iter().enumerate() {
        let t = run?;
        if t.diverged {
            excluded.push(i);
            scores.push(f64::INFINITY);
        } else {
            scores.push(t.final_value);
        }
        points.push(t.final_point);
    }
    let selected = argmin(&scores).ok_or(Error::AllCandidatesDiverged {
        count: scores.len(),
    })?;
    Ok(CandidateSet {
        strategy: Strategy::OipsSao,
        points: vec![points[selected].clone()],
        scores: Some(vec![scores[selected]]),
        pool: Some(ScoredPool {
            points,
            scores,
            selected,
            excluded,
        }),
        batch: Some(batch),
    })
}
