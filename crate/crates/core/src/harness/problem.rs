use std::sync::Arc;

use super::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::objective::{Dataset, LossSpec, Objective};
use crate::problems::{
    double_well_1d, gmm_batched_gradient_objective, gmm_population_objective, gmm_sample,
    gmnl_generate, st_objective, GmmKernelLoss, GmmSpec, GmnlLoss, GmnlNll, StSpec,
    ST_GLOBAL_MIN_VALUE,
};
use crate::rng::{derive_seed, stream};

/// A constructed problem shared read-only by all replications.
pub struct Instance {
    /// The objective the exploitation optimizer descends and success is
    /// judged on.
    pub objective: Arc<dyn Objective>,
    /// Full dataset the outsourced subset is drawn from.
    pub data: Option<Dataset>,
    pub loss: Option<Arc<dyn LossSpec>>,
    pub f_star: Option<f64>,
    pub theta_star: Option<Vec<f64>>,
    batched: Option<(GmmSpec, usize)>,
}

impl Instance {
    pub fn build(cfg: &ProblemConfig) -> Result<Self> {
        Ok(match *cfg {
            ProblemConfig::St { dim } => {
                let f = st_objective(&StSpec { dim });
                let theta_star = f.minimizer();
                Instance {
                    objective: Arc::new(f),
                    data: None,
                    loss: None,
                    f_star: Some(ST_GLOBAL_MIN_VALUE),
                    theta_star: Some(theta_star),
                    batched: None,
                }
            }
            ProblemConfig::Gmm {
                dim,
                components,
                instance_seed,
                pool,
                gradient_batch,
            } => {
                let spec = GmmSpec::default_instance(dim, components, instance_seed)?;
                let data = gmm_sample(&spec, pool, derive_seed(instance_seed, stream::INSTANCE));
                let best = spec.population_minima().into_iter().next();
                Instance {
                    objective: Arc::new(gmm_population_objective(&spec)),
                    data: Some(data),
                    loss: Some(Arc::new(GmmKernelLoss { spec: spec.clone() })),
                    f_star: best.as_ref().map(|b| b.1),
                    theta_star: best.map(|b| b.0),
                    batched: (gradient_batch > 0).then_some((spec, gradient_batch)),
                }
            }
            ProblemConfig::Gmnl { instance_seed, .. } => {
                let params = cfg.gmnl_params().expect("gmnl variant");
                let (spec, data) = gmnl_generate(&params, instance_seed)?;
                let spec = Arc::new(spec);
                let full = GmnlNll::new(spec.clone(), &data)?;
                Instance {
                    objective: Arc::new(full),
                    data: Some(data),
                    loss: Some(Arc::new(GmnlLoss { spec: spec.clone() })),
                    f_star: None,
                    theta_star: Some(spec.theta_true()),
                    batched: None,
                }
            }
            ProblemConfig::DoubleWell { alpha, scale } => {
                let w = double_well_1d(alpha, scale)?;
                let theta_star = vec![w.deep_min()];
                Instance {
                    objective: Arc::new(w),
                    data: None,
                    loss: None,
                    f_star: Some(0.0),
                    theta_star: Some(theta_star),
                    batched: None,
                }
            }
        })
    }

    /// Objective for one exploitation run. Batched-gradient problems draw a
    /// fresh frozen batch from `trajectory_seed`.
    pub fn exploitation_objective(&self, trajectory_seed: u64) -> Arc<dyn Objective> {
        match &self.batched {
            Some((spec, batch)) => Arc::new(gmm_batched_gradient_objective(
                spec,
                *batch,
                trajectory_seed,
            )),
            None => self.objective.clone(),
        }
    }

    /// `F̂_n` for one replication: the empirical loss on an outsourced subset
    /// of size `n`, or `F` itself for problems without data.
    pub fn empirical(&self, n: usize, seed: u64) -> Result<Arc<dyn Objective>> {
        match (&self.data, &self.loss) {
            (Some(data), Some(loss)) => {
                if n == 0 {
                    return Err(Error::InvalidConfig(
                        "n_outsourced must be at least 1".into(),
                    ));
                }
                loss.build(&data.subsample(n, seed)?)
            }
            _ => Ok(self.objective.clone()),
        }
    }
}
