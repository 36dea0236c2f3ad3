use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initpoint::InitPlan;
use crate::optimize::GdConfig;
use crate::problems::{GmnlParams, DEFAULT_GMNL_HALF_WIDTH};

/// Problem selection and parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Styblinski-Tang on `[-5, 5]^dim`. No data: the sampler uses `F` itself.
    St { dim: usize },
    /// Gaussian-mixture mode finding on the seeded default instance.
    Gmm {
        dim: usize,
        components: usize,
        #[serde(default)]
        instance_seed: u64,
        /// Size of the data pool the outsourced subset is drawn from.
        #[serde(default = "default_pool")]
        pool: usize,
        /// Batch size of the Monte Carlo gradient used by the exploitation
        /// optimizer; 0 selects the analytic gradient.
        #[serde(default = "default_gradient_batch")]
        gradient_batch: usize,
    },
    /// GMNL simulated maximum likelihood on a generated dataset.
    Gmnl {
        #[serde(default = "d_attributes")]
        attributes: usize,
        #[serde(default = "d_characteristics")]
        characteristics: usize,
        #[serde(default = "d_alternatives")]
        alternatives: usize,
        #[serde(default = "d_customers")]
        customers: usize,
        #[serde(default = "d_draws")]
        draws: usize,
        #[serde(default = "d_shock")]
        shock_sd: f64,
        #[serde(default = "d_half_width")]
        half_width: f64,
        #[serde(default)]
        instance_seed: u64,
    },
    /// Tilted 1-D double well. No data.
    DoubleWell {
        alpha: f64,
        #[serde(default = "d_scale")]
        scale: f64,
    },
}

fn default_pool() -> usize {
    10_000
}
fn default_gradient_batch() -> usize {
    1000
}
fn d_attributes() -> usize {
    10
}
fn d_characteristics() -> usize {
    5
}
fn d_alternatives() -> usize {
    5
}
fn d_customers() -> usize {
    1000
}
fn d_draws() -> usize {
    100
}
fn d_shock() -> f64 {
    1.0
}
fn d_half_width() -> f64 {
    DEFAULT_GMNL_HALF_WIDTH
}
fn d_scale() -> f64 {
    1.0
}

impl ProblemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemConfig::St { .. } => "st",
            ProblemConfig::Gmm { .. } => "gmm",
            ProblemConfig::Gmnl { .. } => "gmnl",
            ProblemConfig::DoubleWell { .. } => "double_well",
        }
    }

    pub fn has_data(&self) -> bool {
        matches!(self, ProblemConfig::Gmm { .. } | ProblemConfig::Gmnl { .. })
    }

    pub(crate) fn gmnl_params(&self) -> Option<GmnlParams> {
        match *self {
            ProblemConfig::Gmnl {
                attributes,
                characteristics,
                alternatives,
                customers,
                draws,
                shock_sd,
                half_width,
                ..
            } => Some(GmnlParams {
                attributes,
                characteristics,
                alternatives,
                customers,
                draws,
                phi_true: None,
                psi_true: None,
                shock_sd,
                half_width,
            }),
            _ => None,
        }
    }
}

/// How a replication is judged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuccessSpec {
    /// `value ≤ f_star + tol`; `f_star` defaults to the problem's known
    /// global minimum value.
    ValueGap {
        #[serde(default)]
        f_star: Option<f64>,
        tol: f64,
    },
    /// `‖θ − θ*‖ ≤ tol`; `theta_star` defaults to the known global minimizer.
    PointDistance {
        #[serde(default)]
        theta_star: Option<Vec<f64>>,
        tol: f64,
    },
    /// `value < threshold`.
    Below { threshold: f64 },
    /// `value ≤ best + rel·|best|`, with `best` the lowest convergent value
    /// among the replications judged together.
    RelativeToBest { rel: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub normalize_by: Option<f64>,
}

fn default_bins() -> usize {
    20
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            bins: default_bins(),
            normalize_by: None,
        }
    }
}

/// One experiment: a problem, an initialization plan, the exploitation
/// optimizer and the replication count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemConfig,
    pub init: InitPlan,
    pub optimizer: GdConfig,
    pub replications: usize,
    pub success: SuccessSpec,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub histogram: HistogramConfig,
    /// Allowed fraction of failed replications before the run aborts.
    #[serde(default = "default_failure_fraction")]
    pub max_failure_fraction: f64,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_failure_fraction() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        self.init.validate()?;
        self.optimizer.validate()?;
        if self.histogram.bins == 0 {
            return bad("histogram needs at least one bin".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.max_failure_fraction) {
            return bad("max_failure_fraction must lie in [0, 1]".into());
        }
        match &self.problem {
            ProblemConfig::St { dim } | ProblemConfig::Gmm { dim, .. } if *dim == 0 => {
                return bad("problem dimension must be at least 1".into());
            }
            ProblemConfig::Gmm {
                components, pool, ..
            } => {
                if *components == 0 {
                    return bad("mixture needs at least one component".into());
                }
                if self.init.strategy.uses_sampler()
                    && (self.init.n_outsourced == 0 || self.init.n_outsourced > *pool)
                {
                    return bad(format!(
                        "n_outsourced must lie in 1..={pool} for the mixture problem, got {}",
                        self.init.n_outsourced
                    ));
                }
            }
            ProblemConfig::Gmnl { customers, .. } => {
                if self.init.strategy.uses_sampler()
                    && (self.init.n_outsourced == 0 || self.init.n_outsourced > *customers)
                {
                    return bad(format!(
                        "n_outsourced must lie in 1..={customers} for GMNL, got {}",
                        self.init.n_outsourced
                    ));
                }
            }
            ProblemConfig::DoubleWell { alpha, scale } if !(*alpha >= 0.0 && *scale > 0.0) => {
                return bad("double well needs alpha >= 0 and scale > 0".into());
            }
            _ => {}
        }
        match &self.success {
            SuccessSpec::ValueGap { tol, .. } | SuccessSpec::PointDistance { tol, .. }
                if !(*tol > 0.0) =>
            {
                bad(format!("success tolerance must be positive, got {tol}"))
            }
            SuccessSpec::RelativeToBest { rel } if !(*rel >= 0.0) => {
                bad("relative tolerance must be nonnegative".into())
            }
            _ => Ok(()),
        }
    }
}
