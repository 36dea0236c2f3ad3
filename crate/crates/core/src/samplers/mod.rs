//! Samplers for the Gibbs measure `π_β(θ) ∝ exp(−β F(θ))·1{θ ∈ Θ}`.
//!
//! [`draw`] dispatches on a [`SamplerSpec`]. The chain methods (ULA, RWM)
//! produce correlated draws; [`rejection_sample_separable`] is exact for
//! additively separable objectives on a box; [`snis_resample`] is the general
//! importance-resampling fallback.

mod exact;
mod mcmc;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Domain, Objective};
use crate::rng::{derive_path, rng_from_seed, stream};

pub use exact::{coordinate_minimum, rejection_sample_separable, snis_resample};
pub use mcmc::{default_ula_step, run_chain, rwm_step, ula_step, ChainMethod, ChainState};

pub const DEFAULT_BURNIN: usize = 1000;
pub const DEFAULT_THINNING: usize = 10;

/// Target `π_β ∝ exp(−β F)` on the objective's domain. `β = 0` is the uniform
/// law; `β = ∞` is accepted by the resampling sampler only.
#[derive(Clone)]
pub struct GibbsTarget {
    objective: Arc<dyn Objective>,
    beta: f64,
}

impl GibbsTarget {
    pub fn new(objective: Arc<dyn Objective>, beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "beta must be nonnegative, got {beta}"
            )));
        }
        Ok(GibbsTarget { objective, beta })
    }

    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn domain(&self) -> &Domain {
        self.objective.domain()
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    /// Unnormalized log-density; `−∞` outside the domain.
    pub fn log_density(&self, theta: &[f64]) -> f64 {
        if !self.domain().contains(theta) {
            return f64::NEG_INFINITY;
        }
        if self.beta == 0.0 {
            return 0.0;
        }
        -self.beta * self.objective.value(theta)
    }
}

impl std::fmt::Debug for GibbsTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GibbsTarget")
            .field("dim", &self.dim())
            .field("beta", &self.beta)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Ula,
    Rwm,
    Rejection,
    Snis,
    Uniform,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Ula => "ula",
            Provenance::Rwm => "rwm",
            Provenance::Rejection => "rejection",
            Provenance::Snis => "snis",
            Provenance::Uniform => "uniform",
        }
    }
}

/// How to draw `L` points from a [`GibbsTarget`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerSpec {
    Ula {
        /// Defaults to [`default_ula_step`].
        #[serde(default)]
        step: Option<f64>,
        #[serde(default = "default_burnin")]
        burnin: usize,
        #[serde(default = "default_thinning")]
        thinning: usize,
        /// Independent chains started uniformly; `L` is split evenly.
        #[serde(default = "one")]
        chains: usize,
    },
    Rwm {
        scale: f64,
        #[serde(default = "default_burnin")]
        burnin: usize,
        #[serde(default = "default_thinning")]
        thinning: usize,
        #[serde(default = "one")]
        chains: usize,
    },
    Rejection,
    Snis {
        proposals: usize,
    },
    Uniform,
}

fn default_burnin() -> usize {
    DEFAULT_BURNIN
}

fn default_thinning() -> usize {
    DEFAULT_THINNING
}

fn one() -> usize {
    1
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec::Ula {
            step: None,
            burnin: DEFAULT_BURNIN,
            thinning: DEFAULT_THINNING,
            chains: 1,
        }
    }
}

impl SamplerSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        match *self {
            SamplerSpec::Ula {
                step,
                thinning,
                chains,
                ..
            } => {
                if let Some(h) = step {
                    if !(h >= 0.0 && h.is_finite()) {
                        return bad("ULA step must be finite and nonnegative");
                    }
                }
                if thinning == 0 || chains == 0 {
                    return bad("thinning and chains must be at least 1");
                }
            }
            SamplerSpec::Rwm {
                scale,
                thinning,
                chains,
                ..
            } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return bad("RWM scale must be positive");
                }
                if thinning == 0 || chains == 0 {
                    return bad("thinning and chains must be at least 1");
                }
            }
            SamplerSpec::Snis { proposals } if proposals == 0 => {
                return bad("SNIS needs at least one proposal")
            }
            _ => {}
        }
        Ok(())
    }
}

/// `L` candidate points with the settings that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub points: Vec<Vec<f64>>,
    pub provenance: Provenance,
    pub beta: f64,
    pub burnin: usize,
    pub thinning: usize,
    pub chains: usize,
    pub seed: u64,
    /// RWM and rejection only.
    pub acceptance_rate: Option<f64>,
    /// RWM proposals whose objective value was not finite.
    pub nonfinite_proposals: usize,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    method: &'a str,
    beta: f64,
    #[serde(rename = "L")]
    len: usize,
    burnin: usize,
    thinning: usize,
    chains: usize,
    seed: u64,
    acceptance_rate: Option<f64>,
}

impl SampleBatch {
    pub(crate) fn new(points: Vec<Vec<f64>>, provenance: Provenance, beta: f64, seed: u64) -> Self {
        SampleBatch {
            points,
            provenance,
            beta,
            burnin: 0,
            thinning: 1,
            chains: 1,
            seed,
            acceptance_rate: None,
            nonfinite_proposals: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Writes `coord_0..coord_{d-1}` rows to `csv_path` and the settings to
    /// `csv_path` with a `.json` extension.
    pub fn export(&self, csv_path: impl AsRef<Path>) -> Result<()> {
        let csv_path = csv_path.as_ref();
        write_points_csv(csv_path, &self.points, None)?;
        let sidecar = Sidecar {
            method: self.provenance.as_str(),
            beta: self.beta,
            len: self.len(),
            burnin: self.burnin,
            thinning: self.thinning,
            chains: self.chains,
            seed: self.seed,
            acceptance_rate: self.acceptance_rate,
        };
        let json_path = csv_path.with_extension("json");
        let text =
            serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))
    }
}

/// Writes points as CSV with `coord_*` columns plus optional `score` and
/// `selected` columns.
pub(crate) fn write_points_csv(
    path: &Path,
    points: &[Vec<f64>],
    extra: Option<(&[f64], Option<usize>)>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let d = points.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (0..d).map(|i| format!("coord_{i}")).collect();
    if extra.is_some() {
        header.push("score".into());
        header.push("selected".into());
    }
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (i, p) in points.iter().enumerate() {
        let mut cells: Vec<String> = p.iter().map(f64::to_string).collect();
        if let Some((scores, selected)) = extra {
            cells.push(scores[i].to_string());
            cells.push((selected == Some(i)).to_string());
        }
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Draws `count` points from `target` as configured by `spec`.
pub fn draw(
    spec: &SamplerSpec,
    target: &GibbsTarget,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::InvalidConfig(
            "sample count L must be at least 1".into(),
        ));
    }
    match *spec {
        SamplerSpec::Ula {
            step,
            burnin,
            thinning,
            chains,
        } => {
            let method = ChainMethod::Ula {
                step: step.unwrap_or_else(|| default_ula_step(target.beta())),
            };
            multi_chain(method, target, count, burnin, thinning, chains, seed)
        }
        SamplerSpec::Rwm {
            scale,
            burnin,
            thinning,
            chains,
        } => multi_chain(
            ChainMethod::Rwm { scale },
            target,
            count,
            burnin,
            thinning,
            chains,
            seed,
        ),
        SamplerSpec::Rejection => {
            let terms = target.objective().coordinate_terms().ok_or_else(|| {
                Error::InvalidConfig(
                    "rejection sampling needs an additively separable objective".into(),
                )
            })?;
            rejection_sample_separable(&terms, target.beta(), target.domain(), count, seed)
        }
        SamplerSpec::Snis { proposals } => snis_resample(target, proposals, count, seed),
        SamplerSpec::Uniform => Ok(uniform_batch(target.domain(), count, seed, target.beta())),
    }
}

pub(crate) fn uniform_batch(domain: &Domain, count: usize, seed: u64, beta: f64) -> SampleBatch {
    let mut rng = rng_from_seed(seed);
    let points = (0..count)
        .map(|_| domain.sample_uniform(&mut rng))
        .collect();
    SampleBatch::new(points, Provenance::Uniform, beta, seed)
}

/// Runs `chains` independent chains, each started from a uniform point, and
/// concatenates their draws in chain order.
fn multi_chain(
    method: ChainMethod,
    target: &GibbsTarget,
    count: usize,
    burnin: usize,
    thinning: usize,
    chains: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let chains = chains.min(count);
    let mut points = Vec::with_capacity(count);
    let (mut accepted, mut steps, mut nonfinite) = (0usize, 0usize, 0usize);
    for c in 0..chains {
        let share = count / chains + usize::from(c < count % chains);
        let mut init_rng = rng_from_seed(derive_path(seed, &[stream::CHAIN_INIT, c as u64]));
        let init = target.domain().sample_uniform(&mut init_rng);
        let chain_seed = if chains == 1 {
            seed
        } else {
            derive_path(seed, &[stream::SAMPLER, c as u64])
        };
        let (batch, state) =
            mcmc::run_chain_with_state(method, target, share, burnin, thinning, &init, chain_seed)?;
        points.extend(batch.points);
        accepted += state.accepted;
        steps += state.steps_taken;
        nonfinite += state.nonfinite_proposals;
    }
    let mut batch = SampleBatch::new(points, method.provenance(), target.beta(), seed);
    batch.burnin = burnin;
    batch.thinning = thinning;
    batch.chains = chains;
    batch.nonfinite_proposals = nonfinite;
    if matches!(method, ChainMethod::Rwm { .. }) && steps > 0 {
        batch.acceptance_rate = Some(accepted as f64 / steps as f64);
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FnObjective;

    fn flat(d: usize) -> Arc<dyn Objective> {
        Arc::new(
            FnObjective::new(Domain::cube(d, -1.0, 1.0), |_| 0.0)
                .with_gradient(move |t| vec![0.0; t.len()]),
        )
    }

    #[test]
    fn negative_beta_is_rejected() {
        assert!(GibbsTarget::new(flat(1), -1.0).is_err());
        assert!(GibbsTarget::new(flat(1), f64::NAN).is_err());
    }

    #[test]
    fn multi_chain_splits_count() {
        let t = GibbsTarget::new(flat(2), 1.0).unwrap();
        let spec = SamplerSpec::Ula {
            step: Some(1e-3),
            burnin: 5,
            thinning: 2,
            chains: 4,
        };
        let b = draw(&spec, &t, 10, 3).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b.chains, 4);
        assert!(b.points.iter().all(|p| t.domain().contains(p)));
        assert_eq!(b, draw(&spec, &t, 10, 3).unwrap());
    }

    #[test]
    fn spec_parses_from_toml_with_defaults() {
        let s: SamplerSpec = toml::from_str("method = \"ula\"\nchains = 8").unwrap();
        assert_eq!(
            s,
            SamplerSpec::Ula {
                step: None,
                burnin: DEFAULT_BURNIN,
                thinning: DEFAULT_THINNING,
                chains: 8
            }
        );
        let s: SamplerSpec = toml::from_str("method = \"snis\"\nproposals = 100").unwrap();
        assert_eq!(s, SamplerSpec::Snis { proposals: 100 });
    }

    #[test]
    fn export_writes_csv_and_sidecar() {
        let t = GibbsTarget::new(flat(3), 0.0).unwrap();
        let b = draw(&SamplerSpec::Uniform, &t, 4, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.csv");
        b.export(&path).unwrap();
        let csv = std::fs::read_to_string(&path).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "coord_0,coord_1,coord_2");
        assert_eq!(csv.lines().count(), 5);
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap())
                .unwrap();
        assert_eq!(side["method"], "uniform");
        assert_eq!(side["L"], 4);
    }
}
