//! Negated Gaussian-kernel expectation under a Gaussian mixture.
//!
//! With data `X ~ Σ p_i N(m_i, σ² I)` and kernel
//! `k(θ, x) = (2πσ²)^{-d/2} exp(-‖θ−x‖²/(2σ²))`, the minimized objective is
//! `F(θ) = -E[k(θ, X)] = -Σ p_i (4πσ²)^{-d/2} exp(-‖θ−m_i‖²/(4σ²))`,
//! whose local minima sit near the mixture means.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::dist;
use crate::objective::{Dataset, Domain, EmpiricalLoss, LossSpec, Objective, PointwiseLoss};
use crate::rng::{rng_from_seed, Rng};

/// Depth of the heaviest mode in the default instances.
pub const DEFAULT_LEAD_DEPTH: f64 = 40.0;
/// Mixing weight of the heaviest component in the default instances.
pub const DEFAULT_LEAD_WEIGHT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmSpec {
    pub means: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub sigma: f64,
    pub domain: Domain,
}

impl GmmSpec {
    pub fn new(
        means: Vec<Vec<f64>>,
        weights: Vec<f64>,
        sigma: f64,
        domain: Domain,
    ) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if means.is_empty() || means.len() != weights.len() {
            return bad("mixture needs one weight per mean");
        }
        let d = domain.dim();
        if means.iter().any(|m| m.len() != d) {
            return bad("mean width differs from the domain dimension");
        }
        if weights.iter().any(|&p| !(p > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("mixture weights must be positive and sum to one");
        }
        if !(sigma > 0.0) {
            return bad("bandwidth must be positive");
        }
        for i in 0..means.len() {
            for j in 0..i {
                if means[i] == means[j] {
                    return bad("mixture means must be pairwise distinct");
                }
            }
        }
        Ok(GmmSpec {
            means,
            weights,
            sigma,
            domain,
        })
    }

    /// Seeded default instance with `m` components in dimension `d`.
    ///
    /// The first component carries weight 0.5 and the rest share the
    /// remainder equally. σ is set so that the heaviest mode has depth
    /// ≈ 40, placing the global minimum below −32 and every other local
    /// minimum above it. Means are uniform in `[-5σ, 5σ]^d` with pairwise
    /// distance at least `2σ√d` (by resampling); the domain is `[-6σ, 6σ]^d`.
    pub fn default_instance(d: usize, m: usize, seed: u64) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidConfig(
                "mixture needs d >= 1 and M >= 1".into(),
            ));
        }
        let lead = if m == 1 { 1.0 } else { DEFAULT_LEAD_WEIGHT };
        let sigma = ((lead / DEFAULT_LEAD_DEPTH).powf(2.0 / d as f64) / (4.0 * PI)).sqrt();
        let mut weights = vec![lead];
        weights.extend(std::iter::repeat_n(
            (1.0 - lead) / (m - 1).max(1) as f64,
            m - 1,
        ));
        let min_sep = 2.0 * sigma * (d as f64).sqrt();
        let mut rng = rng_from_seed(seed);
        let mut means: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut attempts = 0usize;
        while means.len() < m {
            attempts += 1;
            if attempts > 1_000_000 {
                return Err(Error::InvalidConfig(
                    "could not place well-separated means".into(),
                ));
            }
            let c: Vec<f64> = (0..d)
                .map(|_| sigma * rng.random_range(-5.0..5.0))
                .collect();
            if means.iter().all(|o| dist(o, &c) >= min_sep) {
                means.push(c);
            }
        }
        GmmSpec::new(
            means,
            weights,
            sigma,
            Domain::cube(d, -6.0 * sigma, 6.0 * sigma),
        )
    }

    /// One-dimensional two-component instance `½N(-2, σ²) + ½N(2, σ²)` with
    /// σ = 0.5 on `[-4, 4]`, used by the approximation diagnostics.
    pub fn symmetric_1d() -> Self {
        GmmSpec::new(
            vec![vec![-2.0], vec![2.0]],
            vec![0.5, 0.5],
            0.5,
            Domain::cube(1, -4.0, 4.0),
        )
        .expect("valid instance")
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn components(&self) -> usize {
        self.means.len()
    }

    /// `(4πσ²)^{-d/2}`, the peak of the convolved kernel.
    pub fn population_norm(&self) -> f64 {
        (4.0 * PI * self.sigma * self.sigma).powf(-(self.dim() as f64) / 2.0)
    }

    /// `(2πσ²)^{-d/2}`, the peak of the data kernel.
    pub fn kernel_norm(&self) -> f64 {
        (2.0 * PI * self.sigma * self.sigma).powf(-(self.dim() as f64) / 2.0)
    }

    /// Local minima of the population objective found by mean-shift from
    /// each component mean, with their values, sorted by value.
    pub fn population_minima(&self) -> Vec<(Vec<f64>, f64)> {
        let f = gmm_population_objective(self);
        let s2 = 4.0 * self.sigma * self.sigma;
        let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
        for start in &self.means {
            let mut theta = start.clone();
            for _ in 0..10_000 {
                let mut num = vec![0.0; theta.len()];
                let mut den = 0.0;
                for (m, p) in self.means.iter().zip(&self.weights) {
                    let w = p * (-crate::numeric::dist(&theta, m).powi(2) / s2).exp();
                    den += w;
                    for (a, b) in num.iter_mut().zip(m) {
                        *a += w * b;
                    }
                }
                let next: Vec<f64> = num.iter().map(|a| a / den).collect();
                let step = dist(&next, &theta);
                theta = next;
                if step < 1e-13 * (1.0 + self.sigma) {
                    break;
                }
            }
            if found
                .iter()
                .all(|(t, _)| dist(t, &theta) > 1e-6 * self.sigma)
            {
                let v = f.value(&theta);
                found.push((theta, v));
            }
        }
        found.sort_by(|a, b| a.1.total_cmp(&b.1));
        found
    }
}

/// Closed-form population objective.
pub struct GmmPopulation {
    spec: Arc<GmmSpec>,
    norm: f64,
}

pub fn gmm_population_objective(spec: &GmmSpec) -> GmmPopulation {
    GmmPopulation {
        norm: spec.population_norm(),
        spec: Arc::new(spec.clone()),
    }
}

impl GmmPopulation {
    pub fn spec(&self) -> &GmmSpec {
        &self.spec
    }
}

impl Objective for GmmPopulation {
    fn domain(&self) -> &Domain {
        &self.spec.domain
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let s2 = 4.0 * self.spec.sigma * self.spec.sigma;
        -self.norm
            * self
                .spec
                .means
                .iter()
                .zip(&self.spec.weights)
                .map(|(m, p)| p * (-sq_dist(theta, m) / s2).exp())
                .sum::<f64>()
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.value_and_gradient(theta).1
    }

    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let s2 = 4.0 * self.spec.sigma * self.spec.sigma;
        let mut grad = vec![0.0; theta.len()];
        let mut v = 0.0;
        for (m, p) in self.spec.means.iter().zip(&self.spec.weights) {
            let e = p * self.norm * (-sq_dist(theta, m) / s2).exp();
            v -= e;
            for ((g, t), mi) in grad.iter_mut().zip(theta).zip(m) {
                *g += e * 2.0 * (t - mi) / s2;
            }
        }
        (v, grad)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Per-point negated Gaussian kernel `-(2πσ²)^{-d/2} exp(-‖θ−x‖²/(2σ²))`.
#[derive(Clone, Debug)]
pub struct GaussianKernelLoss {
    pub sigma: f64,
    norm: f64,
}

impl GaussianKernelLoss {
    pub fn new(sigma: f64, dim: usize) -> Self {
        GaussianKernelLoss {
            sigma,
            norm: (2.0 * PI * sigma * sigma).powf(-(dim as f64) / 2.0),
        }
    }
}

impl PointwiseLoss for GaussianKernelLoss {
    fn loss(&self, theta: &[f64], x: &[f64]) -> f64 {
        -self.norm * (-sq_dist(theta, x) / (2.0 * self.sigma * self.sigma)).exp()
    }

    fn loss_and_accumulate(&self, theta: &[f64], x: &[f64], weight: f64, grad: &mut [f64]) -> f64 {
        let s2 = self.sigma * self.sigma;
        let k = self.norm * (-sq_dist(theta, x) / (2.0 * s2)).exp();
        let c = weight * k / s2;
        for ((g, t), xi) in grad.iter_mut().zip(theta).zip(x) {
            *g += c * (t - xi);
        }
        -k
    }
}

pub type GmmEmpirical = EmpiricalLoss<GaussianKernelLoss>;

/// `F̂_n(θ) = -(1/n) Σ_j (2πσ²)^{-d/2} exp(-‖θ−x_j‖²/(2σ²))`.
pub fn gmm_empirical_objective(spec: &GmmSpec, data: Dataset) -> Result<GmmEmpirical> {
    if data.width() != spec.dim() && !data.is_empty() {
        return Err(Error::DimMismatch {
            expected: spec.dim(),
            got: data.width(),
        });
    }
    EmpiricalLoss::new(
        data,
        GaussianKernelLoss::new(spec.sigma, spec.dim()),
        spec.domain.clone(),
    )
}

/// [`LossSpec`] building the kernel empirical loss from outsourced points.
#[derive(Clone, Debug)]
pub struct GmmKernelLoss {
    pub spec: GmmSpec,
}

impl LossSpec for GmmKernelLoss {
    fn build(&self, outsourced: &Dataset) -> Result<Arc<dyn Objective>> {
        Ok(Arc::new(gmm_empirical_objective(
            &self.spec,
            outsourced.clone(),
        )?))
    }
}

fn draw_into(
    spec: &GmmSpec,
    comp: &WeightedIndex<f64>,
    rng: &mut Rng,
    out: &mut Vec<f64>,
) -> usize {
    let i = comp.sample(rng);
    for mi in &spec.means[i] {
        let z: f64 = rng.sample(StandardNormal);
        out.push(mi + spec.sigma * z);
    }
    i
}

/// `count` mixture draws: a component by weight, then a Gaussian around its mean.
pub fn gmm_sample(spec: &GmmSpec, count: usize, seed: u64) -> Dataset {
    gmm_sample_labeled(spec, count, seed).0
}

/// As [`gmm_sample`], also returning the component label of each draw.
pub fn gmm_sample_labeled(spec: &GmmSpec, count: usize, seed: u64) -> (Dataset, Vec<usize>) {
    let mut rng = rng_from_seed(seed);
    let comp = WeightedIndex::new(&spec.weights).expect("weights validated");
    let mut values = Vec::with_capacity(count * spec.dim());
    let labels = (0..count)
        .map(|_| draw_into(spec, &comp, &mut rng, &mut values))
        .collect();
    (
        Dataset::from_flat(spec.dim(), values).expect("consistent width"),
        labels,
    )
}

/// Closed-form value with a Monte Carlo batch-mean gradient. The batch is
/// drawn once from `seed` at construction, so the gradient field is a fixed
/// deterministic function afterwards.
pub struct GmmBatchedGradient {
    population: GmmPopulation,
    kernel: GaussianKernelLoss,
    batch: Dataset,
}

pub fn gmm_batched_gradient_objective(
    spec: &GmmSpec,
    batch: usize,
    seed: u64,
) -> GmmBatchedGradient {
    GmmBatchedGradient {
        population: gmm_population_objective(spec),
        kernel: GaussianKernelLoss::new(spec.sigma, spec.dim()),
        batch: gmm_sample(spec, batch.max(1), seed),
    }
}

impl Objective for GmmBatchedGradient {
    fn domain(&self) -> &Domain {
        self.population.domain()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.population.value(theta)
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let w = 1.0 / self.batch.len() as f64;
        let mut g = vec![0.0; theta.len()];
        for x in self.batch.rows() {
            self.kernel.loss_and_accumulate(theta, x, w, &mut g);
        }
        g
    }

    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        (self.value(theta), self.gradient(theta))
    }
}
