//! Generalized multinomial logit with scale heterogeneity, estimated by
//! maximum simulated likelihood.
//!
//! Customer `n` has coefficients `φ_n = exp(z_nᵀψ + ξ_n)·φ` and picks the
//! alternative with the highest utility `x_jᵀφ_n + ε_nj` (Gumbel noise). The
//! simulated negative log-likelihood averages the logit probability of the
//! observed choice over `R` frozen draws `ξ_n^[r]` per customer.
//!
//! Customers are stored as [`Dataset`] rows `[choice, z_1..z_q, ξ^[1]..ξ^[R]]`
//! so that outsourcing a subset keeps each customer's frozen draws.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Gumbel, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::dot;
use crate::objective::{Dataset, Domain, LossSpec, Objective};
use crate::rng::{derive_seed, rng_from_seed};

/// Half-width of the default parameter box.
pub const DEFAULT_GMNL_HALF_WIDTH: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmnlParams {
    pub attributes: usize,
    pub characteristics: usize,
    pub alternatives: usize,
    pub customers: usize,
    pub draws: usize,
    /// Defaults to `(1,…,1,−1,…,−1)`.
    pub phi_true: Option<Vec<f64>>,
    /// Defaults to `(1,…,1)`.
    pub psi_true: Option<Vec<f64>>,
    /// Standard deviation of the true scale shock `ξ_n` when generating choices.
    pub shock_sd: f64,
    pub half_width: f64,
}

impl Default for GmnlParams {
    fn default() -> Self {
        GmnlParams {
            attributes: 10,
            characteristics: 5,
            alternatives: 5,
            customers: 1000,
            draws: 100,
            phi_true: None,
            psi_true: None,
            shock_sd: 1.0,
            half_width: DEFAULT_GMNL_HALF_WIDTH,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmnlSpec {
    pub attributes: usize,
    pub characteristics: usize,
    pub alternatives: usize,
    pub draws: usize,
    /// `J × p` product attributes.
    pub products: Vec<Vec<f64>>,
    pub phi_true: Vec<f64>,
    pub psi_true: Vec<f64>,
    pub generation_seed: u64,
    /// Seed of the frozen simulation draws (independent of the choice shocks).
    pub draw_seed: u64,
    pub domain: Domain,
}

impl GmnlSpec {
    pub fn dim(&self) -> usize {
        self.attributes + self.characteristics
    }

    /// `θ* = (φ*, ψ*)`.
    pub fn theta_true(&self) -> Vec<f64> {
        let mut t = self.phi_true.clone();
        t.extend_from_slice(&self.psi_true);
        t
    }

    pub fn row_width(&self) -> usize {
        1 + self.characteristics + self.draws
    }

    /// Regenerates the frozen draws for customers `0..n` from `draw_seed`.
    pub fn frozen_draws(&self, customers: usize) -> Vec<Vec<f64>> {
        let mut rng = rng_from_seed(self.draw_seed);
        (0..customers)
            .map(|_| {
                (0..self.draws)
                    .map(|_| rng.sample(StandardNormal))
                    .collect()
            })
            .collect()
    }
}

fn default_phi(p: usize) -> Vec<f64> {
    (0..p)
        .map(|i| if i < p.div_ceil(2) { 1.0 } else { -1.0 })
        .collect()
}

/// Simulates a GMNL choice dataset.
pub fn gmnl_generate(params: &GmnlParams, seed: u64) -> Result<(GmnlSpec, Dataset)> {
    let (p, q, j) = (
        params.attributes,
        params.characteristics,
        params.alternatives,
    );
    if p == 0 || j == 0 || params.customers == 0 || params.draws == 0 {
        return Err(Error::InvalidConfig("GMNL needs p, J, N, R >= 1".into()));
    }
    let phi = params.phi_true.clone().unwrap_or_else(|| default_phi(p));
    let psi = params.psi_true.clone().unwrap_or_else(|| vec![1.0; q]);
    if phi.len() != p || psi.len() != q {
        return Err(Error::InvalidConfig(
            "true parameter widths do not match p and q".into(),
        ));
    }
    let generation_seed = derive_seed(seed, 1);
    let draw_seed = derive_seed(seed, 2);
    let mut rng = rng_from_seed(generation_seed);
    let gumbel = Gumbel::new(0.0, 1.0).expect("standard Gumbel");
    let products: Vec<Vec<f64>> = (0..j)
        .map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let base: Vec<f64> = products.iter().map(|x| dot(x, &phi)).collect();
    let half = params.half_width;
    let spec = GmnlSpec {
        attributes: p,
        characteristics: q,
        alternatives: j,
        draws: params.draws,
        products,
        phi_true: phi,
        psi_true: psi.clone(),
        generation_seed,
        draw_seed,
        domain: Domain::cube(p + q, -half, half),
    };
    let frozen = spec.frozen_draws(params.customers);
    let mut values = Vec::with_capacity(params.customers * spec.row_width());
    for draws in frozen {
        let z: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();
        let shock: f64 = rng.sample(StandardNormal);
        let scale = (dot(&z, &psi) + params.shock_sd * shock).exp();
        let mut best = (0, f64::NEG_INFINITY);
        for (k, b) in base.iter().enumerate() {
            let u = scale * b + rng.sample(gumbel);
            if u > best.1 {
                best = (k, u);
            }
        }
        values.push(best.0 as f64);
        values.extend_from_slice(&z);
        values.extend_from_slice(&draws);
    }
    let data = Dataset::from_flat(spec.row_width(), values)?;
    Ok((spec, data))
}

/// Deterministic simulated negative log-likelihood (common random numbers).
pub struct GmnlNll {
    spec: Arc<GmnlSpec>,
    choices: Vec<usize>,
    /// Row-major `N × q`.
    characteristics: Vec<f64>,
    /// Row-major `N × R` of `exp(ξ_n^[r])`.
    draw_scales: Vec<f64>,
}

pub fn gmnl_sim_nll(spec: &GmnlSpec, data: &Dataset) -> Result<GmnlNll> {
    GmnlNll::new(Arc::new(spec.clone()), data)
}

impl GmnlNll {
    pub fn new(spec: Arc<GmnlSpec>, data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.width() != spec.row_width() {
            return Err(Error::DimMismatch {
                expected: spec.row_width(),
                got: data.width(),
            });
        }
        let q = spec.characteristics;
        let mut choices = Vec::with_capacity(data.len());
        let mut characteristics = Vec::with_capacity(data.len() * q);
        let mut draw_scales = Vec::with_capacity(data.len() * spec.draws);
        for row in data.rows() {
            let c = row[0];
            if c < 0.0 || c.fract() != 0.0 || c as usize >= spec.alternatives {
                return Err(Error::Format(format!("invalid choice index {c}")));
            }
            choices.push(c as usize);
            characteristics.extend_from_slice(&row[1..1 + q]);
            draw_scales.extend(row[1 + q..].iter().map(|x| x.exp()));
        }
        Ok(GmnlNll {
            spec,
            choices,
            characteristics,
            draw_scales,
        })
    }

    pub fn spec(&self) -> &GmnlSpec {
        &self.spec
    }

    pub fn customers(&self) -> usize {
        self.choices.len()
    }

    /// Per-customer simulated log-likelihoods `log((1/R) Σ_r P_r)`.
    pub fn customer_log_likelihoods(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.customers());
        self.evaluate(theta, None, Some(&mut out))?;
        Ok(out)
    }

    pub fn try_value(&self, theta: &[f64]) -> Result<f64> {
        self.evaluate(theta, None, None)
    }

    pub fn try_value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; theta.len()];
        let v = self.evaluate(theta, Some(&mut g), None)?;
        Ok((v, g))
    }

    fn evaluate(
        &self,
        theta: &[f64],
        grad: Option<&mut [f64]>,
        mut per_customer: Option<&mut Vec<f64>>,
    ) -> Result<f64> {
        let spec = &*self.spec;
        let (p, q, jn, r_n) = (
            spec.attributes,
            spec.characteristics,
            spec.alternatives,
            spec.draws,
        );
        let (phi, psi) = theta.split_at(p);
        let utils: Vec<f64> = spec.products.iter().map(|x| dot(x, phi)).collect();
        let umax = utils.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // Utilities relative to the best alternative; s·w_j ≤ 0 for s > 0.
        let rel: Vec<f64> = utils.iter().map(|u| u - umax).collect();

        let n_cust = self.customers();
        let mut total = 0.0;
        // ∂F/∂u_j accumulated over customers, and ∂F/∂ψ.
        let mut d_util = vec![0.0; jn];
        let mut d_psi = vec![0.0; q];
        let mut probs = vec![0.0; jn];
        let mut coef = vec![0.0; jn];
        let mut log_terms: Vec<f64> = Vec::new();

        for n in 0..n_cust {
            let z = &self.characteristics[n * q..(n + 1) * q];
            let scales = &self.draw_scales[n * r_n..(n + 1) * r_n];
            let k = self.choices[n];
            let ea = dot(z, psi).exp();
            if !ea.is_finite() {
                return Err(Error::UtilityOverflow {
                    customer: n,
                    draw: 0,
                });
            }
            coef.iter_mut().for_each(|c| *c = 0.0);
            let mut sum_lik = 0.0;
            for (r, &e) in scales.iter().enumerate() {
                let s = ea * e;
                if !s.is_finite() {
                    return Err(Error::UtilityOverflow {
                        customer: n,
                        draw: r,
                    });
                }
                let mut denom = 0.0;
                for (pj, w) in probs.iter_mut().zip(&rel) {
                    *pj = (s * w).exp();
                    denom += *pj;
                }
                let lik = probs[k] / denom;
                sum_lik += lik;
                if grad.is_some() {
                    // ℓ_r · s_r · (δ_jk − P_rj), normalized by Σ ℓ later.
                    let c = lik * s / denom;
                    for (cj, pj) in coef.iter_mut().zip(&probs) {
                        *cj -= c * pj;
                    }
                    coef[k] += lik * s;
                }
            }
            let log_lik = if sum_lik > 1e-250 {
                (sum_lik / r_n as f64).ln()
            } else {
                // Every draw is tiny: redo this customer in the log domain.
                log_terms.clear();
                coef.iter_mut().for_each(|c| *c = 0.0);
                let mut scratch = Vec::with_capacity(r_n);
                for &e in scales {
                    let s = ea * e;
                    let lse =
                        crate::numeric::log_sum_exp(&rel.iter().map(|w| s * w).collect::<Vec<_>>());
                    log_terms.push(s * rel[k] - lse);
                    scratch.push((s, lse));
                }
                let lmax = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut wsum = 0.0;
                for (lt, (s, lse)) in log_terms.iter().zip(&scratch) {
                    let w = (lt - lmax).exp();
                    wsum += w;
                    if grad.is_some() {
                        for (j, cj) in coef.iter_mut().enumerate() {
                            let pj = (s * rel[j] - lse).exp();
                            *cj += w * s * (if j == k { 1.0 } else { 0.0 } - pj);
                        }
                    }
                }
                sum_lik = wsum;
                lmax + (wsum / r_n as f64).ln()
            };
            if !log_lik.is_finite() {
                return Err(Error::UtilityOverflow {
                    customer: n,
                    draw: 0,
                });
            }
            total -= log_lik;
            if let Some(pc) = per_customer.as_deref_mut() {
                pc.push(log_lik);
            }
            if grad.is_some() {
                let mut d_a = 0.0;
                for j in 0..jn {
                    let c = coef[j] / sum_lik;
                    d_util[j] -= c;
                    d_a -= c * utils[j];
                }
                for (g, zi) in d_psi.iter_mut().zip(z) {
                    *g += d_a * zi;
                }
            }
        }
        let inv_n = 1.0 / n_cust as f64;
        if let Some(g) = grad {
            g.iter_mut().for_each(|x| *x = 0.0);
            for (x, du) in spec.products.iter().zip(&d_util) {
                for (gi, xi) in g[..p].iter_mut().zip(x) {
                    *gi += du * xi * inv_n;
                }
            }
            for (gi, dp) in g[p..].iter_mut().zip(&d_psi) {
                *gi = dp * inv_n;
            }
        }
        Ok(total * inv_n)
    }
}

impl Objective for GmnlNll {
    fn domain(&self) -> &Domain {
        &self.spec.domain
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.try_value(theta).unwrap_or(f64::INFINITY)
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.value_and_gradient(theta).1
    }

    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        self.try_value_and_gradient(theta)
            .unwrap_or_else(|_| (f64::INFINITY, vec![f64::NAN; theta.len()]))
    }
}

/// [`LossSpec`] building the simulated likelihood on outsourced customers.
#[derive(Clone, Debug)]
pub struct GmnlLoss {
    pub spec: Arc<GmnlSpec>,
}

impl LossSpec for GmnlLoss {
    fn build(&self, outsourced: &Dataset) -> Result<Arc<dyn Objective>> {
        Ok(Arc::new(GmnlNll::new(self.spec.clone(), outsourced)?))
    }
}

/// Writes `products.csv` (J×p), `customers.csv` (N×q), `choices.csv`
/// (N indices) and `spec.json` into `dir`.
pub fn export_gmnl(spec: &GmnlSpec, data: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let q = spec.characteristics;
    let write = |name: &str, lines: &mut dyn Iterator<Item = String>| -> Result<()> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        for l in lines {
            writeln!(w, "{l}").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    };
    let join = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    write("products.csv", &mut spec.products.iter().map(|x| join(x)))?;
    write(
        "customers.csv",
        &mut data.rows().map(|r| join(&r[1..1 + q])),
    )?;
    write(
        "choices.csv",
        &mut data.rows().map(|r| (r[0] as usize).to_string()),
    )?;
    let path = dir.join("spec.json");
    let json = serde_json::to_string_pretty(spec).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

/// Inverse of [`export_gmnl`]; the frozen draws are regenerated from the
/// recorded draw seed.
pub fn import_gmnl(dir: impl AsRef<Path>) -> Result<(GmnlSpec, Dataset)> {
    let dir = dir.as_ref();
    let path = dir.join("spec.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let spec: GmnlSpec = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    let customers = Dataset::load_csv(dir.join("customers.csv"), false)?;
    let choices = Dataset::load_csv(dir.join("choices.csv"), false)?;
    if customers.len() != choices.len() || customers.width() != spec.characteristics {
        return Err(Error::Format(
            "customers.csv and choices.csv disagree".into(),
        ));
    }
    let draws = spec.frozen_draws(customers.len());
    let mut values = Vec::with_capacity(customers.len() * spec.row_width());
    for ((z, c), d) in customers.rows().zip(choices.rows()).zip(draws) {
        values.push(c[0]);
        values.extend_from_slice(z);
        values.extend_from_slice(&d);
    }
    let data = Dataset::from_flat(spec.row_width(), values)?;
    Ok((spec, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::central_gradient;

    fn small() -> (GmnlSpec, Dataset) {
        let params = GmnlParams {
            customers: 200,
            draws: 20,
            ..GmnlParams::default()
        };
        gmnl_generate(&params, 42).unwrap()
    }

    #[test]
    fn zero_phi_gives_log_j() {
        let (spec, data) = small();
        let f = gmnl_sim_nll(&spec, &data).unwrap();
        let mut theta = vec![0.0; spec.dim()];
        theta[12] = 0.7;
        assert!((f.value(&theta) - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_alternative_always_chosen() {
        let params = GmnlParams {
            alternatives: 1,
            customers: 50,
            draws: 3,
            ..GmnlParams::default()
        };
        let (_, data) = gmnl_generate(&params, 1).unwrap();
        assert!(data.rows().all(|r| r[0] == 0.0));
    }

    #[test]
    fn generation_is_reproducible() {
        let a = gmnl_generate(&GmnlParams::default(), 9).unwrap();
        let b = gmnl_generate(&GmnlParams::default(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (spec, data) = small();
        let f = gmnl_sim_nll(&spec, &data).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..spec.dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let g = f.gradient(&theta);
            let fd = central_gradient(|t| f.value(t), &theta);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-3 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn truth_beats_zero_and_likelihoods_are_probabilities() {
        let (spec, data) = small();
        let f = gmnl_sim_nll(&spec, &data).unwrap();
        let at_truth = f.value(&spec.theta_true());
        assert!(at_truth < f.value(&vec![0.0; spec.dim()]));
        let lls = f.customer_log_likelihoods(&spec.theta_true()).unwrap();
        assert!(lls.iter().all(|l| l.is_finite() && *l <= 1e-15));
    }

    #[test]
    fn extreme_scales_use_the_log_domain() {
        // Large ψ drives s·Δu far below the exp underflow threshold.
        let (spec, data) = small();
        let f = gmnl_sim_nll(&spec, &data).unwrap();
        let mut theta = vec![2.0; spec.dim()];
        theta[10..].iter_mut().for_each(|x| *x = 2.0);
        let (v, g) = f.try_value_and_gradient(&theta).unwrap();
        assert!(v.is_finite() && g.iter().all(|x| x.is_finite()));
        let fd = central_gradient(|t| f.value(t), &theta);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-3 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn overflowing_scale_is_reported() {
        let (spec, data) = small();
        let f = gmnl_sim_nll(&spec, &data).unwrap();
        let mut theta = vec![0.5; spec.dim()];
        theta[10..].iter_mut().for_each(|x| *x = 400.0);
        let err = f.try_value(&theta).unwrap_err();
        assert_eq!(err.code(), "utility-overflow");
        assert_eq!(f.value(&theta), f64::INFINITY);
    }

    #[test]
    fn export_import_roundtrip() {
        let (spec, data) = small();
        let dir = tempfile::tempdir().unwrap();
        export_gmnl(&spec, &data, dir.path()).unwrap();
        let (spec2, data2) = import_gmnl(dir.path()).unwrap();
        assert_eq!(spec, spec2);
        assert_eq!(data, data2);
    }
}
