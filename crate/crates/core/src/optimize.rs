//! Projected gradient descent with a fixed step and iteration budget, and
//! stationary-point classification.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dist, norm};
use crate::objective::{fd_hessian, Objective};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdConfig {
    pub step: f64,
    pub iterations: usize,
    #[serde(default)]
    pub record_trajectory: bool,
}

impl GdConfig {
    pub fn new(step: f64, iterations: usize) -> Self {
        GdConfig {
            step,
            iterations,
            record_trajectory: false,
        }
    }

    pub fn recording(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    /// Step zero is allowed and leaves the start unchanged.
    pub fn validate(&self) -> Result<()> {
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "GD step must be finite and nonnegative, got {}",
                self.step
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig(
                "GD needs at least one iteration".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Vec<f64>,
    #[serde(rename = "final")]
    pub final_point: Vec<f64>,
    pub final_value: f64,
    pub diverged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Runs `θ_{k+1} = Π(θ_k − step·∇F(θ_k))` for exactly `cfg.iterations` steps.
///
/// A non-finite gradient or iterate stops the run with `diverged = true` and
/// the last finite iterate as the final point.
pub fn gd_run(obj: &dyn Objective, theta0: &[f64], cfg: &GdConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if theta0.len() != obj.dim() {
        return Err(Error::DimMismatch {
            expected: obj.dim(),
            got: theta0.len(),
        });
    }
    let domain = obj.domain();
    let mut theta = domain.project(theta0)?;
    let mut values = cfg
        .record_trajectory
        .then(|| Vec::with_capacity(cfg.iterations + 1));
    let mut diverged = false;
    let mut next = theta.clone();
    for _ in 0..cfg.iterations {
        let g = match values.as_mut() {
            Some(vs) => {
                let (v, g) = obj.value_and_gradient(&theta);
                vs.push(v);
                g
            }
            None => obj.gradient(&theta),
        };
        if g.iter().any(|x| !x.is_finite()) {
            diverged = true;
            break;
        }
        for ((n, t), gi) in next.iter_mut().zip(&theta).zip(&g) {
            *n = t - cfg.step * gi;
        }
        domain.project_in_place(&mut next);
        if next.iter().any(|x| !x.is_finite()) {
            diverged = true;
            break;
        }
        std::mem::swap(&mut theta, &mut next);
    }
    let final_value = obj.value(&theta);
    if let Some(vs) = values.as_mut() {
        // Pad a diverged run so the recorded length is always iterations + 1.
        while vs.len() < cfg.iterations + 1 {
            vs.push(final_value);
        }
    }
    Ok(Trajectory {
        start: theta0.to_vec(),
        final_point: theta,
        final_value,
        diverged: diverged || !final_value.is_finite(),
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stationarity {
    LocalMin,
    SaddleOrMax,
    Boundary,
    Nonstationary,
}

/// Classifies `θ` by gradient norm, distance to the boundary and the smallest
/// eigenvalue of the symmetrized finite-difference Hessian.
pub fn classify_stationary(
    obj: &dyn Objective,
    theta: &[f64],
    grad_tol: f64,
    eig_tol: f64,
) -> Stationarity {
    if norm(&obj.gradient(theta)) > grad_tol {
        return Stationarity::Nonstationary;
    }
    if obj.domain().distance_to_boundary(theta) <= 1e-6 {
        return Stationarity::Boundary;
    }
    if min_eigenvalue(&fd_hessian(obj, theta)) > eig_tol {
        Stationarity::LocalMin
    } else {
        Stationarity::SaddleOrMax
    }
}

fn sym_matrix(h: &[Vec<f64>]) -> DMatrix<f64> {
    let d = h.len();
    DMatrix::from_fn(d, d, |i, j| 0.5 * (h[i][j] + h[j][i]))
}

pub fn min_eigenvalue(h: &[Vec<f64>]) -> f64 {
    SymmetricEigen::new(sym_matrix(h)).eigenvalues.min()
}

/// Spectral norm of a symmetric matrix, `max |λ_i|`.
pub fn operator_norm(h: &[Vec<f64>]) -> f64 {
    SymmetricEigen::new(sym_matrix(h)).eigenvalues.amax()
}

/// Largest Hessian operator norm over `samples` uniform points: an estimate
/// of the gradient Lipschitz constant.
pub fn lipschitz_estimate(obj: &dyn Objective, samples: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    (0..samples)
        .map(|_| operator_norm(&fd_hessian(obj, &obj.domain().sample_uniform(&mut rng))))
        .fold(0.0, f64::max)
}

/// Per-trajectory success criteria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuccessRule {
    /// `final_value ≤ f_star + tol`.
    ValueGap { f_star: f64, tol: f64 },
    /// `‖final − θ*‖ ≤ tol`.
    PointDistance { theta_star: Vec<f64>, tol: f64 },
    /// `final_value < threshold`.
    Below { threshold: f64 },
}

impl SuccessRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SuccessRule::ValueGap { tol, .. } | SuccessRule::PointDistance { tol, .. }
                if !(tol > 0.0) =>
            {
                Err(Error::InvalidConfig(format!(
                    "success tolerance must be positive, got {tol}"
                )))
            }
            _ => Ok(()),
        }
    }
}

pub fn success_test(traj: &Trajectory, rule: &SuccessRule) -> bool {
    if traj.diverged {
        return false;
    }
    match rule {
        SuccessRule::ValueGap { f_star, tol } => traj.final_value <= f_star + tol,
        SuccessRule::PointDistance { theta_star, tol } => {
            dist(&traj.final_point, theta_star) <= *tol
        }
        SuccessRule::Below { threshold } => traj.final_value < *threshold,
    }
}
