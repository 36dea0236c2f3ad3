use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::dist;
use crate::rng::Rng;

/// Half-width used when a problem is "effectively unconstrained".
pub const UNBOUNDED_HALF_WIDTH: f64 = 1e6;

/// Bounded parameter domain Θ: a Euclidean ball or an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidConfig(
                "domain dimension must be positive".into(),
            ));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Domain::Ball {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidConfig(
                "box bounds must be nonempty and of equal width".into(),
            ));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidConfig(
                "box needs lo_i < hi_i in every coordinate".into(),
            ));
        }
        Ok(Domain::Box { lo, hi })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Domain::Box {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    /// Stand-in for an unconstrained problem: the box `[-1e6, 1e6]^dim`.
    pub fn unbounded(dim: usize) -> Self {
        Self::cube(dim, -UNBOUNDED_HALF_WIDTH, UNBOUNDED_HALF_WIDTH)
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } => center.len(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Ball { center, radius } => dist(theta, center) <= *radius,
            Domain::Box { lo, hi } => theta
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(t, (l, h))| *l <= *t && *t <= *h),
        }
    }

    /// Euclidean projection onto the domain. Idempotent: the returned point
    /// satisfies `contains` exactly, so projecting again is the identity.
    pub fn project(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check(theta)?;
        let mut out = theta.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// As [`Domain::project`] but without the width check.
    pub fn project_in_place(&self, theta: &mut [f64]) {
        match self {
            Domain::Ball { center, radius } => {
                let r = dist(theta, center);
                if r <= *radius {
                    return;
                }
                let orig: Vec<f64> = theta.to_vec();
                let mut factor = radius / r;
                loop {
                    for ((t, o), c) in theta.iter_mut().zip(&orig).zip(center) {
                        *t = c + (o - c) * factor;
                    }
                    if dist(theta, center) <= *radius {
                        break;
                    }
                    factor *= 1.0 - f64::EPSILON;
                }
            }
            Domain::Box { lo, hi } => {
                for ((t, l), h) in theta.iter_mut().zip(lo).zip(hi) {
                    *t = t.clamp(*l, *h);
                }
            }
        }
    }

    /// Distance from an interior point to the boundary (0 outside).
    pub fn distance_to_boundary(&self, theta: &[f64]) -> f64 {
        if !self.contains(theta) {
            return 0.0;
        }
        match self {
            Domain::Ball { center, radius } => radius - dist(theta, center),
            Domain::Box { lo, hi } => theta
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(t, (l, h))| (t - l).min(h - t))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Ball { center, radius } => {
                unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
        }
    }

    /// One uniform draw. Balls use a Gaussian direction and radius `R·U^{1/d}`.
    pub fn sample_uniform(&self, rng: &mut Rng) -> Vec<f64> {
        match self {
            Domain::Ball { center, radius } => {
                let d = center.len();
                let mut dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let n = crate::numeric::norm(&dir);
                let u: f64 = rng.random();
                let r = radius * u.powf(1.0 / d as f64);
                for (x, c) in dir.iter_mut().zip(center) {
                    *x = c + *x / n * r;
                }
                self.project_in_place(&mut dir);
                dir
            }
            Domain::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect(),
        }
    }
}

fn unit_ball_volume(d: usize) -> f64 {
    // V_d = π^{d/2} / Γ(d/2 + 1), via the recursion V_d = 2π/d · V_{d-2}.
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}
