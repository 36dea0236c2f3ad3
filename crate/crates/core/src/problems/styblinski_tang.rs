use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::objective::{CoordinateTerm, Domain, Objective};

/// Global minimum value of the normalized function, as usually quoted.
pub const ST_GLOBAL_MIN_VALUE: f64 = -39.165;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StSpec {
    pub dim: usize,
}

/// Normalized Styblinski–Tang function on `[-5, 5]^d`:
/// `F(θ) = Σ_i (θ_i⁴ − 16θ_i² + 5θ_i) / (2d)`.
#[derive(Clone, Debug)]
pub struct StyblinskiTang {
    dim: usize,
    domain: Domain,
}

pub fn st_objective(spec: &StSpec) -> StyblinskiTang {
    StyblinskiTang::new(spec.dim)
}

/// Unnormalized one-coordinate polynomial `t⁴ − 16t² + 5t`.
pub fn st_coordinate(t: f64) -> f64 {
    let t2 = t * t;
    t2 * t2 - 16.0 * t2 + 5.0 * t
}

pub fn st_coordinate_derivative(t: f64) -> f64 {
    4.0 * t * t * t - 32.0 * t + 5.0
}

/// Roots of `4t³ − 32t + 5` in increasing order: the per-coordinate global
/// minimizer, the local maximizer, and the local minimizer.
pub fn st_coordinate_stationary_points() -> [f64; 3] {
    // Trigonometric solution of the depressed cubic t³ + pt + q with
    // p = -8, q = 5/4.
    let (p, q) = (-8.0f64, 1.25f64);
    let m = 2.0 * (-p / 3.0).sqrt();
    let phi = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).acos() / 3.0;
    let mut r = [0.0; 3];
    for (k, slot) in r.iter_mut().enumerate() {
        *slot = m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
    }
    r.sort_by(f64::total_cmp);
    r
}

impl StyblinskiTang {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "Styblinski-Tang needs d >= 1");
        StyblinskiTang {
            dim,
            domain: Domain::cube(dim, -5.0, 5.0),
        }
    }

    /// The global minimizer `(t*, …, t*)`.
    pub fn minimizer(&self) -> Vec<f64> {
        vec![st_coordinate_stationary_points()[0]; self.dim]
    }

    pub fn min_value(&self) -> f64 {
        st_coordinate(st_coordinate_stationary_points()[0]) / 2.0
    }
}

impl Objective for StyblinskiTang {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn value(&self, theta: &[f64]) -> f64 {
        theta.iter().map(|&t| st_coordinate(t)).sum::<f64>() / (2.0 * self.dim as f64)
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let c = 2.0 * self.dim as f64;
        theta
            .iter()
            .map(|&t| st_coordinate_derivative(t) / c)
            .collect()
    }

    fn coordinate_terms(&self) -> Option<Vec<CoordinateTerm>> {
        let c = 2.0 * self.dim as f64;
        let term: CoordinateTerm = Arc::new(move |t| st_coordinate(t) / c);
        Some(vec![term; self.dim])
    }
}
