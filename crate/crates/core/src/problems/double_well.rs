//! Tilted quartic double well on a 1-D interval.
//!
//! `f(t) = k(t⁴/4 − b t³/3 − s² t²/2 + b s² t) − f₀` with `f′(t) = k(t − b)(t² − s²)`.
//! The minima sit at `±s`, the local maximum at `b`, and the tilt
//! `b = 3α/(4ks³)` makes the right well shallower by exactly `α`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::objective::{CoordinateTerm, Domain, Objective};

/// Curvature multiplier `k`.
pub const DOUBLE_WELL_STIFFNESS: f64 = 4.0;

#[derive(Clone, Debug)]
pub struct DoubleWell {
    alpha: f64,
    s: f64,
    k: f64,
    b: f64,
    offset: f64,
    domain: Domain,
}

/// Double well with gap `alpha` between the minima at `±radius_scale`, on the
/// interval `[−2s, 2s]`.
pub fn double_well_1d(alpha: f64, radius_scale: f64) -> Result<DoubleWell> {
    DoubleWell::new(alpha, radius_scale)
}

impl DoubleWell {
    pub fn new(alpha: f64, s: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !(s > 0.0) || !alpha.is_finite() || !s.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "double well needs alpha >= 0 and s > 0, got {alpha}, {s}"
            )));
        }
        let k = DOUBLE_WELL_STIFFNESS;
        let b = 3.0 * alpha / (4.0 * k * s.powi(3));
        if b.abs() >= s {
            return Err(Error::InvalidConfig(format!(
                "gap {alpha} too large for s = {s}: the shallow well disappears"
            )));
        }
        let mut w = DoubleWell {
            alpha,
            s,
            k,
            b,
            offset: 0.0,
            domain: Domain::boxed(vec![-2.0 * s], vec![2.0 * s]).expect("valid interval"),
        };
        w.offset = w.raw(-s);
        Ok(w)
    }

    fn raw(&self, t: f64) -> f64 {
        let (b, s2) = (self.b, self.s * self.s);
        self.k * (t.powi(4) / 4.0 - b * t.powi(3) / 3.0 - s2 * t * t / 2.0 + b * s2 * t)
    }

    pub fn f(&self, t: f64) -> f64 {
        self.raw(t) - self.offset
    }

    pub fn df(&self, t: f64) -> f64 {
        self.k * (t - self.b) * (t * t - self.s * self.s)
    }

    pub fn d2f(&self, t: f64) -> f64 {
        self.k * (3.0 * t * t - 2.0 * self.b * t - self.s * self.s)
    }

    pub fn gap(&self) -> f64 {
        self.alpha
    }

    pub fn deep_min(&self) -> f64 {
        -self.s
    }

    pub fn shallow_min(&self) -> f64 {
        self.s
    }

    pub fn local_max(&self) -> f64 {
        self.b
    }

    /// Left inflection point; `f″ > 0` on `(−2s, t_−)`.
    pub fn inflection_left(&self) -> f64 {
        (self.b - (self.b * self.b + 3.0 * self.s * self.s).sqrt()) / 3.0
    }

    /// Radius of the largest interval around the deep minimum on which `f` is
    /// strictly convex.
    pub fn convexity_radius(&self) -> f64 {
        self.inflection_left() + self.s
    }

    /// Curvature at the deep minimum.
    pub fn curvature_at_min(&self) -> f64 {
        self.d2f(self.deep_min())
    }

    /// Everything left of the local maximum descends into the deep well.
    pub fn in_deep_basin(&self, t: f64) -> bool {
        t < self.b
    }
}

impl Objective for DoubleWell {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.f(theta[0])
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        vec![self.df(theta[0])]
    }

    fn coordinate_terms(&self) -> Option<Vec<CoordinateTerm>> {
        let me = self.clone();
        Some(vec![Arc::new(move |t| me.f(t))])
    }
}
