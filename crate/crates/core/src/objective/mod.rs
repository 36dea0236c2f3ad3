//! Objectives, domains and datasets.
//!
//! An [`Objective`] is a scalar field on a bounded [`Domain`] with gradient
//! access. [`EmpiricalLoss`] turns a [`Dataset`] and a per-point loss into the
//! sample average `F̂_n(θ) = (1/n) Σ f(θ, x_i)`.

mod dataset;
mod domain;

use std::sync::Arc;

pub use dataset::{subsample_indices, Dataset};
pub use domain::{Domain, UNBOUNDED_HALF_WIDTH};

use crate::error::{Error, Result};

/// A 1-D function of a single coordinate, used by separable objectives.
pub type CoordinateTerm = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Evaluable scalar field on a bounded domain.
///
/// Implementations must be safe to evaluate concurrently. When
/// [`Objective::is_deterministic`] is true, repeated evaluation at the same
/// point is bit-identical.
pub trait Objective: Send + Sync {
    fn domain(&self) -> &Domain;

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    fn value(&self, theta: &[f64]) -> f64;

    /// Defaults to central differences with step `1e-6·(1+|θ_i|)`.
    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        central_gradient(|t| self.value(t), theta)
    }

    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        (self.value(theta), self.gradient(theta))
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    /// For additively separable objectives, `value(θ) = Σ_i term_i(θ_i)`.
    fn coordinate_terms(&self) -> Option<Vec<CoordinateTerm>> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for Arc<T> {
    fn domain(&self) -> &Domain {
        (**self).domain()
    }
    fn value(&self, theta: &[f64]) -> f64 {
        (**self).value(theta)
    }
    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        (**self).gradient(theta)
    }
    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        (**self).value_and_gradient(theta)
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
    fn coordinate_terms(&self) -> Option<Vec<CoordinateTerm>> {
        (**self).coordinate_terms()
    }
}

/// Central-difference gradient with step `1e-6·(1+|θ_i|)`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, theta: &[f64]) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            let h = 1e-6 * (1.0 + theta[i].abs());
            t[i] = theta[i] + h;
            let fp = f(&t);
            t[i] = theta[i] - h;
            let fm = f(&t);
            t[i] = theta[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Max over coordinates of `|central difference − analytic gradient|` with a
/// fixed step `h`. The point must be at least `h` away from the boundary.
pub fn fd_gradient_check(obj: &dyn Objective, theta: &[f64], h: f64) -> Result<f64> {
    if theta.len() != obj.dim() {
        return Err(Error::DimMismatch {
            expected: obj.dim(),
            got: theta.len(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step must be positive, got {h}"
        )));
    }
    if obj.domain().distance_to_boundary(theta) <= h {
        return Err(Error::BoundaryPoint);
    }
    let g = obj.gradient(theta);
    let mut t = theta.to_vec();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        t[i] = theta[i] + h;
        let fp = obj.value(&t);
        t[i] = theta[i] - h;
        let fm = obj.value(&t);
        t[i] = theta[i];
        worst = worst.max(((fp - fm) / (2.0 * h) - g[i]).abs());
    }
    Ok(worst)
}

/// Finite-difference Hessian from gradients with step `1e-4`, symmetrized as
/// `(H + Hᵀ)/2`.
pub fn fd_hessian(obj: &dyn Objective, theta: &[f64]) -> Vec<Vec<f64>> {
    let d = theta.len();
    let h = 1e-4;
    let mut t = theta.to_vec();
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        t[i] = theta[i] + h;
        let gp = obj.gradient(&t);
        t[i] = theta[i] - h;
        let gm = obj.gradient(&t);
        t[i] = theta[i];
        rows.push(
            gp.iter()
                .zip(&gm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    let mut sym = rows.clone();
    for i in 0..d {
        for j in 0..d {
            sym[i][j] = 0.5 * (rows[i][j] + rows[j][i]);
        }
    }
    sym
}

/// Per-point loss `f(θ, x)` with its gradient in `θ`.
pub trait PointwiseLoss: Send + Sync {
    fn loss(&self, theta: &[f64], x: &[f64]) -> f64;

    /// Returns `f(θ, x)` and adds `weight · ∇_θ f(θ, x)` into `grad`.
    fn loss_and_accumulate(&self, theta: &[f64], x: &[f64], weight: f64, grad: &mut [f64]) -> f64;
}

/// Closure-backed [`PointwiseLoss`].
pub struct FnLoss<F, G> {
    f: F,
    g: G,
}

impl<F, G> FnLoss<F, G>
where
    F: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(f: F, g: G) -> Self {
        FnLoss { f, g }
    }
}

impl<F, G> PointwiseLoss for FnLoss<F, G>
where
    F: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync,
{
    fn loss(&self, theta: &[f64], x: &[f64]) -> f64 {
        (self.f)(theta, x)
    }

    fn loss_and_accumulate(&self, theta: &[f64], x: &[f64], weight: f64, grad: &mut [f64]) -> f64 {
        for (a, b) in grad.iter_mut().zip((self.g)(theta, x)) {
            *a += weight * b;
        }
        (self.f)(theta, x)
    }
}

/// `F̂_n(θ) = (1/n) Σ_i f(θ, x_i)` over a fixed dataset.
pub struct EmpiricalLoss<L> {
    data: Dataset,
    loss: L,
    domain: Domain,
}

impl<L: PointwiseLoss> EmpiricalLoss<L> {
    pub fn new(data: Dataset, loss: L, domain: Domain) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(EmpiricalLoss { data, loss, domain })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }
}

/// Builds the empirical loss from closures for the per-point value and gradient.
pub fn empirical_loss<F, G>(
    data: Dataset,
    f: F,
    g: G,
    domain: Domain,
) -> Result<EmpiricalLoss<FnLoss<F, G>>>
where
    F: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync,
{
    EmpiricalLoss::new(data, FnLoss::new(f, g), domain)
}

impl<L: PointwiseLoss> Objective for EmpiricalLoss<L> {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let n = self.data.len() as f64;
        self.data
            .rows()
            .map(|x| self.loss.loss(theta, x))
            .sum::<f64>()
            / n
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.value_and_gradient(theta).1
    }

    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let n = self.data.len() as f64;
        let w = 1.0 / n;
        let mut grad = vec![0.0; theta.len()];
        let total: f64 = self
            .data
            .rows()
            .map(|x| self.loss.loss_and_accumulate(theta, x, w, &mut grad))
            .sum();
        (total / n, grad)
    }
}

/// Builds `F̂_n` from an outsourced subset.
pub trait LossSpec: Send + Sync {
    fn build(&self, outsourced: &Dataset) -> Result<Arc<dyn Objective>>;
}

/// Objective defined by closures; the gradient falls back to central
/// differences when not supplied.
pub struct FnObjective {
    domain: Domain,
    f: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    g: Option<Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>>,
}

impl FnObjective {
    pub fn new(domain: Domain, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnObjective {
            domain,
            f: Box::new(f),
            g: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.g = Some(Box::new(g));
        self
    }
}

impl Objective for FnObjective {
    fn domain(&self) -> &Domain {
        &self.domain
    }
    fn value(&self, theta: &[f64]) -> f64 {
        (self.f)(theta)
    }
    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        match &self.g {
            Some(g) => g(theta),
            None => central_gradient(|t| (self.f)(t), theta),
        }
    }
}

/// `scale · F(θ) + shift`.
pub struct Affine<O> {
    pub inner: O,
    pub scale: f64,
    pub shift: f64,
}

impl<O: Objective> Objective for Affine<O> {
    fn domain(&self) -> &Domain {
        self.inner.domain()
    }
    fn value(&self, theta: &[f64]) -> f64 {
        self.scale * self.inner.value(theta) + self.shift
    }
    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.inner
            .gradient(theta)
            .into_iter()
            .map(|g| self.scale * g)
            .collect()
    }
    fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = self.inner.value_and_gradient(theta);
        (
            self.scale * v + self.shift,
            g.into_iter().map(|g| self.scale * g).collect(),
        )
    }
    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq_loss() -> FnLoss<impl Fn(&[f64], &[f64]) -> f64, impl Fn(&[f64], &[f64]) -> Vec<f64>> {
        FnLoss::new(
            |t: &[f64], x: &[f64]| t.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(),
            |t: &[f64], x: &[f64]| t.iter().zip(x).map(|(a, b)| 2.0 * (a - b)).collect(),
        )
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let d = Dataset::from_flat(1, vec![]).unwrap();
        let e = EmpiricalLoss::new(d, sq_loss(), Domain::cube(1, -1.0, 1.0))
            .err()
            .unwrap();
        assert_eq!(e.code(), "empty-dataset");
    }

    #[test]
    fn single_point_mean_is_the_pointwise_loss() {
        let d = Dataset::from_rows(&[vec![0.7]]).unwrap();
        let obj = EmpiricalLoss::new(d, sq_loss(), Domain::cube(1, -5.0, 5.0)).unwrap();
        for t in [-1.0, 0.0, 2.5] {
            assert_eq!(obj.value(&[t]), (t - 0.7) * (t - 0.7));
        }
    }

    #[test]
    fn symmetric_mean() {
        let d = Dataset::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
        let obj = EmpiricalLoss::new(d, sq_loss(), Domain::cube(1, -5.0, 5.0)).unwrap();
        assert_eq!(obj.value(&[1.0]), 1.0);
        assert_eq!(obj.gradient(&[1.0]), vec![0.0]);
    }

    #[test]
    fn fd_check_on_quadratic_and_constant() {
        let dom = Domain::cube(3, -10.0, 10.0);
        let q = FnObjective::new(dom.clone(), |t| t.iter().map(|x| x * x).sum())
            .with_gradient(|t| t.iter().map(|x| 2.0 * x).collect());
        assert!(fd_gradient_check(&q, &[0.3, -1.2, 4.0], 1e-4).unwrap() <= 1e-6);
        let c = FnObjective::new(dom, |_| 3.0).with_gradient(|t| vec![0.0; t.len()]);
        assert!(fd_gradient_check(&c, &[1.0, 2.0, 3.0], 1e-4).unwrap() <= 1e-10);
    }

    #[test]
    fn fd_check_rejects_boundary_points() {
        let q = FnObjective::new(Domain::cube(1, -1.0, 1.0), |t| t[0] * t[0]);
        assert_eq!(
            fd_gradient_check(&q, &[1.0], 1e-4).unwrap_err().code(),
            "boundary-point"
        );
        assert_eq!(
            fd_gradient_check(&q, &[2.0], 1e-4).unwrap_err().code(),
            "boundary-point"
        );
    }

    #[test]
    fn fallback_gradient_is_accurate() {
        let q = FnObjective::new(Domain::cube(2, -10.0, 10.0), |t| t[0].powi(3) + t[0] * t[1]);
        let g = q.gradient(&[1.0, 2.0]);
        assert!((g[0] - 5.0).abs() < 1e-6 && (g[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hessian_of_quadratic() {
        let q = FnObjective::new(Domain::cube(2, -10.0, 10.0), |t| {
            t[0] * t[0] + 3.0 * t[0] * t[1]
        })
        .with_gradient(|t| vec![2.0 * t[0] + 3.0 * t[1], 3.0 * t[0]]);
        let h = fd_hessian(&q, &[0.5, 0.5]);
        assert!((h[0][0] - 2.0).abs() < 1e-8);
        assert!((h[0][1] - 3.0).abs() < 1e-8 && (h[1][0] - 3.0).abs() < 1e-8);
        assert!(h[1][1].abs() < 1e-8);
    }
}
