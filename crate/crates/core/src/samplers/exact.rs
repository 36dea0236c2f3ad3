use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;

use super::{GibbsTarget, Provenance, SampleBatch};
use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, golden_min, grid_min_1d, linspace};
use crate::objective::{CoordinateTerm, Domain};
use crate::rng::rng_from_seed;

const MIN_GRID: usize = 2001;
const RATE_GRID: usize = 4001;
const MIN_ACCEPTANCE: f64 = 1e-6;

/// Minimum of a 1-D function on `[lo, hi]`: grid search, then golden-section
/// refinement around the best grid cell.
pub fn coordinate_minimum(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let (x, v) = grid_min_1d(f, lo, hi, MIN_GRID);
    let h = (hi - lo) / (MIN_GRID - 1) as f64;
    let (xr, vr) = golden_min(f, (x - h).max(lo), (x + h).min(hi), 1e-12);
    if vr < v {
        (xr, vr)
    } else {
        (x, v)
    }
}

/// Exact i.i.d. draws from `π_β(θ) ∝ Π_i exp(−β f_i(θ_i))` on a box, by
/// per-coordinate rejection from the uniform proposal with envelope
/// `exp(−β(f_i − min f_i))`.
pub fn rejection_sample_separable(
    terms: &[CoordinateTerm],
    beta: f64,
    domain: &Domain,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let Domain::Box { lo, hi } = domain else {
        return Err(Error::InvalidConfig(
            "rejection sampling needs a box domain".into(),
        ));
    };
    if terms.len() != lo.len() {
        return Err(Error::DimMismatch {
            expected: lo.len(),
            got: terms.len(),
        });
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "rejection sampling needs a finite beta >= 0, got {beta}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidConfig(
            "sample count L must be at least 1".into(),
        ));
    }
    let mut mins = Vec::with_capacity(terms.len());
    for (i, f) in terms.iter().enumerate() {
        let (_, m) = coordinate_minimum(&**f, lo[i], hi[i]);
        let env = |t: f64| (-beta * (f(t) - m)).exp();
        let grid = linspace(lo[i], hi[i], RATE_GRID);
        let mass: f64 = grid
            .windows(2)
            .map(|w| adaptive_simpson(&env, w[0], w[1], 1e-12))
            .sum();
        let rate = mass / (hi[i] - lo[i]);
        if !(rate >= MIN_ACCEPTANCE) {
            return Err(Error::EnvelopeTooLoose { rate });
        }
        mins.push(m);
    }
    let mut rng = rng_from_seed(seed);
    let (mut proposed, mut accepted) = (0u64, 0u64);
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = Vec::with_capacity(terms.len());
        for (i, f) in terms.iter().enumerate() {
            loop {
                let t = rng.random_range(lo[i]..hi[i]);
                let u: f64 = rng.random();
                proposed += 1;
                if beta == 0.0 || u < (-beta * (f(t) - mins[i])).exp() {
                    accepted += 1;
                    p.push(t);
                    break;
                }
            }
        }
        points.push(p);
    }
    let mut batch = SampleBatch::new(points, Provenance::Rejection, beta, seed);
    batch.acceptance_rate = Some(accepted as f64 / proposed as f64);
    Ok(batch)
}

/// Self-normalized importance resampling: `proposals` uniform points,
/// weights `exp(−β(F(θ_i) − min F))`, then `count` draws with replacement.
pub fn snis_resample(
    target: &GibbsTarget,
    proposals: usize,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if count == 0 || proposals < count {
        return Err(Error::InvalidConfig(format!(
            "SNIS needs proposals >= L >= 1, got {proposals} proposals for L = {count}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let domain = target.domain();
    let pool: Vec<Vec<f64>> = (0..proposals)
        .map(|_| domain.sample_uniform(&mut rng))
        .collect();
    let beta = target.beta();
    let weights: Vec<f64> = if beta == 0.0 {
        vec![1.0; proposals]
    } else {
        let values: Vec<f64> = pool.iter().map(|p| target.objective().value(p)).collect();
        let vmin = values
            .iter()
            .cloned()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        values
            .iter()
            .map(|&v| {
                if !v.is_finite() {
                    0.0
                } else if v == vmin {
                    1.0
                } else {
                    (-beta * (v - vmin)).exp()
                }
            })
            .collect()
    };
    let index = WeightedIndex::new(&weights).map_err(|_| Error::WeightUnderflow)?;
    let points = (0..count)
        .map(|_| pool[index.sample(&mut rng)].clone())
        .collect();
    Ok(SampleBatch::new(points, Provenance::Snis, beta, seed))
}
