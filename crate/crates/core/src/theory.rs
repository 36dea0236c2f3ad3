//! Bound calculators and their measurable counterparts.
//!
//! The bounds are evaluated as formulas with user-supplied constants; absolute
//! values are order-of-magnitude only. The measurements (sup-norm gaps on a
//! grid, quadrature masses, Monte Carlo miss frequencies) are exact up to
//! grid resolution and sampling error.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, dist, linspace, median, norm, ols_slope, trapezoid};
use crate::objective::{fd_hessian, Domain, Objective};
use crate::optimize::operator_norm;
use crate::problems::{
    gmm_empirical_objective, gmm_population_objective, gmm_sample, DoubleWell, GmmSpec,
};
use crate::rng::derive_path;
use crate::samplers::{rejection_sample_separable, GibbsTarget};

/// `C·d·ln(1/ρ)/δ²` before rounding up.
pub fn sample_size_unrounded(delta: f64, rho: f64, d: usize, c: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::BadTheoryParams(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::BadTheoryParams(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    if d == 0 {
        return Err(Error::BadTheoryParams(
            "dimension must be at least 1".into(),
        ));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::BadTheoryParams(format!(
            "constant C must be positive, got {c}"
        )));
    }
    Ok(c * d as f64 * (1.0 / rho).ln() / (delta * delta))
}

/// Outsourced sample size `n(δ, ρ, d) = ⌈C·d·ln(1/ρ)/δ²⌉`.
pub fn required_sample_size(delta: f64, rho: f64, d: usize, c: f64) -> Result<u64> {
    Ok(sample_size_unrounded(delta, rho, d, c)?.ceil() as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub per_axis: usize,
    pub points: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub sup_value_gap: f64,
    pub sup_grad_gap: f64,
    pub sup_hessian_gap: f64,
    /// Largest distance between paired stationary points; absent when not
    /// requested or when the counts differ.
    pub max_stationary_displacement: Option<f64>,
    pub stationary_mismatch: bool,
    pub stationary_counts: Option<(usize, usize)>,
    pub grid: GridSpec,
}

fn bounding_box(domain: &Domain) -> (Vec<f64>, Vec<f64>) {
    match domain {
        Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
        Domain::Ball { center, radius } => (
            center.iter().map(|c| c - radius).collect(),
            center.iter().map(|c| c + radius).collect(),
        ),
    }
}

/// Tensor grid over the bounding box, restricted to the domain.
fn domain_grid(domain: &Domain, per_axis: usize) -> (Vec<Vec<f64>>, GridSpec) {
    let (lo, hi) = bounding_box(domain);
    let axes: Vec<Vec<f64>> = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| linspace(l, h, per_axis))
        .collect();
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points.retain(|p| domain.contains(p));
    let spec = GridSpec {
        dim: lo.len(),
        per_axis,
        points: points.len(),
        lo,
        hi,
    };
    (points, spec)
}

/// Sup-norm gaps between `f` and `fhat` in value, gradient (Euclidean) and
/// Hessian (operator norm) over a grid with `resolution` points per axis.
/// With `with_stationary`, stationary points of both are located and paired
/// by nearest neighbour.
pub fn measure_delta_approx(
    f: &dyn Objective,
    fhat: &dyn Objective,
    resolution: usize,
    with_stationary: bool,
) -> Result<ApproxReport> {
    let d = f.dim();
    if fhat.dim() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: fhat.dim(),
        });
    }
    if d > 3 {
        return Err(Error::BadTheoryParams(format!(
            "grid measurement needs d <= 3, got {d}"
        )));
    }
    if with_stationary && d > 2 {
        return Err(Error::BadTheoryParams(
            "stationary-point matching needs d <= 2".into(),
        ));
    }
    if resolution < 3 {
        return Err(Error::BadTheoryParams(
            "grid resolution must be at least 3".into(),
        ));
    }
    let (grid, spec) = domain_grid(f.domain(), resolution);
    let (mut sv, mut sg, mut sh) = (0.0f64, 0.0f64, 0.0f64);
    for p in &grid {
        let (v1, g1) = f.value_and_gradient(p);
        let (v2, g2) = fhat.value_and_gradient(p);
        sv = sv.max((v1 - v2).abs());
        let gdiff: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a - b).collect();
        sg = sg.max(norm(&gdiff));
        let h1 = fd_hessian(f, p);
        let h2 = fd_hessian(fhat, p);
        let hdiff: Vec<Vec<f64>> = h1
            .iter()
            .zip(&h2)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| a - b).collect())
            .collect();
        sh = sh.max(operator_norm(&hdiff));
    }
    let mut report = ApproxReport {
        sup_value_gap: sv,
        sup_grad_gap: sg,
        sup_hessian_gap: sh,
        max_stationary_displacement: None,
        stationary_mismatch: false,
        stationary_counts: None,
        grid: spec,
    };
    if with_stationary {
        let a = stationary_points(f, resolution)?;
        let b = stationary_points(fhat, resolution)?;
        report.stationary_counts = Some((a.len(), b.len()));
        if a.len() != b.len() {
            report.stationary_mismatch = true;
        } else {
            report.max_stationary_displacement = Some(
                a.iter()
                    .map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max),
            );
        }
    }
    Ok(report)
}

/// Interior stationary points for `d ≤ 2`.
///
/// In 1-D, sign changes of the derivative on the grid are refined by
/// bisection. In 2-D, grid-local minima of `‖∇F‖²` are refined by Newton's
/// method and kept when the gradient vanishes.
pub fn stationary_points(obj: &dyn Objective, resolution: usize) -> Result<Vec<Vec<f64>>> {
    let (lo, hi) = bounding_box(obj.domain());
    match obj.dim() {
        1 => {
            let xs = linspace(lo[0], hi[0], resolution.max(3));
            let g: Vec<f64> = xs.iter().map(|&x| obj.gradient(&[x])[0]).collect();
            let mut out: Vec<Vec<f64>> = Vec::new();
            for i in 0..xs.len() - 1 {
                if g[i] == 0.0 && i > 0 {
                    out.push(vec![xs[i]]);
                } else if g[i] * g[i + 1] < 0.0 {
                    let r = bisect(|t| obj.gradient(&[t])[0], xs[i], xs[i + 1], 1e-13)
                        .unwrap_or(0.5 * (xs[i] + xs[i + 1]));
                    out.push(vec![r]);
                }
            }
            Ok(out)
        }
        2 => Ok(stationary_points_2d(obj, resolution)),
        d => Err(Error::BadTheoryParams(format!(
            "stationary search needs d <= 2, got {d}"
        ))),
    }
}

fn stationary_points_2d(obj: &dyn Objective, resolution: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = bounding_box(obj.domain());
    let n = resolution.max(3);
    let xs = linspace(lo[0], hi[0], n);
    let ys = linspace(lo[1], hi[1], n);
    let g2 = |p: &[f64]| {
        let g = obj.gradient(p);
        g[0] * g[0] + g[1] * g[1]
    };
    let field: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| ys.iter().map(|&y| g2(&[x, y])).collect())
        .collect();
    let cell = ((hi[0] - lo[0]) / (n - 1) as f64).max((hi[1] - lo[1]) / (n - 1) as f64);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let v = field[i][j];
            let is_min = (-1i32..=1).all(|di| {
                (-1i32..=1).all(|dj| {
                    (di == 0 && dj == 0)
                        || v <= field[(i as i32 + di) as usize][(j as i32 + dj) as usize]
                })
            });
            if !is_min {
                continue;
            }
            if let Some(p) = newton_refine(obj, vec![xs[i], ys[j]], cell) {
                if obj.domain().distance_to_boundary(&p) > 1e-6
                    && !found.iter().any(|q| dist(q, &p) < 1e-6)
                {
                    found.push(p);
                }
            }
        }
    }
    found
}

fn newton_refine(obj: &dyn Objective, mut p: Vec<f64>, cell: f64) -> Option<Vec<f64>> {
    let start = p.clone();
    for _ in 0..50 {
        let g = obj.gradient(&p);
        if norm(&g) < 1e-10 {
            return Some(p);
        }
        let h = fd_hessian(obj, &p);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let dx = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dy = (h[0][0] * g[1] - h[1][0] * g[0]) / det;
        p[0] -= dx;
        p[1] -= dy;
        if dist(&p, &start) > 2.0 * cell || !obj.domain().contains(&p) {
            return None;
        }
    }
    (norm(&obj.gradient(&p)) < 1e-7).then_some(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub beta: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub mass_outside: f64,
    pub mass_inside: f64,
    pub log_mass_outside: f64,
    pub resolution: usize,
}

/// `π_β(B_r(center)ᶜ)` by trapezoidal quadrature with the density shifted by
/// its grid minimum. 1-D integrates the ball, its complement and the whole
/// interval separately with nodes on the ball's endpoints; 2-D uses one
/// tensor grid.
pub fn concentration_mass(
    target: &GibbsTarget,
    center: &[f64],
    r: f64,
    resolution: usize,
) -> Result<ConcentrationReport> {
    let domain = target.domain();
    let d = domain.dim();
    if center.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: center.len(),
        });
    }
    if d > 2 {
        return Err(Error::BadTheoryParams(format!(
            "quadrature needs d <= 2, got {d}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::BadTheoryParams(format!(
            "radius must be positive, got {r}"
        )));
    }
    if !target.beta().is_finite() {
        return Err(Error::BadTheoryParams(
            "quadrature needs a finite beta".into(),
        ));
    }
    if resolution < 3 {
        return Err(Error::BadTheoryParams(
            "quadrature resolution must be at least 3".into(),
        ));
    }
    let (lo, hi) = bounding_box(domain);
    let diameter = norm(&lo.iter().zip(&hi).map(|(a, b)| b - a).collect::<Vec<_>>());
    if r >= diameter {
        return Err(Error::RegionExceedsDomain { radius: r });
    }
    let beta = target.beta();
    let f = target.objective();
    let (inside, outside, total) = if d == 1 {
        let (a, b) = ((center[0] - r).max(lo[0]), (center[0] + r).min(hi[0]));
        let xs_all = linspace(lo[0], hi[0], resolution);
        let fmin = xs_all
            .iter()
            .map(|&x| f.value(&[x]))
            .fold(f64::INFINITY, f64::min);
        let integral = |l: f64, h: f64| {
            if h <= l {
                return 0.0;
            }
            let xs = linspace(l, h, resolution);
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| (-beta * (f.value(&[x]) - fmin)).exp())
                .collect();
            trapezoid(&ys, xs[1] - xs[0])
        };
        let inside = integral(a, b);
        let outside = integral(lo[0], a) + integral(b, hi[0]);
        (inside, outside, integral(lo[0], hi[0]))
    } else {
        let xs = linspace(lo[0], hi[0], resolution);
        let ys = linspace(lo[1], hi[1], resolution);
        let (hx, hy) = (xs[1] - xs[0], ys[1] - ys[0]);
        let mut vals = Vec::with_capacity(resolution * resolution);
        for &x in &xs {
            for &y in &ys {
                let p = [x, y];
                vals.push(if domain.contains(&p) {
                    Some(f.value(&p))
                } else {
                    None
                });
            }
        }
        let fmin = vals.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        let (mut inside, mut outside) = (0.0, 0.0);
        for (i, &x) in xs.iter().enumerate() {
            let wx = if i == 0 || i + 1 == resolution {
                0.5
            } else {
                1.0
            };
            for (j, &y) in ys.iter().enumerate() {
                let Some(v) = vals[i * resolution + j] else {
                    continue;
                };
                let wy = if j == 0 || j + 1 == resolution {
                    0.5
                } else {
                    1.0
                };
                let w = wx * wy * hx * hy * (-beta * (v - fmin)).exp();
                if dist(&[x, y], center) <= r {
                    inside += w;
                } else {
                    outside += w;
                }
            }
        }
        (inside, outside, inside + outside)
    };
    let mass_outside = (outside / total).clamp(0.0, 1.0);
    Ok(ConcentrationReport {
        beta,
        center: center.to_vec(),
        radius: r,
        mass_outside,
        mass_inside: (inside / total).clamp(0.0, 1.0),
        log_mass_outside: mass_outside.ln(),
        resolution,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissBound {
    pub value: f64,
    /// Set when `π(Bᶜ) + δ_β > 1` and the base was clamped to 1.
    pub clamped: bool,
}

/// Probability that none of `L` draws lands in `B`: `(π(Bᶜ) + δ_β)^L`.
pub fn miss_probability_bound(pi_bc: f64, delta_beta: f64, samples: usize) -> MissBound {
    let base = pi_bc + delta_beta;
    let clamped = base > 1.0;
    MissBound {
        value: base.clamp(0.0, 1.0).powi(samples as i32),
        clamped,
    }
}

/// `(1 − p)^m`: probability that `m` uniform starts all miss a basin of
/// uniform mass `p`.
pub fn random_start_failure_bound(p_ball: f64, m: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_ball) {
        return Err(Error::BadTheoryParams(format!(
            "p_ball must lie in [0, 1], got {p_ball}"
        )));
    }
    Ok((1.0 - p_ball).powi(m as i32))
}

/// Indices `i` with `F(θ_i) ≤ min_j F(θ_j) + ε`.
pub fn eps_global_set(stationary: &[(Vec<f64>, f64)], epsilon: f64) -> Result<Vec<usize>> {
    if stationary.is_empty() {
        return Err(Error::BadTheoryParams("stationary list is empty".into()));
    }
    let best = stationary.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok((0..stationary.len())
        .filter(|&i| stationary[i].1 <= best + epsilon)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissEstimate {
    pub batches: usize,
    pub misses: usize,
    pub frequency: f64,
    pub standard_error: f64,
}

/// Monte Carlo frequency of the event "no draw of an exact `L`-batch lands in
/// the convexity ball of the deep minimum" for a double well.
pub fn empirical_all_miss(
    well: &DoubleWell,
    beta: f64,
    samples: usize,
    batches: usize,
    seed: u64,
) -> Result<MissEstimate> {
    let terms = well.coordinate_terms().expect("double well is separable");
    let draws = rejection_sample_separable(&terms, beta, well.domain(), samples * batches, seed)?;
    let (c, r) = (well.deep_min(), well.convexity_radius());
    let misses = draws
        .points
        .chunks(samples)
        .filter(|chunk| chunk.iter().all(|p| (p[0] - c).abs() > r))
        .count();
    let frequency = misses as f64 / batches as f64;
    Ok(MissEstimate {
        batches,
        misses,
        frequency,
        standard_error: (frequency * (1.0 - frequency) / batches as f64).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassRow {
    pub beta: f64,
    pub mass_outside: f64,
    pub log_mass_outside: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissRow {
    pub beta: f64,
    pub samples: usize,
    pub bound: f64,
    pub empirical: MissEstimate,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxRow {
    pub n: usize,
    pub median_value_gap: f64,
    /// Mismatched stationary counts enter the median as `+∞`.
    pub median_displacement: f64,
    pub mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub sample_size: u64,
    pub sample_size_params: (f64, f64, usize, f64),
    pub well_gap: f64,
    pub well_radius: f64,
    pub concentration: Vec<MassRow>,
    /// Slope of `log π_β(B_rᶜ)` between the two largest `β`.
    pub terminal_slope: f64,
    pub miss: Vec<MissRow>,
    pub approx: Vec<ApproxRow>,
    /// Least-squares slope of `log sup|F − F̂_n|` on `log n`.
    pub approx_slope: f64,
}

/// Settings for [`battery`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub seed: u64,
    pub betas_mass: Vec<f64>,
    pub betas_miss: Vec<f64>,
    pub samples_miss: Vec<usize>,
    pub batches: usize,
    pub ns: Vec<usize>,
    pub seeds_per_n: usize,
    pub grid: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            seed: 2024,
            betas_mass: vec![2.0, 5.0, 10.0, 20.0, 40.0],
            betas_miss: vec![5.0, 10.0, 20.0],
            samples_miss: vec![1, 5, 20],
            batches: 10_000,
            ns: vec![10, 100, 1000, 10_000],
            seeds_per_n: 20,
            grid: 401,
        }
    }
}

/// Concentration rows for the double well over `betas`.
pub fn concentration_rows(
    well: &Arc<DoubleWell>,
    betas: &[f64],
    resolution: usize,
) -> Result<Vec<MassRow>> {
    betas
        .iter()
        .map(|&beta| {
            let target = GibbsTarget::new(well.clone(), beta)?;
            let rep = concentration_mass(
                &target,
                &[well.deep_min()],
                well.convexity_radius(),
                resolution,
            )?;
            Ok(MassRow {
                beta,
                mass_outside: rep.mass_outside,
                log_mass_outside: rep.log_mass_outside,
            })
        })
        .collect()
}

/// Miss-bound rows for the double well with an exact sampler (`δ_β = 0`).
pub fn miss_rows(
    well: &Arc<DoubleWell>,
    betas: &[f64],
    samples: &[usize],
    batches: usize,
    seed: u64,
) -> Result<Vec<MissRow>> {
    let mut rows = Vec::new();
    for (bi, &beta) in betas.iter().enumerate() {
        let target = GibbsTarget::new(well.clone(), beta)?;
        let pi_bc =
            concentration_mass(&target, &[well.deep_min()], well.convexity_radius(), 10_000)?
                .mass_outside;
        for (li, &l) in samples.iter().enumerate() {
            let bound = miss_probability_bound(pi_bc, 0.0, l).value;
            let empirical = empirical_all_miss(
                well,
                beta,
                l,
                batches,
                derive_path(seed, &[bi as u64, li as u64]),
            )?;
            let within_bound = empirical.frequency
                <= bound
                    + 3.0
                        * empirical
                            .standard_error
                            .max((bound * (1.0 - bound) / batches as f64).sqrt());
            rows.push(MissRow {
                beta,
                samples: l,
                bound,
                empirical,
                within_bound,
            });
        }
    }
    Ok(rows)
}

/// δ-approximation rows for the symmetric 1-D mixture over outsourced sizes
/// `ns`, `seeds` replicates each.
pub fn approx_rows(
    ns: &[usize],
    seeds: usize,
    grid: usize,
    seed: u64,
) -> Result<(Vec<ApproxRow>, f64)> {
    let spec = GmmSpec::symmetric_1d();
    let f = gmm_population_objective(&spec);
    let mut rows = Vec::new();
    let (mut log_n, mut log_gap) = (Vec::new(), Vec::new());
    for &n in ns {
        let mut gaps = Vec::with_capacity(seeds);
        let mut disp = Vec::with_capacity(seeds);
        let mut mismatches = 0;
        for s in 0..seeds {
            let data = gmm_sample(&spec, n, derive_path(seed, &[n as u64, s as u64]));
            let fhat = gmm_empirical_objective(&spec, data)?;
            let rep = measure_delta_approx(&f, &fhat, grid, true)?;
            log_n.push((n as f64).ln());
            log_gap.push(rep.sup_value_gap.ln());
            gaps.push(rep.sup_value_gap);
            if rep.stationary_mismatch {
                mismatches += 1;
            }
            disp.push(rep.max_stationary_displacement.unwrap_or(f64::INFINITY));
        }
        rows.push(ApproxRow {
            n,
            median_value_gap: median(&gaps),
            median_displacement: median(&disp),
            mismatches,
        });
    }
    Ok((rows, ols_slope(&log_n, &log_gap)))
}

/// The standard desk-scale battery: sample size, concentration rate, miss
/// bound and δ-approximation scaling.
pub fn battery(cfg: &BatteryConfig) -> Result<TheoryReport> {
    let well = Arc::new(DoubleWell::new(1.0, 1.0)?);
    let sample_size_params = (0.1, 0.05, 5, 1.0);
    let concentration = concentration_rows(&well, &cfg.betas_mass, 10_000)?;
    let k = concentration.len();
    let terminal_slope = if k >= 2 {
        (concentration[k - 1].log_mass_outside - concentration[k - 2].log_mass_outside)
            / (concentration[k - 1].beta - concentration[k - 2].beta)
    } else {
        f64::NAN
    };
    let miss = miss_rows(
        &well,
        &cfg.betas_miss,
        &cfg.samples_miss,
        cfg.batches,
        derive_path(cfg.seed, &[1]),
    )?;
    let (approx, approx_slope) = approx_rows(
        &cfg.ns,
        cfg.seeds_per_n,
        cfg.grid,
        derive_path(cfg.seed, &[2]),
    )?;
    Ok(TheoryReport {
        sample_size: required_sample_size(0.1, 0.05, 5, 1.0)?,
        sample_size_params,
        well_gap: well.gap(),
        well_radius: well.convexity_radius(),
        concentration,
        terminal_slope,
        miss,
        approx,
        approx_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Affine, FnObjective};
    use crate::problems::{double_well_1d, st_coordinate, st_coordinate_stationary_points};

    #[test]
    fn sample_size_examples() {
        assert_eq!(required_sample_size(0.1, 0.05, 5, 1.0).unwrap(), 1498);
        assert_eq!(required_sample_size(1.0, 0.5, 1, 1.0).unwrap(), 1);
        let a = sample_size_unrounded(0.2, 0.1, 3, 1.0).unwrap();
        let b = sample_size_unrounded(0.1, 0.1, 3, 1.0).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        assert_eq!(
            required_sample_size(0.0, 0.5, 1, 1.0).unwrap_err().code(),
            "bad-theory-params"
        );
        assert!(required_sample_size(0.1, 1.0, 1, 1.0).is_err());
    }

    #[test]
    fn identical_functions_have_zero_gaps() {
        let w = double_well_1d(1.0, 1.0).unwrap();
        let r = measure_delta_approx(&w, &w, 101, true).unwrap();
        assert_eq!(
            (r.sup_value_gap, r.sup_grad_gap, r.sup_hessian_gap),
            (0.0, 0.0, 0.0)
        );
        assert_eq!(r.max_stationary_displacement, Some(0.0));
    }

    #[test]
    fn constant_shift_only_moves_values() {
        let w = Arc::new(double_well_1d(1.0, 1.0).unwrap());
        let shifted = Affine {
            inner: w.clone(),
            scale: 1.0,
            shift: 0.3,
        };
        let r = measure_delta_approx(&*w, &shifted, 101, true).unwrap();
        assert!((r.sup_value_gap - 0.3).abs() < 1e-12);
        assert!(r.sup_grad_gap < 1e-12 && r.sup_hessian_gap < 1e-9);
        assert_eq!(r.max_stationary_displacement, Some(0.0));
    }

    #[test]
    fn double_well_stationary_points() {
        let w = double_well_1d(1.0, 1.0).unwrap();
        let pts = stationary_points(&w, 201).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        assert_eq!(xs.len(), 3);
        assert!(
            (xs[0] + 1.0).abs() < 1e-10
                && (xs[1] - 0.1875).abs() < 1e-10
                && (xs[2] - 1.0).abs() < 1e-10
        );
    }

    #[test]
    fn saddle_in_two_dimensions() {
        let f = FnObjective::new(Domain::cube(2, -1.0, 1.0), |t| {
            t[0] * t[0] - t[1] * t[1] + 0.1 * t[0]
        })
        .with_gradient(|t| vec![2.0 * t[0] + 0.1, -2.0 * t[1]]);
        let pts = stationary_points(&f, 41).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(dist(&pts[0], &[-0.05, 0.0]) < 1e-8);
    }

    #[test]
    fn zero_beta_mass_is_volume_fraction() {
        let w = Arc::new(double_well_1d(1.0, 1.0).unwrap());
        let t = GibbsTarget::new(w, 0.0).unwrap();
        let rep = concentration_mass(&t, &[-1.0], 0.5, 1001).unwrap();
        assert!((rep.mass_outside - 0.75).abs() < 1e-12);
        // A ball that sticks out of the interval only counts its overlap.
        let rep = concentration_mass(&t, &[-1.8], 0.5, 1001).unwrap();
        assert!((rep.mass_outside - (1.0 - 0.7 / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_objective_mass_ignores_beta() {
        let f: Arc<dyn Objective> = Arc::new(FnObjective::new(Domain::cube(1, 0.0, 1.0), |_| 2.0));
        let a = concentration_mass(&GibbsTarget::new(f.clone(), 1.0).unwrap(), &[0.5], 0.2, 501)
            .unwrap();
        let b = concentration_mass(&GibbsTarget::new(f, 50.0).unwrap(), &[0.5], 0.2, 501).unwrap();
        assert!((a.mass_outside - b.mass_outside).abs() < 1e-12);
    }

    #[test]
    fn quadrature_is_self_consistent() {
        let w = Arc::new(double_well_1d(1.0, 1.0).unwrap());
        for beta in [1.0, 5.0, 20.0] {
            let t = GibbsTarget::new(w.clone(), beta).unwrap();
            let rep = concentration_mass(&t, &[-1.0], w.convexity_radius(), 10_000).unwrap();
            assert!((rep.mass_inside + rep.mass_outside - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn oversized_region_is_rejected() {
        let w = Arc::new(double_well_1d(1.0, 1.0).unwrap());
        let t = GibbsTarget::new(w, 1.0).unwrap();
        assert_eq!(
            concentration_mass(&t, &[0.0], 10.0, 101)
                .unwrap_err()
                .code(),
            "region-exceeds-domain"
        );
    }

    #[test]
    fn two_dimensional_mass() {
        let f: Arc<dyn Objective> = Arc::new(FnObjective::new(Domain::unit_ball(2), |_| 0.0));
        let t = GibbsTarget::new(f, 3.0).unwrap();
        let rep = concentration_mass(&t, &[0.0, 0.0], 0.5, 801).unwrap();
        assert!((rep.mass_outside - 0.75).abs() < 0.01);
    }

    #[test]
    fn bound_formulas() {
        assert!((miss_probability_bound(0.3, 0.05, 10).value - 0.35f64.powi(10)).abs() < 1e-18);
        assert!((miss_probability_bound(0.3, 0.05, 10).value - 2.76e-5).abs() < 1e-7);
        assert_eq!(miss_probability_bound(0.42, 0.0, 1).value, 0.42);
        let c = miss_probability_bound(0.9, 0.2, 3);
        assert!(c.clamped && c.value == 1.0);
        assert!((random_start_failure_bound(0.5157f64.powi(5), 1).unwrap() - 0.9635).abs() < 1e-3);
        assert!(random_start_failure_bound(0.1, 10_000).unwrap() < 1e-300);
        assert_eq!(random_start_failure_bound(1.0, 3).unwrap(), 0.0);
        assert!(random_start_failure_bound(1.5, 3).is_err());
    }

    #[test]
    fn eps_global_examples() {
        let list = vec![(vec![0.0], 1.0), (vec![1.0], 0.0), (vec![2.0], 0.0)];
        assert_eq!(eps_global_set(&list, 0.0).unwrap(), vec![1, 2]);
        assert_eq!(eps_global_set(&list, f64::INFINITY).unwrap(), vec![0, 1, 2]);
        let roots = st_coordinate_stationary_points();
        let st: Vec<(Vec<f64>, f64)> = roots.iter().map(|&t| (vec![t], st_coordinate(t))).collect();
        assert_eq!(eps_global_set(&st, 5.0).unwrap(), vec![0]);
        assert!(eps_global_set(&[], 1.0).is_err());
    }
}
