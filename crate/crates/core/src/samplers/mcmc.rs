use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{GibbsTarget, Provenance, SampleBatch};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// `10⁻²/β` clamped to `[10⁻⁶, 10⁻²]`.
pub fn default_ula_step(beta: f64) -> f64 {
    if beta <= 0.0 {
        return 1e-2;
    }
    (1e-2 / beta).clamp(1e-6, 1e-2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ChainMethod {
    Ula { step: f64 },
    Rwm { scale: f64 },
}

impl ChainMethod {
    pub(crate) fn provenance(self) -> Provenance {
        match self {
            ChainMethod::Ula { .. } => Provenance::Ula,
            ChainMethod::Rwm { .. } => Provenance::Rwm,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub steps_taken: usize,
    pub accepted: usize,
    pub nonfinite_proposals: usize,
    /// Objective at `position`, cached by RWM.
    value: Option<f64>,
}

impl ChainState {
    pub fn new(position: Vec<f64>) -> Self {
        ChainState {
            position,
            steps_taken: 0,
            accepted: 0,
            nonfinite_proposals: 0,
            value: None,
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps_taken == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps_taken as f64
        }
    }
}

/// One projected Langevin step
/// `θ′ = Π(θ − hβ∇F(θ) + √(2h)·z)`.
pub fn ula_step(state: &mut ChainState, target: &GibbsTarget, h: f64, rng: &mut Rng) -> Result<()> {
    let step = state.steps_taken;
    state.steps_taken += 1;
    state.value = None;
    if h == 0.0 {
        return Ok(());
    }
    let beta = target.beta();
    let noise = (2.0 * h).sqrt();
    if beta > 0.0 {
        let g = target.objective().gradient(&state.position);
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::DivergedGradient { step });
        }
        let hb = h * beta;
        for (x, gi) in state.position.iter_mut().zip(&g) {
            *x += -hb * gi + noise * rng.sample::<f64, _>(StandardNormal);
        }
    } else {
        for x in state.position.iter_mut() {
            *x += noise * rng.sample::<f64, _>(StandardNormal);
        }
    }
    target.domain().project_in_place(&mut state.position);
    Ok(())
}

/// One random-walk Metropolis step with Gaussian proposals of std `scale`.
/// Proposals outside the domain or with non-finite value are rejected.
pub fn rwm_step(state: &mut ChainState, target: &GibbsTarget, scale: f64, rng: &mut Rng) {
    state.steps_taken += 1;
    let proposal: Vec<f64> = state
        .position
        .iter()
        .map(|x| x + scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    // The uniform is drawn unconditionally so the stream does not depend on
    // where proposals land.
    let u: f64 = rng.random();
    if !target.domain().contains(&proposal) {
        return;
    }
    let beta = target.beta();
    if beta == 0.0 {
        state.position = proposal;
        state.accepted += 1;
        return;
    }
    let obj = target.objective();
    let current = *state
        .value
        .get_or_insert_with(|| obj.value(&state.position));
    let new = obj.value(&proposal);
    if !new.is_finite() {
        state.nonfinite_proposals += 1;
        return;
    }
    let log_ratio = -beta * (new - current);
    if log_ratio >= 0.0 || u < log_ratio.exp() {
        state.position = proposal;
        state.value = Some(new);
        state.accepted += 1;
    }
}

/// Runs one chain from `init`, discards `burnin` steps, then keeps every
/// `thinning`-th position until `count` points are collected.
pub fn run_chain(
    method: ChainMethod,
    target: &GibbsTarget,
    count: usize,
    burnin: usize,
    thinning: usize,
    init: &[f64],
    seed: u64,
) -> Result<SampleBatch> {
    run_chain_with_state(method, target, count, burnin, thinning, init, seed).map(|(b, _)| b)
}

pub(crate) fn run_chain_with_state(
    method: ChainMethod,
    target: &GibbsTarget,
    count: usize,
    burnin: usize,
    thinning: usize,
    init: &[f64],
    seed: u64,
) -> Result<(SampleBatch, ChainState)> {
    if count == 0 || thinning == 0 {
        return Err(Error::InvalidConfig(
            "run_chain needs L >= 1 and thinning >= 1".into(),
        ));
    }
    if init.len() != target.dim() {
        return Err(Error::DimMismatch {
            expected: target.dim(),
            got: init.len(),
        });
    }
    if !target.domain().contains(init) {
        return Err(Error::InvalidConfig(
            "chain initial point lies outside the domain".into(),
        ));
    }
    match method {
        ChainMethod::Ula { step } if !(step >= 0.0 && step.is_finite()) => {
            return Err(Error::InvalidConfig(format!(
                "ULA step must be nonnegative, got {step}"
            )));
        }
        ChainMethod::Rwm { scale } if !(scale > 0.0 && scale.is_finite()) => {
            return Err(Error::InvalidConfig(format!(
                "RWM scale must be positive, got {scale}"
            )));
        }
        _ => {}
    }
    let mut rng = rng_from_seed(seed);
    let mut state = ChainState::new(init.to_vec());
    let advance = |state: &mut ChainState, rng: &mut Rng| -> Result<()> {
        match method {
            ChainMethod::Ula { step } => ula_step(state, target, step, rng),
            ChainMethod::Rwm { scale } => {
                rwm_step(state, target, scale, rng);
                Ok(())
            }
        }
    };
    for _ in 0..burnin {
        advance(&mut state, &mut rng)?;
    }
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        for _ in 0..thinning {
            advance(&mut state, &mut rng)?;
        }
        points.push(state.position.clone());
    }
    let mut batch = SampleBatch::new(points, method.provenance(), target.beta(), seed);
    batch.burnin = burnin;
    batch.thinning = thinning;
    batch.nonfinite_proposals = state.nonfinite_proposals;
    if matches!(method, ChainMethod::Rwm { .. }) {
        batch.acceptance_rate = Some(state.acceptance_rate());
    }
    Ok((batch, state))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::numeric::{mean, variance};
    use crate::objective::{Domain, FnObjective, Objective};

    fn quadratic_1d(half_width: f64) -> Arc<dyn Objective> {
        Arc::new(
            FnObjective::new(Domain::cube(1, -half_width, half_width), |t| {
                0.5 * t[0] * t[0]
            })
            .with_gradient(|t| vec![t[0]]),
        )
    }

    #[test]
    fn zero_step_keeps_position() {
        let t = GibbsTarget::new(quadratic_1d(5.0), 1.0).unwrap();
        let mut s = ChainState::new(vec![0.3]);
        let mut rng = rng_from_seed(1);
        ula_step(&mut s, &t, 0.0, &mut rng).unwrap();
        assert_eq!(s.position, vec![0.3]);
        assert_eq!(s.steps_taken, 1);
    }

    #[test]
    fn zero_beta_is_a_random_walk() {
        let t = GibbsTarget::new(quadratic_1d(1e6), 0.0).unwrap();
        let mut rng = rng_from_seed(2);
        let h = 0.01;
        let incs: Vec<f64> = (0..20_000)
            .map(|_| {
                let mut s = ChainState::new(vec![0.0]);
                ula_step(&mut s, &t, h, &mut rng).unwrap();
                s.position[0]
            })
            .collect();
        assert!((variance(&incs) / (2.0 * h) - 1.0).abs() < 0.05);
    }

    #[test]
    fn ou_stationary_variance() {
        // For F = θ²/2 at β = 1 the Langevin diffusion is Ornstein–Uhlenbeck
        // with unit stationary variance; ULA at step h has variance 1/(1 − h/2).
        // One chain of 10⁵ steps has only ~100 effective samples of θ², so
        // the variance is pooled over independent chains.
        let t = GibbsTarget::new(quadratic_1d(50.0), 1.0).unwrap();
        let mut xs = Vec::new();
        for c in 0..16 {
            let b = run_chain(
                ChainMethod::Ula { step: 1e-3 },
                &t,
                100_000,
                2000,
                1,
                &[0.0],
                11 + c,
            )
            .unwrap();
            xs.extend(b.points.iter().map(|p| p[0]));
        }
        assert!((variance(&xs) - 1.0).abs() < 0.1, "{}", variance(&xs));
    }

    #[test]
    fn non_finite_gradient_reports_step() {
        let obj: Arc<dyn Objective> = Arc::new(
            FnObjective::new(Domain::cube(1, -1.0, 1.0), |_| 0.0).with_gradient(|_| vec![f64::NAN]),
        );
        let t = GibbsTarget::new(obj, 1.0).unwrap();
        let err = run_chain(ChainMethod::Ula { step: 0.1 }, &t, 3, 2, 1, &[0.0], 1).unwrap_err();
        assert!(matches!(err, Error::DivergedGradient { step: 0 }));
    }

    #[test]
    fn constant_objective_accepts_everything_inside() {
        let obj: Arc<dyn Objective> =
            Arc::new(FnObjective::new(Domain::cube(2, -100.0, 100.0), |_| 1.5));
        let t = GibbsTarget::new(obj, 3.0).unwrap();
        let b = run_chain(
            ChainMethod::Rwm { scale: 0.1 },
            &t,
            500,
            0,
            1,
            &[0.0, 0.0],
            5,
        )
        .unwrap();
        assert_eq!(b.acceptance_rate, Some(1.0));
    }

    #[test]
    fn outside_proposal_is_rejected() {
        let obj: Arc<dyn Objective> =
            Arc::new(FnObjective::new(Domain::cube(1, 0.0, 1e-9), |_| 0.0));
        let t = GibbsTarget::new(obj, 1.0).unwrap();
        let mut s = ChainState::new(vec![5e-10]);
        let mut rng = rng_from_seed(3);
        rwm_step(&mut s, &t, 10.0, &mut rng);
        assert_eq!(s.position, vec![5e-10]);
        assert_eq!((s.steps_taken, s.accepted), (1, 0));
    }

    #[test]
    fn single_draw_is_one_step() {
        let t = GibbsTarget::new(quadratic_1d(5.0), 2.0).unwrap();
        let b = run_chain(ChainMethod::Ula { step: 0.01 }, &t, 1, 0, 1, &[1.0], 9).unwrap();
        let mut s = ChainState::new(vec![1.0]);
        ula_step(&mut s, &t, 0.01, &mut rng_from_seed(9)).unwrap();
        assert_eq!(b.points, vec![s.position]);
    }

    #[test]
    fn rwm_targets_gaussian() {
        let t = GibbsTarget::new(quadratic_1d(20.0), 4.0).unwrap();
        let b = run_chain(
            ChainMethod::Rwm { scale: 1.0 },
            &t,
            20_000,
            1000,
            5,
            &[0.0],
            4,
        )
        .unwrap();
        let xs: Vec<f64> = b.points.iter().map(|p| p[0]).collect();
        assert!(mean(&xs).abs() < 0.03);
        assert!((variance(&xs) - 0.25).abs() < 0.025);
    }

    #[test]
    fn default_step_is_clamped() {
        assert_eq!(default_ula_step(0.0), 1e-2);
        assert_eq!(default_ula_step(0.5), 1e-2);
        assert_eq!(default_ula_step(10.0), 1e-3);
        assert_eq!(default_ula_step(1e9), 1e-6);
    }
}
