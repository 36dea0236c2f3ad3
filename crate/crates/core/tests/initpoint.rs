use std::sync::Arc;

use gibbsinit::initpoint::{
    oips_annealing_on, random_start, select_annealing, select_sao, sips_on,
};
use gibbsinit::numeric::mean;
use gibbsinit::objective::Affine;
use gibbsinit::problems::{double_well_1d, gmm_empirical_objective, gmm_sample, GmmSpec};
use gibbsinit::rng::rng_from_seed;
use gibbsinit::samplers::Provenance;
use gibbsinit::{GdConfig, InitPlan, Objective, SampleBatch, SamplerSpec, Strategy};
use proptest::prelude::*;

fn batch_of(points: Vec<Vec<f64>>) -> SampleBatch {
    SampleBatch {
        points,
        provenance: Provenance::Uniform,
        beta: 0.0,
        burnin: 0,
        thinning: 1,
        chains: 1,
        seed: 0,
        acceptance_rate: None,
        nonfinite_proposals: 0,
    }
}

fn well() -> Arc<dyn Objective> {
    Arc::new(double_well_1d(1.0, 1.0).unwrap())
}

#[test]
fn annealing_lands_in_the_deep_well() {
    let w = double_well_1d(1.0, 1.0).unwrap();
    let fhat = well();
    let hits = (0..100)
        .filter(|&s| {
            let plan = InitPlan::new(Strategy::OipsAnnealing, 10.0, 100, SamplerSpec::Rejection)
                .with_seed(s);
            let c = oips_annealing_on(&fhat, &plan).unwrap();
            c.points[0][0] < w.local_max()
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn sao_refines_a_deep_sample_to_the_deep_minimum() {
    let w = double_well_1d(1.0, 1.0).unwrap();
    let fhat = well();
    let inner = GdConfig::new(0.01, 200);
    let c = select_sao(
        &*fhat,
        batch_of(vec![vec![1.5], vec![-0.3], vec![0.9]]),
        &inner,
    )
    .unwrap();
    assert_eq!(c.len(), 1);
    assert!(
        (c.points[0][0] - w.deep_min()).abs() <= 1e-3,
        "{:?}",
        c.points
    );
    assert_eq!(c.selected_index(), Some(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn sao_dominates_annealing(points in prop::collection::vec(-2.0..2.0f64, 1..20)) {
        let fhat = well();
        let pts: Vec<Vec<f64>> = points.into_iter().map(|x| vec![x]).collect();
        let ann = select_annealing(&*fhat, batch_of(pts.clone())).unwrap();
        let sao = select_sao(&*fhat, batch_of(pts), &GdConfig::new(0.01, 100)).unwrap();
        prop_assert!(fhat.value(&sao.points[0]) <= fhat.value(&ann.points[0]) + 1e-9);
    }

    #[test]
    fn selected_score_is_minimal(points in prop::collection::vec(-2.0..2.0f64, 1..30)) {
        let fhat = well();
        let pts: Vec<Vec<f64>> = points.into_iter().map(|x| vec![x]).collect();
        for c in [
            select_annealing(&*fhat, batch_of(pts.clone())).unwrap(),
            select_sao(&*fhat, batch_of(pts.clone()), &GdConfig::new(0.01, 20)).unwrap(),
        ] {
            let pool = c.pool.as_ref().unwrap();
            let chosen = pool.scores[pool.selected];
            prop_assert!(pool.scores.iter().all(|&s| chosen <= s));
            prop_assert!(pool.scores[..pool.selected].iter().all(|&s| s > chosen));
            prop_assert_eq!(fhat.value(&c.points[0]), chosen);
        }
    }

    #[test]
    fn selection_is_scale_invariant(exp in -6i32..7, seed in any::<u64>()) {
        let c = 2f64.powi(exp);
        let base = well();
        let scaled: Arc<dyn Objective> = Arc::new(Affine { inner: base.clone(), scale: c, shift: 0.0 });
        let beta = 8.0;
        let spec = SamplerSpec::Snis { proposals: 400 };
        let a = oips_annealing_on(&base, &InitPlan::new(Strategy::OipsAnnealing, beta, 40, spec.clone()).with_seed(seed)).unwrap();
        let b = oips_annealing_on(&scaled, &InitPlan::new(Strategy::OipsAnnealing, beta / c, 40, spec).with_seed(seed)).unwrap();
        prop_assert_eq!(a.selected_index(), b.selected_index());
        prop_assert_eq!(a.points, b.points);
    }

    #[test]
    fn random_starts_lie_inside(m in 1usize..50, seed in any::<u64>()) {
        let dom = gibbsinit::Domain::cube(3, -1.0, 2.0);
        let c = random_start(&dom, m, seed).unwrap();
        prop_assert_eq!(c.len(), m);
        prop_assert!(c.points.iter().all(|p| dom.contains(p)));
    }
}

#[test]
fn random_start_ball_area_ratio() {
    let dom = gibbsinit::Domain::unit_ball(2);
    let c = random_start(&dom, 10_000, 31).unwrap();
    let inner = c
        .points
        .iter()
        .filter(|p| gibbsinit::numeric::norm(p) <= 0.5)
        .count() as f64
        / 1e4;
    assert!((inner - 0.25).abs() <= 0.02, "{inner}");
}

#[test]
fn sips_candidates_beat_uniform_points_on_gmm() {
    let spec = GmmSpec::default_instance(5, 10, 7).unwrap();
    let fhat: Arc<dyn Objective> =
        Arc::new(gmm_empirical_objective(&spec, gmm_sample(&spec, 50, 21)).unwrap());
    let ula = SamplerSpec::Ula {
        step: Some(1e-5),
        burnin: 1000,
        thinning: 10,
        chains: 100,
    };
    let plan = InitPlan::new(Strategy::Sips, 10.0, 1000, ula).with_seed(22);
    let c = sips_on(&fhat, &plan).unwrap();
    assert_eq!(c.len(), 1000);
    let mut rng = rng_from_seed(23);
    let uniform: Vec<f64> = (0..1000)
        .map(|_| fhat.value(&spec.domain.sample_uniform(&mut rng)))
        .collect();
    let cand: Vec<f64> = c.points.iter().map(|p| fhat.value(p)).collect();
    assert!(mean(&cand) < mean(&uniform));
}

#[test]
fn annealing_with_one_sample_returns_it() {
    let fhat = well();
    let c = select_annealing(&*fhat, batch_of(vec![vec![1.7]])).unwrap();
    assert_eq!(c.points, vec![vec![1.7]]);
}
