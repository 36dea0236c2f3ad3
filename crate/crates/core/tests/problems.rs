use gibbsinit::numeric::{bisect, grid_min_1d};
use gibbsinit::problems::{
    double_well_1d, gmm_batched_gradient_objective, gmm_population_objective, gmm_sample_labeled,
    gmnl_generate, gmnl_sim_nll, st_coordinate_derivative, st_coordinate_stationary_points,
    GmmSpec, GmnlParams, StyblinskiTang, ST_GLOBAL_MIN_VALUE,
};
use gibbsinit::rng::rng_from_seed;
use gibbsinit::Objective;

#[test]
fn st_value_at_the_quoted_minimizer() {
    let f = StyblinskiTang::new(5);
    assert!((f.value(&[-2.903; 5]) - ST_GLOBAL_MIN_VALUE).abs() <= 1e-2);
    assert!((f.min_value() - ST_GLOBAL_MIN_VALUE).abs() <= 1e-2);
}

#[test]
fn st_stationary_points_match_bisection() {
    let roots = st_coordinate_stationary_points();
    let brackets = [(-4.0, -2.0), (-1.0, 1.0), (2.0, 4.0)];
    for (r, (a, b)) in roots.iter().zip(brackets) {
        let oracle = bisect(st_coordinate_derivative, a, b, 1e-13).unwrap();
        assert!((r - oracle).abs() < 1e-6, "{r} vs {oracle}");
    }
    assert!((roots[0] + 2.9035).abs() < 1e-4);
    assert!((roots[1] - 0.15673).abs() < 1e-4);
    assert!((roots[2] - 2.7468).abs() < 1e-4);
}

#[test]
fn double_well_extrema_match_bisection() {
    for (alpha, s) in [(1.0, 1.0), (0.2, 0.5), (3.0, 2.0)] {
        let w = double_well_1d(alpha, s).unwrap();
        let df = |t: f64| w.df(t);
        let deep = bisect(df, -2.0 * s, w.local_max() - 1e-3 * s, 1e-14).unwrap();
        let shallow = bisect(df, w.local_max() + 1e-3 * s, 2.0 * s, 1e-14).unwrap();
        assert!((deep - w.deep_min()).abs() < 1e-8);
        assert!((shallow - w.shallow_min()).abs() < 1e-8);
        assert!((w.f(w.shallow_min()) - w.f(w.deep_min()) - alpha).abs() < 1e-9);
    }
}

#[test]
fn symmetric_mixture_minimizers() {
    let spec = GmmSpec::symmetric_1d();
    let f = gmm_population_objective(&spec);
    let (left, _) = grid_min_1d(|t| f.value(&[t]), -4.0, 0.0, 400_001);
    let (right, _) = grid_min_1d(|t| f.value(&[t]), 0.0, 4.0, 400_001);
    assert!(
        (left + 2.0).abs() < 1e-3 && (right - 2.0).abs() < 1e-3,
        "{left}, {right}"
    );
}

#[test]
fn mixture_component_frequencies() {
    let spec = GmmSpec::default_instance(3, 4, 1).unwrap();
    let n = 20_000;
    let (_, labels) = gmm_sample_labeled(&spec, n, 2);
    for (i, p) in spec.weights.iter().enumerate() {
        let freq = labels.iter().filter(|&&l| l == i).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * se, "component {i}: {freq} vs {p}");
    }
}

#[test]
fn default_instance_has_a_single_deep_mode() {
    let spec = GmmSpec::default_instance(5, 10, 7).unwrap();
    let minima = spec.population_minima();
    assert!(minima[0].1 < -32.0, "{}", minima[0].1);
    assert!(minima[1..].iter().all(|m| m.1 > -32.0));
}

#[test]
fn large_batch_gradient_matches_the_analytic_gradient() {
    let spec = GmmSpec::default_instance(5, 10, 7).unwrap();
    let pop = gmm_population_objective(&spec);
    let batched = gmm_batched_gradient_objective(&spec, 100_000, 3);
    let kernel = gibbsinit::problems::GaussianKernelLoss::new(spec.sigma, 5);
    let (batch, _) = gmm_sample_labeled(&spec, 100_000, 3);
    let mut rng = rng_from_seed(4);
    for i in 0..10 {
        let theta: Vec<f64> = spec.means[i]
            .iter()
            .map(|m| m + spec.sigma * rand::Rng::random_range(&mut rng, -1.0..1.0))
            .collect();
        let exact = pop.gradient(&theta);
        let approx = batched.gradient(&theta);
        // Per-coordinate standard error from the per-draw gradient terms.
        let d = theta.len();
        let mut sum = vec![0.0; d];
        let mut sq = vec![0.0; d];
        for x in batch.rows() {
            let mut g = vec![0.0; d];
            gibbsinit::PointwiseLoss::loss_and_accumulate(&kernel, &theta, x, 1.0, &mut g);
            for k in 0..d {
                sum[k] += g[k];
                sq[k] += g[k] * g[k];
            }
        }
        let n = batch.len() as f64;
        for k in 0..d {
            let m = sum[k] / n;
            let se = ((sq[k] / n - m * m) / n).sqrt();
            assert!((approx[k] - m).abs() < 1e-9 * (1.0 + m.abs()));
            assert!(
                (approx[k] - exact[k]).abs() <= 3.0 * se + 1e-12,
                "point {i} coord {k}: {} vs {} ± {se}",
                approx[k],
                exact[k]
            );
        }
    }
}

#[test]
fn plain_logit_choices_follow_softmax() {
    let params = GmnlParams {
        customers: 10_000,
        draws: 1,
        characteristics: 2,
        psi_true: Some(vec![0.0, 0.0]),
        shock_sd: 0.0,
        ..GmnlParams::default()
    };
    let (spec, data) = gmnl_generate(&params, 17).unwrap();
    let util: Vec<f64> = spec
        .products
        .iter()
        .map(|x| x.iter().zip(&spec.phi_true).map(|(a, b)| a * b).sum())
        .collect();
    let z = util.iter().map(|u| u.exp()).sum::<f64>();
    let n = data.len() as f64;
    for (j, u) in util.iter().enumerate() {
        let p = u.exp() / z;
        let freq = data.rows().filter(|r| r[0] as usize == j).count() as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!(
            (freq - p).abs() <= 3.0 * se,
            "alternative {j}: {freq} vs {p}"
        );
    }
}

#[test]
fn truth_beats_the_origin_on_the_default_gmnl_instance() {
    let (spec, data) = gmnl_generate(&GmnlParams::default(), 0).unwrap();
    let nll = gmnl_sim_nll(&spec, &data).unwrap();
    let zero = vec![0.0; spec.dim()];
    assert!(nll.value(&spec.theta_true()) < nll.value(&zero));
    assert!((nll.value(&zero) - (spec.alternatives as f64).ln()).abs() < 1e-12);
}
