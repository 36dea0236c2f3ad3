use gibbsinit::numeric::{bisect, linspace};
use gibbsinit::objective::{fd_hessian, FnObjective};
use gibbsinit::optimize::{
    classify_stationary, gd_run, lipschitz_estimate, operator_norm, success_test, Stationarity,
    SuccessRule,
};
use gibbsinit::problems::{
    gmm_population_objective, gmm_sample, st_coordinate, st_coordinate_derivative, GmmSpec,
    StyblinskiTang, ST_GLOBAL_MIN_VALUE,
};
use gibbsinit::rng::rng_from_seed;
use gibbsinit::{Domain, GdConfig, Objective};
use proptest::prelude::*;

/// One coordinate of the 5-dimensional normalized function.
fn st_coordinate_objective() -> FnObjective {
    FnObjective::new(Domain::cube(1, -5.0, 5.0), |t: &[f64]| {
        st_coordinate(t[0]) / 10.0
    })
    .with_gradient(|t: &[f64]| vec![st_coordinate_derivative(t[0]) / 10.0])
}

#[test]
fn st_coordinate_basin_boundary_is_the_local_max() {
    let root = bisect(st_coordinate_derivative, -1.0, 1.0, 1e-12).unwrap();
    assert!((root - 0.15673).abs() < 1e-4);
    let deep = bisect(st_coordinate_derivative, -4.0, -2.0, 1e-12).unwrap();
    let shallow = bisect(st_coordinate_derivative, 2.0, 4.0, 1e-12).unwrap();
    let f = st_coordinate_objective();
    let cfg = GdConfig::new(0.05, 2000);
    let grid = linspace(-5.0, 5.0, 10_000);
    let cell = grid[1] - grid[0];
    let mut last_left = f64::NEG_INFINITY;
    let mut first_right = f64::INFINITY;
    for &t in &grid {
        let end = gd_run(&f, &[t], &cfg).unwrap().final_point[0];
        if (end - deep).abs() < 1e-6 {
            assert!(t < root + cell, "start {t} reached the deep minimum");
            last_left = last_left.max(t);
        } else {
            assert!((end - shallow).abs() < 1e-6, "start {t} ended at {end}");
            assert!(t > root - cell, "start {t} reached the shallow minimum");
            first_right = first_right.min(t);
        }
    }
    assert!((last_left - root).abs() <= cell && (first_right - root).abs() <= cell);
    let frac = grid.iter().filter(|&&t| t <= last_left).count() as f64 / grid.len() as f64;
    assert!((frac - (root + 5.0) / 10.0).abs() < 2e-4, "{frac}");
}

#[test]
fn st_from_the_left_corner_reaches_the_global_value() {
    let f = StyblinskiTang::new(5);
    let t = gd_run(&f, &[-3.0; 5], &GdConfig::new(0.05, 50)).unwrap();
    assert!(
        (t.final_value - ST_GLOBAL_MIN_VALUE).abs() <= 0.01,
        "{}",
        t.final_value
    );
    let rule = SuccessRule::ValueGap {
        f_star: ST_GLOBAL_MIN_VALUE,
        tol: 0.5,
    };
    assert!(success_test(&t, &rule));
}

#[test]
fn st_wrong_basin_fails_the_value_gap() {
    let f = StyblinskiTang::new(5);
    let start = [-3.0, -3.0, -3.0, -3.0, 3.0];
    let t = gd_run(&f, &start, &GdConfig::new(0.05, 50)).unwrap();
    let rule = SuccessRule::ValueGap {
        f_star: ST_GLOBAL_MIN_VALUE,
        tol: 0.5,
    };
    assert!(!success_test(&t, &rule), "{}", t.final_value);
}

#[test]
fn st_stationary_classification() {
    let f1 = st_coordinate_objective();
    let root = bisect(st_coordinate_derivative, -1.0, 1.0, 1e-12).unwrap();
    assert_eq!(
        classify_stationary(&f1, &[root], 1e-6, 1e-6),
        Stationarity::SaddleOrMax
    );
    let f = StyblinskiTang::new(5);
    let deep = bisect(st_coordinate_derivative, -4.0, -2.0, 1e-12).unwrap();
    assert_eq!(
        classify_stationary(&f, &[deep; 5], 1e-6, 1e-6),
        Stationarity::LocalMin
    );
    assert_eq!(
        classify_stationary(&f, &[0.0; 5], 1e-6, 1e-6),
        Stationarity::Nonstationary
    );
}

fn assert_descent(obj: &dyn Objective, lambda: f64, starts: usize, seed: u64) {
    let cfg = GdConfig::new(1.0 / lambda, 100).recording();
    let mut rng = rng_from_seed(seed + 1);
    for _ in 0..starts {
        let p = obj.domain().sample_uniform(&mut rng);
        let t = gd_run(obj, &p, &cfg).unwrap();
        let values = t.values.unwrap();
        assert_eq!(values.len(), 101);
        for w in values.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn descent_on_styblinski_tang() {
    let f = StyblinskiTang::new(3);
    assert_descent(&f, lipschitz_estimate(&f, 1000, 4), 20, 4);
}

#[test]
fn descent_on_gmm_population() {
    let spec = GmmSpec::default_instance(5, 10, 7).unwrap();
    let f = gmm_population_objective(&spec);
    // Uniform points rarely land where the curvature peaks; sample the mixture.
    let lambda = gmm_sample(&spec, 1000, 5)
        .rows()
        .map(|x| operator_norm(&fd_hessian(&f, x)))
        .fold(0.0, f64::max);
    assert_descent(&f, lambda, 20, 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn gd_is_a_deterministic_map(start in prop::collection::vec(-5.0..5.0f64, 4), step in 0.001..0.1f64) {
        let f = StyblinskiTang::new(4);
        let cfg = GdConfig::new(step, 30).recording();
        let a = gd_run(&f, &start, &cfg).unwrap();
        let b = gd_run(&f, &start, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(f.domain().contains(&a.final_point));
        prop_assert_eq!(a.values.as_ref().unwrap().len(), 31);
    }
}
