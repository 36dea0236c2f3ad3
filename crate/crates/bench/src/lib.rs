//! Fixtures shared by the kernel benchmarks.

use std::sync::Arc;

use gibbsinit::problems::{
    gmm_empirical_objective, gmm_sample, gmnl_generate, gmnl_sim_nll, GmmSpec, GmnlNll, GmnlParams,
};
use gibbsinit::{GibbsTarget, Objective};

/// Kernel loss on 50 outsourced points of the default 5-d mixture.
pub fn gmm_fhat() -> Arc<dyn Objective> {
    let spec = GmmSpec::default_instance(5, 10, 7).expect("default instance");
    Arc::new(gmm_empirical_objective(&spec, gmm_sample(&spec, 50, 1)).expect("matching width"))
}

/// Gibbs target at β = 10 on [`gmm_fhat`].
pub fn gmm_target() -> GibbsTarget {
    GibbsTarget::new(gmm_fhat(), 10.0).expect("valid beta")
}

/// Simulated NLL on `customers` generated customers with the default sizes.
pub fn gmnl(customers: usize) -> (GmnlNll, Vec<f64>) {
    let params = GmnlParams {
        customers,
        ..GmnlParams::default()
    };
    let (spec, data) = gmnl_generate(&params, 0).expect("valid parameters");
    let theta = vec![0.1; spec.dim()];
    (gmnl_sim_nll(&spec, &data).expect("consistent data"), theta)
}
