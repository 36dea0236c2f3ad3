//! Benchmark objectives: Styblinski-Tang, a Gaussian-mixture mode finder,
//! GMNL simulated likelihood and a 1-D double well.

mod double_well;
mod gmm;
mod gmnl;
mod styblinski_tang;

pub use double_well::{double_well_1d, DoubleWell, DOUBLE_WELL_STIFFNESS};
pub use gmm::*;
pub use gmnl::*;
pub use styblinski_tang::*;
