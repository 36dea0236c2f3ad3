//! Sampling-based selection of initial points for non-convex optimization.
//!
//! A small "outsourced" subset of the data defines an empirical loss `F̂_n`.
//! Candidate starting points are drawn from the Gibbs measure
//! `π_β(θ) ∝ exp(-β F̂_n(θ))` restricted to the parameter domain, and a
//! deterministic local optimizer (projected gradient descent) is then run on
//! the full objective from those candidates.
//!
//! The crate is organised bottom-up:
//!
//! * [`objective`] – domains, datasets, the [`Objective`] trait and empirical losses.
//! * [`problems`] – Styblinski–Tang, Gaussian-mixture kernel, GMNL simulated
//!   likelihood and a tilted 1-D double well.
//! * [`samplers`] – ULA, random-walk Metropolis, exact rejection and
//!   self-normalised importance resampling.
//! * [`optimize`] – projected gradient descent and stationary-point tools.
//! * [`initpoint`] – random start, SIPS, OIPS-annealing and OIPS-SAO.
//! * [`theory`] – sample-size, concentration and miss-probability calculators
//!   with their empirical counterparts.
//! * [`harness`] – replicated experiments, sweeps and result files.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod initpoint;
pub mod numeric;
pub mod objective;
pub mod optimize;
pub mod problems;
pub mod rng;
pub mod samplers;
pub mod theory;

pub use error::{Error, Result};
pub use initpoint::{CandidateSet, InitPlan, Strategy};
pub use objective::{Dataset, Domain, EmpiricalLoss, LossSpec, Objective, PointwiseLoss};
pub use optimize::{GdConfig, Trajectory};
pub use samplers::{GibbsTarget, SampleBatch, SamplerSpec};
