//! Coarse-grained quantum measurement simulation.
//!
//! - [`qcore`]: states, density matrices, tensor products, partial traces.
//! - [`stern_gerlach`]: the stochastic two-branch interaction model, its
//!   Monte-Carlo estimator and closed-form averages.
//! - [`environment`]: the exact finite-detector model that the stochastic
//!   model coarse-grains, used as an oracle.
//! - [`scaling`]: exact many-body evolution and a timing sweep showing the
//!   exponential cost of interacting chains.
//!
//! Energies are in units with ħ = 1; callers working with another ħ divide
//! energies by it before calling in.

pub mod environment;
pub mod error;
pub mod qcore;
pub mod rng;
pub mod scaling;
pub mod stats;
pub mod stern_gerlach;

pub use environment::{DetectorSpectrum, Equivalence};
pub use error::{Error, Result};
pub use qcore::{Amplitude, DensityMatrix, StateVector};
pub use scaling::{Backend, ExactBackend, ScalingPlan, ScalingRecord, SpinChainSpec};
pub use stern_gerlach::{
    AveragingVariant, NoiseDistribution, NoiseSample, NoiseSpec, TransitionEstimate,
};
