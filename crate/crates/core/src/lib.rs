//! Fourier-side solver for the spatially homogeneous Boltzmann equation with
//! Maxwellian molecules and logarithmically singular angular kernels, plus a
//! harness that checks the smoothing estimates numerically.

// `!(x > 0.0)` is how parameter checks reject NaN; index loops mirror the formulas
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod collision;
pub mod collision2d;
pub mod error;
pub mod experiment;
pub mod field;
pub mod kernel;
pub mod quadrature;
pub mod regularity;
pub mod solver;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use field::{IsoSpectralField, RadialGrid};
pub use kernel::{AngularKernel, KernelFamily, MomentWeight};
pub use weights::WeightParams;
pub use experiment::ExperimentConfig;
pub use solver::{GridSpec, InitialCondition, SimConfig, Trajectory};
pub use verify::{CheckEntry, VerificationReport};
