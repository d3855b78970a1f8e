//! Phase-field energy of a lipid membrane with composition/curvature
//! coupling on the periodic unit interval.
//!
//! The order parameter `u` takes values in `[-1, 1]` with zero mean and the
//! height `h` has zero mean. Everything is spectral on a uniform grid with
//! `û_k = (1/N) Σ_j u_j e^{-2πikx_j}` and angular frequency `ω = 2πk`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clement;
pub mod constructions;
pub mod energy;
pub mod error;
pub mod grid;
pub mod minimizer;
pub mod params;
pub mod potential;
pub mod profile;
pub mod quadrature;
pub mod seminorm;
pub mod sweep;

pub use energy::{EnergyBreakdown, ReducedFunctional};
pub use error::{Error, Result};
pub use grid::{Grid1D, SampledField, SpectralField};
pub use minimizer::{MinimizeOptions, MinimizeResult, StartKind};
pub use params::Params;
pub use potential::{builtin_well, DoubleWell, BUILTIN_WELLS};
pub use profile::PeriodicProfile;
pub use sweep::{Regime, RegimeLabel, SweepConfig, SweepOutcome, SweepResult};
