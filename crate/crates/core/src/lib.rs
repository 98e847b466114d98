//! Frequency-domain model of a one-sided optomechanical cavity whose mirror is
//! a mechanical oscillator, with dispersive and dissipative coupling.
//!
//! The crate is organised in three layers:
//!
//! - [`model`]: physical parameters, the classical steady state, the
//!   mechanical susceptibility and bath occupancies.
//! - [`spectra`]: noise-transfer matrices (closed-form bad-cavity and a
//!   general linear solver), homodyne spectra and their minimisation over the
//!   detection angle, cooperativities.
//! - [`stability`]: drift matrices, characteristic polynomials, a Routh table
//!   and an independent polynomial-root channel, and detuning sweeps.
//!
//! All operations are dimensionally homogeneous, so any consistent rate unit
//! works. The command-line driver feeds everything in units of the mechanical
//! frequency.

pub mod error;
pub mod model;
pub mod spectra;
pub mod stability;

pub use error::{Error, Result};
pub use model::{
    steady_state, susceptibility, thermal_occupancy, CavityParams, CouplingKind, SteadyState,
    Susceptibility,
};
pub use spectra::{
    InputCorrelator, NoiseTransfer, Squeeze, SqueezeSpectrum, SpectrumMode, TransferModel,
};
pub use stability::{
    DetuningSweep, DriftMatrix, RouthVerdict, StabilityReport, Threshold, UnstableInterval,
};

pub use num_complex::Complex64;
