//! Simulation and analysis toolkit for an electro-mechano-optical (EMO)
//! transducer: an rf signal drives an LC circuit, the circuit couples
//! capacitively to a metallized membrane oscillator, and an optical cavity
//! reads the membrane motion out as sidebands on a laser.
//!
//! The chain is linear, so everything is handled in the frequency domain
//! with input-output relations: susceptibilities for the three resonators,
//! coupling rates for the two interfaces, and spectral densities for the
//! noise sources (shot, Brownian, Johnson, drive phase noise).
//!
//! Module map:
//! - [`constants`], [`units`], [`config`]: physical constants, unit-safe
//!   wrappers, experiment parameter files.
//! - [`electromech`]: membrane capacitor, electro-mechanical coupling and
//!   cooperativity, drive-induced spring shift.
//! - [`optics`]: Gaussian beams, hemispherical cavity design, intracavity
//!   photon number, opto-mechanical coupling.
//! - [`dynamics`]: susceptibilities, displacement response, output
//!   quadratures, end-to-end transfer.
//! - [`noise`]: thermal occupations, phase-noise line shape, sideband
//!   spectra, quanta budget, SNR estimates.
//! - [`fit`]: derivative-free minimizer, calibration fits, synthetic data.
//! - [`echo`]: time-domain waveforms, membrane filtering, quadrature
//!   demodulation, pulsed-signal helpers.
//! - [`report`]: run manifests and deterministic CSV/JSON emission.

pub mod config;
pub mod constants;
pub mod dynamics;
pub mod echo;
pub mod electromech;
pub mod fit;
pub mod noise;
pub mod numerics;
pub mod optics;
pub mod report;
pub mod units;

pub use config::ExperimentConfig;
pub use units::{AngularFrequency, PowerLevel};
