//! Numerical design and analysis of distributed satellite-swarm phased arrays
//! for direct-to-cell links.
//!
//! The crate is organized around the design flow of a swarm antenna:
//!
//! * [`geometry`] synthesizes element layouts (dense lattices, sparse square
//!   swarms, sunflower and multi-arm logarithmic spirals) behind a registry of
//!   named generators.
//! * [`beamforming`] builds steering/taper weights and evaluates the
//!   far-field array factor over a direction-cosine grid.
//! * [`analysis`] extracts main-lobe, sidelobe, grating-lobe, directivity and
//!   footprint figures, plus multi-beam C/I.
//! * [`linkbudget`] computes the received power at a handheld terminal.
//! * [`perturbation`] runs reproducible Monte Carlo studies of position
//!   jitter, phase error and platform failure.
//!
//! Conventions: field quantities use `20·log10`, power quantities `10·log10`.
//! Positions are in meters on the `z = 0` plane.

pub mod analysis;
pub mod beamforming;
pub mod error;
pub mod export;
pub mod geometry;
pub mod linkbudget;
pub mod perturbation;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wavelength for a carrier frequency in hertz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}
