//! Excitation weights and far-field array-factor evaluation.
//!
//! The array factor of a planar array at direction cosines `(u, v)` is
//!
//! ```text
//! AF(u, v) = g(u, v) · Σ_n w_n · exp(j·k·(x_n·u + y_n·v)),   k = 2π/λ
//! ```
//!
//! with `g` the scalar element pattern. Evaluation is a direct summation over
//! elements (no FFT) so that aperiodic layouts are handled exactly.

mod element;
mod grid;
mod kernel;
mod taper;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

pub use element::{CosinePower, ElementModel, ElementRegistry, ElementSpec, Isotropic};
pub use grid::AngularGrid;
pub use taper::{
    RadialHamming, RadialHann, RadialTaylor, RadialWindow, TaperRegistry, TaperSpec, Uniform,
};

/// Per-element excitation kept in polar form so that amplitude-only
/// operations leave phases bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    steer: (f64, f64),
    taper: String,
}

impl WeightVector {
    pub fn from_polar(amplitudes: Vec<f64>, phases: Vec<f64>, steer: (f64, f64)) -> Self {
        assert_eq!(amplitudes.len(), phases.len());
        Self {
            amplitudes,
            phases,
            steer,
            taper: "uniform".into(),
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn steer_direction(&self) -> (f64, f64) {
        self.steer
    }

    /// Name of the last taper applied.
    pub fn taper(&self) -> &str {
        &self.taper
    }

    pub fn complex(&self) -> Vec<Complex64> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&a, &p)| Complex64::from_polar(a, p))
            .collect()
    }

    /// `Σ |w_n|`, the coherent maximum of the array factor.
    pub fn amplitude_sum(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.abs()).sum()
    }

    /// Mutable access for perturbation studies.
    pub fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.amplitudes, &mut self.phases)
    }
}

fn check_direction(direction: (f64, f64)) -> Result<()> {
    let (u, v) = direction;
    if !(u.is_finite() && v.is_finite()) || u * u + v * v > 1.0 {
        return Err(Error::Domain(format!(
            "direction ({u}, {v}) lies outside the unit disk u² + v² ≤ 1"
        )));
    }
    Ok(())
}

fn check_lengths(geom: &ArrayGeometry, weights: &WeightVector) -> Result<()> {
    if geom.len() != weights.len() {
        return Err(Error::Domain(format!(
            "weight vector has {} entries but the geometry has {} elements",
            weights.len(),
            geom.len()
        )));
    }
    Ok(())
}

/// Unit-amplitude weights `w_n = exp(−j·k·(x_n·u0 + y_n·v0))` that phase the
/// array toward `(u0, v0)`.
pub fn steering_weights(geom: &ArrayGeometry, direction: (f64, f64)) -> Result<WeightVector> {
    check_direction(direction)?;
    let k = 2.0 * PI / geom.wavelength();
    let (u0, v0) = direction;
    let phases = geom
        .positions()
        .iter()
        .map(|p| -(k * (p[0] * u0 + p[1] * v0)))
        .collect();
    Ok(WeightVector::from_polar(vec![1.0; geom.len()], phases, direction))
}

/// Multiplies each amplitude by `window(ρ_n / ρ_max)`, `ρ_n` being the
/// element's distance from the centroid. Phases are untouched.
pub fn apply_taper(weights: &WeightVector, taper: &TaperSpec, geom: &ArrayGeometry) -> Result<WeightVector> {
    apply_taper_with(&TaperRegistry::default(), weights, taper, geom)
}

pub fn apply_taper_with(
    registry: &TaperRegistry,
    weights: &WeightVector,
    taper: &TaperSpec,
    geom: &ArrayGeometry,
) -> Result<WeightVector> {
    check_lengths(geom, weights)?;
    let window = registry.build(taper)?;
    let rho = geom.radial_distances();
    let rho_max = rho.iter().cloned().fold(0.0, f64::max);
    let mut out = weights.clone();
    out.taper = taper.kind.clone();
    if rho_max == 0.0 {
        log::warn!("taper `{}` ignored: geometry has zero radial extent", taper.kind);
        return Ok(out);
    }
    for (a, r) in out.amplitudes.iter_mut().zip(&rho) {
        *a *= window.amplitude(r / rho_max);
    }
    Ok(out)
}

/// Everything needed to re-evaluate a pattern at arbitrary directions.
pub struct PatternSource {
    positions: Vec<[f64; 2]>,
    weights: Vec<Complex64>,
    wavenumber: f64,
    element: Arc<dyn ElementModel>,
}

impl fmt::Debug for PatternSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PatternSource")
            .field("elements", &self.positions.len())
            .field("wavenumber", &self.wavenumber)
            .field("element", &self.element.name())
            .finish()
    }
}

impl PatternSource {
    /// Direct summation at one direction, in element-index order.
    pub fn evaluate(&self, u: f64, v: f64) -> Complex64 {
        let k = self.wavenumber;
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in self.positions.iter().zip(&self.weights) {
            let (s, c) = (k * (p[0] * u + p[1] * v)).sin_cos();
            acc += w * Complex64::new(c, s);
        }
        acc * self.element.field(u, v)
    }

    pub fn element(&self) -> &dyn ElementModel {
        self.element.as_ref()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }
}

/// Sampled array factor over an [`AngularGrid`]. Samples are unnormalized;
/// metrics divide by [`Pattern::norm`].
#[derive(Debug, Clone)]
pub struct Pattern {
    grid: AngularGrid,
    samples: Vec<Complex64>,
    visible: Vec<bool>,
    norm: f64,
    wavelength: f64,
    steer: (f64, f64),
    taper: String,
    geometry_kind: String,
    source: Arc<PatternSource>,
}

impl Pattern {
    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn visible(&self) -> &[bool] {
        &self.visible
    }

    /// `Σ |w_n|`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn steer_direction(&self) -> (f64, f64) {
        self.steer
    }

    pub fn taper(&self) -> &str {
        &self.taper
    }

    pub fn geometry_kind(&self) -> &str {
        &self.geometry_kind
    }

    pub fn source(&self) -> &PatternSource {
        &self.source
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[self.grid.index(i, j)]
    }

    /// `|AF| / Σ|w|` for every sample.
    pub fn normalized_magnitudes(&self) -> Vec<f64> {
        let norm = if self.norm > 0.0 { self.norm } else { 1.0 };
        self.samples.iter().map(|s| s.norm() / norm).collect()
    }
}

/// Evaluates the array factor of `geom` driven by `weights` on `grid`.
///
/// Each sample is an element-index-ordered sum, so the result does not depend
/// on how grid rows are split across worker threads.
pub fn evaluate_pattern(
    geom: &ArrayGeometry,
    weights: &WeightVector,
    grid: &AngularGrid,
    element: &ElementSpec,
) -> Result<Pattern> {
    let model = ElementRegistry::default().build(element)?;
    evaluate_pattern_with(geom, weights, grid, model)
}

pub fn evaluate_pattern_with(
    geom: &ArrayGeometry,
    weights: &WeightVector,
    grid: &AngularGrid,
    element: Arc<dyn ElementModel>,
) -> Result<Pattern> {
    check_lengths(geom, weights)?;
    grid.validate()?;
    let k = 2.0 * PI / geom.wavelength();
    let w = weights.complex();
    let samples = kernel::array_factor(geom.positions(), &w, k, grid, element.as_ref());
    Ok(Pattern {
        grid: grid.clone(),
        visible: grid.visible_mask(),
        samples,
        norm: weights.amplitude_sum(),
        wavelength: geom.wavelength(),
        steer: weights.steer_direction(),
        taper: weights.taper().to_string(),
        geometry_kind: geom.spec().kind.clone(),
        source: Arc::new(PatternSource {
            positions: geom.positions().to_vec(),
            weights: w,
            wavenumber: k,
            element,
        }),
    })
}

/// One beam of a multi-beam configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    pub direction: (f64, f64),
    #[serde(default)]
    pub taper: TaperSpec,
}

impl BeamSpec {
    pub fn new(direction: (f64, f64), taper: TaperSpec) -> Self {
        Self { direction, taper }
    }
}

/// Steering + taper weights for one beam.
pub fn beam_weights(geom: &ArrayGeometry, beam: &BeamSpec) -> Result<WeightVector> {
    let steered = steering_weights(geom, beam.direction)?;
    apply_taper(&steered, &beam.taper, geom)
}

/// One pattern per beam over a shared geometry and grid.
pub fn evaluate_multibeam(
    geom: &ArrayGeometry,
    beams: &[BeamSpec],
    grid: &AngularGrid,
    element: &ElementSpec,
) -> Result<Vec<Pattern>> {
    if beams.is_empty() {
        return Err(Error::Domain("multi-beam evaluation needs at least one beam".into()));
    }
    for b in beams {
        check_direction(b.direction)?;
    }
    let model = ElementRegistry::default().build(element)?;
    beams
        .iter()
        .map(|b| evaluate_pattern_with(geom, &beam_weights(geom, b)?, grid, model.clone()))
        .collect()
}

/// Centre beam plus six neighbours on a hexagon of radius `spacing` in u–v.
pub fn hexagonal_beam_layout(center: (f64, f64), spacing: f64, taper: &TaperSpec) -> Vec<BeamSpec> {
    std::iter::once(center)
        .chain((0..6).map(|m| {
            let a = PI / 3.0 * m as f64;
            (center.0 + spacing * a.cos(), center.1 + spacing * a.sin())
        }))
        .map(|d| BeamSpec::new(d, taper.clone()))
        .collect()
}
