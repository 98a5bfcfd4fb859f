//! Beam figures of merit extracted from a sampled [`Pattern`].
//!
//! Levels are reported in dB relative to the main-lobe peak (field quantities,
//! `20·log10`). Grid samples locate features; when a pattern carries its
//! source (all patterns produced by [`crate::beamforming`] do), peak levels
//! and half-power crossings are refined by direct evaluation off the grid.

mod directivity;
mod footprint;
mod main_lobe;
mod multibeam;
mod sidelobes;

use serde::{Deserialize, Serialize};

use crate::beamforming::{Pattern, PatternSource};
use crate::error::{Error, Result};

pub use directivity::{directivity, directivity_with, isotropic_directivity, MIN_SAMPLES_ACROSS_HPBW};
pub use footprint::{footprint_radius, required_aperture_for_footprint, HPBW_APERTURE_FACTOR};
pub use main_lobe::{measure_main_lobe, MainLobe};
pub use multibeam::cochannel_ci;
pub use sidelobes::{sidelobe_metrics, GratingLobe, SidelobeMetrics};

/// Tunables shared by the metric extractors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Main-lobe ellipse semi-axes as multiples of the half-power half-widths.
    pub mask_factor: f64,
    /// Minimum level (dB re peak) for a sidelobe maximum to count as a
    /// grating lobe.
    pub gl_threshold_db: f64,
    /// Refine peaks and crossings by direct evaluation.
    pub refine: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            mask_factor: 1.5,
            gl_threshold_db: -10.0,
            refine: true,
        }
    }
}

/// Complete metric set for one pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    /// Main-lobe maximum, off the grid when refinement is on.
    pub peak_u: f64,
    pub peak_v: f64,
    pub hpbw_u_rad: f64,
    pub hpbw_v_rad: f64,
    pub directivity_dbi: Option<f64>,
    pub psll_db: Option<f64>,
    pub asll_db: Option<f64>,
    pub grating_lobes: Vec<GratingLobe>,
    /// Nadir footprint radius from the wider of the two principal beamwidths.
    pub r_b_m: f64,
}

/// Runs every extractor. Directivity is reported absent when the grid does
/// not cover the visible region or under-resolves the main lobe.
pub fn analyze(p: &Pattern, altitude_m: f64, cfg: &AnalysisConfig) -> Result<PatternMetrics> {
    let lobe = measure_main_lobe(p, cfg)?;
    let side = sidelobe_metrics(p, &lobe, cfg)?;
    let directivity_dbi = match directivity_with(p, Some(&lobe)) {
        Ok(d) => Some(d),
        Err(Error::Resolution(msg)) => {
            log::warn!("directivity not reported and lobe metrics may be unreliable: {msg}");
            None
        }
        Err(e) => return Err(e),
    };
    Ok(PatternMetrics {
        peak_u: lobe.refined_direction.0,
        peak_v: lobe.refined_direction.1,
        hpbw_u_rad: lobe.hpbw_u,
        hpbw_v_rad: lobe.hpbw_v,
        directivity_dbi,
        psll_db: side.psll_db,
        asll_db: side.asll_db,
        grating_lobes: side.grating_lobes,
        r_b_m: footprint_radius(lobe.hpbw_u.max(lobe.hpbw_v), altitude_m)?,
    })
}

/// Field ratio in dB.
pub(crate) fn field_db(ratio: f64) -> f64 {
    20.0 * ratio.log10()
}

/// Angle between the unit directions with direction cosines `a` and `b`.
pub(crate) fn angle_between(a: (f64, f64), b: (f64, f64)) -> f64 {
    let w = |(u, v): (f64, f64)| (1.0 - u * u - v * v).max(0.0).sqrt();
    let (wa, wb) = (w(a), w(b));
    // atan2 of |a×b| and a·b stays accurate for tiny angles
    let cross = [
        a.1 * wb - wa * b.1,
        wa * b.0 - a.0 * wb,
        a.0 * b.1 - a.1 * b.0,
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a.0 * b.0 + a.1 * b.1 + wa * wb;
    sin.atan2(cos)
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iterations: usize) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iterations {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Local maximum of `|AF|` near `start`, searched within one grid cell by
/// alternating golden-section line searches. Never returns a level below the
/// starting sample's.
pub(crate) fn refine_max(source: &PatternSource, start: (f64, f64), cell: (f64, f64)) -> ((f64, f64), f64) {
    let mag = |u: f64, v: f64| {
        if u * u + v * v > 1.0 {
            0.0
        } else {
            source.evaluate(u, v).norm()
        }
    };
    let mut best = (start, mag(start.0, start.1));
    let (mut u, mut v) = start;
    for _ in 0..3 {
        if cell.0 > 0.0 {
            let (nu, _) = golden_max(|x| mag(x, v), start.0 - cell.0, start.0 + cell.0, 40);
            u = nu;
        }
        if cell.1 > 0.0 {
            let (nv, _) = golden_max(|y| mag(u, y), start.1 - cell.1, start.1 + cell.1, 40);
            v = nv;
        }
        let level = mag(u, v);
        if level > best.1 {
            best = ((u, v), level);
        }
    }
    best
}
