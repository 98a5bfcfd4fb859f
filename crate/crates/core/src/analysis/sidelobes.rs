use serde::{Deserialize, Serialize};

use crate::beamforming::Pattern;
use crate::error::{Error, Result};

use super::{field_db, refine_max, AnalysisConfig, MainLobe};

/// Exterior maxima sampled within this many dB below the grating-lobe
/// threshold are refined before thresholding.
const REFINE_MARGIN_DB: f64 = 3.0;
/// The strongest exterior maxima are always refined for PSLL.
const PSLL_CANDIDATES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GratingLobe {
    pub u: f64,
    pub v: f64,
    /// Level relative to the main-lobe peak, dB.
    pub level_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidelobeMetrics {
    /// Absent when the mask covers the whole visible region.
    pub psll_db: Option<f64>,
    pub asll_db: Option<f64>,
    /// Strongest first.
    pub grating_lobes: Vec<GratingLobe>,
}

/// PSLL, ASLL and grating lobes over the visible samples outside the
/// main-lobe mask, relative to the main-lobe peak.
///
/// Grating lobes are exterior local maxima at or above the threshold. Their
/// reported direction is the refined maximum when refinement is on, else the
/// grid sample.
pub fn sidelobe_metrics(p: &Pattern, lobe: &MainLobe, cfg: &AnalysisConfig) -> Result<SidelobeMetrics> {
    let grid = p.grid();
    let visible = p.visible();
    if lobe.mask.len() != visible.len() {
        return Err(Error::Domain("main-lobe mask does not match the pattern grid".into()));
    }
    let peak = lobe.peak_level;
    let exterior = |idx: usize| visible[idx] && !lobe.mask[idx];

    let mut count = 0usize;
    let mut power = 0.0;
    let mut max_level = 0.0f64;
    for (idx, s) in p.samples().iter().enumerate() {
        if exterior(idx) {
            let m = s.norm() / peak;
            count += 1;
            power += m * m;
            max_level = max_level.max(m);
        }
    }
    if count == 0 {
        return Ok(SidelobeMetrics {
            psll_db: None,
            asll_db: None,
            grating_lobes: Vec::new(),
        });
    }

    let mut candidates: Vec<(usize, f64)> = lobe
        .maxima
        .iter()
        .filter(|&&idx| exterior(idx))
        .map(|&idx| (idx, p.samples()[idx].norm() / peak))
        .collect();
    // strongest first, lowest index on ties
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let prefilter = 10f64.powf((cfg.gl_threshold_db - REFINE_MARGIN_DB) / 20.0);
    let threshold = 10f64.powf(cfg.gl_threshold_db / 20.0);
    let cell = (grid.du(), grid.dv());
    let mut grating_lobes = Vec::new();
    for (rank, &(idx, level)) in candidates.iter().enumerate() {
        let must_refine = rank < PSLL_CANDIDATES;
        if level < prefilter && !must_refine {
            break;
        }
        let (i, j) = grid.coords(idx);
        let (dir, level) = if cfg.refine {
            let (dir, m) = refine_max(p.source(), (grid.u(i), grid.v(j)), cell);
            (dir, m / peak)
        } else {
            ((grid.u(i), grid.v(j)), level)
        };
        max_level = max_level.max(level);
        if level >= threshold {
            grating_lobes.push(GratingLobe {
                u: dir.0,
                v: dir.1,
                level_db: field_db(level),
            });
        }
    }
    grating_lobes.sort_by(|a, b| b.level_db.total_cmp(&a.level_db));

    Ok(SidelobeMetrics {
        psll_db: Some(field_db(max_level)),
        asll_db: Some(10.0 * (power / count as f64).log10()),
        grating_lobes,
    })
}
