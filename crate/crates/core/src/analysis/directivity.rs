use std::f64::consts::PI;

use rayon::prelude::*;

use crate::beamforming::{AngularGrid, Pattern, PatternSource};
use crate::error::{Error, Result};

use super::{measure_main_lobe, AnalysisConfig, MainLobe};

/// Minimum samples across the half-power width on each axis.
pub const MIN_SAMPLES_ACROSS_HPBW: f64 = 4.0;
/// Sub-samples per axis for cells near the unit circle.
const RIM_SUBDIVISION: usize = 32;
/// Width of the sub-sampled band inside the rim, in half cell diagonals.
const RIM_BAND: f64 = 8.0;

/// Directivity in dBi, `4π·|AF_peak|² / ∫∫ |AF|² du·dv/√(1−u²−v²)` over the
/// visible region.
pub fn directivity(p: &Pattern) -> Result<f64> {
    directivity_with(p, None)
}

/// As [`directivity`], reusing an already-measured main lobe.
///
/// The quadrature weight of each sample is the solid angle of the visible
/// part of its grid cell, scaled so the weights sum to exactly 2π.
pub fn directivity_with(p: &Pattern, lobe: Option<&MainLobe>) -> Result<f64> {
    let grid = p.grid();
    if !grid.covers_visible_region() {
        return Err(Error::Resolution(
            "directivity needs a grid spanning the whole visible region [-1, 1]²".into(),
        ));
    }
    if grid.n_u < 2 || grid.n_v < 2 {
        return Err(Error::Resolution("directivity needs at least two samples per axis".into()));
    }
    let measured;
    let lobe = match lobe {
        Some(l) => Some(l),
        None => match measure_main_lobe(p, &AnalysisConfig::default()) {
            Ok(l) => {
                measured = l;
                Some(&measured)
            }
            // a beam wider than the grid is trivially resolved
            Err(Error::BeamTooWide(_)) => None,
            Err(e) => return Err(e),
        },
    };
    let peak = match lobe {
        Some(l) => {
            let across_u = 2.0 * l.half_width_u() / grid.du();
            let across_v = 2.0 * l.half_width_v() / grid.dv();
            if across_u < MIN_SAMPLES_ACROSS_HPBW || across_v < MIN_SAMPLES_ACROSS_HPBW {
                return Err(Error::Resolution(format!(
                    "main lobe spans {across_u:.2} × {across_v:.2} samples; at least \
                     {MIN_SAMPLES_ACROSS_HPBW} per axis are needed for directivity (refine the grid)"
                )));
            }
            l.peak_level
        }
        None => p
            .samples()
            .iter()
            .zip(p.visible())
            .filter(|(_, &v)| v)
            .map(|(s, _)| s.norm())
            .fold(0.0, f64::max),
    };

    let mut weights = cell_solid_angles(grid);
    let scale = 2.0 * PI / weights.iter().sum::<f64>();
    weights.iter_mut().for_each(|w| *w *= scale);
    let mut integral = 0.0;
    for (s, w) in p.samples().iter().zip(&weights) {
        integral += s.norm_sqr() * w;
    }
    if integral <= 0.0 {
        return Err(Error::Domain("pattern is identically zero over the visible region".into()));
    }
    Ok(10.0 * (4.0 * PI * peak * peak / integral).log10())
}

/// Closed-form directivity (dBi) of isotropic elements on the `z = 0` plane.
///
/// Over the visible hemisphere `∫|AF|² dΩ = 2π·Σ_m Σ_n Re(w_m·w_n*)·sinc(k·|r_m − r_n|)`,
/// so no angular grid is needed. `peak_level` is `|AF|` at the beam maximum.
pub fn isotropic_directivity(source: &PatternSource, peak_level: f64) -> Result<f64> {
    if source.element().name() != "isotropic" {
        return Err(Error::Domain(format!(
            "closed-form directivity needs isotropic elements, got `{}`",
            source.element().name()
        )));
    }
    let k = source.wavenumber();
    let pos = source.positions();
    let w = source.weights();
    let rows: Vec<f64> = (0..pos.len())
        .into_par_iter()
        .map(|m| {
            let mut acc = w[m].norm_sqr();
            for n in m + 1..pos.len() {
                let x = k * (pos[m][0] - pos[n][0]).hypot(pos[m][1] - pos[n][1]);
                let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
                acc += 2.0 * (w[m] * w[n].conj()).re * sinc;
            }
            acc
        })
        .collect();
    let integral = 2.0 * PI * rows.iter().sum::<f64>();
    if !(integral > 0.0) {
        return Err(Error::Domain("array has no radiating elements".into()));
    }
    Ok(10.0 * (4.0 * PI * peak_level * peak_level / integral).log10())
}

/// Solid angle `∫∫ du·dv/√(1−u²−v²)` of the part of each sample's cell that
/// lies inside the unit disk. Cells within a few pitches of the rim are
/// sub-sampled; this includes cells whose center is just outside the disk.
fn cell_solid_angles(grid: &AngularGrid) -> Vec<f64> {
    let (du, dv) = (grid.du(), grid.dv());
    let half_diag = 0.5 * du.hypot(dv);
    let mut weights = vec![0.0; grid.len()];
    for i in 0..grid.n_u {
        let u = grid.u(i);
        for j in 0..grid.n_v {
            let v = grid.v(j);
            let r = u.hypot(v);
            if r - half_diag >= 1.0 {
                continue;
            }
            let w = if r + RIM_BAND * half_diag < 1.0 {
                du * dv / (1.0 - r * r).sqrt()
            } else {
                let n = RIM_SUBDIVISION;
                let mut acc = 0.0;
                for a in 0..n {
                    let su = u + du * ((a as f64 + 0.5) / n as f64 - 0.5);
                    for b in 0..n {
                        let sv = v + dv * ((b as f64 + 0.5) / n as f64 - 0.5);
                        let q = 1.0 - su * su - sv * sv;
                        if q > 0.0 {
                            acc += 1.0 / q.sqrt();
                        }
                    }
                }
                acc * du * dv / (n * n) as f64
            };
            weights[grid.index(i, j)] = w;
        }
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::{evaluate_pattern, steering_weights, ElementSpec};
    use crate::geometry::{generate, ArrayGeometry, GeometrySpec};

    const LAMBDA: f64 = 0.15;

    fn freq() -> f64 {
        crate::SPEED_OF_LIGHT / LAMBDA
    }

    #[test]
    fn cell_solid_angles_cover_hemisphere() {
        let grid = AngularGrid::full(513);
        let total: f64 = cell_solid_angles(&grid).iter().sum();
        assert!((total - 2.0 * PI).abs() / (2.0 * PI) < 5e-3, "{total}");
    }

    #[test]
    fn single_isotropic_element_is_hemisphere_ratio() {
        let g = ArrayGeometry::from_positions(vec![[0.0, 0.0]], LAMBDA);
        let w = steering_weights(&g, (0.0, 0.0)).unwrap();
        let p = evaluate_pattern(&g, &w, &AngularGrid::full(129), &ElementSpec::default()).unwrap();
        let d = directivity(&p).unwrap();
        assert!((d - 10.0 * 2f64.log10()).abs() < 1e-9, "{d}");
    }

    #[test]
    fn two_element_pair_closed_form() {
        // two isotropic elements spaced d along x, broadside; over the upper
        // hemisphere ∫|AF|² dΩ = 2π·(2 + 2·sinc(kd)), peak² = 4
        let d = 0.8 * LAMBDA;
        let g = ArrayGeometry::from_positions(vec![[-d / 2.0, 0.0], [d / 2.0, 0.0]], LAMBDA);
        let w = steering_weights(&g, (0.0, 0.0)).unwrap();
        let p = evaluate_pattern(&g, &w, &AngularGrid::full(1025), &ElementSpec::default()).unwrap();
        let kd = 2.0 * PI * d / LAMBDA;
        let expect = 10.0 * (4.0 * PI * 4.0 / (2.0 * PI * (2.0 + 2.0 * kd.sin() / kd))).log10();
        let got = directivity(&p).unwrap();
        assert!((got - expect).abs() < 0.02, "{got} vs {expect}");
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let g = generate(&GeometrySpec::lattice(10, 10, LAMBDA / 2.0, freq())).unwrap();
        let w = steering_weights(&g, (0.0, 0.0)).unwrap();
        let p = evaluate_pattern(&g, &w, &AngularGrid::full(1024), &ElementSpec::default()).unwrap();
        let numeric = directivity(&p).unwrap();
        let exact = isotropic_directivity(p.source(), 100.0).unwrap();
        assert!((numeric - exact).abs() < 0.05, "{numeric} vs {exact}");
    }

    #[test]
    fn closed_form_single_element() {
        let g = ArrayGeometry::from_positions(vec![[0.0, 0.0]], LAMBDA);
        let w = steering_weights(&g, (0.0, 0.0)).unwrap();
        let p = evaluate_pattern(&g, &w, &AngularGrid::full(3), &ElementSpec::default()).unwrap();
        assert!((isotropic_directivity(p.source(), 1.0).unwrap() - 10.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn under_resolved_lobe_rejected() {
        let g = generate(&GeometrySpec::lattice(40, 40, LAMBDA / 2.0, freq())).unwrap();
        let w = steering_weights(&g, (0.0, 0.0)).unwrap();
        let p = evaluate_pattern(&g, &w, &AngularGrid::full(101), &ElementSpec::default()).unwrap();
        assert!(matches!(directivity(&p), Err(Error::Resolution(_))));
    }

    #[test]
    fn partial_grid_rejected() {
        let g = ArrayGeometry::from_positions(vec![[0.0, 0.0]], LAMBDA);
        let w = steering_weights(&g, (0.0, 0.0)).unwrap();
        let p = evaluate_pattern(&g, &w, &AngularGrid::around((0.0, 0.0), 0.5, 21), &ElementSpec::default()).unwrap();
        assert!(matches!(directivity(&p), Err(Error::Resolution(_))));
    }
}
