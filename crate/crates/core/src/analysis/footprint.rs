use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Beamwidth–aperture factor of a uniformly illuminated circular aperture:
/// `HPBW ≈ 1.02·λ/D`.
pub const HPBW_APERTURE_FACTOR: f64 = 1.02;

/// Nadir footprint radius `altitude·tan(hpbw/2)` on a flat Earth.
pub fn footprint_radius(hpbw_rad: f64, altitude_m: f64) -> Result<f64> {
    if !(hpbw_rad > 0.0 && hpbw_rad < FRAC_PI_2) {
        return Err(Error::Domain(format!("hpbw must lie in (0, π/2) rad, got {hpbw_rad}")));
    }
    if !(altitude_m > 0.0 && altitude_m.is_finite()) {
        return Err(Error::Domain(format!("altitude must be positive, got {altitude_m} m")));
    }
    Ok(altitude_m * (hpbw_rad / 2.0).tan())
}

/// Circular-aperture diameter whose beam gives a footprint of radius
/// `radius_m` from `altitude_m`.
pub fn required_aperture_for_footprint(radius_m: f64, altitude_m: f64, wavelength_m: f64) -> Result<f64> {
    if !(radius_m > 0.0 && radius_m.is_finite()) {
        return Err(Error::Domain(format!("footprint radius must be positive, got {radius_m} m")));
    }
    if !(altitude_m > 0.0 && altitude_m.is_finite()) {
        return Err(Error::Domain(format!("altitude must be positive, got {altitude_m} m")));
    }
    if !(wavelength_m > 0.0 && wavelength_m.is_finite()) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength_m} m")));
    }
    let hpbw = 2.0 * (radius_m / altitude_m).atan();
    Ok(HPBW_APERTURE_FACTOR * wavelength_m / hpbw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leo_footprint() {
        let r = footprint_radius(0.02, 500e3).unwrap();
        assert!((r - 500e3 * 0.01f64.tan()).abs() < 1e-9);
        assert!((r - 5000.0).abs() < 1.0);
    }

    #[test]
    fn required_aperture_for_five_km() {
        let d = required_aperture_for_footprint(5e3, 500e3, 0.15).unwrap();
        assert!((d - 7.65).abs() < 0.01, "{d}");
        let half = required_aperture_for_footprint(2.5e3, 500e3, 0.15).unwrap();
        assert!((half / d - 2.0).abs() < 1e-4);
    }

    #[test]
    fn roundtrip() {
        for r in [100.0, 5e3, 25e3] {
            let d = required_aperture_for_footprint(r, 500e3, 0.15).unwrap();
            let back = footprint_radius(HPBW_APERTURE_FACTOR * 0.15 / d, 500e3).unwrap();
            assert!((back - r).abs() / r < 1e-9);
        }
    }

    #[test]
    fn preconditions() {
        assert!(footprint_radius(0.0, 1.0).is_err());
        assert!(footprint_radius(FRAC_PI_2, 1.0).is_err());
        assert!(footprint_radius(0.1, 0.0).is_err());
        assert!(required_aperture_for_footprint(0.0, 1.0, 0.1).is_err());
    }
}
