//! Downlink budget from a coherently combining array to a handheld terminal.
//!
//! All quantities are in dB units: `p_rx = eirp − fspl − misc_losses + ue_gain`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

/// Largest element count searched by [`min_elements_for_power`].
pub const MAX_ELEMENTS: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBudgetParams {
    pub frequency_hz: f64,
    /// Slant range to the terminal.
    pub distance_m: f64,
    pub element_power_w: f64,
    pub element_gain_dbi: f64,
    pub n_elements: u64,
    pub ue_gain_dbi: f64,
    /// Aggregate polarization, pointing and atmospheric losses.
    pub misc_losses_db: f64,
    pub ue_sensitivity_dbm: f64,
}

impl Default for LinkBudgetParams {
    fn default() -> Self {
        Self {
            frequency_hz: 2e9,
            distance_m: 500e3,
            element_power_w: 1.0,
            element_gain_dbi: 5.0,
            n_elements: 256,
            ue_gain_dbi: 0.0,
            misc_losses_db: 3.0,
            ue_sensitivity_dbm: -100.0,
        }
    }
}

impl LinkBudgetParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {x}")))
            }
        };
        positive("frequency_hz", self.frequency_hz)?;
        positive("distance_m", self.distance_m)?;
        positive("element_power_w", self.element_power_w)?;
        if self.n_elements < 1 {
            return Err(Error::Domain("n_elements must be at least 1".into()));
        }
        if !(self.misc_losses_db >= 0.0 && self.misc_losses_db.is_finite()) {
            return Err(Error::Domain(format!(
                "misc_losses_db must be non-negative, got {}",
                self.misc_losses_db
            )));
        }
        for (name, x) in [
            ("element_gain_dbi", self.element_gain_dbi),
            ("ue_gain_dbi", self.ue_gain_dbi),
            ("ue_sensitivity_dbm", self.ue_sensitivity_dbm),
        ] {
            if !x.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetResult {
    pub fspl_db: f64,
    pub eirp_dbm: f64,
    pub p_rx_dbm: f64,
    /// `p_rx − ue_sensitivity`.
    pub margin_db: f64,
}

/// Free-space path loss `20·log10(4π·d·f/c)`.
pub fn fspl(distance_m: f64, frequency_hz: f64) -> Result<f64> {
    if !(distance_m > 0.0 && frequency_hz > 0.0 && distance_m.is_finite() && frequency_hz.is_finite()) {
        return Err(Error::Domain(format!(
            "distance and frequency must be positive, got {distance_m} m and {frequency_hz} Hz"
        )));
    }
    Ok(20.0 * (4.0 * PI * distance_m * frequency_hz / SPEED_OF_LIGHT).log10())
}

/// EIRP of `n` coherently combined elements: `10·log10(P·1000) + G + 20·log10(N)`.
pub fn array_eirp(n_elements: u64, element_power_w: f64, element_gain_dbi: f64) -> Result<f64> {
    if n_elements < 1 {
        return Err(Error::Domain("n_elements must be at least 1".into()));
    }
    if !(element_power_w > 0.0 && element_power_w.is_finite()) {
        return Err(Error::Domain(format!("element power must be positive, got {element_power_w} W")));
    }
    Ok(10.0 * (element_power_w * 1000.0).log10() + element_gain_dbi + 20.0 * (n_elements as f64).log10())
}

pub fn received_power(params: &LinkBudgetParams) -> Result<LinkBudgetResult> {
    params.validate()?;
    let fspl_db = fspl(params.distance_m, params.frequency_hz)?;
    let eirp_dbm = array_eirp(params.n_elements, params.element_power_w, params.element_gain_dbi)?;
    let p_rx_dbm = eirp_dbm - fspl_db - params.misc_losses_db + params.ue_gain_dbi;
    Ok(LinkBudgetResult {
        fspl_db,
        eirp_dbm,
        p_rx_dbm,
        margin_db: p_rx_dbm - params.ue_sensitivity_dbm,
    })
}

/// Smallest element count whose received power reaches `target_dbm`.
/// `params.n_elements` is ignored.
pub fn min_elements_for_power(params: &LinkBudgetParams, target_dbm: f64) -> Result<u64> {
    if !target_dbm.is_finite() {
        return Err(Error::Domain(format!("target power must be finite, got {target_dbm}")));
    }
    let p_rx = |n: u64| -> Result<f64> {
        received_power(&LinkBudgetParams {
            n_elements: n,
            ..params.clone()
        })
        .map(|r| r.p_rx_dbm)
    };
    let at_max = p_rx(MAX_ELEMENTS)?;
    if at_max < target_dbm {
        return Err(Error::Infeasible(format!(
            "target {target_dbm} dBm not reached with {MAX_ELEMENTS} elements (shortfall {:.3} dB)",
            target_dbm - at_max
        )));
    }
    let base = p_rx(1)?;
    let estimate = 10f64.powf((target_dbm - base) / 20.0).ceil();
    let mut n = if estimate.is_finite() {
        (estimate.max(1.0) as u64).min(MAX_ELEMENTS)
    } else {
        1
    };
    // the closed form can land one step off through rounding
    while n > 1 && p_rx(n - 1)? >= target_dbm {
        n -= 1;
    }
    while p_rx(n)? < target_dbm {
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> LinkBudgetParams {
        LinkBudgetParams::default()
    }

    #[test]
    fn fspl_reference_value() {
        let f = fspl(500e3, 2e9).unwrap();
        assert!((f - 152.44).abs() < 0.01, "{f}");
        let twice_d = fspl(1000e3, 2e9).unwrap() - f;
        let twice_f = fspl(500e3, 4e9).unwrap() - f;
        assert!((twice_d - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!((twice_f - twice_d).abs() < 1e-12);
    }

    #[test]
    fn eirp_values() {
        assert!((array_eirp(1, 1.0, 5.0).unwrap() - 35.0).abs() < 1e-12);
        let e = array_eirp(256, 1.0, 5.0).unwrap();
        assert!((e - 83.16).abs() < 0.005);
        assert!((array_eirp(512, 1.0, 5.0).unwrap() - e - 20.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn received_power_example() {
        let r = received_power(&reference()).unwrap();
        assert!((r.p_rx_dbm - (-72.28)).abs() < 0.01, "{}", r.p_rx_dbm);
        assert!((r.margin_db - 27.72).abs() < 0.01);
        assert_eq!(r.p_rx_dbm, r.eirp_dbm - r.fspl_db - 3.0 + 0.0);
    }

    #[test]
    fn min_elements_fixed_point_and_doubling() {
        let target = received_power(&reference()).unwrap().p_rx_dbm;
        assert_eq!(min_elements_for_power(&reference(), target).unwrap(), 256);
        let up = target + 20.0 * 2f64.log10();
        assert_eq!(min_elements_for_power(&reference(), up).unwrap(), 512);
    }

    #[test]
    fn default_target_element_count() {
        // −85 dBm: 20·log10(N) ≥ −85 − (30 + 5 − 152.447 − 3) = 35.447
        let n = min_elements_for_power(&reference(), -85.0).unwrap();
        let closed = 10f64.powf((-85.0 - (35.0 - fspl(500e3, 2e9).unwrap() - 3.0)) / 20.0).ceil() as u64;
        assert_eq!(n, closed);
        assert_eq!(n, 60);
    }

    #[test]
    fn infeasible_target() {
        let err = min_elements_for_power(&reference(), 200.0).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn invalid_params() {
        let mut p = reference();
        p.misc_losses_db = -1.0;
        assert!(received_power(&p).is_err());
        p = reference();
        p.n_elements = 0;
        assert!(received_power(&p).is_err());
        assert!(fspl(0.0, 1.0).is_err());
    }
}
