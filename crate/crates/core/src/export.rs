//! Text serializations of geometries, patterns and trial records.
//!
//! Floating-point CSV fields use nine significant digits so files are compact
//! and byte-stable across platforms.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::beamforming::{AngularGrid, Pattern};
use crate::geometry::ArrayGeometry;
use crate::perturbation::TrialRecord;

/// Lowest level written to pattern files, dB.
pub const DB_FLOOR: f64 = -200.0;

pub const GEOMETRY_HEADER: &str = "index,platform,arm,x_m,y_m";
pub const PATTERN_HEADER: &str = "u,v,af_db";
pub const TRIALS_HEADER: &str = "trial,peak_loss_db,hpbw_rel,pslL_delta_db";

/// `x` with nine significant digits, in the style of C's `%.9g`: fixed
/// notation for exponents in `[-5, 9)`, scientific otherwise, trailing zeros
/// removed.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `index,platform,arm,x_m,y_m`; arm is −1 for layouts without arms.
pub fn geometry_csv(geom: &ArrayGeometry) -> String {
    let mut out = String::with_capacity(32 * (geom.len() + 1));
    out.push_str(GEOMETRY_HEADER);
    out.push('\n');
    for (i, p) in geom.positions().iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            geom.platforms()[i],
            geom.arms()[i],
            fmt_sig9(p[0]),
            fmt_sig9(p[1])
        );
    }
    out
}

/// Normalized level `20·log10(|AF|/Σ|w|)` clipped at [`DB_FLOOR`].
pub fn af_db(magnitude: f64, norm: f64) -> f64 {
    let norm = if norm > 0.0 { norm } else { 1.0 };
    let db = 20.0 * (magnitude / norm).log10();
    if db.is_nan() {
        DB_FLOOR
    } else {
        db.max(DB_FLOOR)
    }
}

/// `u,v,af_db` over the visible samples in grid order.
pub fn pattern_csv(p: &Pattern) -> String {
    let grid = p.grid();
    let mut out = String::with_capacity(36 * grid.len());
    out.push_str(PATTERN_HEADER);
    out.push('\n');
    for (idx, s) in p.samples().iter().enumerate() {
        if !p.visible()[idx] {
            continue;
        }
        let (i, j) = grid.coords(idx);
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_sig9(grid.u(i)),
            fmt_sig9(grid.v(j)),
            fmt_sig9(af_db(s.norm(), p.norm()))
        );
    }
    out
}

/// Metadata accompanying a pattern CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSidecar {
    pub grid: AngularGrid,
    pub wavelength_m: f64,
    pub steer_u: f64,
    pub steer_v: f64,
    pub taper: String,
    pub geometry_kind: String,
    pub element: String,
    /// `Σ|w|`, the normalization of `af_db`.
    pub norm: f64,
    pub db_floor: f64,
    pub visible_samples: usize,
}

impl PatternSidecar {
    pub fn of(p: &Pattern) -> Self {
        Self {
            grid: p.grid().clone(),
            wavelength_m: p.wavelength(),
            steer_u: p.steer_direction().0,
            steer_v: p.steer_direction().1,
            taper: p.taper().to_string(),
            geometry_kind: p.geometry_kind().to_string(),
            element: p.source().element().name().to_string(),
            norm: p.norm(),
            db_floor: DB_FLOOR,
            visible_samples: p.visible().iter().filter(|&&v| v).count(),
        }
    }
}

/// `trial,peak_loss_db,hpbw_rel,pslL_delta_db`; a missing PSLL delta is an
/// empty field.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(TRIALS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.trial,
            fmt_sig9(r.peak_loss_db),
            fmt_sig9(r.hpbw_rel),
            r.psll_delta_db.map(fmt_sig9).unwrap_or_default()
        );
    }
    out
}
