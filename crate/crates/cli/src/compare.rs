//! Side-by-side comparison of array designs sharing a carrier and altitude.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use swarmbeam::export::fmt_sig9;

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::runner::Evaluation;

pub const COMPARE_HEADER: &str =
    "design,n_elements,d_ave_m,aperture_diameter_m,hpbw_rad,r_b_m,psll_db,asll_db,gl_count,p_rx_dbm,margin_db";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub design: String,
    pub n_elements: usize,
    pub d_ave_m: Option<f64>,
    pub aperture_diameter_m: f64,
    /// Wider of the two principal-cut beamwidths.
    pub hpbw_rad: f64,
    pub r_b_m: f64,
    pub psll_db: Option<f64>,
    pub asll_db: Option<f64>,
    pub gl_count: usize,
    pub p_rx_dbm: f64,
    pub margin_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub frequency_hz: f64,
    pub altitude_m: f64,
    pub rows: Vec<DesignRow>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

pub fn design_row(config: &ScenarioConfig) -> Result<DesignRow> {
    let eval = Evaluation::new(config.clone())?;
    let m = &eval.metrics()?[0];
    let link = eval.link()?;
    Ok(DesignRow {
        design: config.name.clone(),
        n_elements: eval.geometry.len(),
        d_ave_m: eval.stats.d_ave,
        aperture_diameter_m: eval.stats.aperture_diameter,
        hpbw_rad: m.hpbw_u_rad.max(m.hpbw_v_rad),
        r_b_m: m.r_b_m,
        psll_db: m.psll_db,
        asll_db: m.asll_db,
        gl_count: m.grating_lobes.len(),
        p_rx_dbm: link.p_rx_dbm,
        margin_db: link.margin_db,
    })
}

/// One row per design, in input order. Every design must share the first
/// one's frequency and altitude.
pub fn compare_designs(configs: &[ScenarioConfig]) -> Result<Comparison> {
    let first = configs
        .first()
        .ok_or_else(|| CliError::Comparability("no designs given".into()))?;
    for c in &configs[1..] {
        if !same(c.frequency_hz, first.frequency_hz) {
            return Err(CliError::Comparability(format!(
                "`{}` uses {} Hz but `{}` uses {} Hz",
                c.name, c.frequency_hz, first.name, first.frequency_hz
            )));
        }
        if !same(c.altitude_m, first.altitude_m) {
            return Err(CliError::Comparability(format!(
                "`{}` sits at {} m but `{}` at {} m",
                c.name, c.altitude_m, first.name, first.altitude_m
            )));
        }
    }
    let rows = configs.iter().map(design_row).collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        frequency_hz: first.frequency_hz,
        altitude_m: first.altitude_m,
        rows,
    })
}

pub fn comparison_csv(c: &Comparison) -> String {
    let opt = |x: Option<f64>| x.map(fmt_sig9).unwrap_or_default();
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for r in &c.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.design,
            r.n_elements,
            opt(r.d_ave_m),
            fmt_sig9(r.aperture_diameter_m),
            fmt_sig9(r.hpbw_rad),
            fmt_sig9(r.r_b_m),
            opt(r.psll_db),
            opt(r.asll_db),
            r.gl_count,
            fmt_sig9(r.p_rx_dbm),
            fmt_sig9(r.margin_db),
        )
        .expect("writing to a string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    fn design(extra: &str) -> ScenarioConfig {
        parse_config_str(&format!(
            "{extra}\n[geometry]\nkind = \"sunflower\"\nn_platforms = 25\nradial_scale_m = 0.1\n[grid]\nn_u = 65\nn_v = 65\n"
        ))
        .unwrap()
        .config
    }

    #[test]
    fn identical_designs_give_identical_rows() {
        let c = compare_designs(&[design(""), design(""), design("")]).unwrap();
        assert_eq!(c.rows.len(), 3);
        assert!(c.rows.iter().all(|r| *r == c.rows[0]));
        let csv = comparison_csv(&c);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], COMPARE_HEADER);
        assert!(lines[1..].iter().all(|l| *l == lines[1]));
        assert!(lines[1].starts_with("sunflower,25,"));
    }

    #[test]
    fn mismatched_carrier_or_altitude_is_rejected() {
        let err = compare_designs(&[design(""), design("frequency_hz = 2.1e9")]).unwrap_err();
        assert_eq!((err.kind(), err.exit_code()), ("comparability", 2));
        let err = compare_designs(&[design(""), design("altitude_m = 600e3")]).unwrap_err();
        assert_eq!(err.kind(), "comparability");
    }
}
