//! One-parameter sweeps emitted as long-form CSV.

use std::fmt::Write;

use rayon::prelude::*;
use toml::{Table, Value};

use swarmbeam::export::fmt_sig9;

use crate::config::{resolve, Overrides};
use crate::error::{CliError, Result};
use crate::runner::Evaluation;
use crate::schema::{self, FieldType};

pub const SWEEP_HEADER: &str = "param,value,metric,result,error";

/// Metrics reported per sweep point, in row order.
pub const SWEEP_METRICS: &[&str] = &[
    "n_elements",
    "d_ave_m",
    "aperture_diameter_m",
    "hpbw_u_rad",
    "hpbw_v_rad",
    "directivity_dbi",
    "psll_db",
    "asll_db",
    "gl_count",
    "r_b_m",
    "p_rx_dbm",
    "margin_db",
];

fn set_path(root: &mut Table, path: &str, value: Value) {
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().expect("non-empty path");
    let mut table = root;
    for k in keys {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        if !entry.is_table() {
            *entry = Value::Table(Table::new());
        }
        table = entry.as_table_mut().expect("just ensured");
    }
    table.insert(last.to_string(), value);
}

fn point_value(ty: FieldType, x: f64) -> std::result::Result<Value, String> {
    match ty {
        FieldType::Integer if x >= 0.0 && x.fract() == 0.0 && x <= i64::MAX as f64 => Ok(Value::Integer(x as i64)),
        FieldType::Integer => Err(format!("{x} is not a non-negative integer")),
        _ => Ok(Value::Float(x)),
    }
}

fn evaluate(raw: &Table, path: &str, ty: FieldType, x: f64, overrides: &Overrides) -> Result<Vec<Option<f64>>> {
    let value = point_value(ty, x).map_err(|m| CliError::config(path, m))?;
    let mut doc = raw.clone();
    set_path(&mut doc, path, value);
    let mut config = resolve(&doc)?.config;
    overrides.apply(&mut config);
    let eval = Evaluation::new(config)?;
    let m = &eval.metrics()?[0];
    let link = eval.link()?;
    Ok(vec![
        Some(eval.geometry.len() as f64),
        eval.stats.d_ave,
        Some(eval.stats.aperture_diameter),
        Some(m.hpbw_u_rad),
        Some(m.hpbw_v_rad),
        m.directivity_dbi,
        m.psll_db,
        m.asll_db,
        Some(m.grating_lobes.len() as f64),
        Some(m.r_b_m),
        Some(link.p_rx_dbm),
        Some(link.margin_db),
    ])
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Evaluates the scenario once per value of the numeric key `path` and
/// returns rows `param,value,metric,result,error`. A failed point yields a
/// single row with an empty metric and the error message; metrics that are
/// undefined at a point have an empty result and error `unavailable`.
pub fn sweep(raw: &Table, path: &str, values: &[f64], overrides: &Overrides) -> Result<String> {
    if values.is_empty() {
        return Err(CliError::config("values", "the sweep needs at least one value"));
    }
    let field = schema::lookup(path).ok_or_else(|| {
        let (prefix, key) = path.rsplit_once('.').unwrap_or(("", path));
        let hint = schema::suggest(prefix, key).map_or(String::new(), |s| format!("; did you mean `{s}`?"));
        CliError::config(path, format!("unknown parameter path{hint}"))
    })?;
    if !field.ty.is_numeric() || path.contains("[]") {
        return Err(CliError::config(path, "sweep parameter must name a numeric scalar field"));
    }
    // validate the base scenario once so structural errors abort the sweep
    resolve(raw)?;

    let results: Vec<Result<Vec<Option<f64>>>> = values
        .par_iter()
        .map(|&x| evaluate(raw, path, field.ty, x, overrides))
        .collect();

    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (&x, r) in values.iter().zip(results) {
        let value = fmt_sig9(x);
        match r {
            Ok(metrics) => {
                for (name, m) in SWEEP_METRICS.iter().zip(metrics) {
                    match m {
                        Some(v) => writeln!(out, "{path},{value},{name},{},", fmt_sig9(v)),
                        None => writeln!(out, "{path},{value},{name},,unavailable"),
                    }
                    .expect("writing to a string");
                }
            }
            Err(e) => {
                log::warn!("sweep point {path} = {value} failed: {e}");
                writeln!(out, "{path},{value},,,{}", csv_field(&e.to_string())).expect("writing to a string");
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Table {
        "[geometry]\nkind = \"sunflower\"\nn_platforms = 30\nradial_scale_m = 0.12\n[grid]\nn_u = 65\nn_v = 65\n"
            .parse()
            .unwrap()
    }

    #[test]
    fn rows_per_value_and_metric() {
        let csv = sweep(&base(), "geometry.n_platforms", &[20.0, 30.0], &Overrides::default()).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], SWEEP_HEADER);
        assert_eq!(rows.len(), 1 + 2 * SWEEP_METRICS.len());
        assert_eq!(rows[1], "geometry.n_platforms,20,n_elements,20,");
    }

    #[test]
    fn failed_points_are_recorded_and_the_sweep_continues() {
        let csv = sweep(&base(), "geometry.min_spacing_m", &[0.05, 5.0], &Overrides::default()).unwrap();
        let failed: Vec<&str> = csv.lines().filter(|l| l.starts_with("geometry.min_spacing_m,5,")).collect();
        assert_eq!(failed.len(), 1);
        assert!(failed[0].starts_with("geometry.min_spacing_m,5,,,"));
        assert!(failed[0].contains("spacing"));
        assert_eq!(csv.lines().filter(|l| l.contains(",0.05,")).count(), SWEEP_METRICS.len());
        let frac = sweep(&base(), "geometry.n_platforms", &[2.5], &Overrides::default()).unwrap();
        assert!(frac.contains("not a non-negative integer"));
    }

    #[test]
    fn rejected_paths_and_empty_values() {
        for path in ["geometry.kind", "outputs.pattern_csv", "geometry.spacing", "beams[].u"] {
            let err = sweep(&base(), path, &[1.0], &Overrides::default()).unwrap_err();
            assert_eq!(err.kind(), "config", "{path}");
        }
        let err = sweep(&base(), "geometry.spacing", &[1.0], &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("spacing_m"), "{err}");
        assert!(sweep(&base(), "geometry.n_platforms", &[], &Overrides::default()).is_err());
    }
}
