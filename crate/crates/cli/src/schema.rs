//! Key catalogue of the scenario file and the structural checks run before
//! deserialization.

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{CliError, Result};

use FieldType as T;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldType {
    Table,
    TableArray,
    Float,
    Integer,
    Bool,
    String,
    FloatList,
    IntegerPair,
    /// Table with free keys and numeric values.
    FloatMap,
}

impl FieldType {
    fn describe(self) -> &'static str {
        match self {
            FieldType::Table | FieldType::FloatMap => "a table",
            FieldType::TableArray => "an array of tables",
            FieldType::Float => "a number",
            FieldType::Integer => "a non-negative integer",
            FieldType::Bool => "a boolean",
            FieldType::String => "a string",
            FieldType::FloatList => "an array of numbers",
            FieldType::IntegerPair => "an array of two positive integers",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, FieldType::Float | FieldType::Integer)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Field {
    /// Dotted path; elements of table arrays appear as `name[]`.
    pub path: &'static str,
    #[serde(rename = "type")]
    pub ty: FieldType,
    pub unit: &'static str,
    pub required: bool,
    pub doc: &'static str,
}

const fn field(path: &'static str, ty: FieldType, unit: &'static str, doc: &'static str) -> Field {
    Field {
        path,
        ty,
        unit,
        required: false,
        doc,
    }
}

const fn required(path: &'static str, ty: FieldType, unit: &'static str, doc: &'static str) -> Field {
    Field {
        path,
        ty,
        unit,
        required: true,
        doc,
    }
}

pub const FIELDS: &[Field] = &[
    field("name", T::String, "", "design label used in comparison tables; defaults to the geometry kind"),
    field("frequency_hz", T::Float, "Hz", "carrier frequency shared by the geometry and the link budget"),
    field("altitude_m", T::Float, "m", "platform altitude for footprint radii"),
    required("geometry", T::Table, "", "element layout"),
    required(
        "geometry.kind",
        T::String,
        "",
        "rectangular-lattice, sparse-square, sunflower or elsa",
    ),
    required("geometry.n_platforms", T::Integer, "count", "number of platforms"),
    field("geometry.radiators_per_platform", T::Integer, "count", "radiators on each platform"),
    field("geometry.grid_dims", T::IntegerPair, "count", "explicit [nx, ny] for rectangular kinds"),
    field("geometry.spacing_m", T::Float, "m", "lattice pitch, or the arm step of an elsa layout"),
    field("geometry.radial_scale_m", T::Float, "m", "spiral radial scale"),
    field("geometry.n_arms", T::Integer, "count", "elsa arm count"),
    field("geometry.growth_rate", T::Float, "1/rad", "elsa logarithmic growth rate"),
    field("geometry.min_spacing_m", T::Float, "m", "minimum allowed element separation"),
    field("beams", T::TableArray, "", "one entry per simultaneous beam; defaults to one broadside beam"),
    field("beams[].u", T::Float, "direction cosine", "steering direction u"),
    field("beams[].v", T::Float, "direction cosine", "steering direction v"),
    field("beams[].taper", T::Table, "", "amplitude taper"),
    field(
        "beams[].taper.kind",
        T::String,
        "",
        "uniform, radial-hann, radial-hamming or radial-taylor-approx",
    ),
    field("beams[].taper.params", T::FloatMap, "", "taper parameters (pedestal, alpha, sll_db, nbar)"),
    field("grid", T::Table, "", "direction-cosine sampling grid"),
    field("grid.u_min", T::Float, "direction cosine", "lower u bound"),
    field("grid.u_max", T::Float, "direction cosine", "upper u bound"),
    field("grid.v_min", T::Float, "direction cosine", "lower v bound"),
    field("grid.v_max", T::Float, "direction cosine", "upper v bound"),
    field("grid.n_u", T::Integer, "count", "samples along u"),
    field("grid.n_v", T::Integer, "count", "samples along v"),
    field("element", T::Table, "", "element radiation model"),
    field("element.kind", T::String, "", "isotropic or cosine"),
    field("element.q", T::Float, "", "cosine exponent"),
    field("analysis", T::Table, "", "metric extraction settings"),
    field("analysis.mask_factor", T::Float, "", "main-lobe mask semi-axes in half-power half-widths"),
    field("analysis.gl_threshold_db", T::Float, "dB", "grating-lobe threshold relative to the peak"),
    field("analysis.refine", T::Bool, "", "refine peaks and crossings off the grid"),
    field("link", T::Table, "", "downlink budget"),
    field("link.distance_m", T::Float, "m", "slant range; defaults to altitude_m"),
    field("link.element_power_w", T::Float, "W", "transmit power per element"),
    field("link.element_gain_dbi", T::Float, "dBi", "element gain"),
    field("link.ue_gain_dbi", T::Float, "dBi", "handheld antenna gain"),
    field("link.misc_losses_db", T::Float, "dB", "aggregate miscellaneous losses"),
    field("link.ue_sensitivity_dbm", T::Float, "dBm", "handheld sensitivity"),
    field("perturbation", T::Table, "", "optional Monte Carlo degradation study"),
    field("perturbation.sigma_pos_m", T::Float, "m", "position error standard deviation per axis"),
    field("perturbation.sigma_phase_rad", T::Float, "rad", "phase error standard deviation"),
    field("perturbation.failure_prob", T::Float, "", "independent element failure probability"),
    field("perturbation.trials", T::Integer, "count", "Monte Carlo trials"),
    field("perturbation.master_seed", T::Integer, "", "random seed"),
    field("perturbation.grid_samples", T::Integer, "count", "samples per axis of the local trial grid"),
    field("failure_sweep", T::Table, "", "optional failed-fraction sweep"),
    field("failure_sweep.fractions", T::FloatList, "", "failed fractions in [0, 1)"),
    field("failure_sweep.trials", T::Integer, "count", "trials per fraction"),
    field("failure_sweep.master_seed", T::Integer, "", "random seed"),
    field("outputs", T::Table, "", "artifact output"),
    field("outputs.dir", T::String, "path", "output directory"),
    field("outputs.pattern_csv", T::Bool, "", "write pattern CSVs"),
    field("outputs.trials_csv", T::Bool, "", "write per-trial perturbation CSV"),
];

pub fn lookup(path: &str) -> Option<&'static Field> {
    FIELDS.iter().find(|f| f.path == path)
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn parent(path: &str) -> &str {
    path.rsplit_once('.').map_or("", |(p, _)| p)
}

fn children(prefix: &str) -> impl Iterator<Item = &'static Field> + '_ {
    FIELDS.iter().filter(move |f| parent(f.path) == prefix)
}

fn leaf(path: &str) -> &str {
    path.rsplit_once('.').map_or(path, |(_, k)| k)
}

/// Closest sibling key by Jaro–Winkler similarity.
pub fn suggest(prefix: &str, key: &str) -> Option<&'static str> {
    children(prefix)
        .map(|f| (strsim::jaro_winkler(key, leaf(f.path)), leaf(f.path)))
        .filter(|(score, _)| *score >= 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k)
}

fn unknown_key(prefix: &str, key: &str, display: &str) -> CliError {
    let message = match suggest(prefix, key) {
        Some(s) => format!("unknown key `{key}`; did you mean `{s}`?"),
        None => {
            let valid: Vec<&str> = children(prefix).map(|f| leaf(f.path)).collect();
            format!("unknown key `{key}`; valid keys here: {}", valid.join(", "))
        }
    };
    CliError::config(display, message)
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

fn matches(ty: FieldType, v: &Value) -> bool {
    let number = |v: &Value| matches!(v, Value::Integer(_) | Value::Float(_));
    match ty {
        T::Table | T::FloatMap => v.is_table(),
        T::TableArray => v.as_array().is_some_and(|a| a.iter().all(Value::is_table)),
        T::Float => number(v),
        T::Integer => v.as_integer().is_some_and(|i| i >= 0),
        T::Bool => v.is_bool(),
        T::String => v.is_str(),
        T::FloatList => v.as_array().is_some_and(|a| a.iter().all(number)),
        T::IntegerPair => v
            .as_array()
            .is_some_and(|a| a.len() == 2 && a.iter().all(|x| x.as_integer().is_some_and(|i| i > 0))),
    }
}

fn type_error(f: &Field, display: &str, v: &Value) -> CliError {
    let unit = if f.unit.is_empty() || f.unit == "count" {
        String::new()
    } else {
        format!(" in {}", f.unit)
    };
    CliError::config(display, format!("expected {}{unit}, got {}", f.ty.describe(), type_name(v)))
}

/// Rejects unknown keys, type mismatches and missing required keys.
pub fn check(root: &Table) -> Result<()> {
    walk(root, "", "")
}

fn walk(table: &Table, prefix: &str, display: &str) -> Result<()> {
    for (key, value) in table {
        let path = join(prefix, key);
        let shown = join(display, key);
        let Some(f) = lookup(&path) else {
            return Err(unknown_key(prefix, key, &shown));
        };
        if !matches(f.ty, value) {
            return Err(type_error(f, &shown, value));
        }
        match f.ty {
            T::Table => walk(value.as_table().expect("checked"), &path, &shown)?,
            T::TableArray => {
                let elems = value.as_array().expect("checked");
                for (i, elem) in elems.iter().enumerate() {
                    let elem = elem.as_table().expect("checked");
                    walk(elem, &format!("{path}[]"), &format!("{shown}[{i}]"))?;
                }
            }
            T::FloatMap => {
                for (k, v) in value.as_table().expect("checked") {
                    if !matches!(v, Value::Integer(_) | Value::Float(_)) {
                        return Err(CliError::config(
                            join(&shown, k),
                            format!("expected a number, got {}", type_name(v)),
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    for f in children(prefix).filter(|f| f.required) {
        if !table.contains_key(leaf(f.path)) {
            return Err(CliError::config(join(display, leaf(f.path)), "missing required key"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Table {
        s.parse().unwrap()
    }

    #[test]
    fn every_field_has_a_declared_parent() {
        for f in FIELDS {
            let p = parent(f.path);
            if p.is_empty() {
                continue;
            }
            let owner = p.strip_suffix("[]").unwrap_or(p);
            let ty = lookup(owner).map(|o| o.ty);
            assert!(
                matches!(ty, Some(T::Table) | Some(T::TableArray)),
                "{} has no table parent",
                f.path
            );
        }
    }

    #[test]
    fn misspelled_key_gets_a_suggestion() {
        let err = check(&parse("frequnecy = 2e9\n[geometry]\nkind = 'elsa'\nn_platforms = 5")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("did you mean `frequency_hz`"), "{msg}");
    }

    #[test]
    fn nested_and_array_paths_are_reported() {
        let err = check(&parse("[geometry]\nkind = 'elsa'\nn_platforms = 5\n[[beams]]\nu = 0.1\nvv = 0.0"))
            .unwrap_err();
        assert!(err.to_string().contains("beams[0].vv"), "{err}");
        assert!(err.to_string().contains("`v`"), "{err}");
    }

    #[test]
    fn type_mismatch_names_unit() {
        let err = check(&parse("[geometry]\nkind = 'elsa'\nn_platforms = 5\nspacing_m = 'far'")).unwrap_err();
        assert!(err.to_string().contains("expected a number in m"), "{err}");
        let err = check(&parse("[geometry]\nkind = 'elsa'\nn_platforms = -5")).unwrap_err();
        assert!(err.to_string().contains("non-negative integer"), "{err}");
    }

    #[test]
    fn missing_required_key_names_section() {
        let err = check(&parse("[geometry]\nkind = 'elsa'")).unwrap_err();
        assert!(err.to_string().contains("geometry.n_platforms"), "{err}");
        let err = check(&parse("altitude_m = 1.0")).unwrap_err();
        assert!(err.to_string().contains("`geometry`"), "{err}");
    }

    #[test]
    fn taper_params_are_free_numeric_keys() {
        let ok = "[geometry]\nkind = 'elsa'\nn_platforms = 5\n[[beams]]\ntaper = { kind = 'radial-hamming', params = { alpha = 0.6 } }";
        check(&parse(ok)).unwrap();
        let bad = ok.replace("0.6", "'x'");
        assert!(check(&parse(&bad)).is_err());
    }
}
