//! Scenario files: parsing, defaults and validation.
//!
//! A scenario is a TOML document. Parsing first checks the raw document
//! against [`crate::schema`], then fills every absent key from defaults that
//! depend on the carrier frequency and the geometry kind, and finally
//! deserializes the completed document. The paths of all filled keys are
//! kept so they can be echoed into output metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use swarmbeam::analysis::AnalysisConfig;
use swarmbeam::beamforming::{AngularGrid, BeamSpec, ElementSpec, TaperSpec};
use swarmbeam::geometry::{GeneratorRegistry, GeometrySpec};
use swarmbeam::linkbudget::LinkBudgetParams;
use swarmbeam::perturbation::{FailureSweepSpec, PerturbationSpec};

use crate::error::{CliError, Result};
use crate::schema;

pub const DEFAULT_FREQUENCY_HZ: f64 = 2e9;
pub const DEFAULT_ALTITUDE_M: f64 = 500e3;
pub const DEFAULT_GRID_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub frequency_hz: f64,
    pub altitude_m: f64,
    pub geometry: GeometryConfig,
    pub beams: Vec<BeamConfig>,
    pub grid: AngularGrid,
    pub element: ElementSpec,
    pub analysis: AnalysisConfig,
    pub link: LinkConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_sweep: Option<FailureSweepSpec>,
    pub outputs: OutputConfig,
}

/// Layout parameters; the carrier frequency comes from the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: String,
    pub n_platforms: usize,
    pub radiators_per_platform: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_dims: Option<[usize; 2]>,
    pub spacing_m: f64,
    pub radial_scale_m: f64,
    pub n_arms: usize,
    pub growth_rate: f64,
    pub min_spacing_m: f64,
}

impl GeometryConfig {
    /// Kind-specific defaults at `frequency_hz`.
    pub fn defaults(kind: &str, n_platforms: usize, frequency_hz: f64) -> Self {
        let lambda = swarmbeam::wavelength(frequency_hz);
        let mut g = Self {
            kind: kind.to_string(),
            n_platforms,
            radiators_per_platform: 1,
            grid_dims: None,
            spacing_m: lambda / 2.0,
            radial_scale_m: lambda,
            n_arms: 1,
            growth_rate: 0.1,
            min_spacing_m: lambda / 2.0,
        };
        match kind {
            "sparse-square" => g.spacing_m = 10.0 * lambda,
            "elsa" => {
                g.n_arms = 5;
                g.radial_scale_m = 45.0 * lambda;
                g.spacing_m = 10.0 * lambda;
                g.min_spacing_m = 5.0 * lambda;
            }
            _ => {}
        }
        g
    }

    pub fn spec(&self, frequency_hz: f64) -> GeometrySpec {
        GeometrySpec {
            kind: self.kind.clone(),
            n_platforms: self.n_platforms,
            radiators_per_platform: self.radiators_per_platform,
            grid_dims: self.grid_dims,
            spacing_m: self.spacing_m,
            radial_scale_m: self.radial_scale_m,
            n_arms: self.n_arms,
            growth_rate: self.growth_rate,
            min_spacing_m: self.min_spacing_m,
            frequency_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub u: f64,
    pub v: f64,
    pub taper: TaperSpec,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            u: 0.0,
            v: 0.0,
            taper: TaperSpec::uniform(),
        }
    }
}

impl BeamConfig {
    pub fn spec(&self) -> BeamSpec {
        BeamSpec::new((self.u, self.v), self.taper.clone())
    }
}

/// Link parameters; frequency and element count come from the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub distance_m: f64,
    pub element_power_w: f64,
    pub element_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub misc_losses_db: f64,
    pub ue_sensitivity_dbm: f64,
}

impl LinkConfig {
    fn defaults(distance_m: f64) -> Self {
        let p = LinkBudgetParams::default();
        Self {
            distance_m,
            element_power_w: p.element_power_w,
            element_gain_dbi: p.element_gain_dbi,
            ue_gain_dbi: p.ue_gain_dbi,
            misc_losses_db: p.misc_losses_db,
            ue_sensitivity_dbm: p.ue_sensitivity_dbm,
        }
    }

    pub fn params(&self, frequency_hz: f64, n_elements: u64) -> LinkBudgetParams {
        LinkBudgetParams {
            frequency_hz,
            distance_m: self.distance_m,
            element_power_w: self.element_power_w,
            element_gain_dbi: self.element_gain_dbi,
            n_elements,
            ue_gain_dbi: self.ue_gain_dbi,
            misc_losses_db: self.misc_losses_db,
            ue_sensitivity_dbm: self.ue_sensitivity_dbm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub sigma_pos_m: f64,
    pub sigma_phase_rad: f64,
    pub failure_prob: f64,
    pub trials: usize,
    pub master_seed: u64,
    /// Samples per axis of the window around the nominal main lobe on which
    /// trials are evaluated.
    pub grid_samples: usize,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        let s = PerturbationSpec::default();
        Self {
            sigma_pos_m: s.sigma_pos_m,
            sigma_phase_rad: s.sigma_phase_rad,
            failure_prob: s.failure_prob,
            trials: s.trials,
            master_seed: s.master_seed,
            grid_samples: 129,
        }
    }
}

impl PerturbationConfig {
    pub fn spec(&self) -> PerturbationSpec {
        PerturbationSpec {
            sigma_pos_m: self.sigma_pos_m,
            sigma_phase_rad: self.sigma_phase_rad,
            failure_prob: self.failure_prob,
            trials: self.trials,
            master_seed: self.master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub pattern_csv: bool,
    pub trials_csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            pattern_csv: true,
            trials_csv: false,
        }
    }
}

/// A key filled from defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppliedDefault {
    pub path: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: ScenarioConfig,
    pub defaults_applied: Vec<AppliedDefault>,
}

fn to_table<T: Serialize>(v: &T) -> Table {
    Table::try_from(v).expect("config types serialize to tables")
}

fn float_or(t: &Table, key: &str, default: f64) -> f64 {
    match t.get(key) {
        Some(Value::Float(x)) => *x,
        Some(Value::Integer(i)) => *i as f64,
        _ => default,
    }
}

fn merge(target: &mut Table, defaults: &Table, prefix: &str, applied: &mut Vec<AppliedDefault>) {
    for (key, dv) in defaults {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match target.get_mut(key) {
            None => {
                record(dv, &path, applied);
                target.insert(key.clone(), dv.clone());
            }
            Some(Value::Table(t)) => {
                if let Value::Table(d) = dv {
                    merge(t, d, &path, applied);
                }
            }
            Some(_) => {}
        }
    }
}

fn record(v: &Value, path: &str, applied: &mut Vec<AppliedDefault>) {
    match v {
        Value::Table(t) if !t.is_empty() => {
            for (k, sub) in t {
                record(sub, &format!("{path}.{k}"), applied);
            }
        }
        _ => applied.push(AppliedDefault {
            path: path.to_string(),
            value: v.to_string(),
        }),
    }
}

fn check_kind(kind: &str) -> Result<()> {
    let registry = GeneratorRegistry::with_builtin();
    let names = registry.names();
    if names.contains(&kind) {
        return Ok(());
    }
    let closest = names
        .iter()
        .map(|n| (strsim::jaro_winkler(kind, n), *n))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .filter(|(s, _)| *s >= 0.7);
    let hint = match closest {
        Some((_, n)) => format!("; did you mean `{n}`?"),
        None => format!("; known kinds: {}", names.join(", ")),
    };
    Err(CliError::config("geometry.kind", format!("unknown geometry kind `{kind}`{hint}")))
}

/// Fills defaults into a raw scenario document and deserializes it.
pub fn resolve(raw: &Table) -> Result<Resolved> {
    schema::check(raw)?;
    let geometry = raw["geometry"].as_table().expect("schema checked");
    let kind = geometry["kind"].as_str().expect("schema checked");
    check_kind(kind)?;

    let frequency_hz = float_or(raw, "frequency_hz", DEFAULT_FREQUENCY_HZ);
    let altitude_m = float_or(raw, "altitude_m", DEFAULT_ALTITUDE_M);
    let mut geometry_defaults = to_table(&GeometryConfig::defaults(kind, 0, frequency_hz));
    geometry_defaults.remove("n_platforms");

    let mut defaults = Table::new();
    defaults.insert("name".into(), Value::String(kind.to_string()));
    defaults.insert("frequency_hz".into(), Value::Float(frequency_hz));
    defaults.insert("altitude_m".into(), Value::Float(altitude_m));
    defaults.insert("geometry".into(), Value::Table(geometry_defaults));
    defaults.insert(
        "grid".into(),
        Value::Table(to_table(&AngularGrid::full(DEFAULT_GRID_SAMPLES))),
    );
    defaults.insert("element".into(), Value::Table(to_table(&ElementSpec::default())));
    defaults.insert("analysis".into(), Value::Table(to_table(&AnalysisConfig::default())));
    defaults.insert(
        "link".into(),
        Value::Table(to_table(&LinkConfig::defaults(altitude_m))),
    );
    defaults.insert("outputs".into(), Value::Table(to_table(&OutputConfig::default())));

    let mut doc = raw.clone();
    let mut applied = Vec::new();
    merge(&mut doc, &defaults, "", &mut applied);

    let beam_defaults = to_table(&BeamConfig::default());
    match doc.get_mut("beams").and_then(Value::as_array_mut) {
        Some(beams) if !beams.is_empty() => {
            for (i, beam) in beams.iter_mut().enumerate() {
                let t = beam.as_table_mut().expect("schema checked");
                merge(t, &beam_defaults, &format!("beams[{i}]"), &mut applied);
            }
        }
        Some(_) => return Err(CliError::config("beams", "at least one beam is required")),
        None => {
            record(&Value::Table(beam_defaults.clone()), "beams[0]", &mut applied);
            doc.insert("beams".into(), Value::Array(vec![Value::Table(beam_defaults)]));
        }
    }
    for (section, section_defaults) in [
        ("perturbation", to_table(&PerturbationConfig::default())),
        ("failure_sweep", to_table(&FailureSweepSpec::default())),
    ] {
        if let Some(Value::Table(t)) = doc.get_mut(section) {
            merge(t, &section_defaults, section, &mut applied);
        }
    }

    let config: ScenarioConfig = Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::config("", e.message().to_string()))?;
    config.validate()?;
    Ok(Resolved {
        config,
        defaults_applied: applied,
    })
}

pub fn parse_config_str(text: &str) -> Result<Resolved> {
    let raw: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::config("", format!("malformed scenario file: {e}")))?;
    resolve(&raw)
}

/// Reads the raw document of a scenario file.
pub fn read_raw(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse().map_err(|e: toml::de::Error| {
        CliError::config("", format!("{}: malformed scenario file: {e}", path.display()))
    })
}

pub fn parse_config(path: &Path) -> Result<Resolved> {
    resolve(&read_raw(path)?)
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn geometry_spec(&self) -> GeometrySpec {
        self.geometry.spec(self.frequency_hz)
    }

    pub fn beam_specs(&self) -> Vec<BeamSpec> {
        self.beams.iter().map(BeamConfig::spec).collect()
    }

    pub fn link_params(&self, n_elements: u64) -> LinkBudgetParams {
        self.link.params(self.frequency_hz, n_elements)
    }

    /// Semantic checks that do not need the generated geometry.
    pub fn validate(&self) -> Result<()> {
        let positive = |path: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(path, format!("must be positive, got {x}")))
            }
        };
        positive("frequency_hz", self.frequency_hz)?;
        positive("altitude_m", self.altitude_m)?;
        self.geometry_spec()
            .validate()
            .map_err(|e| CliError::config("geometry", e.to_string()))?;
        for (i, b) in self.beams.iter().enumerate() {
            if !(b.u * b.u + b.v * b.v <= 1.0) {
                return Err(CliError::config(
                    format!("beams[{i}]"),
                    format!("direction ({}, {}) lies outside the visible region", b.u, b.v),
                ));
            }
        }
        self.grid
            .validate()
            .map_err(|e| CliError::config("grid", e.to_string()))?;
        self.link_params(1)
            .validate()
            .map_err(|e| CliError::config("link", e.to_string()))?;
        if let Some(p) = &self.perturbation {
            p.spec()
                .validate()
                .map_err(|e| CliError::config("perturbation", e.to_string()))?;
            if p.grid_samples < 3 {
                return Err(CliError::config("perturbation.grid_samples", "must be at least 3"));
            }
        }
        if let Some(s) = &self.failure_sweep {
            if s.trials == 0 {
                return Err(CliError::config("failure_sweep.trials", "must be at least 1"));
            }
            if let Some(p) = s.fractions.iter().find(|p| !(0.0..1.0).contains(*p)) {
                return Err(CliError::config(
                    "failure_sweep.fractions",
                    format!("fractions must lie in [0, 1), got {p}"),
                ));
            }
        }
        Ok(())
    }

    /// Replaces every random seed.
    pub fn set_seed(&mut self, seed: u64) {
        if let Some(p) = &mut self.perturbation {
            p.master_seed = seed;
        }
        if let Some(s) = &mut self.failure_sweep {
            s.master_seed = seed;
        }
    }

    pub fn set_grid_samples(&mut self, n: usize) {
        self.grid.n_u = n;
        self.grid.n_v = n;
    }
}

/// Command-line settings applied on top of a parsed scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub grid_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
}

impl Overrides {
    /// Applies the overrides and describes each one.
    pub fn apply(&self, config: &mut ScenarioConfig) -> Vec<String> {
        let mut applied = Vec::new();
        if let Some(n) = self.grid_samples {
            config.set_grid_samples(n);
            applied.push(format!("grid.n_u = grid.n_v = {n}"));
        }
        if let Some(seed) = self.seed {
            config.set_seed(seed);
            applied.push(format!("master_seed = {seed}"));
        }
        if let Some(dir) = &self.out_dir {
            config.outputs.dir = dir.clone();
            applied.push(format!("outputs.dir = {dir}"));
        }
        applied
    }
}
