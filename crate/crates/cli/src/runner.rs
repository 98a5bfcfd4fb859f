//! Scenario evaluation and the artifact producers behind each subcommand.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use swarmbeam::analysis::{analyze, cochannel_ci, measure_main_lobe, PatternMetrics};
use swarmbeam::beamforming::{
    beam_weights, evaluate_pattern_with, ElementModel, ElementRegistry, Pattern, WeightVector,
};
use swarmbeam::export::{geometry_csv, pattern_csv, trials_csv, PatternSidecar};
use swarmbeam::geometry::{compute_stats, ArrayGeometry, GeneratorRegistry, GeometrySpec, GeometryStats};
use swarmbeam::linkbudget::{received_power, LinkBudgetParams, LinkBudgetResult};
use swarmbeam::perturbation::{
    failure_sweep, local_grid, monte_carlo_degradation, DegradationStats, FailureSweepSpec, SweepPoint,
};

use crate::bundle::Bundle;
use crate::config::{PerturbationConfig, ScenarioConfig};
use crate::error::{CliError, Result};

type Lazy<T> = OnceLock<std::result::Result<T, swarmbeam::Error>>;

/// A scenario with its geometry realized; patterns and metrics are computed
/// on first use.
pub struct Evaluation {
    pub config: ScenarioConfig,
    pub geometry: ArrayGeometry,
    pub stats: GeometryStats,
    element: Arc<dyn ElementModel>,
    weights: Lazy<Vec<WeightVector>>,
    patterns: Lazy<Vec<Pattern>>,
    metrics: Lazy<Vec<PatternMetrics>>,
}

fn cached<'a, T>(cell: &'a Lazy<T>, f: impl FnOnce() -> swarmbeam::Result<T>) -> Result<&'a T> {
    cell.get_or_init(f).as_ref().map_err(|e| CliError::Analysis(e.clone()))
}

impl Evaluation {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let geometry = GeneratorRegistry::with_builtin().generate(&config.geometry_spec())?;
        let stats = compute_stats(&geometry)?;
        let element = ElementRegistry::default()
            .build(&config.element)
            .map_err(|e| CliError::config("element", e.to_string()))?;
        Ok(Self {
            config,
            geometry,
            stats,
            element,
            weights: OnceLock::new(),
            patterns: OnceLock::new(),
            metrics: OnceLock::new(),
        })
    }

    pub fn weights(&self) -> Result<&[WeightVector]> {
        cached(&self.weights, || {
            self.config
                .beam_specs()
                .iter()
                .map(|b| beam_weights(&self.geometry, b))
                .collect()
        })
        .map(Vec::as_slice)
    }

    pub fn patterns(&self) -> Result<&[Pattern]> {
        let weights = self.weights()?;
        cached(&self.patterns, || {
            weights
                .iter()
                .map(|w| evaluate_pattern_with(&self.geometry, w, &self.config.grid, self.element.clone()))
                .collect()
        })
        .map(Vec::as_slice)
    }

    pub fn metrics(&self) -> Result<&[PatternMetrics]> {
        let patterns = self.patterns()?;
        cached(&self.metrics, || {
            patterns
                .iter()
                .map(|p| analyze(p, self.config.altitude_m, &self.config.analysis))
                .collect()
        })
        .map(Vec::as_slice)
    }

    pub fn link_params(&self) -> LinkBudgetParams {
        self.config.link_params(self.geometry.len() as u64)
    }

    pub fn link(&self) -> Result<LinkBudgetResult> {
        Ok(received_power(&self.link_params())?)
    }

    fn perturbation_grid(&self, p: &PerturbationConfig) -> Result<swarmbeam::beamforming::AngularGrid> {
        let lobe = measure_main_lobe(&self.patterns()?[0], &self.config.analysis)?;
        Ok(local_grid(&lobe, p.grid_samples))
    }

    pub fn degradation(&self) -> Result<Option<DegradationReport>> {
        let Some(p) = &self.config.perturbation else {
            return Ok(None);
        };
        let grid = self.perturbation_grid(p)?;
        let stats = monte_carlo_degradation(
            &self.geometry,
            &self.weights()?[0],
            &grid,
            self.element.clone(),
            &p.spec(),
            &self.config.analysis,
        )?;
        Ok(Some(DegradationReport {
            spec: p.clone(),
            grid,
            stats,
        }))
    }

    pub fn failure_sweep(&self) -> Result<Option<FailureSweepReport>> {
        let Some(s) = &self.config.failure_sweep else {
            return Ok(None);
        };
        let samples = self
            .config
            .perturbation
            .as_ref()
            .map_or(PerturbationConfig::default().grid_samples, |p| p.grid_samples);
        let lobe = measure_main_lobe(&self.patterns()?[0], &self.config.analysis)?;
        let grid = local_grid(&lobe, samples);
        let points = failure_sweep(
            &self.geometry,
            &self.weights()?[0],
            &grid,
            self.element.clone(),
            s,
            &self.config.analysis,
        )?;
        Ok(Some(FailureSweepReport {
            spec: s.clone(),
            grid,
            points,
        }))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport<'a> {
    pub spec: GeometrySpec,
    pub stats: &'a GeometryStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkReport {
    #[serde(flatten)]
    pub result: LinkBudgetResult,
    pub params: LinkBudgetParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegradationReport {
    pub spec: PerturbationConfig,
    pub grid: swarmbeam::beamforming::AngularGrid,
    pub stats: DegradationStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureSweepReport {
    pub spec: FailureSweepSpec,
    pub grid: swarmbeam::beamforming::AngularGrid,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, Serialize)]
struct CochannelReport {
    beams: Vec<(f64, f64)>,
    /// Per beam, dB; null for a beam without co-channel interference.
    ci_db: Vec<Option<f64>>,
}

/// `""` for the first beam, `_beam{i}` otherwise.
fn beam_suffix(i: usize) -> String {
    if i == 0 {
        String::new()
    } else {
        format!("_beam{i}")
    }
}

/// Produces one group of artifacts from an evaluated scenario.
pub trait ArtifactProducer: Send + Sync {
    fn name(&self) -> &'static str;
    fn produce(&self, eval: &Evaluation) -> Result<Bundle>;
}

pub struct GeometryArtifacts {
    /// Also write `geometry_stats.json`.
    pub with_stats: bool,
}

impl ArtifactProducer for GeometryArtifacts {
    fn name(&self) -> &'static str {
        "geometry"
    }

    fn produce(&self, eval: &Evaluation) -> Result<Bundle> {
        let mut b = Bundle::new();
        b.push("geometry.csv", geometry_csv(&eval.geometry));
        if self.with_stats {
            b.push_json(
                "geometry_stats.json",
                &GeometryReport {
                    spec: eval.config.geometry_spec(),
                    stats: &eval.stats,
                },
            );
        }
        Ok(b)
    }
}

pub struct PatternArtifacts;

impl ArtifactProducer for PatternArtifacts {
    fn name(&self) -> &'static str {
        "pattern"
    }

    fn produce(&self, eval: &Evaluation) -> Result<Bundle> {
        let mut b = Bundle::new();
        for (i, p) in eval.patterns()?.iter().enumerate() {
            let s = beam_suffix(i);
            if eval.config.outputs.pattern_csv {
                b.push(format!("pattern{s}.csv"), pattern_csv(p));
            }
            b.push_json(format!("pattern{s}.json"), &PatternSidecar::of(p));
        }
        Ok(b)
    }
}

pub struct MetricsArtifacts;

impl ArtifactProducer for MetricsArtifacts {
    fn name(&self) -> &'static str {
        "metrics"
    }

    fn produce(&self, eval: &Evaluation) -> Result<Bundle> {
        let mut b = Bundle::new();
        for (i, m) in eval.metrics()?.iter().enumerate() {
            b.push_json(format!("metrics{}.json", beam_suffix(i)), m);
        }
        let patterns = eval.patterns()?;
        if patterns.len() > 1 {
            let beams: Vec<(f64, f64)> = eval.config.beams.iter().map(|c| (c.u, c.v)).collect();
            let ci_db = cochannel_ci(patterns, &beams)?;
            b.push_json("cochannel.json", &CochannelReport { beams, ci_db });
        }
        Ok(b)
    }
}

pub struct LinkArtifacts;

impl ArtifactProducer for LinkArtifacts {
    fn name(&self) -> &'static str {
        "linkbudget"
    }

    fn produce(&self, eval: &Evaluation) -> Result<Bundle> {
        let mut b = Bundle::new();
        b.push_json(
            "link.json",
            &LinkReport {
                result: eval.link()?,
                params: eval.link_params(),
            },
        );
        Ok(b)
    }
}

pub struct PerturbationArtifacts {
    /// Fail when the scenario has neither a perturbation nor a failure-sweep
    /// section.
    pub require_section: bool,
}

impl ArtifactProducer for PerturbationArtifacts {
    fn name(&self) -> &'static str {
        "perturb"
    }

    fn produce(&self, eval: &Evaluation) -> Result<Bundle> {
        let c = &eval.config;
        if self.require_section && c.perturbation.is_none() && c.failure_sweep.is_none() {
            return Err(CliError::config(
                "perturbation",
                "the scenario has no [perturbation] or [failure_sweep] section",
            ));
        }
        let mut b = Bundle::new();
        if let Some(report) = eval.degradation()? {
            if c.outputs.trials_csv {
                b.push("trials.csv", trials_csv(&report.stats.records));
            }
            b.push_json("degradation.json", &report);
        }
        if let Some(report) = eval.failure_sweep()? {
            b.push_json("failure_sweep.json", &report);
        }
        Ok(b)
    }
}

/// Subcommand name → producers, in output order.
pub struct ProducerRegistry {
    commands: BTreeMap<&'static str, Vec<Box<dyn ArtifactProducer>>>,
}

impl fmt::Debug for ProducerRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProducerRegistry")
            .field("commands", &self.commands.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for ProducerRegistry {
    fn default() -> Self {
        let mut r = Self {
            commands: BTreeMap::new(),
        };
        r.register("geometry", vec![Box::new(GeometryArtifacts { with_stats: true })]);
        r.register("pattern", vec![Box::new(PatternArtifacts)]);
        r.register("metrics", vec![Box::new(MetricsArtifacts)]);
        r.register("linkbudget", vec![Box::new(LinkArtifacts)]);
        r.register(
            "perturb",
            vec![Box::new(PerturbationArtifacts {
                require_section: true,
            })],
        );
        r.register(
            "run",
            vec![
                Box::new(GeometryArtifacts { with_stats: false }),
                Box::new(PatternArtifacts),
                Box::new(MetricsArtifacts),
                Box::new(LinkArtifacts),
                Box::new(PerturbationArtifacts {
                    require_section: false,
                }),
            ],
        );
        r
    }
}

impl ProducerRegistry {
    pub fn register(&mut self, command: &'static str, producers: Vec<Box<dyn ArtifactProducer>>) {
        self.commands.insert(command, producers);
    }

    pub fn commands(&self) -> Vec<&'static str> {
        self.commands.keys().copied().collect()
    }

    pub fn produce(&self, command: &str, eval: &Evaluation) -> Result<Bundle> {
        let producers = self
            .commands
            .get(command)
            .ok_or_else(|| CliError::config("", format!("unknown command `{command}`")))?;
        let mut bundle = Bundle::new();
        for p in producers {
            log::debug!("producing {} artifacts", p.name());
            bundle.extend(p.produce(eval)?);
        }
        Ok(bundle)
    }
}

/// Full artifact bundle of one scenario: geometry CSV, pattern CSV and
/// sidecar per beam, metrics JSON per beam, link JSON, and degradation
/// results when the scenario asks for them.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Bundle> {
    let eval = Evaluation::new(config.clone())?;
    ProducerRegistry::default().produce("run", &eval)
}
