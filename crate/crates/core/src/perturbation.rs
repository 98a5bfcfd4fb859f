//! Monte Carlo degradation under position jitter, phase error and platform
//! failure.
//!
//! Every trial draws from its own ChaCha8 stream selected by
//! `(master_seed, trial_index)`, so any trial can be reproduced alone and
//! results do not depend on scheduling. Per element the draws are, in order:
//! `δx, δy, δz, δφ` (standard normal) and one uniform failure draw.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{isotropic_directivity, measure_main_lobe, sidelobe_metrics, AnalysisConfig, MainLobe};
use crate::beamforming::{evaluate_pattern_with, AngularGrid, ElementModel, Pattern, WeightVector};
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSpec {
    /// Per-axis position error standard deviation, meters.
    pub sigma_pos_m: f64,
    /// Per-element phase error standard deviation, radians.
    pub sigma_phase_rad: f64,
    pub failure_prob: f64,
    pub trials: usize,
    pub master_seed: u64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            sigma_pos_m: 0.0,
            sigma_phase_rad: 0.0,
            failure_prob: 0.0,
            trials: 100,
            master_seed: 0,
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_pos_m >= 0.0 && self.sigma_pos_m.is_finite()) {
            return Err(Error::Domain(format!("sigma_pos_m must be non-negative, got {}", self.sigma_pos_m)));
        }
        if !(self.sigma_phase_rad >= 0.0 && self.sigma_phase_rad.is_finite()) {
            return Err(Error::Domain(format!(
                "sigma_phase_rad must be non-negative, got {}",
                self.sigma_phase_rad
            )));
        }
        if !(0.0..=1.0).contains(&self.failure_prob) {
            return Err(Error::Domain(format!("failure_prob must lie in [0, 1], got {}", self.failure_prob)));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Random stream for one trial.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// One perturbed realization. Steering phases are left as computed for the
/// nominal layout; out-of-plane offsets enter as the phase `k·δz·cos θ0` at
/// the steering direction; failed elements get zero amplitude.
pub fn perturb_trial(
    geom: &ArrayGeometry,
    weights: &WeightVector,
    spec: &PerturbationSpec,
    trial_index: u64,
) -> Result<(ArrayGeometry, WeightVector)> {
    spec.validate()?;
    if geom.len() != weights.len() {
        return Err(Error::Domain(format!(
            "weight vector has {} entries but the geometry has {} elements",
            weights.len(),
            geom.len()
        )));
    }
    let k = 2.0 * PI / geom.wavelength();
    let (u0, v0) = weights.steer_direction();
    let cos_theta = (1.0 - u0 * u0 - v0 * v0).max(0.0).sqrt();
    let mut rng = trial_rng(spec.master_seed, trial_index);
    let mut positions = geom.positions().to_vec();
    let mut out = weights.clone();
    let (amps, phases) = out.parts_mut();
    for n in 0..positions.len() {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        let dz: f64 = rng.sample(StandardNormal);
        let dphi: f64 = rng.sample(StandardNormal);
        let fail: f64 = rng.random();
        if spec.sigma_pos_m > 0.0 {
            positions[n][0] += spec.sigma_pos_m * dx;
            positions[n][1] += spec.sigma_pos_m * dy;
            phases[n] += k * spec.sigma_pos_m * dz * cos_theta;
        }
        if spec.sigma_phase_rad > 0.0 {
            phases[n] += spec.sigma_phase_rad * dphi;
        }
        if fail < spec.failure_prob {
            amps[n] = 0.0;
        }
    }
    let geom = if spec.sigma_pos_m > 0.0 {
        geom.with_positions(positions)
    } else {
        geom.clone()
    };
    Ok((geom, out))
}

/// Square window around the main lobe, wide enough for the half-power contour
/// and its first few sidelobes under moderate perturbation.
pub fn local_grid(lobe: &MainLobe, samples: usize) -> AngularGrid {
    let half = 8.0 * lobe.half_width_u().max(lobe.half_width_v());
    AngularGrid::around(lobe.refined_direction, half, samples)
}

/// Location and spread summary with linearly interpolated percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            mean,
            median: percentile(&sorted, 0.5),
            p5: percentile(&sorted, 0.05),
            p95: percentile(&sorted, 0.95),
        })
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let t = pos - lo as f64;
    if t == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + t * (sorted[hi] - sorted[lo])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// `20·log10(peak / nominal peak)`.
    pub peak_loss_db: f64,
    /// Relative change of the geometric-mean beamwidth `√(hpbw_u·hpbw_v)`.
    pub hpbw_rel: f64,
    /// Absent when either pattern has no exterior region on the grid.
    pub psll_delta_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationStats {
    pub trials: usize,
    pub peak_loss_db: Summary,
    pub hpbw_rel: Summary,
    pub psll_delta_db: Option<Summary>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

struct Measured {
    peak: f64,
    hpbw: f64,
    psll: Option<f64>,
}

fn measure(p: &Pattern, cfg: &AnalysisConfig) -> Result<(Measured, MainLobe)> {
    let lobe = measure_main_lobe(p, cfg)?;
    let side = sidelobe_metrics(p, &lobe, cfg)?;
    Ok((
        Measured {
            peak: lobe.peak_level,
            hpbw: (lobe.hpbw_u * lobe.hpbw_v).sqrt(),
            psll: side.psll_db,
        },
        lobe,
    ))
}

/// Collects per-trial results in trial order, surfacing the lowest-index
/// failure.
fn run_trials<T: Send>(trials: usize, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = (0..trials as u64).into_par_iter().map(&f).collect();
    results.into_iter().collect()
}

/// Evaluates `spec.trials` perturbed patterns on `grid` and summarizes their
/// degradation against the unperturbed pattern on the same grid.
pub fn monte_carlo_degradation(
    geom: &ArrayGeometry,
    weights: &WeightVector,
    grid: &AngularGrid,
    element: std::sync::Arc<dyn ElementModel>,
    spec: &PerturbationSpec,
    cfg: &AnalysisConfig,
) -> Result<DegradationStats> {
    spec.validate()?;
    let nominal = evaluate_pattern_with(geom, weights, grid, element.clone())?;
    let (base, _) = measure(&nominal, cfg)?;
    let records = run_trials(spec.trials, |t| {
        let (g, w) = perturb_trial(geom, weights, spec, t)?;
        let p = evaluate_pattern_with(&g, &w, grid, element.clone())?;
        let (m, _) = measure(&p, cfg).map_err(|e| trial_error(t, e))?;
        Ok(TrialRecord {
            trial: t,
            peak_loss_db: 20.0 * (m.peak / base.peak).log10(),
            hpbw_rel: m.hpbw / base.hpbw - 1.0,
            psll_delta_db: base.psll.zip(m.psll).map(|(b, m)| m - b),
        })
    })?;
    let loss: Vec<f64> = records.iter().map(|r| r.peak_loss_db).collect();
    let hpbw: Vec<f64> = records.iter().map(|r| r.hpbw_rel).collect();
    let psll: Vec<f64> = records.iter().filter_map(|r| r.psll_delta_db).collect();
    Ok(DegradationStats {
        trials: spec.trials,
        peak_loss_db: Summary::of(&loss).expect("at least one trial"),
        hpbw_rel: Summary::of(&hpbw).expect("at least one trial"),
        psll_delta_db: Summary::of(&psll),
        records,
    })
}

fn trial_error(trial: u64, e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Domain(format!("trial {trial}: {msg}")),
        Error::BeamTooWide(msg) => Error::BeamTooWide(format!("trial {trial}: {msg}")),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FailureSweepSpec {
    pub fractions: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

impl Default for FailureSweepSpec {
    fn default() -> Self {
        Self {
            fractions: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            trials: 100,
            master_seed: 0,
        }
    }
}

/// One point of a failure sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub fraction: f64,
    pub failed: usize,
    pub mean_peak_loss_db: f64,
    /// Mean closed-form directivity; absent for non-isotropic elements.
    pub mean_directivity_dbi: Option<f64>,
}

/// For each fraction `p`, removes exactly `round(p·N)` elements chosen
/// uniformly at random per trial and averages the peak loss (and, for
/// isotropic elements, the directivity) over the trials. Trial `t` of
/// every fraction draws from the same stream.
pub fn failure_sweep(
    geom: &ArrayGeometry,
    weights: &WeightVector,
    grid: &AngularGrid,
    element: std::sync::Arc<dyn ElementModel>,
    sweep: &FailureSweepSpec,
    cfg: &AnalysisConfig,
) -> Result<Vec<SweepPoint>> {
    let (trials, master_seed) = (sweep.trials, sweep.master_seed);
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if let Some(p) = sweep.fractions.iter().find(|p| !(0.0..1.0).contains(*p)) {
        return Err(Error::Domain(format!("failure fractions must lie in [0, 1), got {p}")));
    }
    let n = geom.len();
    let isotropic = element.name() == "isotropic";
    let nominal = evaluate_pattern_with(geom, weights, grid, element.clone())?;
    let (base, _) = measure(&nominal, cfg)?;
    sweep
        .fractions
        .iter()
        .map(|&p| {
            let failed = (p * n as f64).round() as usize;
            if failed >= n {
                return Err(Error::Domain(format!("failure fraction {p} removes every element")));
            }
            let per_trial = run_trials(trials, |t| {
                let mut rng = trial_rng(master_seed, t);
                let mut w = weights.clone();
                let (amps, _) = w.parts_mut();
                for idx in rand::seq::index::sample(&mut rng, n, failed) {
                    amps[idx] = 0.0;
                }
                let pat = evaluate_pattern_with(geom, &w, grid, element.clone())?;
                let (m, _) = measure(&pat, cfg).map_err(|e| trial_error(t, e))?;
                let d = if isotropic {
                    Some(isotropic_directivity(pat.source(), m.peak)?)
                } else {
                    None
                };
                Ok((20.0 * (m.peak / base.peak).log10(), d))
            })?;
            let mean_peak_loss_db = per_trial.iter().map(|r| r.0).sum::<f64>() / trials as f64;
            let mean_directivity_dbi = isotropic
                .then(|| per_trial.iter().map(|r| r.1.unwrap_or(f64::NAN)).sum::<f64>() / trials as f64);
            Ok(SweepPoint {
                fraction: p,
                failed,
                mean_peak_loss_db,
                mean_directivity_dbi,
            })
        })
        .collect()
}
