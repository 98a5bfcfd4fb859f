//! Radial amplitude windows.
//!
//! Windows are functions of the normalized centroid distance `ρ ∈ [0, 1]`
//! rather than separable x/y windows, so the same window applies to lattices
//! and to spirals that have no lattice axes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitude window over normalized radius `ρ ∈ [0, 1]`; `amplitude(0) = 1`.
pub trait RadialWindow: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn amplitude(&self, rho: f64) -> f64;
}

/// Serializable taper selection. Parameters are window-specific:
///
/// * `uniform`: none
/// * `radial-hann`: `pedestal` (edge amplitude, default 0.02)
/// * `radial-hamming`: `alpha` (default 0.54, edge amplitude `2α − 1`)
/// * `radial-taylor-approx`: `sll_db` (design sidelobe level in dB below
///   the peak, default 30), `nbar` (default 4)
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaperSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl TaperSpec {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn uniform() -> Self {
        Self::new("uniform")
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn check_params(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!(
                "taper `{}` has no parameter `{k}` (allowed: {})",
                self.kind,
                if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
            ))),
            None => Ok(()),
        }
    }
}

impl Default for TaperSpec {
    fn default() -> Self {
        Self::uniform()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Uniform;

impl RadialWindow for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn amplitude(&self, _rho: f64) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RadialHann {
    pub pedestal: f64,
}

impl RadialWindow for RadialHann {
    fn name(&self) -> &'static str {
        "radial-hann"
    }

    fn amplitude(&self, rho: f64) -> f64 {
        self.pedestal + (1.0 - self.pedestal) * 0.5 * (1.0 + (PI * rho).cos())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RadialHamming {
    pub alpha: f64,
}

impl RadialWindow for RadialHamming {
    fn name(&self) -> &'static str {
        "radial-hamming"
    }

    fn amplitude(&self, rho: f64) -> f64 {
        self.alpha + (1.0 - self.alpha) * (PI * rho).cos()
    }
}

/// Line-source Taylor n̄ distribution evaluated along the radius
/// (center at ρ = 0, aperture edge at ρ = 1) and renormalized to 1 at the
/// center.
#[derive(Debug, Clone)]
pub struct RadialTaylor {
    coefficients: Vec<f64>,
    center: f64,
}

impl RadialTaylor {
    pub fn new(sll_db: f64, nbar: usize) -> Result<Self> {
        if !(sll_db.is_finite() && sll_db > 13.26) {
            return Err(Error::Config(format!(
                "taylor sll_db must exceed 13.26 dB (uniform sidelobe level), got {sll_db}"
            )));
        }
        if nbar < 2 {
            return Err(Error::Config(format!("taylor nbar must be at least 2, got {nbar}")));
        }
        let r = 10f64.powf(sll_db / 20.0);
        let a = r.acosh() / PI;
        let nb = nbar as f64;
        let sigma2 = nb * nb / (a * a + (nb - 0.5) * (nb - 0.5));
        let coefficients: Vec<f64> = (1..nbar)
            .map(|m| {
                let mf = m as f64;
                let num: f64 = (1..nbar)
                    .map(|n| {
                        let nf = n as f64;
                        1.0 - mf * mf / (sigma2 * (a * a + (nf - 0.5) * (nf - 0.5)))
                    })
                    .product();
                let den: f64 = (1..nbar)
                    .filter(|&n| n != m)
                    .map(|n| 1.0 - mf * mf / (n as f64 * n as f64))
                    .product();
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                sign * num / (2.0 * den)
            })
            .collect();
        let mut taper = Self {
            coefficients,
            center: 1.0,
        };
        taper.center = taper.raw(0.0);
        Ok(taper)
    }

    fn raw(&self, rho: f64) -> f64 {
        // aperture coordinate x ∈ [0, 1/2] from center to edge
        let x = rho / 2.0;
        1.0 + 2.0
            * self
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, f)| f * (2.0 * PI * (k + 1) as f64 * x).cos())
                .sum::<f64>()
    }
}

impl RadialWindow for RadialTaylor {
    fn name(&self) -> &'static str {
        "radial-taylor-approx"
    }

    fn amplitude(&self, rho: f64) -> f64 {
        self.raw(rho) / self.center
    }
}

type TaperFactory = Box<dyn Fn(&TaperSpec) -> Result<Box<dyn RadialWindow>> + Send + Sync>;

/// Name → window constructor.
pub struct TaperRegistry {
    factories: BTreeMap<String, TaperFactory>,
}

impl fmt::Debug for TaperRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaperRegistry")
            .field("kinds", &self.names())
            .finish()
    }
}

impl Default for TaperRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register(
            "uniform",
            Box::new(|spec| {
                spec.check_params(&[])?;
                Ok(Box::new(Uniform))
            }),
        );
        r.register(
            "radial-hann",
            Box::new(|spec| {
                spec.check_params(&["pedestal"])?;
                let pedestal = spec.param("pedestal", 0.02);
                if !(pedestal > 0.0 && pedestal <= 1.0) {
                    return Err(Error::Config(format!("hann pedestal must lie in (0, 1], got {pedestal}")));
                }
                Ok(Box::new(RadialHann { pedestal }))
            }),
        );
        r.register(
            "radial-hamming",
            Box::new(|spec| {
                spec.check_params(&["alpha"])?;
                let alpha = spec.param("alpha", 0.54);
                if !(alpha > 0.5 && alpha <= 1.0) {
                    return Err(Error::Config(format!("hamming alpha must lie in (0.5, 1], got {alpha}")));
                }
                Ok(Box::new(RadialHamming { alpha }))
            }),
        );
        r.register(
            "radial-taylor-approx",
            Box::new(|spec| {
                spec.check_params(&["sll_db", "nbar"])?;
                let nbar = spec.param("nbar", 4.0);
                if nbar.fract() != 0.0 || nbar < 0.0 {
                    return Err(Error::Config(format!("taylor nbar must be an integer, got {nbar}")));
                }
                Ok(Box::new(RadialTaylor::new(spec.param("sll_db", 30.0), nbar as usize)?))
            }),
        );
        r
    }
}

impl TaperRegistry {
    pub fn register(&mut self, kind: &str, factory: TaperFactory) {
        self.factories.insert(kind.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, spec: &TaperSpec) -> Result<Box<dyn RadialWindow>> {
        let factory = self.factories.get(&spec.kind).ok_or_else(|| {
            Error::Config(format!(
                "unknown taper `{}`; known tapers: {}",
                spec.kind,
                self.names().join(", ")
            ))
        })?;
        factory(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(spec: TaperSpec) -> Box<dyn RadialWindow> {
        TaperRegistry::default().build(&spec).unwrap()
    }

    #[test]
    fn hamming_endpoint() {
        let w = build(TaperSpec::new("radial-hamming"));
        assert_eq!(w.amplitude(0.0), 1.0);
        assert!((w.amplitude(1.0) - 0.08).abs() < 1e-15);
    }

    #[test]
    fn all_builtin_windows_in_unit_interval() {
        for kind in TaperRegistry::default().names() {
            let w = build(TaperSpec::new(kind));
            assert!((w.amplitude(0.0) - 1.0).abs() < 1e-12, "{kind}");
            for k in 0..=200 {
                let a = w.amplitude(k as f64 / 200.0);
                assert!(a > 0.0 && a <= 1.0 + 1e-12, "{kind} at {k}: {a}");
            }
        }
    }

    #[test]
    fn taylor_coefficients_match_scipy() {
        // 30 dB, n̄ = 4; values from scipy.signal.windows.taylor(norm=False)
        let t = RadialTaylor::new(30.0, 4).unwrap();
        let expected = [0.292_656_011_017_155, -0.015_783_750_641_053, 0.002_181_039_312_820];
        for (c, e) in t.coefficients.iter().zip(expected) {
            assert!((c - e).abs() < 1e-12, "{c} vs {e}");
        }
        assert!((t.center - 1.558_106_599_377_844).abs() < 1e-12);
        // edge: (1 + 2·Σ F_m·cos(πm)) / center
        let edge = t.amplitude(1.0);
        assert!((edge - 0.243_088_886_350_384).abs() < 1e-12, "{edge}");
    }

    #[test]
    fn rejects_unknown_params_and_kinds() {
        let reg = TaperRegistry::default();
        assert!(reg.build(&TaperSpec::new("radial-hamming").with_param("beta", 1.0)).is_err());
        assert!(reg.build(&TaperSpec::new("kaiser")).is_err());
        assert!(reg.build(&TaperSpec::new("radial-taylor-approx").with_param("sll_db", 10.0)).is_err());
    }
}
