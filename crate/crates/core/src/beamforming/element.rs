use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar field pattern of a single radiator, applied to the array factor.
pub trait ElementModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Field gain at direction cosines `(u, v)`. Only called for visible points
    /// by the metrics; returns 0 outside the visible region.
    fn field(&self, u: f64, v: f64) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Isotropic;

impl ElementModel for Isotropic {
    fn name(&self) -> &'static str {
        "isotropic"
    }

    fn field(&self, _u: f64, _v: f64) -> f64 {
        1.0
    }
}

/// `cos(θ)^q` with `cos θ = √(1 − u² − v²)`.
#[derive(Debug, Clone, Copy)]
pub struct CosinePower {
    pub q: f64,
}

impl ElementModel for CosinePower {
    fn name(&self) -> &'static str {
        "cosine"
    }

    fn field(&self, u: f64, v: f64) -> f64 {
        let c2 = 1.0 - u * u - v * v;
        if c2 < 0.0 {
            0.0
        } else {
            c2.sqrt().powf(self.q)
        }
    }
}

/// Serializable element-model selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub kind: String,
    /// Exponent of the cosine model.
    #[serde(default = "default_q")]
    pub q: f64,
}

fn default_q() -> f64 {
    1.0
}

impl Default for ElementSpec {
    fn default() -> Self {
        Self {
            kind: "isotropic".into(),
            q: 1.0,
        }
    }
}

type ElementFactory = Box<dyn Fn(&ElementSpec) -> Result<Arc<dyn ElementModel>> + Send + Sync>;

/// Name → element model constructor.
pub struct ElementRegistry {
    factories: BTreeMap<String, ElementFactory>,
}

impl Default for ElementRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register("isotropic", Box::new(|_| Ok(Arc::new(Isotropic))));
        r.register(
            "cosine",
            Box::new(|spec| {
                if !(spec.q.is_finite() && spec.q >= 0.0) {
                    return Err(Error::Config(format!("cosine exponent q must be >= 0, got {}", spec.q)));
                }
                Ok(Arc::new(CosinePower { q: spec.q }))
            }),
        );
        r
    }
}

impl ElementRegistry {
    pub fn register(&mut self, kind: &str, factory: ElementFactory) {
        self.factories.insert(kind.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, spec: &ElementSpec) -> Result<Arc<dyn ElementModel>> {
        let factory = self.factories.get(&spec.kind).ok_or_else(|| {
            Error::Config(format!(
                "unknown element model `{}`; known models: {}",
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

    #[test]
    fn cosine_model() {
        let m = ElementRegistry::default()
            .build(&ElementSpec { kind: "cosine".into(), q: 2.0 })
            .unwrap();
        assert_eq!(m.field(0.0, 0.0), 1.0);
        assert!((m.field(0.6, 0.0) - 0.64).abs() < 1e-12);
        assert_eq!(m.field(1.0, 1.0), 0.0);
    }

    #[test]
    fn unknown_model() {
        let err = ElementRegistry::default()
            .build(&ElementSpec { kind: "dipole".into(), q: 1.0 })
            .unwrap_err();
        assert!(err.to_string().contains("dipole"));
    }
}
