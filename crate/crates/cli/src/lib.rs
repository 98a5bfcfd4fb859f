//! Scenario-file front end for the `swarmbeam` toolkit.
//!
//! A scenario binds a layout, beams, sampling grid, link parameters and an
//! optional degradation study into one TOML file. [`config`] parses and
//! completes it, [`runner`] evaluates it into artifact bundles, [`sweep`] and
//! [`compare`] drive multi-scenario studies, and [`bundle`] writes results
//! atomically next to a digest manifest.

pub mod app;
pub mod bundle;
pub mod compare;
pub mod config;
pub mod error;
pub mod runner;
pub mod schema;
pub mod sweep;

pub use config::{parse_config, parse_config_str, Overrides, ScenarioConfig};
pub use error::{CliError, Result};
pub use runner::run_scenario;

/// The canonical classical, sparse-square and ELSA designs, in comparison
/// order.
pub const SHIPPED_CONFIGS: [(&str, &str); 3] = [
    ("classical", include_str!("../../../configs/classical.toml")),
    ("sparse_square", include_str!("../../../configs/sparse_square.toml")),
    ("elsa", include_str!("../../../configs/elsa.toml")),
];
