//! Command-line surface: argument parsing and command dispatch.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bundle::{write_bundle, Bundle, RunInfo};
use crate::compare::{compare_designs, comparison_csv};
use crate::config::{parse_config_str, read_raw, resolve, GeometryConfig, Overrides, Resolved, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::runner::{Evaluation, ProducerRegistry};
use crate::schema::FIELDS;
use crate::sweep::sweep;
use crate::SHIPPED_CONFIGS;

#[derive(Debug, Parser)]
#[command(name = "swarmbeam", version, about = "Design and analysis of satellite-swarm phased arrays")]
pub struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Samples per axis of the pattern grid.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Master seed for every Monte Carlo study.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print the scenario with all defaults filled in and exit.
    #[arg(long)]
    pub print_defaults: bool,
    /// Print the scenario key reference as JSON and exit.
    #[arg(long)]
    pub print_schema: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Element positions and layout statistics.
    Geometry,
    /// Array-factor pattern CSV and sidecar per beam.
    Pattern,
    /// Beam metrics per beam.
    Metrics,
    /// Downlink budget.
    Linkbudget,
    /// Monte Carlo degradation and failure sweep.
    Perturb,
    /// Re-run the scenario for each value of one numeric key.
    Sweep {
        /// Dotted key path, e.g. `geometry.n_platforms`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// Tabulate several designs side by side; defaults to the shipped
    /// classical, sparse-square and ELSA scenarios.
    Compare { configs: Vec<PathBuf> },
    /// Every artifact of the scenario.
    Run,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::Pattern => "pattern",
            Command::Metrics => "metrics",
            Command::Linkbudget => "linkbudget",
            Command::Perturb => "perturb",
            Command::Sweep { .. } => "sweep",
            Command::Compare { .. } => "compare",
            Command::Run => "run",
        }
    }
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            grid_samples: self.grid,
            seed: self.seed,
            out_dir: self.out.as_ref().map(|p| p.display().to_string()),
        }
    }

    fn config_path(&self) -> Result<&Path> {
        self.config
            .as_deref()
            .ok_or_else(|| CliError::config("--config", "this command needs a scenario file"))
    }

    fn load(&self) -> Result<(Resolved, Vec<String>)> {
        let mut resolved = resolve(&read_raw(self.config_path()?)?)?;
        let applied = self.overrides().apply(&mut resolved.config);
        resolved.config.validate()?;
        Ok((resolved, applied))
    }
}

/// Runs the parsed command line and returns what goes to stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    match cli.threads {
        Some(0) => Err(CliError::config("--threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("--threads", e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<String> {
    if cli.print_schema {
        return Ok(serde_json::to_string_pretty(FIELDS).expect("schema serializes") + "\n");
    }
    if cli.print_defaults {
        return match &cli.config {
            Some(_) => Ok(cli.load()?.0.config.to_toml()),
            None => Ok(defaults_document()),
        };
    }
    let Some(command) = &cli.command else {
        return Err(CliError::config("", "no command given; see --help"));
    };
    let (bundle, dir, info) = match command {
        Command::Sweep { param, values } => {
            let raw = read_raw(cli.config_path()?)?;
            let resolved = resolve(&raw)?;
            let csv = sweep(&raw, param, values, &cli.overrides())?;
            let mut b = Bundle::new();
            b.push("sweep.csv", csv);
            let info = RunInfo {
                command: format!("sweep {param}"),
                defaults_applied: resolved.defaults_applied,
                overrides: cli.overrides().apply(&mut resolved.config.clone()),
            };
            (b, out_dir(cli, &resolved.config), info)
        }
        Command::Compare { configs } => {
            let mut resolved = Vec::new();
            if configs.is_empty() {
                for (_, text) in SHIPPED_CONFIGS {
                    resolved.push(parse_config_str(text)?);
                }
            } else {
                for path in configs {
                    resolved.push(resolve(&read_raw(path)?)?);
                }
            }
            let mut overrides = Vec::new();
            for r in &mut resolved {
                overrides = cli.overrides().apply(&mut r.config);
            }
            let designs: Vec<ScenarioConfig> = resolved.iter().map(|r| r.config.clone()).collect();
            let table = compare_designs(&designs)?;
            let mut b = Bundle::new();
            b.push("compare.csv", comparison_csv(&table));
            b.push_json("compare.json", &table);
            let info = RunInfo {
                command: "compare".into(),
                defaults_applied: resolved
                    .into_iter()
                    .flat_map(|r| {
                        let name = r.config.name.clone();
                        r.defaults_applied.into_iter().map(move |mut d| {
                            d.path = format!("{name}:{}", d.path);
                            d
                        })
                    })
                    .collect(),
                overrides,
            };
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            (b, dir, info)
        }
        other => {
            let (resolved, overrides) = cli.load()?;
            let dir = out_dir(cli, &resolved.config);
            let eval = Evaluation::new(resolved.config)?;
            let b = ProducerRegistry::default().produce(other.name(), &eval)?;
            let info = RunInfo {
                command: other.name().into(),
                defaults_applied: resolved.defaults_applied,
                overrides,
            };
            (b, dir, info)
        }
    };
    let (_, manifest) = write_bundle(&dir, &bundle, &info)?;
    Ok(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")
}

fn out_dir(cli: &Cli, config: &ScenarioConfig) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.outputs.dir))
}

/// Reference document for `--print-defaults` without a scenario file.
pub fn defaults_document() -> String {
    let mut out = String::from(
        "# Defaults filled into absent keys. [geometry] needs `kind` and `n_platforms`;\n\
         # its other keys default per kind at the configured frequency_hz (2 GHz shown):\n#\n",
    );
    for kind in ["rectangular-lattice", "sparse-square", "sunflower", "elsa"] {
        let g = GeometryConfig::defaults(kind, 1, crate::config::DEFAULT_FREQUENCY_HZ);
        let mut t = toml::Table::try_from(&g).expect("geometry serializes");
        t.remove("kind");
        t.remove("n_platforms");
        let body: Vec<String> = t.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        out.push_str(&format!("# {kind}: {}\n", body.join(", ")));
    }
    out.push_str(
        "#\n# [[beams]] defaults to one broadside beam; link.distance_m defaults to altitude_m;\n\
         # [perturbation] and [failure_sweep] are optional and completed as shown when present.\n\n",
    );
    let mut c = parse_config_str("[geometry]\nkind = \"sunflower\"\nn_platforms = 1\n")
        .expect("minimal scenario parses")
        .config;
    c.name = String::new();
    c.perturbation = Some(Default::default());
    c.failure_sweep = Some(Default::default());
    let mut doc = toml::Table::try_from(&c).expect("scenario serializes");
    doc.remove("name");
    doc.remove("geometry");
    out.push_str(&toml::to_string(&doc).expect("table serializes"));
    out
}
