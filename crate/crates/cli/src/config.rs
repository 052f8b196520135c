//! Run configuration: per-subcommand settings read from a TOML file (or a
//! previous run's manifest) and overridden by command-line flags.

use std::path::{Path, PathBuf};

use satphase::eval::HttpChatConfig;
use satphase::metrics::Secondary;
use satphase::{AdapterSpec, Format, HardBand, Variant};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Which (n, α) cells `generate` draws from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSelection {
    /// The 200-cell dataset grid (60,000 formulas at 300 per α).
    Paper,
    /// One row of the full reference grid, α = 1.0 included.
    PaperRow { n: u32 },
    Custom { n: u32, alphas: Vec<f64> },
}

impl GridSelection {
    /// Parses `paper` or `n=K`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let text = text.trim();
        if text == "paper" {
            return Ok(GridSelection::Paper);
        }
        text.strip_prefix("n=")
            .and_then(|n| n.trim().parse().ok())
            .map(|n| GridSelection::PaperRow { n })
            .ok_or_else(|| CliError::Config(format!("grid {text:?} is neither \"paper\" nor \"n=K\"")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSettings {
    pub out: PathBuf,
    pub grid: GridSelection,
    pub per_alpha: usize,
    pub seed: u64,
    pub count_models: bool,
    pub hard_band: HardBand,
    /// Worker threads; absent means every core.
    pub parallelism: Option<usize>,
}

impl Default for GenerateSettings {
    fn default() -> Self {
        GenerateSettings {
            out: "dataset.jsonl".into(),
            grid: GridSelection::Paper,
            per_alpha: 300,
            seed: 0,
            count_models: true,
            hard_band: HardBand::default(),
            parallelism: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSettings {
    pub out_dir: PathBuf,
    pub n: u32,
    pub alphas: Vec<f64>,
    pub per_alpha: usize,
    pub seed: u64,
    pub secondary: Secondary,
    pub parallelism: Option<usize>,
}

impl Default for PhaseSettings {
    fn default() -> Self {
        PhaseSettings {
            out_dir: "phase".into(),
            n: 20,
            alphas: (4..=40).map(|k| f64::from(k) * 0.25).collect(),
            per_alpha: 100,
            seed: 0,
            secondary: Secondary::Decisions,
            parallelism: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodeSettings {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub format: Format,
    pub variant: Variant,
    pub shots: usize,
    pub vocab_seed: u64,
}

impl Default for EncodeSettings {
    fn default() -> Self {
        EncodeSettings {
            dataset: "dataset.jsonl".into(),
            out: "prompts.jsonl".into(),
            format: Format::SatCnf,
            variant: Variant::Decision,
            shots: 0,
            vocab_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSettings {
    pub dimacs: PathBuf,
    /// Decision budget; absent means unbounded.
    pub budget: Option<u64>,
    /// Optional JSON result file; a manifest is written next to it.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountSettings {
    /// A single DIMACS file to count.
    pub dimacs: Option<PathBuf>,
    /// A dataset whose instances get model counts attached.
    pub dataset: Option<PathBuf>,
    /// Result file (JSON for DIMACS input, a dataset for dataset input).
    pub out: Option<PathBuf>,
    pub parallelism: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSettings {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub adapter: AdapterSpec,
    pub format: Format,
    pub variant: Variant,
    pub shots: usize,
    pub parallelism: usize,
    pub vocab_seed: u64,
    /// Evaluate only the first `limit` instances of the dataset.
    pub limit: Option<usize>,
}

impl Default for EvaluateSettings {
    fn default() -> Self {
        EvaluateSettings {
            dataset: "dataset.jsonl".into(),
            out: "records.jsonl".into(),
            adapter: AdapterSpec::ScriptedOracle,
            format: Format::SatCnf,
            variant: Variant::Decision,
            shots: 0,
            parallelism: 4,
            vocab_seed: 0,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    pub dataset: PathBuf,
    pub records: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub window: usize,
}

impl Default for ReportSettings {
    fn default() -> Self {
        ReportSettings {
            dataset: "dataset.jsonl".into(),
            records: vec!["records.jsonl".into()],
            out_dir: "report".into(),
            window: 4,
        }
    }
}

/// A TOML run config: one optional table per subcommand.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: Option<u32>,
    generate: Option<toml::Value>,
    phase: Option<toml::Value>,
    encode: Option<toml::Value>,
    solve: Option<toml::Value>,
    count: Option<toml::Value>,
    evaluate: Option<toml::Value>,
    report: Option<toml::Value>,
}

/// Written next to every run's outputs. Passing it back through `--config`
/// repeats the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest<S> {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: S,
    pub outputs: Vec<String>,
}

impl<S: Serialize> Manifest<S> {
    pub fn new(command: &str, config: S, outputs: Vec<String>) -> Self {
        Manifest {
            schema_version: CONFIG_SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("settings serialize");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// Settings for `command` from `path`, or the defaults when no file is given.
/// A `.json` path is read as a manifest and must come from the same command.
pub fn load<S: DeserializeOwned + Default>(path: Option<&Path>, command: &str) -> Result<S, CliError> {
    let Some(path) = path else {
        return Ok(S::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |e: &dyn std::fmt::Display| CliError::Config(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: Manifest<serde_json::Value> = serde_json::from_str(&text).map_err(|e| bad(&e))?;
        if manifest.command != command {
            return Err(CliError::Config(format!(
                "{}: manifest of a {:?} run, not {command:?}",
                path.display(),
                manifest.command
            )));
        }
        check_version(manifest.schema_version, path)?;
        return serde_json::from_value(manifest.config).map_err(|e| bad(&e));
    }
    let file: ConfigFile = toml::from_str(&text).map_err(|e| bad(&e))?;
    if let Some(v) = file.schema_version {
        check_version(v, path)?;
    }
    let section = match command {
        "generate" => file.generate,
        "phase" => file.phase,
        "encode" => file.encode,
        "solve" => file.solve,
        "count" => file.count,
        "evaluate" => file.evaluate,
        "report" => file.report,
        _ => unreachable!("unknown subcommand {command}"),
    };
    match section {
        Some(value) => value.try_into().map_err(|e| bad(&e)),
        None => Ok(S::default()),
    }
}

fn check_version(found: u32, path: &Path) -> Result<(), CliError> {
    if found == CONFIG_SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{}: config schema version {found}, expected {CONFIG_SCHEMA_VERSION}",
            path.display()
        )))
    }
}

/// The adapter named on the command line, with its parameters. Parameters not
/// given fall back to the ones already configured for that kind of adapter.
pub fn adapter_from_flags(
    name: &str,
    current: &AdapterSpec,
    answer: Option<String>,
    p: Option<f64>,
    seed: Option<u64>,
    endpoint: Option<String>,
    model: Option<String>,
) -> Result<AdapterSpec, CliError> {
    Ok(match name {
        "scripted_oracle" => AdapterSpec::ScriptedOracle,
        "scripted_constant" => {
            let configured = match current {
                AdapterSpec::ScriptedConstant { answer } => Some(answer.clone()),
                _ => None,
            };
            AdapterSpec::ScriptedConstant {
                answer: answer.or(configured).unwrap_or_else(|| "yes".into()),
            }
        }
        "scripted_noisy" => {
            let (cp, cs) = match current {
                AdapterSpec::ScriptedNoisy { p, seed } => (Some(*p), Some(*seed)),
                _ => (None, None),
            };
            AdapterSpec::ScriptedNoisy {
                p: p.or(cp).unwrap_or(0.8),
                seed: seed.or(cs).unwrap_or(0),
            }
        }
        "http_chat" => {
            let mut cfg = match current {
                AdapterSpec::HttpChat(cfg) => cfg.clone(),
                _ => HttpChatConfig::default(),
            };
            if let Some(e) = endpoint {
                cfg.endpoint = e;
            }
            if let Some(m) = model {
                cfg.model = m;
            }
            AdapterSpec::HttpChat(cfg)
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown adapter {other:?} (expected one of {})",
                satphase::eval::builtin_adapters().join(", ")
            )))
        }
    })
}
