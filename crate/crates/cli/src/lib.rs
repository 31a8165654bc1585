//! Scenario runner for the empathy toolkit: reads a TOML scenario, dispatches
//! it to the core modules and writes deterministic CSV/JSON reports.

pub mod config;
pub mod scenarios;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use config::{Grid, LoadedConfig, ScenarioConfig};
use scenarios::{prepare, Outcome, Prepared};

pub const TOOL: &str = "empathy";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Computation(_) | CliError::Io(_) => 2,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(content).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    kind: &'a str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepEcho<'a>>,
    config: &'a toml::Table,
    files: Vec<String>,
}

#[derive(Debug, Serialize)]
struct SweepEcho<'a> {
    parameter: &'a str,
    values: &'a [f64],
}

/// Command-line overrides shared by the subcommands.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Loaded configuration with overrides applied.
#[derive(Debug, Clone)]
pub struct Session {
    pub loaded: LoadedConfig,
    pub seed: u64,
    pub out: PathBuf,
}

impl Session {
    pub fn open(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let loaded = config::load(path)?;
        let seed = overrides.seed.unwrap_or(loaded.config.seed);
        let out = match &overrides.out {
            Some(o) => o.clone(),
            None => loaded.base_dir.join(&loaded.config.output),
        };
        Ok(Self { loaded, seed, out })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.loaded.config
    }

    pub fn prepare(&self) -> Result<Prepared, CliError> {
        prepare(&self.loaded.config.scenario, &self.loaded.base_dir)
    }
}

fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<Vec<String>, CliError> {
    for (name, content) in &outcome.files {
        write_atomic(&dir.join(name), content.as_bytes())?;
    }
    Ok(outcome.files.keys().cloned().collect())
}

fn manifest_json(m: &Manifest) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(m).map_err(|e| CliError::Computation(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// Runs one scenario and writes its files plus `manifest.json`.
pub fn run(session: &Session) -> Result<Outcome, CliError> {
    let prepared = session.prepare()?;
    let outcome = prepared.execute(session.seed)?;
    let mut files = write_outcome(&session.out, &outcome)?;
    files.push("summary.txt".into());
    write_atomic(&session.out.join("summary.txt"), outcome.summary.as_bytes())?;
    let manifest = Manifest {
        tool: TOOL,
        version: VERSION,
        command: "run",
        kind: prepared.kind(),
        seed: session.seed,
        sweep: None,
        config: &session.loaded.raw,
        files,
    };
    write_atomic(&session.out.join("manifest.json"), &manifest_json(&manifest)?)?;
    Ok(outcome)
}

/// One row of the consolidated sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub metric: String,
    pub metric_value: Option<f64>,
    pub status: String,
}

fn sweep_point(session: &Session, parameter: &str, value: f64, dir: &Path) -> Result<Outcome, CliError> {
    let config = config::with_parameter(&session.loaded.raw, parameter, value)?;
    let prepared = prepare(&config.scenario, &session.loaded.base_dir)?;
    let outcome = prepared.execute(session.seed)?;
    write_outcome(dir, &outcome)?;
    Ok(outcome)
}

fn check_parameter(raw: &toml::Table, parameter: &str) -> Result<(), CliError> {
    let mut keys: Vec<&str> = parameter.split('.').collect();
    if keys.first() != Some(&"scenario") {
        keys.insert(0, "scenario");
    }
    let mut node: Option<&toml::Value> = None;
    let mut table = raw;
    for k in &keys {
        node = table.get(*k);
        match node {
            Some(toml::Value::Table(t)) => table = t,
            Some(_) => {}
            None => {
                return Err(CliError::Validation(format!(
                    "sweep parameter `{parameter}` is not set in the config; give it a base value"
                )))
            }
        }
    }
    match node {
        Some(toml::Value::Float(_) | toml::Value::Integer(_)) => Ok(()),
        _ => Err(CliError::Validation(format!("sweep parameter `{parameter}` is not a number"))),
    }
}

/// Runs one scenario per grid value in parallel, writing each point's files
/// under `points/NNNN/`, then consolidates `sweep.csv` in grid order.
pub fn sweep(session: &Session, parameter: &str, grid: &Grid) -> Result<Vec<SweepRow>, CliError> {
    check_parameter(&session.loaded.raw, parameter)?;
    // the base config must itself be valid before fanning out
    session.prepare()?;
    let values = grid.values();
    let points_dir = session.out.join("points");
    let results: Vec<Result<Outcome, CliError>> = values
        .par_iter()
        .enumerate()
        .map(|(k, &v)| sweep_point(session, parameter, v, &points_dir.join(format!("{k:04}"))))
        .collect();

    let mut rows = Vec::new();
    for (&value, result) in values.iter().zip(results) {
        match result {
            Ok(o) => rows.extend(o.metrics.into_iter().map(|(metric, v)| SweepRow {
                parameter: parameter.to_string(),
                value,
                metric,
                metric_value: Some(v),
                status: "ok".into(),
            })),
            Err(e) => rows.push(SweepRow {
                parameter: parameter.to_string(),
                value,
                metric: String::new(),
                metric_value: None,
                status: format!("error: {e}"),
            }),
        }
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Computation(e.to_string()))?;
    }
    let mut table = w.into_inner().map_err(|e| CliError::Computation(e.to_string()))?;
    if rows.is_empty() {
        table = b"parameter,value,metric,metric_value,status\n".to_vec();
    }
    write_atomic(&session.out.join("sweep.csv"), &table)?;
    let mut files = vec!["sweep.csv".to_string()];
    files.extend((0..values.len()).map(|k| format!("points/{k:04}/")));
    let manifest = Manifest {
        tool: TOOL,
        version: VERSION,
        command: "sweep",
        kind: session.config().scenario.kind(),
        seed: session.seed,
        sweep: Some(SweepEcho { parameter, values: &values }),
        config: &session.loaded.raw,
        files,
    };
    write_atomic(&session.out.join("manifest.json"), &manifest_json(&manifest)?)?;
    Ok(rows)
}

/// Checks the config without computing anything.
pub fn validate(session: &Session) -> Result<&'static str, CliError> {
    session.prepare().map(|p| p.kind())
}

/// Computes the scenario and returns its text summary without writing files.
pub fn report(session: &Session) -> Result<String, CliError> {
    Ok(session.prepare()?.execute(session.seed)?.summary)
}
