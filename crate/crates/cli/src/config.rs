//! Scenario configuration files.

use std::path::{Path, PathBuf};

use empathy_core::auction::CostDistribution;
use empathy_core::empathy::{EmpathyMatrix, Neighbors};
use empathy_core::empathy_data::ReportOptions;
use empathy_core::energy::LinearPrice;
use empathy_core::lq_game::Noise;
use empathy_core::matrix_games::ForwardingParams;
use empathy_core::measure_dp::TabularGame;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Parameter values given either as a list or as an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { points: 0, .. } => Vec::new(),
            Grid::Range { start, points: 1, .. } => vec![*start],
            Grid::Range { start, stop, points } => (0..*points)
                .map(|k| start + (stop - start) * k as f64 / (*points - 1) as f64)
                .collect(),
        }
    }

    /// Parses `a,b,c` or `start:stop:points`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Grid::List(Vec::new()));
        }
        let bad = |what: &str| CliError::Validation(format!("--grid: cannot parse `{what}`"));
        if let [a, b, n] = s.split(':').collect::<Vec<_>>()[..] {
            return Ok(Grid::Range {
                start: a.trim().parse().map_err(|_| bad(a))?,
                stop: b.trim().parse().map_err(|_| bad(b))?,
                points: n.trim().parse().map_err(|_| bad(n))?,
            });
        }
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad(v)))
            .collect::<Result<_, _>>()
            .map(Grid::List)
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Collision(CollisionScenario),
    Forwarding(ForwardingScenario),
    Auction(AuctionScenario),
    Energy(EnergyScenario),
    Lq(LqScenario),
    MeasureDp(MeasureDpScenario),
    Iri(IriScenario),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Collision(_) => "collision",
            Scenario::Forwarding(_) => "forwarding",
            Scenario::Auction(_) => "auction",
            Scenario::Energy(_) => "energy",
            Scenario::Lq(_) => "lq",
            Scenario::MeasureDp(_) => "measure_dp",
            Scenario::Iri(_) => "iri",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionScenario {
    pub p1: f64,
    pub p2: f64,
    /// Symmetric altruism levels.
    pub lambdas: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardingScenario {
    /// Critical number of forwarders `m*`.
    pub threshold: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub success: Vec<f64>,
    /// Uniform empathy; ignored when `empathy` is given.
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub empathy: Option<EmpathyMatrix>,
    #[serde(default)]
    pub reciprocity: Option<EmpathyMatrix>,
    #[serde(default)]
    pub neighbors: Neighbors,
    /// Profiles to audit such as `"F,F,nF"`; every profile when empty.
    #[serde(default)]
    pub profiles: Vec<String>,
    /// Per-hop success probabilities for Monte-Carlo payoffs.
    #[serde(default)]
    pub hops: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Two-player forwarding game classified over a lambda grid.
    #[serde(default)]
    pub pair: Option<PairForwarding>,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairForwarding {
    #[serde(flatten)]
    pub game: ForwardingParams,
    pub lambdas1: Grid,
    pub lambdas2: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionScenario {
    pub distribution: CostDistribution,
    pub costs: Grid,
    pub lambdas: Grid,
    /// Lambda reported by `sweep` metrics.
    #[serde(default)]
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyScenario {
    pub satisfaction: Vec<f64>,
    pub price: LinearPrice,
    /// Lambda of the single-instance solve and of `sweep` metrics.
    #[serde(default)]
    pub lambda: f64,
    /// Lambdas compared over the day.
    #[serde(default)]
    pub lambdas: Option<Grid>,
    #[serde(default = "default_hours")]
    pub hours: usize,
    #[serde(default)]
    pub tol: Option<f64>,
}

fn default_hours() -> usize {
    24
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqScenario {
    pub horizon: usize,
    pub alpha: f64,
    pub alpha_bar: f64,
    pub gains: Vec<f64>,
    pub sigma: f64,
    /// Per-player state weight, constant in time.
    pub q: Vec<f64>,
    pub q_bar: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub empathy: Option<EmpathyMatrix>,
    pub mean0: f64,
    pub var0: f64,
    /// Monte-Carlo paths; no simulation when zero.
    #[serde(default)]
    pub paths: usize,
    #[serde(default)]
    pub noise: Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDpScenario {
    pub game: TabularGame,
    pub initial: Vec<f64>,
    #[serde(default)]
    pub resolution: Option<u32>,
    #[serde(default = "default_mix_step")]
    pub mix_step: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Starting rule of each player, `[player][state][action]`.
    #[serde(default)]
    pub start: Option<Vec<Vec<Vec<f64>>>>,
    /// Also run the grid-halving self check.
    #[serde(default)]
    pub resolution_check: bool,
}

fn default_mix_step() -> f64 {
    0.1
}

fn default_max_iter() -> usize {
    50
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IriScenario {
    /// Cohort CSV, relative to the config file. The bundled published
    /// aggregates are reported when absent.
    #[serde(default)]
    pub records: Option<PathBuf>,
    #[serde(default)]
    pub aggregates: Option<PathBuf>,
    #[serde(default)]
    pub options: Option<ReportOptions>,
}

/// Parsed config plus the raw table, kept for sweeps and the manifest.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub raw: toml::Table,
    pub base_dir: PathBuf,
}

pub fn parse_table(raw: toml::Table) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::deserialize(toml::Value::Table(raw)).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let raw: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Validation(format!("{}: {e}", path.display())))?;
    let config = parse_table(raw.clone())?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, raw, base_dir })
}

/// Sets `scenario.<dotted>` in the raw table and re-parses.
pub fn with_parameter(raw: &toml::Table, dotted: &str, value: f64) -> Result<ScenarioConfig, CliError> {
    let mut raw = raw.clone();
    let mut keys: Vec<&str> = dotted.split('.').collect();
    if keys.first() != Some(&"scenario") {
        keys.insert(0, "scenario");
    }
    let (last, parents) = keys.split_last().expect("non-empty key path");
    let mut table = &mut raw;
    for k in parents {
        table = table
            .get_mut(*k)
            .and_then(toml::Value::as_table_mut)
            .ok_or_else(|| CliError::Validation(format!("sweep parameter `{dotted}`: no table `{k}`")))?;
    }
    // integers stay integers so count-like fields still parse
    let v = match table.get(*last) {
        Some(toml::Value::Integer(_)) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
        _ => toml::Value::Float(value),
    };
    table.insert(last.to_string(), v);
    parse_table(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(Grid::parse("0:1:3").unwrap().values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Grid::parse("0.1, 0.2").unwrap().values(), vec![0.1, 0.2]);
        assert!(Grid::parse("").unwrap().values().is_empty());
        assert!(Grid::parse("a,b").is_err());
    }

    #[test]
    fn missing_field_is_named() {
        let raw: toml::Table = "[scenario]\nkind = \"forwarding\"\nalpha = 0.6\ngamma = 0.3\nsuccess = [0.5, 0.5, 0.5]\n"
            .parse()
            .unwrap();
        match parse_table(raw) {
            Err(CliError::Validation(msg)) => assert!(msg.contains("threshold"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parameters_are_overridden() {
        let raw: toml::Table = "[scenario]\nkind = \"collision\"\np1 = 0.8\np2 = 0.6\nlambdas = [0.0]\n".parse().unwrap();
        let c = with_parameter(&raw, "p2", 0.3).unwrap();
        match c.scenario {
            Scenario::Collision(s) => assert_eq!(s.p2, 0.3),
            _ => unreachable!(),
        }
        assert!(with_parameter(&raw, "nested.x", 1.0).is_err());
    }
}
