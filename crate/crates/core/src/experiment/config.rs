//! Scenario configuration files (TOML).
//!
//! ```toml
//! schema_version = 1
//! master_seed = 7
//!
//! [[scenario]]
//! name = "small"
//! preset = "paper-4T4R-2T2R"
//! snr_grid_db = [0, 10, 20]
//! trials = 50
//! mode = "asynchronous"     # or "synchronous"
//! method = "both"           # "ga", "exhaustive" or "both"
//!
//! [scenario.ga]             # optional overrides of the preset
//! generations = 20
//!
//! [scenario.ser]            # optional: also run the SER experiment
//! order = 16
//! symbols_per_block = 1000
//! num_blocks = 200
//! ```

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capacity::{SelectionSpec, TransmissionMode};
use crate::channel::SystemDims;
use crate::error::{Error, Result};
use crate::genetic::{GaConfig, DEFAULT_ENUMERATION_CAP};
use crate::ser::{Combining, SerVariant};

pub const SCHEMA_VERSION: u32 = 1;

pub const PRESET_4T4R_2T2R: &str = "paper-4T4R-2T2R";
pub const PRESET_8T8R_3T3R: &str = "paper-8T8R-3T3R";

/// Receivers in both reference multicast scenarios.
pub const PRESET_RECEIVERS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ga,
    Exhaustive,
    Both,
}

impl Method {
    pub fn runs_ga(self) -> bool {
        matches!(self, Method::Ga | Method::Both)
    }

    pub fn runs_exhaustive(self) -> bool {
        matches!(self, Method::Exhaustive | Method::Both)
    }
}

/// Settings of the SER experiment attached to a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SerExperiment {
    #[serde(default = "default_order")]
    pub order: usize,
    pub symbols_per_block: usize,
    pub num_blocks: usize,
    #[serde(default)]
    pub combining: Combining,
    /// Branch count of the analytic reference curve; defaults to the largest
    /// receive selection size.
    #[serde(default)]
    pub analytic_branches: Option<usize>,
    #[serde(default)]
    pub variant: SerVariant,
}

fn default_order() -> usize {
    16
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub dims: SystemDims,
    pub spec: SelectionSpec,
    pub ga: GaConfig,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub mode: TransmissionMode,
    pub method: Method,
    pub master_seed: u64,
    pub enumeration_cap: u128,
    pub ser: Option<SerExperiment>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaOverrides {
    population_size: Option<usize>,
    mating_pool_size: Option<usize>,
    generations: Option<usize>,
    mutation_prob: Option<f64>,
    crossover_prob: Option<f64>,
    priority_std: Option<f64>,
    mutation_std: Option<f64>,
    elite_count: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    preset: Option<String>,
    dims: Option<SystemDims>,
    selection: Option<SelectionSpec>,
    #[serde(default)]
    ga: GaOverrides,
    snr_grid_db: Vec<f64>,
    trials: usize,
    #[serde(default = "default_mode")]
    mode: TransmissionMode,
    #[serde(default = "default_method")]
    method: Method,
    master_seed: Option<u64>,
    enumeration_cap: Option<u64>,
    ser: Option<SerExperiment>,
}

fn default_mode() -> TransmissionMode {
    TransmissionMode::Asynchronous
}

fn default_method() -> Method {
    Method::Ga
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    #[serde(default)]
    master_seed: u64,
    #[serde(default)]
    scenario: Vec<RawScenario>,
}

/// Dimensions, selection sizes and GA settings of a named preset.
pub fn preset(name: &str) -> Option<(SystemDims, SelectionSpec, GaConfig)> {
    let (m, n, ls, lu, ga) = match name {
        PRESET_4T4R_2T2R => (4, 4, 2, 2, GaConfig::paper_4t4r_2t2r()),
        PRESET_8T8R_3T3R => (8, 8, 3, 3, GaConfig::paper_8t8r_3t3r()),
        _ => return None,
    };
    Some((
        SystemDims {
            num_tx: m,
            num_rx_per_receiver: vec![n; PRESET_RECEIVERS],
        },
        SelectionSpec::uniform(ls, lu, PRESET_RECEIVERS),
        ga,
    ))
}

fn resolve(raw: RawScenario, file_seed: u64) -> Result<Scenario> {
    let ctx = |msg: String| Error::Config(format!("scenario '{}': {msg}", raw.name));
    let base = match raw.preset.as_deref() {
        Some(p) => Some(preset(p).ok_or_else(|| {
            ctx(format!(
                "unknown preset '{p}' (known: {PRESET_4T4R_2T2R}, {PRESET_8T8R_3T3R})"
            ))
        })?),
        None => None,
    };
    let dims = raw
        .dims
        .or_else(|| base.as_ref().map(|b| b.0.clone()))
        .ok_or_else(|| ctx("missing [dims] and no preset".into()))?;
    let spec = raw
        .selection
        .or_else(|| base.as_ref().map(|b| b.1.clone()))
        .ok_or_else(|| ctx("missing [selection] and no preset".into()))?;
    let mut ga = base.map(|b| b.2).unwrap_or_default();
    let o = raw.ga;
    ga.population_size = o.population_size.unwrap_or(ga.population_size);
    ga.mating_pool_size = o.mating_pool_size.unwrap_or(ga.mating_pool_size);
    ga.generations = o.generations.unwrap_or(ga.generations);
    ga.mutation_prob = o.mutation_prob.unwrap_or(ga.mutation_prob);
    ga.crossover_prob = o.crossover_prob.unwrap_or(ga.crossover_prob);
    ga.priority_std = o.priority_std.unwrap_or(ga.priority_std);
    ga.mutation_std = o.mutation_std.unwrap_or(2.0 * ga.priority_std);
    ga.elite_count = o.elite_count.unwrap_or(ga.elite_count);

    dims.validate().map_err(|e| ctx(e.to_string()))?;
    spec.validate(&dims).map_err(|e| ctx(e.to_string()))?;
    ga.validate().map_err(|e| ctx(e.to_string()))?;
    if raw.snr_grid_db.is_empty() {
        return Err(ctx("snr_grid_db is empty".into()));
    }
    if raw.snr_grid_db.iter().any(|x| !x.is_finite()) {
        return Err(ctx("snr_grid_db has non-finite entries".into()));
    }
    if raw.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ctx("snr_grid_db must be strictly increasing".into()));
    }
    if raw.trials == 0 {
        return Err(ctx("trials must be at least 1".into()));
    }
    if let Some(ser) = &raw.ser {
        crate::ser::QamConstellation::new(ser.order).map_err(|e| ctx(e.to_string()))?;
        if ser.symbols_per_block == 0 || ser.num_blocks == 0 {
            return Err(ctx("ser.symbols_per_block and ser.num_blocks must be at least 1".into()));
        }
        if ser.analytic_branches == Some(0) {
            return Err(ctx("ser.analytic_branches must be at least 1".into()));
        }
    }
    Ok(Scenario {
        name: raw.name,
        dims,
        spec,
        ga,
        snr_grid_db: raw.snr_grid_db,
        trials: raw.trials,
        mode: raw.mode,
        method: raw.method,
        master_seed: raw.master_seed.unwrap_or(file_seed),
        enumeration_cap: raw.enumeration_cap.map_or(DEFAULT_ENUMERATION_CAP, u128::from),
        ser: raw.ser,
    })
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<Vec<Scenario>> {
    if text.trim().is_empty() {
        return Err(Error::Config("no scenarios: configuration is empty".into()));
    }
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            raw.schema_version
        )));
    }
    if raw.scenario.is_empty() {
        return Err(Error::Config("no scenarios: add at least one [[scenario]] table".into()));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.scenario.len());
    for s in raw.scenario {
        if !seen.insert(s.name.clone()) {
            return Err(Error::Config(format!("duplicate scenario name '{}'", s.name)));
        }
        out.push(resolve(s, raw.master_seed)?);
    }
    Ok(out)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Vec<Scenario>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
