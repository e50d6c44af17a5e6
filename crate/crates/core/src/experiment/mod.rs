//! Reproducible capacity and SER sweeps driven by scenario files.
//!
//! Seeds: every scenario owns the seed space `derive_seed(master, [hash(name)])`,
//! and every random draw inside it is keyed by `(stream, snr index, trial)`,
//! so results depend only on the configuration and never on scheduling or
//! on which other scenarios were run.

mod config;
mod output;

pub use config::{
    load_config, parse_config, preset, Method, Scenario, SerExperiment, PRESET_4T4R_2T2R, PRESET_8T8R_3T3R,
    PRESET_RECEIVERS, SCHEMA_VERSION,
};
pub use output::{emit_csv, write_manifest, CAPACITY_HEADER, SER_HEADER};

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{multicast_rate, ReceiverSubset, SnrParams, TransmissionMode};
use crate::channel::{generate_multicast, MulticastChannel};
use crate::error::{Error, Result};
use crate::genetic::{binomial, evolve_multicast, exhaustive_multicast};
use crate::rng::{derive_seed, label_hash};
use crate::ser::{average_ser, db_to_linear, simulate_link_point, LinkSimConfig, QamConstellation, SerParams};

const STREAM_CHANNEL: u64 = 0;
const STREAM_GA: u64 = 1;
const STREAM_SER_CHANNEL: u64 = 2;
const STREAM_SER_GA: u64 = 3;
const STREAM_SER_LINK: u64 = 4;

pub fn scenario_seed(s: &Scenario) -> u64 {
    derive_seed(s.master_seed, &[label_hash(&s.name)])
}

fn coord_seed(s: &Scenario, stream: u64, snr_index: usize, trial: usize) -> u64 {
    derive_seed(scenario_seed(s), &[stream, snr_index as u64, trial as u64])
}

/// Capacity evaluations an exhaustive search of this scenario needs per channel draw.
pub fn exhaustive_cost(s: &Scenario) -> u128 {
    let rx: u128 = s
        .dims
        .num_rx_per_receiver
        .iter()
        .zip(&s.spec.num_rx_selected_per_receiver)
        .map(|(&n, &l)| binomial(n, l))
        .fold(0u128, u128::saturating_add);
    binomial(s.dims.num_tx, s.spec.num_tx_selected).saturating_mul(rx)
}

fn check_exhaustive(s: &Scenario) -> Result<()> {
    let required = exhaustive_cost(s);
    if s.method.runs_exhaustive() && required > s.enumeration_cap {
        return Err(Error::EnumerationCap {
            required,
            cap: s.enumeration_cap,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Ga,
    Exhaustive,
}

impl SelectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMethod::Ga => "ga",
            SelectionMethod::Exhaustive => "exhaustive",
        }
    }
}

fn methods(m: Method) -> Vec<SelectionMethod> {
    let mut v = Vec::new();
    if m.runs_ga() {
        v.push(SelectionMethod::Ga);
    }
    if m.runs_exhaustive() {
        v.push(SelectionMethod::Exhaustive);
    }
    v
}

/// Selected subsets and per-receiver capacities for one channel draw.
fn select(
    s: &Scenario,
    method: SelectionMethod,
    channel: &MulticastChannel,
    snr: SnrParams,
    ga_seed: u64,
) -> Result<(Vec<ReceiverSubset>, Vec<f64>, u64)> {
    match method {
        SelectionMethod::Ga => {
            let cfg = s.ga.clone().with_seed(ga_seed);
            let out = evolve_multicast(channel, &s.spec, snr, &cfg, s.mode)?;
            Ok((out.subsets, out.summary.per_receiver, out.evaluations))
        }
        SelectionMethod::Exhaustive => {
            let out = exhaustive_multicast(channel, &s.spec, snr, s.mode, s.enumeration_cap)?;
            Ok((out.subsets, out.summary.per_receiver, out.evaluations))
        }
    }
}

/// One capacity value of the per-trial table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityRow {
    pub method: SelectionMethod,
    pub snr_db: f64,
    pub trial: usize,
    pub receiver: usize,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacitySummary {
    pub method: SelectionMethod,
    pub snr_db: f64,
    /// Mean over trials and receivers.
    pub mean: f64,
    pub mean_stderr: f64,
    /// Mean over trials of the worst receiver's capacity.
    pub min_rate: f64,
    pub min_rate_stderr: f64,
    pub per_receiver_mean: Vec<f64>,
}

/// GA-to-exhaustive comparison over all (trial, receiver) pairs of an SNR point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStats {
    pub snr_db: f64,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_gap: f64,
    /// Pairs where GA exceeded exhaustive by more than 1e-12.
    pub dominance_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub mode: TransmissionMode,
    pub rows: Vec<CapacityRow>,
    pub summaries: Vec<CapacitySummary>,
    pub gaps: Vec<GapStats>,
    pub ga_evaluations: u64,
    pub exhaustive_evaluations: u64,
    pub wall_clock_s: f64,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct TrialResult {
    capacities: Vec<(SelectionMethod, Vec<f64>, u64)>,
}

/// Capacity sweep: `trials` channel draws per SNR point, every requested method on each.
pub fn run_capacity_experiment(s: &Scenario) -> Result<CapacityReport> {
    check_exhaustive(s)?;
    let start = Instant::now();
    let methods = methods(s.method);
    let coords: Vec<(usize, usize)> = (0..s.snr_grid_db.len())
        .flat_map(|i| (0..s.trials).map(move |t| (i, t)))
        .collect();
    let results: Vec<TrialResult> = coords
        .par_iter()
        .map(|&(i, t)| {
            let snr = SnrParams::from_db(s.snr_grid_db[i])?;
            let channel = generate_multicast(&s.dims, None, coord_seed(s, STREAM_CHANNEL, i, t))?;
            let capacities = methods
                .iter()
                .map(|&m| {
                    let (_, caps, evals) = select(s, m, &channel, snr, coord_seed(s, STREAM_GA, i, t))?;
                    Ok((m, caps, evals))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrialResult { capacities })
        })
        .collect::<Result<_>>()?;

    let receivers = s.dims.num_receivers();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut gaps = Vec::new();
    let (mut ga_evals, mut ex_evals) = (0u64, 0u64);
    for (i, &snr_db) in s.snr_grid_db.iter().enumerate() {
        let point = &results[i * s.trials..(i + 1) * s.trials];
        for (k, &m) in methods.iter().enumerate() {
            let mut all = Vec::new();
            let mut mins = Vec::new();
            let mut per_rx = vec![0.0; receivers];
            for (t, tr) in point.iter().enumerate() {
                let (_, caps, evals) = &tr.capacities[k];
                match m {
                    SelectionMethod::Ga => ga_evals += evals,
                    SelectionMethod::Exhaustive => ex_evals += evals,
                }
                for (r, &c) in caps.iter().enumerate() {
                    rows.push(CapacityRow {
                        method: m,
                        snr_db,
                        trial: t,
                        receiver: r,
                        capacity: c,
                    });
                    per_rx[r] += c / s.trials as f64;
                }
                all.extend_from_slice(caps);
                mins.push(multicast_rate(caps, s.mode)?.min);
            }
            let (mean, mean_stderr) = mean_and_stderr(&all);
            let (min_rate, min_rate_stderr) = mean_and_stderr(&mins);
            summaries.push(CapacitySummary {
                method: m,
                snr_db,
                mean,
                mean_stderr,
                min_rate,
                min_rate_stderr,
                per_receiver_mean: per_rx,
            });
        }
        if methods.len() == 2 {
            let mut ratios = Vec::new();
            let mut max_gap = f64::NEG_INFINITY;
            let mut violations = 0;
            for tr in point {
                for (&g, &e) in tr.capacities[0].1.iter().zip(&tr.capacities[1].1) {
                    if g > e + 1e-12 {
                        violations += 1;
                    }
                    max_gap = max_gap.max(e - g);
                    ratios.push(if e > 0.0 { g / e } else { 1.0 });
                }
            }
            gaps.push(GapStats {
                snr_db,
                mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
                min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                max_gap,
                dominance_violations: violations,
            });
        }
    }
    Ok(CapacityReport {
        mode: s.mode,
        rows,
        summaries,
        gaps,
        ga_evaluations: ga_evals,
        exhaustive_evaluations: ex_evals,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerRow {
    /// `ga`, `exhaustive` or `analytic`.
    pub method: String,
    pub snr_db: f64,
    pub symbols: u64,
    pub errors: u64,
    pub ser: f64,
    pub ci_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerReport {
    pub rows: Vec<SerRow>,
    pub analytic_branches: usize,
    pub wall_clock_s: f64,
}

/// SER sweep. At each SNR point (average SNR per receive antenna) the link
/// sees `link.num_blocks` independent channel blocks; on every block the
/// antennas are selected afresh and `link.symbols_per_block` symbols are sent
/// to every receiver. Counts are pooled over receivers and blocks. An
/// analytic reference row per point uses `analytic_branches` Erlang branches.
pub fn run_ser_experiment(
    s: &Scenario,
    link: &LinkSimConfig,
    k: usize,
    analytic: Option<&SerParams>,
) -> Result<SerReport> {
    check_exhaustive(s)?;
    link.validate()?;
    let start = Instant::now();
    let qam = QamConstellation::new(k)?;
    let methods = methods(s.method);
    let mut rows = Vec::new();
    let default_branches = s.spec.num_rx_selected_per_receiver.iter().copied().max().unwrap_or(1);
    for (i, &snr_db) in s.snr_grid_db.iter().enumerate() {
        let snr = SnrParams::from_db(snr_db)?;
        let noise_variance = 1.0 / db_to_linear(snr_db);
        for &m in &methods {
            let counts = (0..link.num_blocks)
                .into_par_iter()
                .map(|b| {
                    let channel = generate_multicast(&s.dims, None, coord_seed(s, STREAM_SER_CHANNEL, i, b))?;
                    let (subsets, _, _) = select(s, m, &channel, snr, coord_seed(s, STREAM_SER_GA, i, b))?;
                    let block_cfg = LinkSimConfig {
                        num_blocks: 1,
                        seed: coord_seed(s, STREAM_SER_LINK, i, b),
                        ..link.clone()
                    };
                    let per_rx = simulate_link_point(&channel, &subsets, &block_cfg, &qam, noise_variance)?;
                    Ok(per_rx.into_iter().sum())
                })
                .collect::<Result<Vec<crate::ser::ErrorCount>>>()?
                .into_iter()
                .sum::<crate::ser::ErrorCount>();
            rows.push(SerRow {
                method: m.as_str().to_string(),
                snr_db,
                symbols: counts.symbols,
                errors: counts.errors,
                ser: counts.ser(),
                ci_halfwidth: counts.ci_halfwidth(),
            });
        }
        let params = SerParams {
            mean_branch_snr: db_to_linear(snr_db),
            ..analytic.cloned().unwrap_or(SerParams {
                branches: default_branches,
                mean_branch_snr: 1.0,
                symbol_snr_grid: vec![],
                variant: Default::default(),
            })
        };
        rows.push(SerRow {
            method: "analytic".into(),
            snr_db,
            symbols: 0,
            errors: 0,
            ser: average_ser(&params, k)?,
            ci_halfwidth: 0.0,
        });
    }
    Ok(SerReport {
        rows,
        analytic_branches: analytic.map_or(default_branches, |p| p.branches),
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub capacity: Option<CapacityReport>,
    pub ser: Option<SerReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenarios: Vec<ScenarioReport>,
}

/// Capacity experiment for every scenario, plus SER where configured.
pub fn run_scenarios(scenarios: &[Scenario]) -> Result<RunReport> {
    let mut out = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        let capacity = Some(run_capacity_experiment(s)?);
        let ser = match &s.ser {
            Some(cfg) => {
                let link = LinkSimConfig {
                    symbols_per_block: cfg.symbols_per_block,
                    num_blocks: cfg.num_blocks,
                    combining: cfg.combining,
                    seed: 0,
                };
                let analytic = SerParams {
                    branches: cfg
                        .analytic_branches
                        .unwrap_or_else(|| s.spec.num_rx_selected_per_receiver.iter().copied().max().unwrap_or(1)),
                    mean_branch_snr: 1.0,
                    symbol_snr_grid: vec![],
                    variant: cfg.variant,
                };
                Some(run_ser_experiment(s, &link, cfg.order, Some(&analytic))?)
            }
            None => None,
        };
        out.push(ScenarioReport {
            scenario: s.clone(),
            capacity,
            ser,
        });
    }
    Ok(RunReport { scenarios: out })
}

#[cfg(test)]
mod tests;
