//! Monte Carlo link simulation: QAM over the selected antennas, receive
//! combining, minimum-distance detection.
//!
//! Every selected transmit antenna radiates the same symbol with energy
//! `1/L_s`, so receive antenna `n` sees the scalar gain
//! `g_n = Σ_{m ∈ tx} h[n, m] / √L_s` and the total transmit energy per
//! symbol is 1. Noise is CN(0, σ²) per receive antenna, so `1/σ²` is the
//! average SNR per symbol per receive antenna.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{db_to_linear, QamConstellation, SerCurve, SerMethod, SerPoint};
use crate::capacity::{extract_submatrix, ReceiverSubset};
use crate::channel::{complex_gaussian, ChannelRealization, MulticastChannel};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combining {
    /// Keep the branch with the largest instantaneous SNR.
    #[default]
    Selection,
    /// Maximal-ratio combining over all selected branches.
    Mrc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSimConfig {
    pub symbols_per_block: usize,
    pub num_blocks: usize,
    #[serde(default)]
    pub combining: Combining,
    #[serde(default)]
    pub seed: u64,
}

impl LinkSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.symbols_per_block == 0 || self.num_blocks == 0 {
            return Err(Error::domain("symbols_per_block and num_blocks must be at least 1"));
        }
        Ok(())
    }

    pub fn total_symbols(&self) -> u64 {
        self.symbols_per_block as u64 * self.num_blocks as u64
    }
}

/// Exact symbol and error counts; merging is integer addition, so parallel
/// accumulation order never changes a result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCount {
    pub symbols: u64,
    pub errors: u64,
}

impl ErrorCount {
    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.errors as f64 / self.symbols as f64
        }
    }

    /// Three binomial standard errors of the SER estimate.
    pub fn ci_halfwidth(&self) -> f64 {
        if self.symbols == 0 {
            return 0.0;
        }
        let p = self.ser();
        3.0 * (p * (1.0 - p) / self.symbols as f64).sqrt()
    }
}

impl std::ops::Add for ErrorCount {
    type Output = ErrorCount;
    fn add(self, o: ErrorCount) -> ErrorCount {
        ErrorCount {
            symbols: self.symbols + o.symbols,
            errors: self.errors + o.errors,
        }
    }
}

impl std::iter::Sum for ErrorCount {
    fn sum<I: Iterator<Item = ErrorCount>>(iter: I) -> Self {
        iter.fold(ErrorCount::default(), |a, b| a + b)
    }
}

/// Scalar gain seen by each selected receive antenna.
pub fn effective_gains(h: &ChannelRealization, sub: &ReceiverSubset) -> Result<Vec<Complex64>> {
    let m = extract_submatrix(h, &sub.rx_indices, &sub.tx_indices)?;
    if m.ncols() == 0 {
        return Err(Error::domain("no transmit antenna selected"));
    }
    let norm = 1.0 / (m.ncols() as f64).sqrt();
    Ok(m.row_iter().map(|row| row.iter().sum::<Complex64>() * norm).collect())
}

fn combine(gains: &[Complex64], received: &[Complex64], combining: Combining) -> Complex64 {
    match combining {
        Combining::Selection => {
            let mut best = 0;
            for (i, g) in gains.iter().enumerate().skip(1) {
                if g.norm_sqr() > gains[best].norm_sqr() {
                    best = i;
                }
            }
            let g = gains[best];
            if g.norm_sqr() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                received[best] / g
            }
        }
        Combining::Mrc => {
            let energy: f64 = gains.iter().map(|g| g.norm_sqr()).sum();
            if energy == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            gains.iter().zip(received).map(|(g, y)| g.conj() * y).sum::<Complex64>() / energy
        }
    }
}

fn count_errors(
    gains: &[Complex64],
    noise_variance: f64,
    qam: &QamConstellation,
    combining: Combining,
    symbols: usize,
    rng: &mut SimRng,
) -> ErrorCount {
    let mut received = vec![Complex64::new(0.0, 0.0); gains.len()];
    let mut errors = 0;
    for _ in 0..symbols {
        let sent = rng.random_range(0..qam.order());
        let x = qam.point(sent);
        for (y, g) in received.iter_mut().zip(gains) {
            *y = g * x + complex_gaussian(rng, noise_variance);
        }
        if qam.detect(combine(gains, &received, combining)) != sent {
            errors += 1;
        }
    }
    ErrorCount {
        symbols: symbols as u64,
        errors,
    }
}

fn check_noise(noise_variance: f64) -> Result<()> {
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(Error::domain(format!("noise variance must be positive, got {noise_variance}")));
    }
    Ok(())
}

/// Error counts per receiver at one noise level. The channel is held fixed
/// over all blocks; block `b` of receiver `r` draws from substream `(seed, r, b)`.
pub fn simulate_link_point(
    channel: &MulticastChannel,
    subsets: &[ReceiverSubset],
    cfg: &LinkSimConfig,
    qam: &QamConstellation,
    noise_variance: f64,
) -> Result<Vec<ErrorCount>> {
    cfg.validate()?;
    check_noise(noise_variance)?;
    if subsets.len() != channel.dims().num_receivers() {
        return Err(Error::domain(format!(
            "{} receiver subsets for {} receivers",
            subsets.len(),
            channel.dims().num_receivers()
        )));
    }
    subsets
        .iter()
        .map(|sub| {
            let gains = effective_gains(channel.receiver(sub.receiver)?, sub)?;
            Ok((0..cfg.num_blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng = substream(cfg.seed, &[sub.receiver as u64, b as u64]);
                    count_errors(&gains, noise_variance, qam, cfg.combining, cfg.symbols_per_block, &mut rng)
                })
                .sum())
        })
        .collect()
}

/// One Monte Carlo SER curve per receiver over an SNR grid (dB, `1/σ²`).
pub fn simulate_link(
    channel: &MulticastChannel,
    subsets: &[ReceiverSubset],
    cfg: &LinkSimConfig,
    qam: &QamConstellation,
    snr_grid_db: &[f64],
) -> Result<Vec<SerCurve>> {
    if snr_grid_db.is_empty() {
        return Err(Error::domain("SNR grid is empty"));
    }
    let mut per_receiver: Vec<Vec<SerPoint>> = vec![Vec::new(); subsets.len()];
    for (i, &db) in snr_grid_db.iter().enumerate() {
        let point_cfg = LinkSimConfig {
            seed: derive_seed(cfg.seed, &[i as u64]),
            ..cfg.clone()
        };
        let counts = simulate_link_point(channel, subsets, &point_cfg, qam, 1.0 / db_to_linear(db))?;
        for (r, c) in counts.into_iter().enumerate() {
            per_receiver[r].push(SerPoint {
                snr_db: db,
                ser: c.ser(),
                counts: Some(c),
                ci_halfwidth: Some(c.ci_halfwidth()),
            });
        }
    }
    per_receiver
        .into_iter()
        .zip(subsets)
        .map(|(points, sub)| {
            let config = serde_json::json!({
                "receiver": sub.receiver,
                "rx_indices": sub.rx_indices,
                "tx_indices": sub.tx_indices,
                "link": cfg,
                "order": qam.order(),
            });
            SerCurve::new(points, SerMethod::MonteCarlo, config)
        })
        .collect()
}

const DIVERSITY_CHUNK: u64 = 1 << 16;

/// SER of `branches` i.i.d. Rayleigh branches with fresh fading on every
/// symbol, mean SNR `mean_branch_snr` per branch.
pub fn simulate_fading_diversity(
    branches: usize,
    mean_branch_snr: f64,
    qam: &QamConstellation,
    combining: Combining,
    symbols: u64,
    seed: u64,
) -> Result<ErrorCount> {
    if branches == 0 {
        return Err(Error::domain("at least one diversity branch is required"));
    }
    if !(mean_branch_snr > 0.0 && mean_branch_snr.is_finite()) {
        return Err(Error::domain("mean branch SNR must be positive and finite"));
    }
    let noise_variance = 1.0 / mean_branch_snr;
    let chunks = symbols.div_ceil(DIVERSITY_CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = DIVERSITY_CHUNK.min(symbols - c * DIVERSITY_CHUNK);
            let mut rng = substream(seed, &[c]);
            let mut gains = vec![Complex64::new(0.0, 0.0); branches];
            let mut received = vec![Complex64::new(0.0, 0.0); branches];
            let mut errors = 0;
            for _ in 0..n {
                let sent = rng.random_range(0..qam.order());
                let x = qam.point(sent);
                for (g, y) in gains.iter_mut().zip(received.iter_mut()) {
                    *g = complex_gaussian(&mut rng, 1.0);
                    *y = *g * x + complex_gaussian(&mut rng, noise_variance);
                }
                if qam.detect(combine(&gains, &received, combining)) != sent {
                    errors += 1;
                }
            }
            ErrorCount { symbols: n, errors }
        })
        .sum())
}
