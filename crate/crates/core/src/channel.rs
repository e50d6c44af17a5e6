//! Seeded multicast MIMO channel generation.
//!
//! Flat channels are i.i.d. circularly symmetric complex Gaussian with unit
//! average power per entry (Rayleigh envelope). Frequency-selective channels
//! follow a discrete power-delay profile: every tap is an independent flat
//! realization scaled to that tap's average power, drawn from its own RNG
//! substream so taps are uncorrelated.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Antenna counts of a multicast system: one transmitter with `num_tx`
/// antennas and `num_receivers` receivers with their own antenna counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDims {
    pub num_tx: usize,
    pub num_rx_per_receiver: Vec<usize>,
}

impl SystemDims {
    pub fn new(num_tx: usize, num_rx_per_receiver: Vec<usize>) -> Result<Self> {
        let dims = SystemDims {
            num_tx,
            num_rx_per_receiver,
        };
        dims.validate()?;
        Ok(dims)
    }

    /// `receivers` identical receivers with `num_rx` antennas each.
    pub fn uniform(num_tx: usize, num_rx: usize, receivers: usize) -> Result<Self> {
        Self::new(num_tx, vec![num_rx; receivers])
    }

    pub fn num_receivers(&self) -> usize {
        self.num_rx_per_receiver.len()
    }

    pub fn num_rx(&self, receiver: usize) -> Result<usize> {
        self.num_rx_per_receiver.get(receiver).copied().ok_or_else(|| {
            Error::domain(format!(
                "receiver {receiver} out of range (R = {})",
                self.num_receivers()
            ))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_tx == 0 {
            return Err(Error::domain("num_tx must be at least 1"));
        }
        if self.num_rx_per_receiver.is_empty() {
            return Err(Error::domain("at least one receiver is required"));
        }
        if let Some(r) = self.num_rx_per_receiver.iter().position(|&n| n == 0) {
            return Err(Error::domain(format!("receiver {r} has no receive antennas")));
        }
        Ok(())
    }
}

/// Channel gains seen by one receiver: rows are its receive antennas,
/// columns are the transmit antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub gains: DMatrix<Complex64>,
    pub receiver_id: usize,
}

impl ChannelRealization {
    pub fn new(gains: DMatrix<Complex64>, receiver_id: usize) -> Result<Self> {
        if gains.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("channel gains must be finite"));
        }
        Ok(ChannelRealization { gains, receiver_id })
    }

    /// Build from a real-valued row-major table; handy in tests.
    pub fn from_real_rows(rows: &[&[f64]], receiver_id: usize) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::domain("ragged channel rows"));
        }
        let gains = DMatrix::from_fn(nrows, ncols, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(gains, receiver_id)
    }

    pub fn num_rx(&self) -> usize {
        self.gains.nrows()
    }

    pub fn num_tx(&self) -> usize {
        self.gains.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    /// Excess delay in seconds.
    pub delay: f64,
    /// Average linear power of this tap.
    pub power: f64,
}

/// Discrete power-delay profile `P(τ) = Σ_l P_l δ(τ − τ_l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDelayProfile {
    taps: Vec<Tap>,
}

impl PowerDelayProfile {
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::domain("power-delay profile needs at least one tap"));
        }
        for (l, t) in taps.iter().enumerate() {
            if !(t.power > 0.0 && t.power.is_finite()) {
                return Err(Error::domain(format!("tap {l} power must be positive and finite")));
            }
            if !t.delay.is_finite() {
                return Err(Error::domain(format!("tap {l} delay must be finite")));
            }
        }
        if taps.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::domain("tap delays must be strictly increasing"));
        }
        Ok(PowerDelayProfile { taps })
    }

    /// Single zero-delay tap of unit power: flat fading.
    pub fn flat() -> Self {
        PowerDelayProfile {
            taps: vec![Tap {
                delay: 0.0,
                power: 1.0,
            }],
        }
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.power).sum()
    }

    /// RMS delay spread of the profile.
    pub fn rms_delay_spread(&self) -> f64 {
        let p = self.total_power();
        let mean = self.taps.iter().map(|t| t.power * t.delay).sum::<f64>() / p;
        let second = self.taps.iter().map(|t| t.power * t.delay * t.delay).sum::<f64>() / p;
        (second - mean * mean).max(0.0).sqrt()
    }
}

/// All channel realizations of a multicast system for one signal block.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticastChannel {
    /// Receiver-major: `realizations[r * taps + l]`.
    realizations: Vec<ChannelRealization>,
    dims: SystemDims,
    pdp: Option<PowerDelayProfile>,
}

impl MulticastChannel {
    /// Assemble a flat channel from per-receiver realizations.
    pub fn from_flat(dims: SystemDims, realizations: Vec<ChannelRealization>) -> Result<Self> {
        dims.validate()?;
        if realizations.len() != dims.num_receivers() {
            return Err(Error::domain(format!(
                "expected {} realizations, got {}",
                dims.num_receivers(),
                realizations.len()
            )));
        }
        for (r, h) in realizations.iter().enumerate() {
            if h.num_rx() != dims.num_rx_per_receiver[r] || h.num_tx() != dims.num_tx {
                return Err(Error::domain(format!(
                    "receiver {r} realization is {}x{}, expected {}x{}",
                    h.num_rx(),
                    h.num_tx(),
                    dims.num_rx_per_receiver[r],
                    dims.num_tx
                )));
            }
        }
        Ok(MulticastChannel {
            realizations,
            dims,
            pdp: None,
        })
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn pdp(&self) -> Option<&PowerDelayProfile> {
        self.pdp.as_ref()
    }

    pub fn num_taps(&self) -> usize {
        self.pdp.as_ref().map_or(1, PowerDelayProfile::num_taps)
    }

    pub fn realizations(&self) -> &[ChannelRealization] {
        &self.realizations
    }

    /// Tap `tap` of receiver `receiver`.
    pub fn tap(&self, receiver: usize, tap: usize) -> Option<&ChannelRealization> {
        let taps = self.num_taps();
        if receiver >= self.dims.num_receivers() || tap >= taps {
            return None;
        }
        self.realizations.get(receiver * taps + tap)
    }

    /// Narrowband view used by selection and link simulation: the first tap.
    pub fn receiver(&self, receiver: usize) -> Result<&ChannelRealization> {
        self.tap(receiver, 0).ok_or_else(|| {
            Error::domain(format!(
                "receiver {receiver} out of range (R = {})",
                self.dims.num_receivers()
            ))
        })
    }
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

fn draw_matrix(rows: usize, cols: usize, power: f64, seed: u64) -> DMatrix<Complex64> {
    let mut rng = rng_from_seed(seed);
    // Fill row-major so the sample order does not depend on nalgebra's storage layout.
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(complex_gaussian(&mut rng, power));
    }
    DMatrix::from_row_slice(rows, cols, &data)
}

/// One flat Rayleigh realization for `receiver`, entries CN(0, 1).
pub fn generate_rayleigh(dims: &SystemDims, receiver: usize, seed: u64) -> Result<ChannelRealization> {
    dims.validate()?;
    let n = dims.num_rx(receiver)?;
    Ok(ChannelRealization {
        gains: draw_matrix(n, dims.num_tx, 1.0, seed),
        receiver_id: receiver,
    })
}

/// One realization per tap, tap `l` with entries CN(0, P_l), each tap from
/// the substream `derive_seed(seed, [l])`.
pub fn generate_pdp_channel(
    dims: &SystemDims,
    receiver: usize,
    pdp: &PowerDelayProfile,
    seed: u64,
) -> Result<Vec<ChannelRealization>> {
    dims.validate()?;
    let n = dims.num_rx(receiver)?;
    if pdp.taps.is_empty() {
        return Err(Error::domain("power-delay profile needs at least one tap"));
    }
    Ok(pdp
        .taps
        .iter()
        .enumerate()
        .map(|(l, tap)| ChannelRealization {
            gains: draw_matrix(n, dims.num_tx, tap.power, derive_seed(seed, &[l as u64])),
            receiver_id: receiver,
        })
        .collect())
}

/// Seed used for receiver `receiver` when the multicast channel is drawn from `master_seed`.
pub fn receiver_seed(master_seed: u64, receiver: usize) -> u64 {
    derive_seed(master_seed, &[receiver as u64])
}

/// Independent channels for every receiver, seeded from `master_seed`.
pub fn generate_multicast(
    dims: &SystemDims,
    pdp: Option<&PowerDelayProfile>,
    master_seed: u64,
) -> Result<MulticastChannel> {
    dims.validate()?;
    let mut realizations = Vec::new();
    for r in 0..dims.num_receivers() {
        let seed = receiver_seed(master_seed, r);
        match pdp {
            None => realizations.push(generate_rayleigh(dims, r, seed)?),
            Some(p) => realizations.extend(generate_pdp_channel(dims, r, p, seed)?),
        }
    }
    Ok(MulticastChannel {
        realizations,
        dims: dims.clone(),
        pdp: pdp.cloned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let (ma, _) = mean_and_se(a);
        let (mb, _) = mean_and_se(b);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn dims_validation() {
        assert!(SystemDims::new(0, vec![2]).is_err());
        assert!(SystemDims::new(2, vec![]).is_err());
        assert!(SystemDims::new(2, vec![2, 0]).is_err());
        assert_eq!(SystemDims::uniform(4, 4, 4).unwrap().num_receivers(), 4);
    }

    #[test]
    fn rayleigh_shape_and_determinism() {
        let dims = SystemDims::uniform(2, 2, 1).unwrap();
        let a = generate_rayleigh(&dims, 0, 11).unwrap();
        let b = generate_rayleigh(&dims, 0, 11).unwrap();
        assert_eq!(a.gains.shape(), (2, 2));
        assert_eq!(a, b);
        assert_ne!(a, generate_rayleigh(&dims, 0, 12).unwrap());
    }

    #[test]
    fn rayleigh_receiver_out_of_range() {
        let dims = SystemDims::uniform(2, 2, 2).unwrap();
        assert!(matches!(generate_rayleigh(&dims, 2, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn rayleigh_unit_power_and_component_variance() {
        let dims = SystemDims::uniform(10, 10, 1).unwrap();
        let mut power = Vec::new();
        let mut re2 = Vec::new();
        let mut im2 = Vec::new();
        for s in 0..1000 {
            let h = generate_rayleigh(&dims, 0, s).unwrap();
            for z in h.gains.iter() {
                power.push(z.norm_sqr());
                re2.push(z.re * z.re);
                im2.push(z.im * z.im);
            }
        }
        assert_eq!(power.len(), 100_000);
        let (m, se) = mean_and_se(&power);
        assert!((m - 1.0).abs() <= 3.0 * se, "mean |h|^2 = {m}, se = {se}");
        // Zero-mean components, so E[re^2] estimates the variance.
        for comp in [&re2, &im2] {
            let (m, se) = mean_and_se(comp);
            assert!((m - 0.5).abs() <= 3.0 * se, "component variance {m}, se {se}");
        }
    }

    #[test]
    fn pdp_validation() {
        assert!(PowerDelayProfile::new(vec![]).is_err());
        let bad_order = vec![
            Tap { delay: 1e-6, power: 0.5 },
            Tap { delay: 0.0, power: 0.5 },
        ];
        assert!(PowerDelayProfile::new(bad_order).is_err());
        assert!(PowerDelayProfile::new(vec![Tap { delay: 0.0, power: 0.0 }]).is_err());
    }

    #[test]
    fn rms_delay_spread_two_equal_taps() {
        let pdp = PowerDelayProfile::new(vec![
            Tap { delay: 0.0, power: 1.0 },
            Tap { delay: 2e-6, power: 1.0 },
        ])
        .unwrap();
        assert!((pdp.rms_delay_spread() - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn single_unit_tap_matches_flat_statistics() {
        let dims = SystemDims::uniform(10, 10, 1).unwrap();
        let pdp = PowerDelayProfile::flat();
        let mut power = Vec::new();
        for s in 0..1000 {
            let taps = generate_pdp_channel(&dims, 0, &pdp, s).unwrap();
            assert_eq!(taps.len(), 1);
            power.extend(taps[0].gains.iter().map(|z| z.norm_sqr()));
        }
        let (m, se) = mean_and_se(&power);
        assert!((m - 1.0).abs() <= 3.0 * se);
    }

    #[test]
    fn two_tap_powers_and_independence() {
        let dims = SystemDims::uniform(10, 10, 1).unwrap();
        let pdp = PowerDelayProfile::new(vec![
            Tap { delay: 0.0, power: 0.8 },
            Tap { delay: 1e-6, power: 0.2 },
        ])
        .unwrap();
        let (mut p0, mut p1) = (Vec::new(), Vec::new());
        let (mut re0, mut re1) = (Vec::new(), Vec::new());
        for s in 0..1000 {
            let taps = generate_pdp_channel(&dims, 0, &pdp, s).unwrap();
            for (a, b) in taps[0].gains.iter().zip(taps[1].gains.iter()) {
                p0.push(a.norm_sqr());
                p1.push(b.norm_sqr());
                re0.push(a.re);
                re1.push(b.re);
            }
        }
        let n = p0.len() as f64;
        let (m0, se0) = mean_and_se(&p0);
        let (m1, se1) = mean_and_se(&p1);
        assert!((m0 - 0.8).abs() <= 3.0 * se0, "tap0 power {m0}");
        assert!((m1 - 0.2).abs() <= 3.0 * se1, "tap1 power {m1}");
        let bound = 3.0 / n.sqrt();
        assert!(bound < 0.02);
        assert!(pearson(&p0, &p1).abs() < bound);
        assert!(pearson(&re0, &re1).abs() < bound);
    }

    #[test]
    fn multicast_layout_and_determinism() {
        let dims = SystemDims::uniform(4, 4, 4).unwrap();
        let ch = generate_multicast(&dims, None, 99).unwrap();
        assert_eq!(ch.realizations().len(), 4);
        for r in 0..4 {
            let h = ch.receiver(r).unwrap();
            assert_eq!(h.gains.shape(), (4, 4));
            assert_eq!(h.receiver_id, r);
        }
        assert_eq!(ch, generate_multicast(&dims, None, 99).unwrap());
        assert_ne!(ch.receiver(0).unwrap(), ch.receiver(1).unwrap());
    }

    #[test]
    fn single_receiver_matches_rayleigh_with_derived_seed() {
        let dims = SystemDims::uniform(3, 2, 1).unwrap();
        let ch = generate_multicast(&dims, None, 5).unwrap();
        let h = generate_rayleigh(&dims, 0, receiver_seed(5, 0)).unwrap();
        assert_eq!(ch.receiver(0).unwrap(), &h);
    }

    #[test]
    fn multicast_with_pdp_has_r_times_taps() {
        let dims = SystemDims::uniform(2, 2, 3).unwrap();
        let pdp = PowerDelayProfile::new(vec![
            Tap { delay: 0.0, power: 0.6 },
            Tap { delay: 1e-6, power: 0.3 },
            Tap { delay: 3e-6, power: 0.1 },
        ])
        .unwrap();
        let ch = generate_multicast(&dims, Some(&pdp), 1).unwrap();
        assert_eq!(ch.realizations().len(), 9);
        assert_eq!(ch.tap(2, 2).unwrap().receiver_id, 2);
        assert!(ch.tap(3, 0).is_none());
    }

    #[test]
    fn from_flat_rejects_mismatch() {
        let dims = SystemDims::uniform(2, 2, 1).unwrap();
        let h = ChannelRealization::from_real_rows(&[&[1.0, 0.0, 0.0]], 0).unwrap();
        assert!(MulticastChannel::from_flat(dims, vec![h]).is_err());
    }
}
