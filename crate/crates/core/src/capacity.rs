//! Log-det capacity of selected sub-channels and multicast rate summaries.
//!
//! For a selected sub-matrix `H` (rows = chosen receive antennas, columns =
//! chosen transmit antennas) with `L_s` active transmit antennas sharing the
//! symbol energy equally,
//!
//! ```text
//! C = log2 det(I_{L_s} + ρ HᴴH),   ρ = (E_s/N_0) / L_s
//! ```
//!
//! The determinant is taken through a Cholesky factor of the Hermitian
//! positive-definite matrix `I + ρHᴴH`, so the log of the product becomes a
//! sum of logs of the factor's diagonal.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, MulticastChannel, SystemDims};
use crate::error::{Error, Result};

/// How many antennas each side keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSpec {
    pub num_tx_selected: usize,
    pub num_rx_selected_per_receiver: Vec<usize>,
}

impl SelectionSpec {
    pub fn new(num_tx_selected: usize, num_rx_selected_per_receiver: Vec<usize>) -> Self {
        SelectionSpec {
            num_tx_selected,
            num_rx_selected_per_receiver,
        }
    }

    pub fn uniform(num_tx_selected: usize, num_rx_selected: usize, receivers: usize) -> Self {
        Self::new(num_tx_selected, vec![num_rx_selected; receivers])
    }

    pub fn num_rx_selected(&self, receiver: usize) -> Result<usize> {
        self.num_rx_selected_per_receiver
            .get(receiver)
            .copied()
            .ok_or_else(|| Error::domain(format!("no receive selection size for receiver {receiver}")))
    }

    pub fn validate(&self, dims: &SystemDims) -> Result<()> {
        dims.validate()?;
        if self.num_tx_selected == 0 || self.num_tx_selected > dims.num_tx {
            return Err(Error::domain(format!(
                "num_tx_selected = {} must lie in 1..={}",
                self.num_tx_selected, dims.num_tx
            )));
        }
        if self.num_rx_selected_per_receiver.len() != dims.num_receivers() {
            return Err(Error::domain(format!(
                "selection lists {} receivers, system has {}",
                self.num_rx_selected_per_receiver.len(),
                dims.num_receivers()
            )));
        }
        for (r, (&l, &n)) in self
            .num_rx_selected_per_receiver
            .iter()
            .zip(&dims.num_rx_per_receiver)
            .enumerate()
        {
            if l == 0 || l > n {
                return Err(Error::domain(format!(
                    "receiver {r}: num_rx_selected = {l} must lie in 1..={n}"
                )));
            }
        }
        Ok(())
    }
}

/// Selected antennas for a single receiver link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverSubset {
    pub receiver: usize,
    pub rx_indices: Vec<usize>,
    pub tx_indices: Vec<usize>,
}

/// A multicast selection sharing one transmit subset across receivers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntennaSubset {
    pub tx_indices: Vec<usize>,
    pub rx_indices_per_receiver: Vec<Vec<usize>>,
}

impl AntennaSubset {
    /// All antennas of every receiver.
    pub fn full(dims: &SystemDims) -> Self {
        AntennaSubset {
            tx_indices: (0..dims.num_tx).collect(),
            rx_indices_per_receiver: dims.num_rx_per_receiver.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    pub fn receiver_view(&self, receiver: usize) -> Option<ReceiverSubset> {
        self.rx_indices_per_receiver.get(receiver).map(|rx| ReceiverSubset {
            receiver,
            rx_indices: rx.clone(),
            tx_indices: self.tx_indices.clone(),
        })
    }

    pub fn per_receiver(&self) -> Vec<ReceiverSubset> {
        (0..self.rx_indices_per_receiver.len())
            .filter_map(|r| self.receiver_view(r))
            .collect()
    }

    pub fn validate(&self, dims: &SystemDims, spec: &SelectionSpec) -> Result<()> {
        if self.rx_indices_per_receiver.len() != dims.num_receivers() {
            return Err(Error::domain("subset receiver count does not match the system"));
        }
        for sub in self.per_receiver() {
            sub.validate(dims, spec)?;
        }
        Ok(())
    }
}

fn check_index_set(name: &str, idx: &[usize], bound: usize) -> Result<()> {
    for (k, &i) in idx.iter().enumerate() {
        if i >= bound {
            return Err(Error::domain(format!("{name} index {i} out of range (< {bound})")));
        }
        if idx[..k].contains(&i) {
            return Err(Error::domain(format!("duplicate {name} index {i}")));
        }
    }
    Ok(())
}

impl ReceiverSubset {
    pub fn validate(&self, dims: &SystemDims, spec: &SelectionSpec) -> Result<()> {
        let n = dims.num_rx(self.receiver)?;
        check_index_set("receive", &self.rx_indices, n)?;
        check_index_set("transmit", &self.tx_indices, dims.num_tx)?;
        if self.tx_indices.len() != spec.num_tx_selected {
            return Err(Error::domain(format!(
                "expected {} transmit antennas, got {}",
                spec.num_tx_selected,
                self.tx_indices.len()
            )));
        }
        let want = spec.num_rx_selected(self.receiver)?;
        if self.rx_indices.len() != want {
            return Err(Error::domain(format!(
                "receiver {}: expected {want} receive antennas, got {}",
                self.receiver,
                self.rx_indices.len()
            )));
        }
        Ok(())
    }
}

/// Linear `E_s / N_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrParams {
    es_over_n0: f64,
}

impl SnrParams {
    pub fn new(es_over_n0: f64) -> Result<Self> {
        if !(es_over_n0 > 0.0 && es_over_n0.is_finite()) {
            return Err(Error::domain(format!("E_s/N_0 must be positive and finite, got {es_over_n0}")));
        }
        Ok(SnrParams { es_over_n0 })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(10f64.powf(db / 10.0))
    }

    pub fn es_over_n0(&self) -> f64 {
        self.es_over_n0
    }
}

/// `h[rx_idx[i], tx_idx[j]]`.
pub fn extract_submatrix(h: &ChannelRealization, rx_idx: &[usize], tx_idx: &[usize]) -> Result<DMatrix<Complex64>> {
    check_index_set("receive", rx_idx, h.num_rx())?;
    check_index_set("transmit", tx_idx, h.num_tx())?;
    Ok(DMatrix::from_fn(rx_idx.len(), tx_idx.len(), |i, j| h.gains[(rx_idx[i], tx_idx[j])]))
}

/// `log2 det(I + (E_s/N_0)/l_s · HᴴH)` in bits/s/Hz.
pub fn capacity(h_sub: &DMatrix<Complex64>, snr: SnrParams, l_s: usize) -> Result<f64> {
    if l_s == 0 {
        return Err(Error::domain("l_s must be at least 1"));
    }
    if h_sub.ncols() != l_s {
        return Err(Error::domain(format!(
            "sub-matrix has {} columns, expected l_s = {l_s}",
            h_sub.ncols()
        )));
    }
    if h_sub.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain("sub-matrix contains non-finite entries"));
    }
    let rho = snr.es_over_n0 / l_s as f64;
    let mut a = h_sub.adjoint() * h_sub;
    a *= Complex64::new(rho, 0.0);
    for i in 0..l_s {
        a[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let log2_det = match a.clone().cholesky() {
        Some(chol) => 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.log2()).sum::<f64>(),
        // Only reachable through overflow in ρHᴴH; fall back to the spectrum.
        None => a
            .symmetric_eigenvalues()
            .iter()
            .map(|&lambda| lambda.max(f64::MIN_POSITIVE).log2())
            .sum(),
    };
    if !log2_det.is_finite() {
        return Err(Error::Numerical(format!("capacity is not finite at rho = {rho}")));
    }
    Ok(log2_det.max(0.0))
}

/// Capacity of one receiver's selected link.
pub fn receiver_capacity(h: &ChannelRealization, sub: &ReceiverSubset, snr: SnrParams) -> Result<f64> {
    let m = extract_submatrix(h, &sub.rx_indices, &sub.tx_indices)?;
    capacity(&m, snr, sub.tx_indices.len())
}

/// Per-receiver capacities for independently chosen links.
pub fn receiver_capacities(channel: &MulticastChannel, subsets: &[ReceiverSubset], snr: SnrParams) -> Result<Vec<f64>> {
    if subsets.len() != channel.dims().num_receivers() {
        return Err(Error::domain(format!(
            "{} receiver subsets for {} receivers",
            subsets.len(),
            channel.dims().num_receivers()
        )));
    }
    subsets
        .iter()
        .map(|s| receiver_capacity(channel.receiver(s.receiver)?, s, snr))
        .collect()
}

/// Element `r` is the capacity of receiver `r` over the shared transmit set.
pub fn subset_capacity(channel: &MulticastChannel, subset: &AntennaSubset, snr: SnrParams) -> Result<Vec<f64>> {
    receiver_capacities(channel, &subset.per_receiver(), snr)
}

/// Whether every receiver gets its own transmit subset or all share one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransmissionMode {
    Asynchronous,
    Synchronous,
}

impl TransmissionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransmissionMode::Asynchronous => "asynchronous",
            TransmissionMode::Synchronous => "synchronous",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSummary {
    pub mode: TransmissionMode,
    pub min: f64,
    pub mean: f64,
    pub per_receiver: Vec<f64>,
}

pub fn multicast_rate(per_receiver: &[f64], mode: TransmissionMode) -> Result<RateSummary> {
    if per_receiver.is_empty() {
        return Err(Error::domain("multicast rate of an empty receiver list"));
    }
    let min = per_receiver.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = per_receiver.iter().sum::<f64>() / per_receiver.len() as f64;
    Ok(RateSummary {
        mode,
        min,
        mean,
        per_receiver: per_receiver.to_vec(),
    })
}
