//! Exhaustive subset enumeration, the exact optimum the GA is measured against.

use crate::capacity::{
    capacity, multicast_rate, RateSummary, ReceiverSubset, SelectionSpec, SnrParams, TransmissionMode,
};
use crate::channel::{ChannelRealization, MulticastChannel};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Refuse enumerations needing more capacity evaluations than this.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// `n choose k`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveOutcome {
    pub subset: ReceiverSubset,
    pub capacity: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticastExhaustive {
    pub mode: TransmissionMode,
    pub subsets: Vec<ReceiverSubset>,
    pub summary: RateSummary,
    pub evaluations: u64,
}

fn check_cap(required: u128, cap: u128) -> Result<()> {
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    Ok(())
}

fn link_sizes(h: &ChannelRealization, spec: &SelectionSpec) -> Result<(usize, usize)> {
    let l_u = spec.num_rx_selected(h.receiver_id)?;
    let l_s = spec.num_tx_selected;
    if l_s == 0 || l_s > h.num_tx() || l_u == 0 || l_u > h.num_rx() {
        return Err(Error::domain(format!(
            "cannot select {l_u}x{l_s} from a {}x{} link",
            h.num_rx(),
            h.num_tx()
        )));
    }
    Ok((l_u, l_s))
}

/// Best receive set of `h` for a fixed transmit set; ties to the lexicographically smallest.
fn best_rx_for_tx(
    h: &ChannelRealization,
    rx_sets: &[Vec<usize>],
    tx: &[usize],
    snr: SnrParams,
) -> Result<(usize, f64)> {
    let cols = DMatrix::from_fn(h.num_rx(), tx.len(), |i, j| h.gains[(i, tx[j])]);
    let mut best = (0, f64::NEG_INFINITY);
    for (k, rx) in rx_sets.iter().enumerate() {
        let sub = cols.select_rows(rx.iter());
        let c = capacity(&sub, snr, tx.len())?;
        if c > best.1 {
            best = (k, c);
        }
    }
    Ok(best)
}

/// Capacity-maximizing `(rx, tx)` subset of one link by full enumeration.
///
/// Enumerates transmit sets in lexicographic order, receive sets nested
/// inside; the first maximizer wins, so ties resolve to the lexicographically
/// smallest `(tx, rx)` pair.
pub fn exhaustive_search(
    h: &ChannelRealization,
    spec: &SelectionSpec,
    snr: SnrParams,
    cap: u128,
) -> Result<ExhaustiveOutcome> {
    let (l_u, l_s) = link_sizes(h, spec)?;
    let required = binomial(h.num_tx(), l_s).saturating_mul(binomial(h.num_rx(), l_u));
    check_cap(required, cap)?;
    let rx_sets = combinations(h.num_rx(), l_u);
    let mut best: Option<(Vec<usize>, usize, f64)> = None;
    for tx in combinations(h.num_tx(), l_s) {
        let (k, c) = best_rx_for_tx(h, &rx_sets, &tx, snr)?;
        if best.as_ref().is_none_or(|b| c > b.2) {
            best = Some((tx, k, c));
        }
    }
    let (tx, k, c) = best.expect("at least one combination");
    Ok(ExhaustiveOutcome {
        subset: ReceiverSubset {
            receiver: h.receiver_id,
            rx_indices: rx_sets[k].clone(),
            tx_indices: tx,
        },
        capacity: c,
        evaluations: required as u64,
    })
}

/// Transmit set, chosen receive-set index per receiver, capacities, minimum.
type SyncCandidate = (Vec<usize>, Vec<usize>, Vec<f64>, f64);

/// Exact optimum of the multicast objective in either mode.
///
/// Asynchronous maximizes every receiver's capacity on its own. Synchronous
/// maximizes the minimum receiver capacity over a shared transmit set; for a
/// fixed transmit set the receivers' receive sets decouple, so the search costs
/// `C(M, L_s) · Σ_r C(N_r, L_U_r)` evaluations in both modes.
pub fn exhaustive_multicast(
    channel: &MulticastChannel,
    spec: &SelectionSpec,
    snr: SnrParams,
    mode: TransmissionMode,
    cap: u128,
) -> Result<MulticastExhaustive> {
    let dims = channel.dims();
    spec.validate(dims)?;
    let l_s = spec.num_tx_selected;
    let rx_total = (0..dims.num_receivers()).try_fold(0u128, |acc, r| {
        Ok::<_, Error>(acc.saturating_add(binomial(dims.num_rx_per_receiver[r], spec.num_rx_selected(r)?)))
    })?;
    let required = binomial(dims.num_tx, l_s).saturating_mul(rx_total);
    check_cap(required, cap)?;

    match mode {
        TransmissionMode::Asynchronous => {
            let mut subsets = Vec::new();
            let mut caps = Vec::new();
            for r in 0..dims.num_receivers() {
                let out = exhaustive_search(channel.receiver(r)?, spec, snr, cap)?;
                subsets.push(out.subset);
                caps.push(out.capacity);
            }
            Ok(MulticastExhaustive {
                mode,
                subsets,
                summary: multicast_rate(&caps, mode)?,
                evaluations: required as u64,
            })
        }
        TransmissionMode::Synchronous => {
            let rx_sets: Vec<Vec<Vec<usize>>> = (0..dims.num_receivers())
                .map(|r| Ok(combinations(dims.num_rx_per_receiver[r], spec.num_rx_selected(r)?)))
                .collect::<Result<_>>()?;
            let mut best: Option<SyncCandidate> = None;
            for tx in combinations(dims.num_tx, l_s) {
                let mut picks = Vec::with_capacity(rx_sets.len());
                let mut caps = Vec::with_capacity(rx_sets.len());
                for (r, sets) in rx_sets.iter().enumerate() {
                    let (k, c) = best_rx_for_tx(channel.receiver(r)?, sets, &tx, snr)?;
                    picks.push(k);
                    caps.push(c);
                }
                let worst = caps.iter().copied().fold(f64::INFINITY, f64::min);
                if best.as_ref().is_none_or(|b| worst > b.3) {
                    best = Some((tx, picks, caps, worst));
                }
            }
            let (tx, picks, caps, _) = best.expect("at least one combination");
            let subsets = picks
                .iter()
                .enumerate()
                .map(|(r, &k)| ReceiverSubset {
                    receiver: r,
                    rx_indices: rx_sets[r][k].clone(),
                    tx_indices: tx.clone(),
                })
                .collect();
            Ok(MulticastExhaustive {
                mode,
                subsets,
                summary: multicast_rate(&caps, mode)?,
                evaluations: required as u64,
            })
        }
    }
}
