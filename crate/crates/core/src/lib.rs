//! Joint transmit/receive antenna selection for MIMO multicast links.
//!
//! The crate covers the whole evaluation chain:
//!
//! - [`channel`]: seeded flat and frequency-selective Rayleigh channels,
//! - [`capacity`]: log-det capacity of selected sub-channels and multicast rates,
//! - [`genetic`]: the real-valued priority genetic selector and its exhaustive oracle,
//! - [`ser`]: QAM symbol error rate, analytic (quadrature) and Monte Carlo,
//! - [`experiment`]: config-driven capacity and SER sweeps with CSV output.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod genetic;
pub mod rng;
pub mod ser;

pub use capacity::{
    capacity, extract_submatrix, multicast_rate, subset_capacity, AntennaSubset, RateSummary, ReceiverSubset,
    SelectionSpec, SnrParams, TransmissionMode,
};
pub use channel::{
    generate_multicast, generate_pdp_channel, generate_rayleigh, ChannelRealization, MulticastChannel,
    PowerDelayProfile, SystemDims, Tap,
};
pub use error::{Error, Result};
pub use genetic::{
    evolve, evolve_multicast, exhaustive_multicast, exhaustive_search, Chromosome, GaConfig, MulticastOutcome,
    SelectionOutcome,
};
