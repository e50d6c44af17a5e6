//! Symbol error rate of square QAM over fading links.
//!
//! Analytic route: the conditional AWGN symbol error rate averaged over the
//! Erlang law of the combined SNR,
//!
//! ```text
//! P̄ = ∫_0^∞ P_s(γ) · γ^{L−1} e^{−γ/γ̄} / ((L−1)! γ̄^L) dγ
//! ```
//!
//! evaluated by adaptive quadrature. Monte Carlo route: [`link`] pushes Gray
//! mapped symbols through the selected antennas and counts detection errors.

pub mod link;
pub mod qam;
pub mod quadrature;

pub use link::{
    simulate_fading_diversity, simulate_link, simulate_link_point, Combining, ErrorCount, LinkSimConfig,
};
pub use qam::QamConstellation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quadrature::{integrate, QuadOptions};

/// Gaussian upper tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Which closed form to use for the AWGN symbol error rate of square QAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SerVariant {
    /// Exact: `1 − (1 − 2(1−1/√K) Q(√(3γ/(K−1))))²`.
    #[default]
    Standard,
    /// Union-bound form `4(1−1/√K) Q(√(3γ/(K−1)))`, clamped to `[0, 1]`.
    PaperLiteral,
}

fn sqrt_order(k: usize) -> Result<f64> {
    let s = (k as f64).sqrt().round() as usize;
    if k < 4 || s * s != k {
        return Err(Error::domain(format!("constellation order {k} is not a perfect square >= 4")));
    }
    Ok(s as f64)
}

/// AWGN symbol error rate of `k`-ary square QAM at linear per-symbol SNR `gamma`.
pub fn conditional_ser_qam(gamma: f64, k: usize, variant: SerVariant) -> Result<f64> {
    let side = sqrt_order(k)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::domain(format!("symbol SNR must be non-negative, got {gamma}")));
    }
    let q = q_function((3.0 * gamma / (k as f64 - 1.0)).sqrt());
    let a = 1.0 - 1.0 / side;
    Ok(match variant {
        SerVariant::Standard => {
            let p = 2.0 * a * q;
            p * (2.0 - p)
        }
        SerVariant::PaperLiteral => (4.0 * a * q).clamp(0.0, 1.0),
    })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Erlang density of the combined SNR of `l` branches with mean branch SNR `mean_snr`.
pub fn combined_snr_pdf(gamma: f64, l: usize, mean_snr: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("at least one diversity branch is required"));
    }
    if !(mean_snr > 0.0 && mean_snr.is_finite()) {
        return Err(Error::domain(format!("mean branch SNR must be positive, got {mean_snr}")));
    }
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::domain(format!("combined SNR must be non-negative, got {gamma}")));
    }
    Ok(erlang_pdf(gamma, l, mean_snr))
}

fn erlang_pdf(gamma: f64, l: usize, mean_snr: f64) -> f64 {
    if gamma == 0.0 {
        return if l == 1 { 1.0 / mean_snr } else { 0.0 };
    }
    let lf = l as f64;
    ((lf - 1.0) * gamma.ln() - gamma / mean_snr - ln_factorial(l - 1) - lf * mean_snr.ln()).exp()
}

/// `P(Erlang(l, mean_snr) > x)`.
fn erlang_survival(x: f64, l: usize, mean_snr: f64) -> f64 {
    let t = x / mean_snr;
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..l {
        term *= t / i as f64;
        sum += term;
    }
    (-t).exp() * sum
}

/// Upper integration limit beyond which the Erlang mass is below 1e-12.
pub fn erlang_truncation(l: usize, mean_snr: f64) -> f64 {
    let lf = l as f64;
    mean_snr * (lf + 40.0 * lf.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SerParams {
    /// Number of combined diversity branches.
    pub branches: usize,
    /// Mean SNR per branch, linear.
    pub mean_branch_snr: f64,
    /// Mean branch SNRs in dB swept by [`analytic_ser_curve`].
    #[serde(default)]
    pub symbol_snr_grid: Vec<f64>,
    #[serde(default)]
    pub variant: SerVariant,
}

impl SerParams {
    pub fn validate(&self) -> Result<()> {
        if self.branches == 0 {
            return Err(Error::domain("at least one diversity branch is required"));
        }
        if !(self.mean_branch_snr > 0.0 && self.mean_branch_snr.is_finite()) {
            return Err(Error::domain("mean branch SNR must be positive and finite"));
        }
        Ok(())
    }
}

/// Relative tolerance of the averaged SER quadrature.
pub const AVERAGE_SER_REL_TOL: f64 = 1e-8;

/// Conditional SER averaged over the combined-SNR density.
pub fn average_ser(params: &SerParams, k: usize) -> Result<f64> {
    params.validate()?;
    sqrt_order(k)?;
    let (l, mean) = (params.branches, params.mean_branch_snr);
    let upper = erlang_truncation(l, mean);
    let variant = params.variant;
    let f = |g: f64| conditional_ser_qam(g, k, variant).unwrap_or(f64::NAN);
    let opts = QuadOptions {
        rel_tol: AVERAGE_SER_REL_TOL,
        abs_tol: 1e-300,
        max_intervals: 4000,
    };
    let body = integrate(|g| f(g) * erlang_pdf(g, l, mean), 0.0, upper, opts)?;
    // P_s is non-increasing, so the neglected tail is at most P_s(U)·P(γ > U).
    let tail = f(upper) * erlang_survival(upper, l, mean);
    Ok((body.value + tail).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SerMethod {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerPoint {
    pub snr_db: f64,
    pub ser: f64,
    /// Symbol and error counts, Monte Carlo only.
    pub counts: Option<ErrorCount>,
    /// 3σ binomial half-width, Monte Carlo only.
    pub ci_halfwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerCurve {
    pub points: Vec<SerPoint>,
    pub method: SerMethod,
    pub config: serde_json::Value,
}

impl SerCurve {
    pub fn new(points: Vec<SerPoint>, method: SerMethod, config: serde_json::Value) -> Result<Self> {
        if points.iter().any(|p| !(0.0..=1.0).contains(&p.ser)) {
            return Err(Error::domain("SER values must lie in [0, 1]"));
        }
        if points.windows(2).any(|w| w[1].snr_db <= w[0].snr_db) {
            return Err(Error::domain("SER curve SNR grid must be strictly increasing"));
        }
        Ok(SerCurve { points, method, config })
    }

    pub fn sers(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ser).collect()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// [`average_ser`] at every mean branch SNR (dB) of `params.symbol_snr_grid`.
pub fn analytic_ser_curve(params: &SerParams, k: usize) -> Result<SerCurve> {
    if params.symbol_snr_grid.is_empty() {
        return Err(Error::domain("SNR grid is empty"));
    }
    let mut points = Vec::with_capacity(params.symbol_snr_grid.len());
    for &db in &params.symbol_snr_grid {
        let p = SerParams {
            mean_branch_snr: db_to_linear(db),
            ..params.clone()
        };
        points.push(SerPoint {
            snr_db: db,
            ser: average_ser(&p, k)?,
            counts: None,
            ci_halfwidth: None,
        });
    }
    let config = serde_json::json!({
        "branches": params.branches,
        "order": k,
        "variant": params.variant,
    });
    SerCurve::new(points, SerMethod::Analytic, config)
}
