use serde::{Deserialize, Serialize};

use super::{ChannelConfig, DetectorConfig, ProtocolConfig, SourceConfig};
use crate::error::{invalid, Result};

/// Error rate of background (dark-count) detections, e₀.
pub const ERROR_RATE_BACKGROUND: f64 = 0.5;

/// Overall transmittance η from Alice's output to a detection.
pub fn channel_transmittance(ch: &ChannelConfig, det: &DetectorConfig) -> f64 {
    let loss_db = ch.total_loss_db() + det.receiver_insertion_loss_db;
    10f64.powf(-loss_db / 10.0) * det.efficiency
}

/// Gain `Q_μ = Y₀ + 1 − e^{−ημ}` and error rate
/// `E_μ = (e₀Y₀ + e_opt(1 − e^{−ημ})) / Q_μ` of a Poissonian source.
pub fn gain_and_qber(mu: f64, eta: f64, det: &DetectorConfig, e_opt: f64) -> (f64, f64) {
    gain_and_qber_y0(mu, eta, det.background_yield(), e_opt)
}

pub(crate) fn gain_and_qber_y0(mu: f64, eta: f64, y0: f64, e_opt: f64) -> (f64, f64) {
    let signal = -(-eta * mu).exp_m1();
    let gain = y0 + signal;
    let errors = ERROR_RATE_BACKGROUND * y0 + e_opt * signal;
    let qber = if gain > 0.0 { errors / gain } else { 0.0 };
    (gain, qber)
}

/// `e_opt = (1 − V·cos φ) / 2`, clamped to `[0, 1/2]`.
pub fn qber_from_optics(phase_error: f64, intrinsic_visibility: f64) -> f64 {
    ((1.0 - intrinsic_visibility * phase_error.cos()) / 2.0).clamp(0.0, 0.5)
}

/// Binary Shannon entropy with `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Gains and error rates measured (or predicted) for the three intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub q_signal: f64,
    pub e_signal: f64,
    pub q_decoy: f64,
    pub e_decoy: f64,
    /// Vacuum-state gain, i.e. the background yield estimate.
    pub y0: f64,
}

/// Single-photon bounds from the vacuum + weak decoy method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoyBounds {
    pub y1_lower: f64,
    pub e1_upper: f64,
    /// Set when an intermediate estimate went negative and was clamped.
    pub clamped: bool,
}

/// Lower bound on the single-photon yield and upper bound on its error rate:
///
/// ```text
/// Y₁ ≥ μ/(μν − ν²) · (Q_ν e^ν − Q_μ e^μ ν²/μ² − (μ² − ν²)/μ² · Y₀)
/// e₁ ≤ (E_ν Q_ν e^ν − e₀Y₀) / (Y₁ ν)
/// ```
pub fn decoy_bounds(
    signal: (f64, f64),
    decoy: (f64, f64),
    y0: f64,
    mu: f64,
    nu: f64,
) -> Result<DecoyBounds> {
    if !(nu > 0.0 && mu > nu) {
        return invalid(format!("decoy estimation needs mu > nu > 0, got mu={mu}, nu={nu}"));
    }
    let (q_mu, _) = signal;
    let (q_nu, e_nu) = decoy;
    let mu2 = mu * mu;
    let nu2 = nu * nu;
    let y1 = mu / (mu * nu - nu2)
        * (q_nu * nu.exp() - q_mu * mu.exp() * nu2 / mu2 - (mu2 - nu2) / mu2 * y0);
    let mut clamped = !(y1 > 0.0);
    let y1_lower = y1.clamp(0.0, 1.0);
    let e1_upper = if y1_lower > 0.0 {
        let num = e_nu * q_nu * nu.exp() - ERROR_RATE_BACKGROUND * y0;
        if num < 0.0 {
            clamped = true;
        }
        (num / (y1_lower * nu)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecoyBounds { y1_lower, e1_upper, clamped })
}

/// Secure key rate in bits per second,
/// `R = f_rep·q·max(0, −Q_μ f H₂(E_μ) + Q₁(1 − H₂(e₁)))`
/// with `Q₁ = Y₁ μ e^{−μ}` and `q` = basis sifting × signal-state fraction.
pub fn secure_key_rate(
    obs: &Observation,
    bounds: &DecoyBounds,
    src: &SourceConfig,
    protocol: &ProtocolConfig,
) -> f64 {
    let q1 = bounds.y1_lower * src.mu_signal * (-src.mu_signal).exp();
    // an e₁ bound beyond 1/2 carries no more information than 1/2
    let e1 = bounds.e1_upper.min(0.5);
    let per_pulse = -obs.q_signal * protocol.f_ec * binary_entropy(obs.e_signal)
        + q1 * (1.0 - binary_entropy(e1));
    let q = protocol.basis_sifting * src.state_fractions()[0];
    (src.rep_rate * q * per_pulse).max(0.0)
}

/// Full key-rate evaluation of one observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateResult {
    pub q_gain_signal: f64,
    pub q_gain_decoy: f64,
    pub qber_signal: f64,
    pub qber_decoy: f64,
    pub y0: f64,
    pub y1_lower: f64,
    pub e1_upper: f64,
    pub secure_rate_bps: f64,
    /// QBER reported to the user: the signal-state error rate.
    pub qber_observed: f64,
    pub clamped: bool,
}

pub fn evaluate(obs: &Observation, src: &SourceConfig, protocol: &ProtocolConfig) -> Result<KeyRateResult> {
    let bounds = decoy_bounds(
        (obs.q_signal, obs.e_signal),
        (obs.q_decoy, obs.e_decoy),
        obs.y0,
        src.mu_signal,
        src.mu_decoy,
    )?;
    Ok(KeyRateResult {
        q_gain_signal: obs.q_signal,
        q_gain_decoy: obs.q_decoy,
        qber_signal: obs.e_signal,
        qber_decoy: obs.e_decoy,
        y0: obs.y0,
        y1_lower: bounds.y1_lower,
        e1_upper: bounds.e1_upper,
        secure_rate_bps: secure_key_rate(obs, &bounds, src, protocol),
        qber_observed: obs.e_signal,
        clamped: bounds.clamped,
    })
}

/// Expected observation for transmittance `eta` and optical error `e_opt`.
pub fn forward_observation(src: &SourceConfig, eta: f64, det: &DetectorConfig, e_opt: f64) -> Observation {
    let (q_signal, e_signal) = gain_and_qber(src.mu_signal, eta, det, e_opt);
    let (q_decoy, e_decoy) = gain_and_qber(src.mu_decoy, eta, det, e_opt);
    Observation { q_signal, e_signal, q_decoy, e_decoy, y0: det.background_yield() }
}

/// Analytic (infinite-statistics) operating point at optical error `e_opt`.
pub fn operating_point(
    src: &SourceConfig,
    ch: &ChannelConfig,
    det: &DetectorConfig,
    protocol: &ProtocolConfig,
    e_opt: f64,
) -> Result<KeyRateResult> {
    let eta = channel_transmittance(ch, det);
    evaluate(&forward_observation(src, eta, det, e_opt), src, protocol)
}

/// Analytic secure key rate for each fiber length at `loss_db_per_km`,
/// with no attenuator in the link.
pub fn sweep_distance(
    src: &SourceConfig,
    det: &DetectorConfig,
    protocol: &ProtocolConfig,
    e_opt: f64,
    loss_db_per_km: f64,
    lengths: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if lengths.is_empty() {
        return invalid("distance sweep needs at least one length");
    }
    lengths
        .iter()
        .map(|&length_km| {
            let ch = ChannelConfig { length_km, loss_db_per_km, fixed_loss_db: 0.0 };
            ch.validate()?;
            Ok((length_km, operating_point(src, &ch, det, protocol, e_opt)?.secure_rate_bps))
        })
        .collect()
}
