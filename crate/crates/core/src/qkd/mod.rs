//! Decoy-state BB84 performance model (signal, weak decoy and vacuum states).
//!
//! The model works at the level of gains and error rates: the channel and
//! detectors enter through a single transmittance η and a background yield
//! Y₀; the interferometer enters through the optical error rate e_opt.

mod calibrate;
mod model;
mod session;

pub use calibrate::{calibrate, CalibrationReport, CalibrationTargets};
pub use model::{
    binary_entropy, channel_transmittance, decoy_bounds, evaluate, forward_observation,
    gain_and_qber, operating_point, qber_from_optics, secure_key_rate, sweep_distance,
    DecoyBounds, KeyRateResult, Observation, ERROR_RATE_BACKGROUND,
};
pub use session::{simulate_session, SessionBin, SessionOptions, SessionResult, SessionSummary};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Weak-coherent source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    /// Signal-state mean photon number μ.
    pub mu_signal: f64,
    /// Decoy-state mean photon number ν.
    pub mu_decoy: f64,
    /// Relative frequencies of (signal, decoy, vacuum) pulses.
    pub state_ratio: [u32; 3],
    /// Pulses per second.
    pub rep_rate: f64,
    /// Seconds.
    pub pulse_width: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        // μ = 0.6 with a 3:1 signal/decoy intensity ratio gives ν = 0.2.
        Self {
            mu_signal: 0.6,
            mu_decoy: 0.2,
            state_ratio: [6, 1, 1],
            rep_rate: 100e6,
            pulse_width: 500e-12,
        }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_decoy > 0.0 && self.mu_signal > self.mu_decoy && self.mu_signal.is_finite()) {
            return invalid(format!(
                "need mu_signal > mu_decoy > 0, got {} and {}",
                self.mu_signal, self.mu_decoy
            ));
        }
        if self.state_ratio.contains(&0) {
            return invalid("state ratio weights must be positive");
        }
        if !(self.rep_rate > 0.0 && self.rep_rate.is_finite()) {
            return invalid("repetition rate must be positive");
        }
        if !(self.pulse_width > 0.0) {
            return invalid("pulse width must be positive");
        }
        Ok(())
    }

    /// Fractions of (signal, decoy, vacuum) pulses.
    pub fn state_fractions(&self) -> [f64; 3] {
        let total: f64 = self.state_ratio.iter().map(|&w| w as f64).sum();
        self.state_ratio.map(|w| w as f64 / total)
    }
}

/// Fiber link plus an optional attenuator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub length_km: f64,
    pub loss_db_per_km: f64,
    /// Extra attenuation in dB (a variable attenuator standing in for fiber).
    pub fixed_loss_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        // 50.4 km lab spool with 9.5 dB loss.
        Self { length_km: 50.4, loss_db_per_km: 9.5 / 50.4, fixed_loss_db: 0.0 }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.length_km, self.loss_db_per_km, self.fixed_loss_db];
        if vals.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            invalid("channel length and losses must be finite and non-negative")
        }
    }

    pub fn total_loss_db(&self) -> f64 {
        self.length_km * self.loss_db_per_km + self.fixed_loss_db
    }
}

/// Gated single-photon detectors at Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    pub efficiency: f64,
    /// Dark-count probability per gate, per detector.
    pub dark_count_per_gate: f64,
    /// Seconds.
    pub gate_width: f64,
    pub num_detectors: u32,
    pub receiver_insertion_loss_db: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            efficiency: 0.10,
            dark_count_per_gate: 1e-6,
            gate_width: 1e-9,
            num_detectors: 4,
            receiver_insertion_loss_db: 2.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) || !(0.0..=1.0).contains(&self.dark_count_per_gate) {
            return invalid("detector efficiency and dark-count probability must lie in [0, 1]");
        }
        if !(self.gate_width > 0.0) {
            return invalid("gate width must be positive");
        }
        if self.num_detectors == 0 {
            return invalid("need at least one detector");
        }
        if !(self.receiver_insertion_loss_db >= 0.0 && self.receiver_insertion_loss_db.is_finite()) {
            return invalid("receiver insertion loss must be non-negative");
        }
        Ok(())
    }

    /// Background yield Y₀: probability that at least one detector fires
    /// from dark counts in a gate.
    pub fn background_yield(&self) -> f64 {
        1.0 - (1.0 - self.dark_count_per_gate).powi(self.num_detectors as i32)
    }
}

/// Post-processing and interferometer quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    /// Fraction of detections kept after basis reconciliation.
    pub basis_sifting: f64,
    /// Error-correction inefficiency f(E) ≥ 1.
    pub f_ec: f64,
    /// Interference visibility at zero phase error.
    pub intrinsic_visibility: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self { basis_sifting: 0.5, f_ec: 1.16, intrinsic_visibility: 0.985 }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.basis_sifting > 0.0 && self.basis_sifting <= 1.0) {
            return invalid("basis sifting factor must lie in (0, 1]");
        }
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            return invalid("error-correction inefficiency must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.intrinsic_visibility) {
            return invalid("intrinsic visibility must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Random walk of the interferometer phase mismatch Δα + Δβ with periodic
/// active compensation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftModel {
    /// Standard deviation of the per-step phase increment (radians).
    pub phase_sigma: f64,
    /// Steps between compensations; 0 disables compensation.
    pub compensation_interval: u32,
    /// After compensation the phase error is uniform in ±residual (radians).
    pub compensation_residual: f64,
}

impl Default for DriftModel {
    fn default() -> Self {
        Self { phase_sigma: 0.0, compensation_interval: 0, compensation_residual: 0.0 }
    }
}

impl DriftModel {
    pub fn validate(&self) -> Result<()> {
        if self.phase_sigma >= 0.0 && self.compensation_residual >= 0.0
            && self.phase_sigma.is_finite() && self.compensation_residual.is_finite()
        {
            Ok(())
        } else {
            invalid("drift parameters must be finite and non-negative")
        }
    }

    /// Long-run average of `cos(phase error)` over a compensation cycle.
    ///
    /// A compensated error `r ~ U(−R, R)` contributes `sin R / R`; `k` steps of
    /// Gaussian walk contribute `exp(−kσ²/2)`. Without compensation the walk
    /// is unbounded and the factor is taken over the first `horizon` steps.
    pub fn mean_cos_factor(&self, horizon: usize) -> f64 {
        let r = self.compensation_residual;
        let residual = if r > 0.0 { r.sin() / r } else { 1.0 };
        let cycle = match self.compensation_interval {
            0 => horizon.max(1),
            n => n as usize,
        };
        let walk = (0..cycle)
            .map(|k| (-(k as f64) * self.phase_sigma.powi(2) / 2.0).exp())
            .sum::<f64>()
            / cycle as f64;
        if self.compensation_interval == 0 {
            // the walk starts from zero, not from a compensated residual
            walk
        } else {
            residual * walk
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_source_intensity_and_state_ratios() {
        let s = SourceConfig::default();
        assert!((s.mu_signal / s.mu_decoy - 3.0).abs() < 1e-12);
        assert_eq!(s.state_fractions()[0], 0.75);
        s.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        assert!(SourceConfig { mu_decoy: 0.6, ..Default::default() }.validate().is_err());
        assert!(ChannelConfig { length_km: -1.0, ..Default::default() }.validate().is_err());
        assert!(DetectorConfig { efficiency: 1.5, ..Default::default() }.validate().is_err());
        assert!(ProtocolConfig { f_ec: 0.9, ..Default::default() }.validate().is_err());
        assert!(DriftModel { phase_sigma: -0.1, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn background_yield_sums_detectors() {
        let d = DetectorConfig { dark_count_per_gate: 1e-6, num_detectors: 4, ..Default::default() };
        assert!((d.background_yield() - 4e-6).abs() < 1e-11);
    }

    #[test]
    fn lab_spool_loss() {
        assert!((ChannelConfig::default().total_loss_db() - 9.5).abs() < 1e-12);
    }

    #[test]
    fn mean_cos_factor_limits() {
        assert_eq!(DriftModel::default().mean_cos_factor(10), 1.0);
        let d = DriftModel { phase_sigma: 0.0, compensation_interval: 5, compensation_residual: 0.1 };
        assert!((d.mean_cos_factor(10) - 0.1f64.sin() / 0.1).abs() < 1e-15);
    }
}
