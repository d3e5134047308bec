use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::model::{channel_transmittance, evaluate, forward_observation, qber_from_optics, Observation};
use super::{ChannelConfig, DetectorConfig, DriftModel, ProtocolConfig, SourceConfig};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionOptions {
    pub duration_s: f64,
    pub bin_s: f64,
    pub seed: u64,
    /// Sample detection and error counts per bin instead of using expectations.
    pub shot_noise: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self { duration_s: 7200.0, bin_s: 60.0, seed: 1, shot_noise: true }
    }
}

impl SessionOptions {
    pub fn num_bins(&self) -> usize {
        (self.duration_s / self.bin_s + 1e-9).floor() as usize
    }
}

/// One time bin of a session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionBin {
    /// Bin start time (seconds).
    pub t_s: f64,
    /// Residual interferometer phase mismatch during the bin.
    pub phase_error: f64,
    pub e_opt: f64,
    pub qber: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub bins: usize,
    pub mean_qber: f64,
    pub std_qber: f64,
    pub mean_rate_bps: f64,
    pub std_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub bins: Vec<SessionBin>,
    pub summary: SessionSummary,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    // shifted by the first sample so a constant series has exactly zero spread
    let n = xs.clone().count() as f64;
    let first = xs.clone().next().unwrap_or(0.0);
    let shift = xs.clone().map(|x| x - first).sum::<f64>() / n;
    let var = xs.map(|x| (x - first - shift).powi(2)).sum::<f64>() / n;
    (first + shift, var.sqrt())
}

/// Phase-error sequence: a Gaussian random walk, reset to a uniform residual
/// at every compensation step (including step 0).
struct DriftWalk {
    model: DriftModel,
    step: Option<Normal<f64>>,
    phase: f64,
    k: u64,
}

impl DriftWalk {
    fn new(model: DriftModel) -> Result<Self> {
        let step = if model.phase_sigma > 0.0 {
            Some(Normal::new(0.0, model.phase_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { model, step, phase: 0.0, k: 0 })
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> f64 {
        let interval = u64::from(self.model.compensation_interval);
        let compensate = interval > 0 && self.k.is_multiple_of(interval);
        if compensate {
            let r = self.model.compensation_residual;
            self.phase = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
        } else if self.k > 0 {
            if let Some(step) = &self.step {
                self.phase += step.sample(rng);
            }
        }
        self.k += 1;
        self.phase
    }
}

fn sample_binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> Result<u64> {
    let d = Binomial::new(n, p.clamp(0.0, 1.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(d.sample(rng))
}

/// Gain and error-rate estimates from one bin's finite pulse counts.
fn sample_observation<R: Rng>(
    rng: &mut R,
    expected: &Observation,
    pulses: [u64; 3],
) -> Result<Observation> {
    let mut estimate = |n: u64, gain: f64, qber: f64| -> Result<(f64, f64)> {
        if n == 0 {
            return Ok((0.0, 0.0));
        }
        let clicks = sample_binomial(rng, n, gain)?;
        let errors = sample_binomial(rng, clicks, qber)?;
        let e = if clicks > 0 { errors as f64 / clicks as f64 } else { 0.0 };
        Ok((clicks as f64 / n as f64, e))
    };
    let (q_signal, e_signal) = estimate(pulses[0], expected.q_signal, expected.e_signal)?;
    let (q_decoy, e_decoy) = estimate(pulses[1], expected.q_decoy, expected.e_decoy)?;
    let (y0, _) = estimate(pulses[2], expected.y0, 0.5)?;
    Ok(Observation { q_signal, e_signal, q_decoy, e_decoy, y0 })
}

/// Time series of QBER and secure key rate over a session with slow
/// interferometer phase drift and periodic compensation.
///
/// Each bin draws its phase error from the drift walk, converts it to an
/// optical error rate, and evaluates the decoy-state key rate from either
/// the expected gains or binomially sampled counts. Deterministic for a
/// given seed.
pub fn simulate_session(
    src: &SourceConfig,
    ch: &ChannelConfig,
    det: &DetectorConfig,
    protocol: &ProtocolConfig,
    drift: &DriftModel,
    opts: &SessionOptions,
) -> Result<SessionResult> {
    src.validate()?;
    ch.validate()?;
    det.validate()?;
    protocol.validate()?;
    drift.validate()?;
    if !(opts.bin_s > 0.0 && opts.duration_s >= opts.bin_s) {
        return invalid(format!(
            "need bin > 0 and duration >= bin, got bin={} duration={}",
            opts.bin_s, opts.duration_s
        ));
    }

    let eta = channel_transmittance(ch, det);
    let total_pulses = (src.rep_rate * opts.bin_s).round() as u64;
    let fractions = src.state_fractions();
    let pulses = fractions.map(|f| (total_pulses as f64 * f).floor() as u64);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut walk = DriftWalk::new(*drift)?;
    let mut bins = Vec::with_capacity(opts.num_bins());
    for k in 0..opts.num_bins() {
        let phase_error = walk.next(&mut rng);
        let e_opt = qber_from_optics(phase_error, protocol.intrinsic_visibility);
        let expected = forward_observation(src, eta, det, e_opt);
        let obs = if opts.shot_noise {
            sample_observation(&mut rng, &expected, pulses)?
        } else {
            expected
        };
        let res = evaluate(&obs, src, protocol)?;
        bins.push(SessionBin {
            t_s: k as f64 * opts.bin_s,
            phase_error,
            e_opt,
            qber: res.qber_observed,
            rate_bps: res.secure_rate_bps,
        });
    }

    let (mean_qber, std_qber) = mean_std(bins.iter().map(|b| b.qber));
    let (mean_rate_bps, std_rate_bps) = mean_std(bins.iter().map(|b| b.rate_bps));
    Ok(SessionResult {
        summary: SessionSummary { bins: bins.len(), mean_qber, std_qber, mean_rate_bps, std_rate_bps },
        bins,
    })
}
