//! Fit of the unpublished detector and interferometer parameters to the
//! measured operating points.
//!
//! Three quantities are unknown: detector efficiency, dark-count
//! probability and intrinsic interference visibility. Three targets pin
//! them: the mean QBER and key rate on the lab spool, and the key rate with
//! an extra 10 dB of attenuation. The fit is a nested bisection:
//!
//! 1. for given efficiency and dark counts, the visibility follows in closed
//!    form from the QBER target (the signal QBER is affine in e_opt);
//! 2. for given dark counts, the efficiency is bisected to hit the near rate;
//! 3. the dark-count probability is bisected to hit the far rate, which is
//!    what dark counts dominate.
//!
//! Drift is accounted for through [`DriftModel::mean_cos_factor`], so the
//! targets are met by the session average rather than the drift-free point.

use serde::{Deserialize, Serialize};

use super::model::{operating_point, ERROR_RATE_BACKGROUND};
use super::{channel_transmittance, ChannelConfig, DetectorConfig, DriftModel, ProtocolConfig, SourceConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationTargets {
    pub qber: f64,
    pub rate_bps: f64,
    pub far_rate_bps: f64,
    pub near: ChannelConfig,
    pub far: ChannelConfig,
    /// Session length in drift steps, used when compensation is disabled.
    pub horizon_steps: usize,
    pub efficiency_range: [f64; 2],
    pub dark_count_range: [f64; 2],
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        let near = ChannelConfig::default();
        Self {
            qber: 0.0083,
            rate_bps: 7340.0,
            far_rate_bps: 250.0,
            near,
            far: ChannelConfig { fixed_loss_db: 10.0, ..near },
            horizon_steps: 120,
            efficiency_range: [1e-4, 1.0],
            dark_count_range: [1e-10, 1e-4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub detector: DetectorConfig,
    pub protocol: ProtocolConfig,
    /// Drift-averaged predictions at the fitted parameters.
    pub qber: f64,
    pub rate_bps: f64,
    pub far_rate_bps: f64,
}

struct Fit<'a> {
    src: &'a SourceConfig,
    det: DetectorConfig,
    protocol: ProtocolConfig,
    cos_factor: f64,
    targets: &'a CalibrationTargets,
}

/// Drift-averaged optical error and the visibility realizing it.
struct Optics {
    e_opt: f64,
    visibility: f64,
}

impl Fit<'_> {
    fn detector(&self, efficiency: f64, dark: f64) -> DetectorConfig {
        DetectorConfig { efficiency, dark_count_per_gate: dark, ..self.det }
    }

    fn optics(&self, det: &DetectorConfig) -> Option<Optics> {
        let eta = channel_transmittance(&self.targets.near, det);
        let y0 = det.background_yield();
        let signal = -(-eta * self.src.mu_signal).exp_m1();
        let e_opt = (self.targets.qber * (y0 + signal) - ERROR_RATE_BACKGROUND * y0) / signal;
        let visibility = (1.0 - 2.0 * e_opt) / self.cos_factor;
        (e_opt >= 0.0 && visibility <= 1.0).then_some(Optics { e_opt, visibility })
    }

    fn rate(&self, ch: &ChannelConfig, det: &DetectorConfig, e_opt: f64) -> Result<f64> {
        Ok(operating_point(self.src, ch, det, &self.protocol, e_opt)?.secure_rate_bps)
    }

    fn near_rate(&self, efficiency: f64, dark: f64) -> Result<f64> {
        let det = self.detector(efficiency, dark);
        match self.optics(&det) {
            Some(o) => self.rate(&self.targets.near, &det, o.e_opt),
            None => Ok(0.0),
        }
    }

    fn efficiency_for(&self, dark: f64) -> Result<f64> {
        let [lo, hi] = self.targets.efficiency_range;
        bisect_log(lo, hi, |eff| Ok(self.near_rate(eff, dark)? - self.targets.rate_bps))
    }

    /// Far rate with the near targets met; zero when the dark counts are so
    /// high that the near QBER and rate cannot both be reached.
    fn far_rate(&self, dark: f64) -> Result<f64> {
        let Ok(efficiency) = self.efficiency_for(dark) else {
            return Ok(0.0);
        };
        let det = self.detector(efficiency, dark);
        let near = self.near_rate(efficiency, dark)?;
        match self.optics(&det) {
            Some(o) if (near / self.targets.rate_bps - 1.0).abs() < 1e-6 => {
                self.rate(&self.targets.far, &det, o.e_opt)
            }
            _ => Ok(0.0),
        }
    }
}

/// Root of an increasing-or-decreasing `f` on `[lo, hi]`, bisecting in log space.
fn bisect_log(lo: f64, hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let fa = f(lo)?;
    let fb = f(hi)?;
    if fa.signum() == fb.signum() {
        return Err(Error::Calibration(format!(
            "target not bracketed on [{lo:e}, {hi:e}] (residuals {fa:e}, {fb:e})"
        )));
    }
    let rising = fb > fa;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m.exp())?;
        if (fm < 0.0) == rising {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Fit detector efficiency, dark-count probability and intrinsic visibility
/// so the drift-averaged model reproduces `targets`. Every other field of
/// `det` and `protocol` is kept.
pub fn calibrate(
    src: &SourceConfig,
    det: &DetectorConfig,
    protocol: &ProtocolConfig,
    drift: &DriftModel,
    targets: &CalibrationTargets,
) -> Result<CalibrationReport> {
    src.validate()?;
    det.validate()?;
    protocol.validate()?;
    drift.validate()?;
    let fit = Fit {
        src,
        det: *det,
        protocol: *protocol,
        cos_factor: drift.mean_cos_factor(targets.horizon_steps),
        targets,
    };
    let [lo, hi] = targets.dark_count_range;
    let dark = bisect_log(lo, hi, |d| Ok(fit.far_rate(d)? - targets.far_rate_bps))?;
    let efficiency = fit.efficiency_for(dark)?;
    let detector = fit.detector(efficiency, dark);
    let optics = fit
        .optics(&detector)
        .ok_or_else(|| Error::Calibration("QBER target unreachable".into()))?;
    let protocol = ProtocolConfig { intrinsic_visibility: optics.visibility, ..*protocol };
    let near = operating_point(src, &targets.near, &detector, &protocol, optics.e_opt)?;
    Ok(CalibrationReport {
        detector,
        protocol,
        qber: near.qber_observed,
        rate_bps: near.secure_rate_bps,
        far_rate_bps: fit.rate(&targets.far, &detector, optics.e_opt)?,
    })
}
