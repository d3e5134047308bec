//! Scenario files.
//!
//! A scenario is a TOML document; every table is optional and falls back to
//! the defaults of the corresponding type. Unknown keys are rejected.
//!
//! ```toml
//! name = "paper-50km"
//! seed = 20180301
//!
//! [fading]
//! schemes = ["qwp-reflector", "faraday-mirror", "plain-mirror"]
//! samples = 1000
//!
//! [source]            # SourceConfig
//! [channel]           # ChannelConfig
//! [detector]          # DetectorConfig
//! [protocol]          # ProtocolConfig
//! [drift]             # DriftModel
//! [session]           # duration_s, bin_s, shot_noise
//! [sweep]             # loss_db_per_km, lengths_km
//! [calibration]       # enabled, targets
//! ```
//!
//! Three presets ship with the binary: `paper-50km`, `paper-100km` and
//! `fading-demo`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optics::MirrorKind;
use crate::qkd::{
    CalibrationTargets, ChannelConfig, DetectorConfig, DriftModel, ProtocolConfig, SessionOptions,
    SourceConfig,
};

pub const PRESETS: [(&str, &str); 3] = [
    ("paper-50km", include_str!("../presets/paper-50km.toml")),
    ("paper-100km", include_str!("../presets/paper-100km.toml")),
    ("fading-demo", include_str!("../presets/fading-demo.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingConfig {
    pub schemes: Vec<MirrorKind>,
    pub samples: usize,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self { schemes: MirrorKind::ALL.to_vec(), samples: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    pub duration_s: f64,
    pub bin_s: f64,
    pub shot_noise: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let o = SessionOptions::default();
        Self { duration_s: o.duration_s, bin_s: o.bin_s, shot_noise: o.shot_noise }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub loss_db_per_km: f64,
    pub lengths_km: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            loss_db_per_km: 0.2,
            lengths_km: vec![0.0, 10.0, 25.0, 50.4, 75.0, 100.0, 125.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    /// Fit detector and visibility parameters before running QKD commands.
    pub enabled: bool,
    pub targets: CalibrationTargets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub fading: FadingConfig,
    pub source: SourceConfig,
    pub channel: ChannelConfig,
    pub detector: DetectorConfig,
    pub protocol: ProtocolConfig,
    pub drift: DriftModel,
    pub session: SessionConfig,
    pub sweep: SweepConfig,
    pub calibration: CalibrationConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: 1,
            output_path: None,
            fading: FadingConfig::default(),
            source: SourceConfig::default(),
            channel: ChannelConfig::default(),
            detector: DetectorConfig::default(),
            protocol: ProtocolConfig::default(),
            drift: DriftModel::default(),
            session: SessionConfig::default(),
            sweep: SweepConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Self::from_toml(text).expect("bundled preset parses"))
    }

    /// Load a scenario file; a bare preset name is accepted when no file of
    /// that name exists.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            if let Some(cfg) = path.to_str().and_then(Self::preset) {
                return Ok(cfg);
            }
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |r: Result<()>| r.map_err(|e| Error::Config(e.to_string()));
        wrap(self.source.validate())?;
        wrap(self.channel.validate())?;
        wrap(self.detector.validate())?;
        wrap(self.protocol.validate())?;
        wrap(self.drift.validate())?;
        if self.fading.samples == 0 || self.fading.schemes.is_empty() {
            return Err(Error::Config("fading scan needs samples >= 1 and at least one scheme".into()));
        }
        if !(self.session.bin_s > 0.0 && self.session.duration_s >= self.session.bin_s) {
            return Err(Error::Config("session needs bin_s > 0 and duration_s >= bin_s".into()));
        }
        if !(self.sweep.loss_db_per_km >= 0.0) || self.sweep.lengths_km.iter().any(|l| !(*l >= 0.0)) {
            return Err(Error::Config("sweep losses and lengths must be non-negative".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn session_options(&self) -> SessionOptions {
        SessionOptions {
            duration_s: self.session.duration_s,
            bin_s: self.session.bin_s,
            seed: self.seed,
            shot_noise: self.session.shot_noise,
        }
    }
}
