//! Operators for the physical elements of an interferometer arm.
//!
//! Round trips use the reciprocity rule: a reciprocal element traversed
//! backwards contributes the transpose of its forward operator, so an arm
//! with forward chain `F` and end mirror `M` acts as `Fᵗ·M·F`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::su2::{u_raw, JonesVector, Matrix2c, TOL_ALG};

/// End reflector of an interferometer arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MirrorKind {
    /// Quarter-wave plate at 45° to the fiber axes, backed by a total reflector.
    QwpReflector,
    /// 45° Faraday rotator plus mirror.
    FaradayMirror,
    /// Bare mirror; the polarization-fading baseline.
    PlainMirror,
}

impl MirrorKind {
    pub const ALL: [MirrorKind; 3] = [Self::QwpReflector, Self::FaradayMirror, Self::PlainMirror];

    pub fn name(self) -> &'static str {
        match self {
            Self::QwpReflector => "qwp-reflector",
            Self::FaradayMirror => "faraday-mirror",
            Self::PlainMirror => "plain-mirror",
        }
    }
}

impl std::fmt::Display for MirrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MirrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown mirror kind {s:?}")))
    }
}

/// One arm of an unbalanced Michelson interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    /// Birefringence strength δ of the arm's PM fiber (radians).
    #[serde(default)]
    pub fiber_delta: f64,
    pub mirror: MirrorKind,
    /// Phase-shifter setting (radians); zero when the arm has no shifter.
    #[serde(default)]
    pub phase_shift: f64,
    /// Scalar propagation phase of the arm (radians).
    #[serde(default)]
    pub arm_phase: f64,
}

impl ArmSpec {
    pub fn new(mirror: MirrorKind, fiber_delta: f64) -> Self {
        Self { fiber_delta, mirror, phase_shift: 0.0, arm_phase: 0.0 }
    }

    pub fn with_phases(mut self, arm_phase: f64, phase_shift: f64) -> Self {
        self.arm_phase = arm_phase;
        self.phase_shift = phase_shift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if [self.fiber_delta, self.phase_shift, self.arm_phase].iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            invalid("arm angles must be finite")
        }
    }
}

/// PM fiber of birefringence strength `delta`: `U(δ/2, 1, 0, 0) = diag(e^{iδ/2}, e^{−iδ/2})`.
pub fn pm_fiber_operator(delta: f64) -> Matrix2c {
    u_raw(delta / 2.0, [1.0, 0.0, 0.0])
}

/// Forward operator of several fiber segments traversed in order.
pub fn fiber_chain(deltas: &[f64]) -> Matrix2c {
    deltas
        .iter()
        .fold(Matrix2c::identity(), |acc, &d| pm_fiber_operator(d) * acc)
}

/// Reflection operator in the transpose round-trip convention.
///
/// The QWP reflector is `U(π/4,0,1,0)ᵗ·U(π/4,0,1,0) = U(π/2,0,1,0) = iσ₂`;
/// the Faraday mirror is taken as `iσ₃` (its absolute phase is a free
/// convention); the plain mirror is the identity.
pub fn mirror_operator(kind: MirrorKind) -> Matrix2c {
    match kind {
        MirrorKind::QwpReflector => {
            let qwp = u_raw(PI / 4.0, [0.0, 1.0, 0.0]);
            qwp.transpose() * qwp
        }
        MirrorKind::FaradayMirror => u_raw(PI / 2.0, [0.0, 0.0, 1.0]),
        MirrorKind::PlainMirror => Matrix2c::identity(),
    }
}

/// `forwardᵗ · mirror · forward`; both inputs must be unitary.
pub fn roundtrip(forward: &Matrix2c, mirror: &Matrix2c) -> Result<Matrix2c> {
    if !forward.is_unitary(TOL_ALG) || !mirror.is_unitary(TOL_ALG) {
        return invalid("roundtrip requires unitary forward and mirror operators");
    }
    Ok(roundtrip_unchecked(forward, mirror))
}

pub(crate) fn roundtrip_unchecked(forward: &Matrix2c, mirror: &Matrix2c) -> Matrix2c {
    forward.transpose() * *mirror * *forward
}

/// Round-trip polarization operator of an arm (fiber, mirror, fiber back).
pub fn arm_polarization_operator(fiber_delta: f64, mirror: MirrorKind) -> Matrix2c {
    roundtrip_unchecked(&pm_fiber_operator(fiber_delta), &mirror_operator(mirror))
}

/// Field reflected by a bare QWP reflector: X ↔ Y exchange up to a phase.
pub fn qwpr_reflection_action(v: &JonesVector) -> JonesVector {
    mirror_operator(MirrorKind::QwpReflector).apply(v)
}

/// Field reflected by a bare Faraday mirror: `(x, y) → (−y, x)`, always
/// orthogonal to the incident state.
pub fn faraday_reflection_action(v: &JonesVector) -> JonesVector {
    mirror_operator(MirrorKind::FaradayMirror).apply(v)
}
