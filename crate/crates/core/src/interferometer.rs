//! Alice–channel–Bob system of two unbalanced Michelson interferometers.
//!
//! A pulse reaches Bob's detector along two indistinguishable paths:
//!
//! * P1: Alice's long arm, the channel, Bob's short arm;
//! * P2: Alice's short arm, the channel, Bob's long arm.
//!
//! Each path carries a 2×2 polarization operator and a scalar phase, kept
//! separately so phase differences are exact. The scalar phase of an arm is
//! `arm_phase + phase_shift`; the usual layout puts the phase shifter in the
//! long arm of each interferometer, which attaches φ_a to P1 and φ_b to P2.
//! Putting it in the short arm instead flips the sign of Δφ.
//!
//! With QWP reflectors on every arm both path operators equal
//! `QR·C·QR` and the detected power is `(P_in/8)(1 + cos Δ)` with
//! `Δ = θ₁ − θ₂` the path phase difference, whatever the channel `C`, the
//! fiber birefringence or the input polarization.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::optics::{arm_polarization_operator, ArmSpec, MirrorKind};
use crate::su2::{haar_random_su2, Complex, JonesVector, Matrix2c, TOL_ALG};

/// Field amplitude factor of an ideal link: a 50/50 coupler crossed twice per
/// interferometer gives `(1/√2)⁴ = 1/4`.
pub const IDEAL_COUPLER_AMPLITUDE: f64 = 0.25;

/// Phase-shifter samples per fringe used by [`fading_scan`].
pub const DEFAULT_SWEEP_POINTS: usize = 64;

/// Complete description of the two-interferometer link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub alice_long: ArmSpec,
    pub alice_short: ArmSpec,
    pub bob_long: ArmSpec,
    pub bob_short: ArmSpec,
    /// Polarization transformation `C` of the transmission fiber.
    pub channel_unitary: Matrix2c,
    /// Scalar phase ϕ of the transmission fiber; common to both paths.
    pub channel_phase: f64,
    pub coupler_amplitude: f64,
}

impl LinkSpec {
    /// All four arms use `mirror`, with the given fiber birefringences
    /// `[alice_long, alice_short, bob_long, bob_short]`.
    pub fn uniform(mirror: MirrorKind, deltas: [f64; 4], channel: Matrix2c) -> Self {
        Self {
            alice_long: ArmSpec::new(mirror, deltas[0]),
            alice_short: ArmSpec::new(mirror, deltas[1]),
            bob_long: ArmSpec::new(mirror, deltas[2]),
            bob_short: ArmSpec::new(mirror, deltas[3]),
            channel_unitary: channel,
            channel_phase: 0.0,
            coupler_amplitude: IDEAL_COUPLER_AMPLITUDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for arm in [&self.alice_long, &self.alice_short, &self.bob_long, &self.bob_short] {
            arm.validate()?;
        }
        if !self.channel_unitary.is_unitary(TOL_ALG) {
            return invalid("channel operator must be unitary");
        }
        if !self.channel_phase.is_finite() {
            return invalid("channel phase must be finite");
        }
        if !(self.coupler_amplitude > 0.0 && self.coupler_amplitude <= 1.0) {
            return invalid(format!("coupler amplitude {} outside (0, 1]", self.coupler_amplitude));
        }
        Ok(())
    }

    /// `θ₁ − θ₂`, the phase difference between the two paths.
    pub fn path_phase_difference(&self) -> f64 {
        path_operator(self, PathKind::P1).1 - path_operator(self, PathKind::P2).1
    }
}

/// One of the two interfering paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    /// Alice long arm → channel → Bob short arm.
    P1,
    /// Alice short arm → channel → Bob long arm.
    P2,
}

/// Round-trip polarization operator and scalar phase of an arm.
pub fn arm_operator(arm: &ArmSpec) -> (Matrix2c, f64) {
    (
        arm_polarization_operator(arm.fiber_delta, arm.mirror),
        arm.arm_phase + arm.phase_shift,
    )
}

/// The anti-disturbance condition `L†·S ∝ I` or `L ∝ S`, up to global phase.
pub fn check_anti_disturbance(long: &Matrix2c, short: &Matrix2c, tol: f64) -> bool {
    (long.dagger() * *short).proportional_to(&Matrix2c::identity(), tol)
        || long.proportional_to(short, tol)
}

pub fn path_operator(link: &LinkSpec, kind: PathKind) -> (Matrix2c, f64) {
    let (first, second) = match kind {
        PathKind::P1 => (&link.alice_long, &link.bob_short),
        PathKind::P2 => (&link.alice_short, &link.bob_long),
    };
    let (a_op, a_phase) = arm_operator(first);
    let (b_op, b_phase) = arm_operator(second);
    (
        b_op * link.channel_unitary * a_op,
        a_phase + link.channel_phase + b_phase,
    )
}

/// The two path contributions `e^{iθₖ}·opₖ·E_in`, before the coupler factor.
fn path_fields(link: &LinkSpec, e_in: &JonesVector) -> (JonesVector, JonesVector) {
    let (op1, th1) = path_operator(link, PathKind::P1);
    let (op2, th2) = path_operator(link, PathKind::P2);
    (
        op1.apply(e_in).scale(Complex::from_polar(1.0, th1)),
        op2.apply(e_in).scale(Complex::from_polar(1.0, th2)),
    )
}

/// Field at Bob's output port.
pub fn output_field(link: &LinkSpec, e_in: &JonesVector) -> JonesVector {
    let (a, b) = path_fields(link, e_in);
    (a + b).scale(Complex::new(link.coupler_amplitude, 0.0))
}

pub fn interference_power(link: &LinkSpec, e_in: &JonesVector) -> f64 {
    output_field(link, e_in).power()
}

/// `(P_in/8)·(1 + cos(Δα + Δβ + Δφ))`.
pub fn predicted_power(p_in: f64, delta_alpha: f64, delta_beta: f64, delta_phi: f64) -> Result<f64> {
    if !(p_in >= 0.0) {
        return invalid(format!("input power must be non-negative, got {p_in}"));
    }
    Ok(p_in / 8.0 * (1.0 + (delta_alpha + delta_beta + delta_phi).cos()))
}

/// Input polarizations probed when searching for the worst-case fringe:
/// the 26 directions of a cube's vertices, edge midpoints and face centres
/// on the Poincaré sphere.
pub fn polarization_grid() -> Vec<JonesVector> {
    let mut dirs = Vec::with_capacity(26);
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if (x, y, z) != (0, 0, 0) {
                    dirs.push(JonesVector::from_direction([x as f64, y as f64, z as f64]));
                }
            }
        }
    }
    dirs
}

/// Fringe of a single input state as φ_a sweeps `[0, 2π)`.
///
/// The detected power is exactly `a₀ + a₁cos ψ + b₁sin ψ` in the phase-shifter
/// setting ψ, so the sweep samples are reduced to that first-harmonic fit
/// and the extremes are taken from it: `P_max/min = a₀ ± √(a₁² + b₁²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fringe {
    pub mean: f64,
    pub amplitude: f64,
    /// Largest deviation of a sweep sample from the fitted sinusoid.
    pub fit_residual: f64,
}

impl Fringe {
    pub fn visibility(&self) -> f64 {
        if self.mean > 0.0 {
            (self.amplitude / self.mean).min(1.0)
        } else {
            0.0
        }
    }
}

/// Sweep Alice's phase shifter over `sweep_points` equally spaced settings.
pub fn phase_sweep(link: &LinkSpec, e_in: &JonesVector, sweep_points: usize) -> Vec<f64> {
    let base = link.alice_long.phase_shift;
    (0..sweep_points)
        .map(|j| {
            let mut l = *link;
            l.alice_long.phase_shift = base + 2.0 * PI * j as f64 / sweep_points as f64;
            interference_power(&l, e_in)
        })
        .collect()
}

pub fn fit_fringe(samples: &[f64]) -> Fringe {
    let n = samples.len() as f64;
    let step = 2.0 * PI / n;
    let (mut a0, mut a1, mut b1) = (0.0, 0.0, 0.0);
    for (j, p) in samples.iter().enumerate() {
        let (s, c) = (step * j as f64).sin_cos();
        a0 += p;
        a1 += p * c;
        b1 += p * s;
    }
    a0 /= n;
    a1 *= 2.0 / n;
    b1 *= 2.0 / n;
    let fit_residual = samples
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let (s, c) = (step * j as f64).sin_cos();
            (p - (a0 + a1 * c + b1 * s)).abs()
        })
        .fold(0.0, f64::max);
    Fringe { mean: a0, amplitude: a1.hypot(b1), fit_residual }
}

/// Worst-case fringe visibility `(P_max − P_min)/(P_max + P_min)` over
/// [`polarization_grid`] as Alice's phase shifter sweeps one period in
/// `sweep_points` steps.
pub fn visibility(link: &LinkSpec, sweep_points: usize) -> Result<f64> {
    if sweep_points < 8 {
        return invalid(format!("need at least 8 sweep points, got {sweep_points}"));
    }
    link.validate()?;
    Ok(polarization_grid()
        .iter()
        .map(|e| fit_fringe(&phase_sweep(link, e, sweep_points)).visibility())
        .fold(1.0, f64::min))
}

/// Visibility statistics of a Monte-Carlo fading scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadingSummary {
    pub scheme: MirrorKind,
    pub samples: usize,
    pub min: f64,
    pub mean: f64,
    pub p5: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FadingScan {
    pub visibilities: Vec<f64>,
    pub summary: FadingSummary,
}

/// Random link for sample `index` of a scan seeded with `seed`.
///
/// Every sample owns an independent ChaCha stream, so scans are identical
/// whether samples are evaluated sequentially or in parallel.
pub fn random_link(scheme: MirrorKind, seed: u64, index: u64) -> LinkSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let channel = haar_random_su2(&mut rng);
    let mut deltas = [0.0; 4];
    for d in &mut deltas {
        *d = rng.random::<f64>() * 2.0 * PI;
    }
    let mut link = LinkSpec::uniform(scheme, deltas, channel);
    for arm in [&mut link.alice_long, &mut link.alice_short, &mut link.bob_long, &mut link.bob_short] {
        arm.arm_phase = rng.random::<f64>() * 2.0 * PI;
    }
    link.channel_phase = rng.random::<f64>() * 2.0 * PI;
    link
}

/// Visibility over `samples` links with Haar-random channel and uniform arm
/// birefringence.
pub fn fading_scan(scheme: MirrorKind, samples: usize, seed: u64) -> Result<FadingScan> {
    if samples == 0 {
        return invalid("fading scan needs at least one sample");
    }
    let visibilities = (0..samples as u64)
        .into_par_iter()
        .map(|i| visibility(&random_link(scheme, seed, i), DEFAULT_SWEEP_POINTS))
        .collect::<Result<Vec<f64>>>()?;
    let summary = summarize(scheme, &visibilities);
    Ok(FadingScan { visibilities, summary })
}

fn summarize(scheme: MirrorKind, v: &[f64]) -> FadingSummary {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    // nearest-rank 5th percentile
    let rank = ((0.05 * v.len() as f64).ceil() as usize).max(1) - 1;
    FadingSummary {
        scheme,
        samples: v.len(),
        min: sorted[0],
        mean: v.iter().sum::<f64>() / v.len() as f64,
        p5: sorted[rank],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::mirror_operator;
    use crate::su2::pauli;

    fn qm_link(seed: u64) -> LinkSpec {
        random_link(MirrorKind::QwpReflector, seed, 0)
    }

    #[test]
    fn qwpr_arm_operator() {
        let arm = ArmSpec::new(MirrorKind::QwpReflector, 1.234).with_phases(0.7, 0.0);
        let (op, phase) = arm_operator(&arm);
        assert!(op.max_abs_diff(&pauli(2).unwrap().scale(Complex::i())) < 1e-12);
        assert_eq!(phase, 0.7);
    }

    #[test]
    fn plain_arm_without_birefringence() {
        let arm = ArmSpec::new(MirrorKind::PlainMirror, 0.0).with_phases(0.3, 0.2);
        let (op, phase) = arm_operator(&arm);
        assert!(op.max_abs_diff(&Matrix2c::identity()) < 1e-15);
        assert!((phase - 0.5).abs() < 1e-15);
        let (op, _) = arm_operator(&ArmSpec::new(MirrorKind::FaradayMirror, 2.0));
        assert!(op.proportional_to(&pauli(3).unwrap(), 1e-12));
    }

    #[test]
    fn anti_disturbance_examples() {
        let isig2 = pauli(2).unwrap().scale(Complex::i());
        assert!(check_anti_disturbance(&isig2, &isig2, 1e-12));
        let fm = mirror_operator(MirrorKind::FaradayMirror);
        assert!(check_anti_disturbance(&fm, &fm.scale(Complex::new(-1.0, 0.0)), 1e-12));
        let l = arm_polarization_operator(0.0, MirrorKind::PlainMirror);
        let s = arm_polarization_operator(PI / 2.0, MirrorKind::PlainMirror);
        assert!(!check_anti_disturbance(&l, &s, 1e-6));
    }

    #[test]
    fn qm_paths_share_qr_c_qr() {
        let link = qm_link(4);
        let qr = mirror_operator(MirrorKind::QwpReflector);
        let target = qr * link.channel_unitary * qr;
        for kind in [PathKind::P1, PathKind::P2] {
            let (op, _) = path_operator(&link, kind);
            assert!(op.proportional_to(&target, 1e-12));
        }
    }

    #[test]
    fn trivial_plain_link_phases() {
        let mut link = LinkSpec::uniform(MirrorKind::PlainMirror, [0.0; 4], Matrix2c::identity());
        link.alice_long.arm_phase = 0.1;
        link.bob_short.arm_phase = 0.2;
        link.channel_phase = 0.4;
        let (op, phase) = path_operator(&link, PathKind::P1);
        assert_eq!(op, Matrix2c::identity());
        assert!((phase - 0.7).abs() < 1e-15);
    }

    #[test]
    fn path_operators_unitary() {
        for scheme in MirrorKind::ALL {
            for i in 0..20 {
                let link = random_link(scheme, 17, i);
                for kind in [PathKind::P1, PathKind::P2] {
                    assert!(path_operator(&link, kind).0.is_unitary(1e-12));
                }
            }
        }
    }

    fn with_difference(mut link: LinkSpec, target: f64) -> LinkSpec {
        let current = link.path_phase_difference();
        link.alice_long.phase_shift += target - current;
        link
    }

    #[test]
    fn constructive_and_destructive() {
        let e = JonesVector::from_bloch(0.4, 2.0);
        let link = with_difference(qm_link(9), 0.0);
        assert!((interference_power(&link, &e) - 0.25).abs() < 1e-12);
        let link = with_difference(link, PI);
        let out = output_field(&link, &e);
        assert!(out.power() < 1e-24);
        let link = with_difference(link, PI / 2.0);
        assert!((interference_power(&link, &e) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn predicted_power_closed_form() {
        assert_eq!(predicted_power(8.0, 0.0, 0.0, 0.0).unwrap(), 2.0);
        assert!(predicted_power(8.0, PI, 0.0, 0.0).unwrap().abs() < 1e-15);
        assert!(predicted_power(-1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn channel_phase_cancels() {
        let e = JonesVector::from_bloch(1.0, 0.5);
        let mut link = qm_link(12);
        let base = interference_power(&link, &e);
        for phi in [0.3, 1.9, -4.0] {
            link.channel_phase = phi;
            assert!((interference_power(&link, &e) - base).abs() < 1e-14);
        }
    }

    #[test]
    fn qm_visibility_is_unity() {
        for i in 0..20 {
            let v = visibility(&random_link(MirrorKind::QwpReflector, 2, i), 32).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn plain_link_without_birefringence_has_full_fringe() {
        let link = LinkSpec::uniform(MirrorKind::PlainMirror, [0.0; 4], Matrix2c::identity());
        assert!((visibility(&link, 16).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn visibility_rejects_coarse_sweep() {
        assert!(visibility(&qm_link(1), 7).is_err());
    }

    #[test]
    fn link_validation() {
        let mut link = qm_link(1);
        link.coupler_amplitude = 0.0;
        assert!(link.validate().is_err());
        link.coupler_amplitude = 0.25;
        link.channel_unitary = Matrix2c::identity().scale(Complex::new(0.5, 0.0));
        assert!(link.validate().is_err());
    }

    #[test]
    fn grid_has_26_unit_states() {
        let g = polarization_grid();
        assert_eq!(g.len(), 26);
        assert!(g.iter().all(|v| (v.power() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn summary_percentile() {
        let v: Vec<f64> = (1..=100).map(|x| x as f64 / 100.0).collect();
        let s = summarize(MirrorKind::PlainMirror, &v);
        assert_eq!(s.min, 0.01);
        assert_eq!(s.p5, 0.05);
        assert!((s.mean - 0.505).abs() < 1e-12);
    }

    #[test]
    fn fading_scan_rejects_zero_samples() {
        assert!(fading_scan(MirrorKind::QwpReflector, 0, 1).is_err());
    }
}
