//! Numerical identity suite behind `qmqkd algebra-check`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::interferometer::{check_anti_disturbance, interference_power, random_link};
use crate::optics::{arm_polarization_operator, mirror_operator, pm_fiber_operator, roundtrip, MirrorKind};
use crate::su2::{haar_random_su2, pauli, u_from_params, u_raw, Complex, JonesVector, Matrix2c, Su2Params};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

fn max_over<T>(items: impl IntoIterator<Item = T>, f: impl FnMut(T) -> f64) -> f64 {
    items.into_iter().map(f).fold(0.0, f64::max)
}

fn sigma(k: usize) -> Matrix2c {
    pauli(k).expect("index in range")
}

/// Residuals of the algebra and optical-element identities; `samples`
/// random draws per sampled identity.
pub fn residuals(samples: usize, seed: u64) -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i = Complex::i();
    let id = Matrix2c::identity();
    let i_sigma2 = sigma(2).scale(i);
    let qwpr = mirror_operator(MirrorKind::QwpReflector);
    let fm = mirror_operator(MirrorKind::FaradayMirror);
    let deltas: Vec<f64> = (0..samples).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
    let haar: Vec<Matrix2c> = (0..samples).map(|_| haar_random_su2(&mut rng)).collect();

    let mut out = vec![
        ("pauli_squares_identity", max_over(0..4, |k| (sigma(k) * sigma(k)).max_abs_diff(&id))),
        ("pauli_anticommute_2_1", (sigma(2) * sigma(1)).max_abs_diff(&-(sigma(1) * sigma(2)))),
        ("pauli_product_2_1_is_i_sigma3", (sigma(2) * sigma(1)).max_abs_diff(&sigma(3).scale(i))),
        ("u_half_pi_axis2_is_i_sigma2", u_raw(PI / 2.0, [0.0, 1.0, 0.0]).max_abs_diff(&i_sigma2)),
        ("qwpr_transposed_quarter_product", {
            let q = u_raw(PI / 4.0, [0.0, 1.0, 0.0]);
            (q.transpose() * q).max_abs_diff(&u_raw(PI / 2.0, [0.0, 1.0, 0.0]))
        }),
        ("u_params_unitary", {
            let params: Vec<Su2Params> = (0..samples).map(|_| Su2Params::random(&mut rng)).collect();
            max_over(&params, |p| u_from_params(p).map_or(f64::INFINITY, |u| u.unitarity_residual()))
        }),
        ("haar_unitary_unit_det", max_over(&haar, |u| {
            u.unitarity_residual().max((u.det() - Complex::new(1.0, 0.0)).norm())
        })),
        ("transpose_dagger_involution", max_over(&haar, |u| {
            u.transpose().transpose().max_abs_diff(u).max(u.dagger().dagger().max_abs_diff(u))
        })),
        ("mul_associative", max_over(haar.windows(3), |w| {
            ((w[0] * w[1]) * w[2]).max_abs_diff(&(w[0] * (w[1] * w[2])))
        })),
        ("fiber_symmetric", max_over(&deltas, |&d| {
            let f = pm_fiber_operator(d);
            f.transpose().max_abs_diff(&f)
        })),
        ("qwpr_long_arm_is_i_sigma2", max_over(&deltas, |&d| {
            roundtrip(&pm_fiber_operator(d), &qwpr).map_or(f64::INFINITY, |l| l.max_abs_diff(&i_sigma2))
        })),
        ("faraday_arm_proportional_sigma3", max_over(&deltas, |&d| {
            arm_polarization_operator(d, MirrorKind::FaradayMirror).fit_phase(&sigma(3)).1
        })),
        ("faraday_mirror_proportional_sigma3", fm.fit_phase(&sigma(3)).1),
        ("qwpr_exchanges_x_y", {
            let a = qwpr.apply(&JonesVector::x());
            let b = qwpr.apply(&JonesVector::y());
            a.ex.norm().max(b.ey.norm()).max((a.ey.norm() - 1.0).abs()).max((b.ex.norm() - 1.0).abs())
        }),
    ];

    // anti-disturbance holds for independent long/short birefringence
    let pairs: Vec<(f64, f64)> = deltas.iter().zip(deltas.iter().rev()).map(|(a, b)| (*a, *b)).collect();
    for (name, kind) in [
        ("anti_disturbance_qwpr_pairs", MirrorKind::QwpReflector),
        ("anti_disturbance_faraday_pairs", MirrorKind::FaradayMirror),
    ] {
        out.push((name, max_over(&pairs, |&(dl, ds)| {
            let l = arm_polarization_operator(dl, kind);
            let s = arm_polarization_operator(ds, kind);
            (l.dagger() * s).fit_phase(&id).1.min(l.fit_phase(&s).1)
        })));
    }

    out.push(("qm_power_law", max_over(0..samples as u64, |k| {
        let link = random_link(MirrorKind::QwpReflector, seed, k);
        let e = JonesVector::from_bloch(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
        let predicted = e.power() / 8.0 * (1.0 + link.path_phase_difference().cos());
        (interference_power(&link, &e) - predicted).abs() / e.power()
    })));
    out
}

pub fn run_checks(tol: f64, samples: usize, seed: u64) -> Vec<Check> {
    let mut checks: Vec<Check> = residuals(samples, seed)
        .into_iter()
        .map(|(name, residual)| Check { name, residual, tol, pass: residual <= tol })
        .collect();
    // the plain-mirror counterexample must fail the condition
    let l = arm_polarization_operator(0.0, MirrorKind::PlainMirror);
    let s = arm_polarization_operator(PI / 2.0, MirrorKind::PlainMirror);
    let violated = !check_anti_disturbance(&l, &s, 1e-6);
    checks.push(Check {
        name: "plain_mirror_violates_anti_disturbance",
        residual: if violated { 0.0 } else { 1.0 },
        tol,
        pass: violated,
    });
    checks
}
