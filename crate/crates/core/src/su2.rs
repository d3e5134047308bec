//! Complex 2×2 matrix algebra for Jones calculus, with the SU(2)
//! parameterization used throughout the crate:
//!
//! ```text
//! U(γ, s₁, s₂, s₃) = σ₀ cos γ + i (s₁σ₁ + s₂σ₂ + s₃σ₃) sin γ,   s₁² + s₂² + s₃² = 1
//! ```
//!
//! # Pauli numbering
//!
//! The Pauli matrices are numbered in the birefringence-operator convention,
//! where σ₁ is diagonal (the PM-fiber eigenbasis). This is **not** the usual
//! physics numbering:
//!
//! | here | matrix              | standard name |
//! |------|---------------------|---------------|
//! | σ₀   | `[[1,0],[0,1]]`     | I             |
//! | σ₁   | `[[1,0],[0,-1]]`    | σ_z           |
//! | σ₂   | `[[0,1],[1,0]]`     | σ_x           |
//! | σ₃   | `[[0,i],[-i,0]]`    | −σ_y          |
//!
//! With this numbering σ₂σ₁ = iσ₃ (cyclic order 2 → 1 → 3).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Complex = Complex64;

/// Tolerance for single algebraic identities on doubles.
pub const TOL_ALG: f64 = 1e-12;
/// Tolerance for chains of more than ten multiplications.
pub const TOL_CHAIN: f64 = 1e-10;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2c {
    pub m: [[Complex; 2]; 2],
}

impl Matrix2c {
    pub const fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(a: Complex, d: Complex) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(a, c, b, d)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn scale(&self, c: Complex) -> Self {
        let [[a, b], [cc, d]] = self.m;
        Self::new(a * c, b * c, cc * c, d * c)
    }

    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        let [[a, b], [c, d]] = self.m;
        JonesVector::new(a * v.ex + b * v.ey, c * v.ex + d * v.ey)
    }

    pub fn det(&self) -> Complex {
        let [[a, b], [c, d]] = self.m;
        a * d - b * c
    }

    pub fn trace(&self) -> Complex {
        self.m[0][0] + self.m[1][1]
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.entries().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_norm()
    }

    pub fn entries(&self) -> impl Iterator<Item = Complex> + '_ {
        self.m.iter().flat_map(|row| row.iter().copied())
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|z| z.is_finite())
    }

    /// Residual `max |(A†A − I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_finite() && self.unitarity_residual() <= tol
    }

    /// Least-squares factor `c = tr(other† self) / tr(other† other)` and the
    /// residual `max(max|self − c·other|, ||c| − 1|)` of `self ≈ c·other`.
    pub fn fit_phase(&self, other: &Self) -> (Complex, f64) {
        let denom = (other.dagger() * *other).trace().re;
        if !(denom > 0.0) {
            return (ZERO, f64::INFINITY);
        }
        let c = (other.dagger() * *self).trace() / denom;
        let residual = self.max_abs_diff(&other.scale(c)).max((c.norm() - 1.0).abs());
        (c, residual)
    }

    /// The unit-modulus factor `c` with `self = c·other`, if one exists within `tol`.
    pub fn phase_factor(&self, other: &Self, tol: f64) -> Option<Complex> {
        let (c, residual) = self.fit_phase(other);
        (residual <= tol).then_some(c)
    }

    /// True iff `self = c·other` for some `|c| = 1`, within `tol`.
    pub fn proportional_to(&self, other: &Self, tol: f64) -> bool {
        self.phase_factor(other, tol).is_some()
    }
}

impl Default for Matrix2c {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Matrix2c {
    type Output = Matrix2c;

    fn mul(self, rhs: Matrix2c) -> Matrix2c {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = rhs.m;
        Matrix2c::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

impl Mul<JonesVector> for Matrix2c {
    type Output = JonesVector;

    fn mul(self, rhs: JonesVector) -> JonesVector {
        self.apply(&rhs)
    }
}

impl Add for Matrix2c {
    type Output = Matrix2c;

    fn add(self, rhs: Matrix2c) -> Matrix2c {
        let mut out = self;
        for (row, rrow) in out.m.iter_mut().zip(rhs.m.iter()) {
            for (z, r) in row.iter_mut().zip(rrow.iter()) {
                *z += r;
            }
        }
        out
    }
}

impl Sub for Matrix2c {
    type Output = Matrix2c;

    fn sub(self, rhs: Matrix2c) -> Matrix2c {
        self + (-rhs)
    }
}

impl Neg for Matrix2c {
    type Output = Matrix2c;

    fn neg(self) -> Matrix2c {
        self.scale(-ONE)
    }
}

impl fmt::Display for Matrix2c {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.m;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

pub fn mul(a: &Matrix2c, b: &Matrix2c) -> Matrix2c {
    *a * *b
}

pub fn transpose(a: &Matrix2c) -> Matrix2c {
    a.transpose()
}

pub fn dagger(a: &Matrix2c) -> Matrix2c {
    a.dagger()
}

pub fn scale(a: &Matrix2c, c: Complex) -> Matrix2c {
    a.scale(c)
}

pub fn apply(a: &Matrix2c, v: &JonesVector) -> JonesVector {
    a.apply(v)
}

pub fn is_unitary(a: &Matrix2c, tol: f64) -> bool {
    a.is_unitary(tol)
}

pub fn proportional_to(a: &Matrix2c, b: &Matrix2c, tol: f64) -> bool {
    a.proportional_to(b, tol)
}

/// Pauli matrix σₖ in the numbering documented at module level.
pub fn pauli(k: usize) -> Result<Matrix2c> {
    Ok(match k {
        0 => Matrix2c::identity(),
        1 => Matrix2c::diag(ONE, -ONE),
        2 => Matrix2c::new(ZERO, ONE, ONE, ZERO),
        3 => Matrix2c::new(ZERO, I, -I, ZERO),
        _ => return invalid(format!("Pauli index {k} out of range 0..=3")),
    })
}

/// Parameters `(γ, s)` of an SU(2) element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su2Params {
    pub gamma: f64,
    pub s: [f64; 3],
}

impl Su2Params {
    pub fn new(gamma: f64, s: [f64; 3]) -> Result<Self> {
        let p = Self { gamma, s };
        p.validate()?;
        Ok(p)
    }

    /// Uniform angle in `[0, 2π)` and axis uniform on the unit sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let gamma = rng.random::<f64>() * 2.0 * PI;
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi = rng.random::<f64>() * 2.0 * PI;
        let r = (1.0 - z * z).sqrt();
        Self { gamma, s: [r * phi.cos(), r * phi.sin(), z] }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.s.iter().any(|x| !x.is_finite()) {
            return invalid("SU(2) parameters must be finite");
        }
        let n2: f64 = self.s.iter().map(|x| x * x).sum();
        if (n2 - 1.0).abs() > TOL_ALG {
            return invalid(format!("rotation axis must be a unit vector, |s|² = {n2}"));
        }
        Ok(())
    }
}

/// `σ₀ cos γ + i (s·σ) sin γ`.
pub fn u_from_params(p: &Su2Params) -> Result<Matrix2c> {
    p.validate()?;
    Ok(u_raw(p.gamma, p.s))
}

/// Unchecked form of [`u_from_params`] for internally constructed axes.
pub(crate) fn u_raw(gamma: f64, [s1, s2, s3]: [f64; 3]) -> Matrix2c {
    let (sin, cos) = gamma.sin_cos();
    // s·σ = [[s1, s2 + i s3], [s2 − i s3, −s1]]
    let c = Complex::new(cos, 0.0);
    let is = I * sin;
    Matrix2c::new(
        c + is * s1,
        is * Complex::new(s2, s3),
        is * Complex::new(s2, -s3),
        c - is * s1,
    )
}

/// Haar-distributed SU(2) element.
///
/// Built from the unit-quaternion form `[[a, b], [−b̄, ā]]` with
/// `a = cos η·e^{iξ₁}`, `b = sin η·e^{iξ₂}`, where ξ₁, ξ₂ are uniform on
/// [0, 2π) and `cos 2η` is uniform on [−1, 1].
pub fn haar_random_su2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2c {
    let xi1 = rng.random::<f64>() * 2.0 * PI;
    let xi2 = rng.random::<f64>() * 2.0 * PI;
    let cos_2eta: f64 = rng.random_range(-1.0..=1.0);
    let eta = 0.5 * cos_2eta.acos();
    let a = Complex::from_polar(eta.cos(), xi1);
    let b = Complex::from_polar(eta.sin(), xi2);
    Matrix2c::new(a, b, -b.conj(), a.conj())
}

/// A polarization state as field amplitudes along the PM-fiber X/Y axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub ex: Complex,
    pub ey: Complex,
}

impl JonesVector {
    pub const fn new(ex: Complex, ey: Complex) -> Self {
        Self { ex, ey }
    }

    pub fn x() -> Self {
        Self::new(ONE, ZERO)
    }

    pub fn y() -> Self {
        Self::new(ZERO, ONE)
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO)
    }

    /// Unit-power state with Bloch (Poincaré) vector `(sin θ cos φ, sin θ sin φ, cos θ)`,
    /// where the pole θ = 0 is X polarization.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        Self::new(
            Complex::new((theta / 2.0).cos(), 0.0),
            Complex::from_polar((theta / 2.0).sin(), phi),
        )
    }

    /// Unit-power state pointing along the (not necessarily normalized) direction `r`.
    pub fn from_direction([x, y, z]: [f64; 3]) -> Self {
        let n = (x * x + y * y + z * z).sqrt();
        let theta = (z / n).clamp(-1.0, 1.0).acos();
        Self::from_bloch(theta, y.atan2(x))
    }

    /// Bloch vector of the normalized state.
    pub fn bloch(&self) -> [f64; 3] {
        let p = self.power();
        let cross = self.ex.conj() * self.ey;
        [
            2.0 * cross.re / p,
            2.0 * cross.im / p,
            (self.ex.norm_sqr() - self.ey.norm_sqr()) / p,
        ]
    }

    /// Optical power `|ex|² + |ey|²`.
    pub fn power(&self) -> f64 {
        self.ex.norm_sqr() + self.ey.norm_sqr()
    }

    pub fn scale(&self, c: Complex) -> Self {
        Self::new(self.ex * c, self.ey * c)
    }

    /// Hermitian inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex {
        self.ex.conj() * other.ex + self.ey.conj() * other.ey
    }

    pub fn is_finite(&self) -> bool {
        self.ex.is_finite() && self.ey.is_finite()
    }

    /// True iff `self = c·other` with `|c| = 1`, within `tol`.
    pub fn proportional_to(&self, other: &Self, tol: f64) -> bool {
        let p = other.power();
        if !(p > 0.0) {
            return false;
        }
        let c = other.inner(self) / p;
        let r = *self - other.scale(c);
        r.ex.norm().max(r.ey.norm()) <= tol && (c.norm() - 1.0).abs() <= tol
    }
}

impl Add for JonesVector {
    type Output = JonesVector;

    fn add(self, rhs: JonesVector) -> JonesVector {
        JonesVector::new(self.ex + rhs.ex, self.ey + rhs.ey)
    }
}

impl Sub for JonesVector {
    type Output = JonesVector;

    fn sub(self, rhs: JonesVector) -> JonesVector {
        JonesVector::new(self.ex - rhs.ex, self.ey - rhs.ey)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn pauli_two_is_exchange_matrix() {
        let s2 = pauli(2).unwrap();
        assert_eq!(s2, Matrix2c::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)));
        assert_eq!(pauli(0).unwrap(), Matrix2c::identity());
    }

    #[test]
    fn pauli_index_out_of_range() {
        assert!(pauli(4).is_err());
    }

    #[test]
    fn pauli_squares_to_identity() {
        for k in 0..4 {
            let p = pauli(k).unwrap();
            // direct entrywise product, independent of the Mul impl
            let [[a, b], [cc, d]] = p.m;
            let sq = [[a * a + b * cc, a * b + b * d], [cc * a + d * cc, cc * b + d * d]];
            assert_eq!(Matrix2c { m: sq }, Matrix2c::identity(), "σ{k}²");
            assert_eq!(p * p, Matrix2c::identity());
        }
    }

    #[test]
    fn pauli_anticommutation_in_this_numbering() {
        let s1 = pauli(1).unwrap();
        let s2 = pauli(2).unwrap();
        let s3 = pauli(3).unwrap();
        assert!((s2 * s1).max_abs_diff(&-(s1 * s2)) <= 1e-15);
        assert!((s2 * s1).max_abs_diff(&s3.scale(I)) <= 1e-15);
    }

    #[test]
    fn u_half_pi_about_axis_two() {
        let u = u_from_params(&Su2Params::new(PI / 2.0, [0., 1., 0.]).unwrap()).unwrap();
        let expected = Matrix2c::new(c(0., 0.), c(0., 1.), c(0., 1.), c(0., 0.));
        assert!(u.max_abs_diff(&expected) <= TOL_ALG);
    }

    #[test]
    fn u_zero_angle_is_identity() {
        let s = [0.6, 0.0, 0.8];
        let u = u_from_params(&Su2Params { gamma: 0.0, s }).unwrap();
        assert!(u.max_abs_diff(&Matrix2c::identity()) <= TOL_ALG);
    }

    #[test]
    fn quarter_turn_transposed_product() {
        let q = u_raw(PI / 4.0, [0., 1., 0.]);
        let full = q.transpose() * q;
        let expected = u_raw(PI / 2.0, [0., 1., 0.]);
        assert!(full.max_abs_diff(&expected) <= TOL_ALG);
        assert!(full.max_abs_diff(&pauli(2).unwrap().scale(I)) <= TOL_ALG);
    }

    #[test]
    fn non_unit_axis_rejected() {
        assert!(u_from_params(&Su2Params { gamma: 0.3, s: [1.0, 1.0, 0.0] }).is_err());
        assert!(Su2Params::new(f64::NAN, [1., 0., 0.]).is_err());
    }

    #[test]
    fn fiber_operator_is_symmetric() {
        let u = u_raw(0.37, [1., 0., 0.]);
        assert_eq!(u.transpose(), u);
    }

    #[test]
    fn unitarity_checks() {
        assert!(pauli(3).unwrap().is_unitary(1e-12));
        assert!(!Matrix2c::identity().scale(c(2., 0.)).is_unitary(1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u = haar_random_su2(&mut rng);
            assert!(u.is_unitary(1e-10));
            assert!((u * u.dagger()).max_abs_diff(&Matrix2c::identity()) <= 1e-12);
            assert!((u.det() - ONE).norm() <= TOL_ALG);
        }
    }

    #[test]
    fn haar_is_deterministic_per_seed() {
        let a = haar_random_su2(&mut ChaCha8Rng::seed_from_u64(99));
        let b = haar_random_su2(&mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);
    }

    #[test]
    fn proportionality() {
        let s1 = pauli(1).unwrap();
        let s2 = pauli(2).unwrap();
        assert!(s2.scale(I).proportional_to(&s2, 1e-12));
        assert!(!s1.proportional_to(&s2, 1e-12));
        assert!(!Matrix2c::identity().proportional_to(&Matrix2c::zero(), 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let u = haar_random_su2(&mut rng);
            let theta: f64 = rng.random::<f64>() * 2.0 * PI;
            let phase = Complex::from_polar(1.0, theta);
            let got = u.scale(phase).phase_factor(&u, 1e-12).unwrap();
            assert!((got - phase).norm() <= 1e-12);
        }
    }

    #[test]
    fn jones_identity_and_bloch() {
        let v = JonesVector::from_bloch(1.1, -0.4);
        assert_eq!(Matrix2c::identity().apply(&v), v);
        let [x, y, z] = v.bloch();
        assert!((x - 1.1f64.sin() * (-0.4f64).cos()).abs() < 1e-12);
        assert!((y - 1.1f64.sin() * (-0.4f64).sin()).abs() < 1e-12);
        assert!((z - 1.1f64.cos()).abs() < 1e-12);
        let w = JonesVector::from_direction([x, y, z]);
        assert!(w.proportional_to(&v, 1e-12));
    }
}
