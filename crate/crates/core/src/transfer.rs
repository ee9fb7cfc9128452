//! 2×2 transfer matrices acting on `Ψ = (φ′, φ)`.
//!
//! Units are `ħ = 2m = 1`, so the free Hamiltonian with a constant vector
//! potential is `H = (p − A)²` and the wave number satisfies `E = k²`.
//! Matrices are row-major in the `(φ′, φ)` ordering throughout: entry
//! `(2,1)` maps `φ′` on the left to `φ` on the right.

use std::ops::{Add, Mul, Neg, Sub};

pub use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::trig::EvenPair;

/// Tolerance on `αδ − βγ − 1` accepted by [`PointParams::new`].
pub const SL2_TOLERANCE: f64 = 1e-12;

/// A 2×2 matrix `[[m11, m12], [m21, m22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2<T> {
    pub m11: T,
    pub m12: T,
    pub m21: T,
    pub m22: T,
}

pub type ComplexMat2 = Mat2<Complex>;
pub type RealMat2 = Mat2<f64>;

impl<T> Mat2<T> {
    pub const fn new(m11: T, m12: T, m21: T, m22: T) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> Mat2<U> {
        Mat2::new(f(self.m11), f(self.m12), f(self.m21), f(self.m22))
    }

    pub fn entries(&self) -> [&T; 4] {
        [&self.m11, &self.m12, &self.m21, &self.m22]
    }
}

impl<T> Mat2<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    pub fn det(&self) -> T {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn scale(self, s: T) -> Self {
        self.map(|x| x * s)
    }
}

impl<T> Mul for Mat2<T>
where
    T: Copy + Add<Output = T> + Mul<Output = T>,
{
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let a = self;
        Mat2::new(
            a.m11 * b.m11 + a.m12 * b.m21,
            a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21,
            a.m21 * b.m12 + a.m22 * b.m22,
        )
    }
}

impl<T: Copy + Neg<Output = T>> Neg for Mat2<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl ComplexMat2 {
    pub fn identity() -> Self {
        let (o, z) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
        Mat2::new(o, z, z, o)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }
}

impl RealMat2 {
    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn to_complex(self) -> ComplexMat2 {
        self.map(|x| Complex::new(x, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

impl From<RealMat2> for ComplexMat2 {
    fn from(m: RealMat2) -> Self {
        m.to_complex()
    }
}

/// Standard matrix product `a·b`.
pub fn mat_mul(a: ComplexMat2, b: ComplexMat2) -> ComplexMat2 {
    a * b
}

pub fn mat_det(m: ComplexMat2) -> Complex {
    m.det()
}

/// Column vector `(φ′, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVec {
    pub dphi: Complex,
    pub phi: Complex,
}

impl StateVec {
    pub fn new(dphi: Complex, phi: Complex) -> Self {
        Self { dphi, phi }
    }

    pub fn real(dphi: f64, phi: f64) -> Self {
        Self::new(Complex::new(dphi, 0.0), Complex::new(phi, 0.0))
    }

    pub fn norm_max(&self) -> f64 {
        self.dphi.norm().max(self.phi.norm())
    }

    pub fn scale(self, s: Complex) -> Self {
        Self::new(self.dphi * s, self.phi * s)
    }
}

impl Mul<StateVec> for ComplexMat2 {
    type Output = StateVec;

    fn mul(self, v: StateVec) -> StateVec {
        StateVec::new(
            self.m11 * v.dphi + self.m12 * v.phi,
            self.m21 * v.dphi + self.m22 * v.phi,
        )
    }
}

/// Parameters `(θ, α, β, γ, δ)` of a point interaction with connection
/// matrix `e^{iθ}·[[α, β], [γ, δ]]`, `αδ − βγ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPointParams")]
pub struct PointParams {
    theta: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

#[derive(Deserialize)]
struct RawPointParams {
    #[serde(default)]
    theta: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

impl TryFrom<RawPointParams> for PointParams {
    type Error = Error;

    fn try_from(r: RawPointParams) -> Result<Self> {
        PointParams::new(r.theta, r.alpha, r.beta, r.gamma, r.delta)
    }
}

impl PointParams {
    pub fn new(theta: f64, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        finite("theta", theta)?;
        finite("alpha", alpha)?;
        finite("beta", beta)?;
        finite("gamma", gamma)?;
        finite("delta", delta)?;
        let residual = alpha * delta - beta * gamma - 1.0;
        if residual.abs() > SL2_TOLERANCE {
            return Err(Error::NotSpecialLinear { residual });
        }
        Ok(Self {
            theta,
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// The free connection `U = I`.
    pub fn free() -> Self {
        Self::new(0.0, 1.0, 0.0, 0.0, 1.0).expect("identity is in SL(2,R)")
    }

    /// A δ-potential of strength `v`.
    pub fn delta_potential(v: f64) -> Result<Self> {
        Self::new(0.0, 1.0, v, 0.0, 1.0)
    }

    /// An ε-potential of strength `u` (continuous `φ′`, jump in `φ`).
    pub fn eps_potential(u: f64) -> Result<Self> {
        Self::new(0.0, 1.0, 0.0, u, 1.0)
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::new(theta, self.alpha, self.beta, self.gamma, self.delta)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `U = [[α, β], [γ, δ]]` without the phase.
    pub fn u_matrix(&self) -> RealMat2 {
        Mat2::new(self.alpha, self.beta, self.gamma, self.delta)
    }
}

/// `𝒱_δ(v) = [[1, v], [0, 1]]`.
pub fn delta_matrix(v: f64) -> ComplexMat2 {
    complex_delta_matrix(Complex::new(v, 0.0))
}

/// δ connection with a complex strength, as produced at a jump of the
/// vector potential.
pub fn complex_delta_matrix(v: Complex) -> ComplexMat2 {
    let (o, z) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
    Mat2::new(o, v, z, o)
}

/// `𝒱_ε(u) = [[1, 0], [u, 1]]`.
pub fn eps_matrix(u: f64) -> ComplexMat2 {
    let (o, z) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
    Mat2::new(o, z, Complex::new(u, 0.0), o)
}

/// `𝒱 = e^{iθ}·U`.
pub fn connection_matrix(p: &PointParams) -> ComplexMat2 {
    p.u_matrix()
        .to_complex()
        .scale(Complex::from_polar(1.0, p.theta))
}

/// `𝒢(A,k;x) = exp(ℋ(A,k)·x)` for real `k ≥ 0`.
pub fn propagator(a_vec: f64, k: f64, x: f64) -> Result<ComplexMat2> {
    finite("A", a_vec)?;
    finite("k", k)?;
    finite("x", x)?;
    if k < 0.0 {
        return Err(Error::NegativeWavenumber(k));
    }
    Ok(propagator_energy(a_vec, k * k, x))
}

/// Propagator at energy `E = k²`, which may be negative (decaying waves).
pub fn propagator_energy(a_vec: f64, energy: f64, x: f64) -> ComplexMat2 {
    let (m, log_scale) = propagator_energy_scaled(a_vec, energy, x);
    if log_scale == 0.0 {
        m
    } else {
        m.scale(Complex::new(log_scale.exp(), 0.0))
    }
}

/// Propagator divided by `e^{κ|x|}` (`κ = √(−E)`) when `E·x² < −1`;
/// returns the matrix and the natural log of the factor removed.
pub fn propagator_energy_scaled(a_vec: f64, energy: f64, x: f64) -> (ComplexMat2, f64) {
    let even = EvenPair::scaled(energy * x * x);
    let c = even.cos;
    let s = x * even.sinc;
    let ia = Complex::new(0.0, a_vec);
    let m = Mat2::new(
        c + ia * s,
        Complex::new((a_vec * a_vec - energy) * s, 0.0),
        Complex::new(s, 0.0),
        c - ia * s,
    );
    (m.scale(Complex::from_polar(1.0, a_vec * x)), even.log_scale)
}

/// Field-free propagator `𝒢(0,·;x)` at energy `E`, which is real.
pub fn free_propagator(energy: f64, x: f64) -> RealMat2 {
    let (m, log_scale) = free_propagator_scaled(energy, x);
    m.scale(log_scale.exp())
}

/// Scaled form of [`free_propagator`], see [`propagator_energy_scaled`].
pub fn free_propagator_scaled(energy: f64, x: f64) -> (RealMat2, f64) {
    let even = EvenPair::scaled(energy * x * x);
    let s = x * even.sinc;
    (
        Mat2::new(even.cos, -energy * s, s, even.cos),
        even.log_scale,
    )
}
