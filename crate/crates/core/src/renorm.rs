//! Three nearby δ's with distance-renormalized strengths.
//!
//! A target point interaction `e^{iθ}·U` is approximated by δ's of strength
//! `v₋, v₀, v₊` at `x = −a, 0, +a`, with a constant vector potential
//! `A = θ/(2a)` between the side δ's. The composite transfer matrix across
//! `[−a, a]` is `e^{2iAa}·𝒰_a(k)` with `𝒰_a(k)` real and unimodular, and the
//! strength schedules below make `𝒰_a(k) → U` as `a → 0`.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::transfer::{
    complex_delta_matrix, propagator_energy, Complex, ComplexMat2, Mat2, PointParams, RealMat2,
};
use crate::trig::DoubleAngle;

/// `|γ|` at or below this selects a `γ = 0` schedule.
pub const GAMMA_TOLERANCE: f64 = 1e-12;
/// `|γ|` below this (but above [`GAMMA_TOLERANCE`]) is poorly conditioned.
pub const GAMMA_CONDITIONING_WARN: f64 = 1e-6;

/// Which strength schedule applies to a target interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchTag {
    GammaNonZero,
    GammaZero,
    /// `γ = 0`, `α = δ = −1`: a single δ plus a phase shift by π.
    GammaZeroNegativeIdentity,
}

pub fn classify_branch(p: &PointParams) -> BranchTag {
    if p.gamma().abs() > GAMMA_TOLERANCE {
        BranchTag::GammaNonZero
    } else if (p.alpha() + 1.0).abs() <= GAMMA_TOLERANCE
        && (p.delta() + 1.0).abs() <= GAMMA_TOLERANCE
    {
        BranchTag::GammaZeroNegativeIdentity
    } else {
        BranchTag::GammaZero
    }
}

/// Whether `γ` is nonzero but small enough that the `1/γ` strengths make
/// finite-`a` numerics ill-conditioned.
pub fn gamma_poorly_conditioned(p: &PointParams) -> bool {
    let g = p.gamma().abs();
    g > GAMMA_TOLERANCE && g < GAMMA_CONDITIONING_WARN
}

/// Three δ's at `−a, 0, +a` with a vector potential `A` on `(−a, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeDeltaRealization {
    pub a: f64,
    pub v_minus: f64,
    pub v_0: f64,
    pub v_plus: f64,
    /// Vector potential between the side δ's.
    pub vector_potential: f64,
    /// Multiply the whole composite by `e^{iπ}`.
    pub extra_phase_pi: bool,
}

impl ThreeDeltaRealization {
    pub fn new(a: f64, v_minus: f64, v_0: f64, v_plus: f64, vector_potential: f64) -> Result<Self> {
        finite("a", a)?;
        if a <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("spacing must be positive, got {a}"),
            });
        }
        finite("v_minus", v_minus)?;
        finite("v_0", v_0)?;
        finite("v_plus", v_plus)?;
        finite("vector_potential", vector_potential)?;
        Ok(Self {
            a,
            v_minus,
            v_0,
            v_plus,
            vector_potential,
            extra_phase_pi: false,
        })
    }

    /// The same strengths with no vector potential.
    pub fn without_field(self) -> Self {
        Self {
            vector_potential: 0.0,
            ..self
        }
    }

    /// Sum of the attractive (negative) strengths.
    pub fn attractive_strength(&self) -> f64 {
        [self.v_minus, self.v_0, self.v_plus]
            .iter()
            .filter(|v| **v < 0.0)
            .map(|v| -v)
            .sum()
    }

    /// `v₊ + v₋ + 2·v₊·v₋·a`, which vanishes iff `αδ = 1` on the `γ = 0`
    /// schedule.
    pub fn gamma_zero_constraint(&self) -> f64 {
        self.v_plus + self.v_minus + 2.0 * self.v_plus * self.v_minus * self.a
    }
}

/// Strengths realizing `p` at spacing `a`.
pub fn realize(p: &PointParams, a: f64) -> Result<ThreeDeltaRealization> {
    finite("a", a)?;
    if a <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("spacing must be positive, got {a}"),
        });
    }
    let (alpha, beta, gamma, delta) = (p.alpha(), p.beta(), p.gamma(), p.delta());
    let vector_potential = p.theta() / (2.0 * a);
    let (v_minus, v_0, v_plus, extra_phase_pi) = match classify_branch(p) {
        BranchTag::GammaNonZero => (
            -1.0 / a + (delta + 1.0) / gamma,
            gamma / (a * a),
            -1.0 / a + (alpha + 1.0) / gamma,
            false,
        ),
        BranchTag::GammaZero => {
            let sum = alpha + delta + 2.0;
            if sum.abs() <= GAMMA_TOLERANCE {
                return Err(Error::DegenerateSchedule { sum });
            }
            (
                (delta - 1.0) / (2.0 * a),
                4.0 * beta / sum,
                (alpha - 1.0) / (2.0 * a),
                false,
            )
        }
        BranchTag::GammaZeroNegativeIdentity => (0.0, -beta, 0.0, true),
    };
    let mut r = ThreeDeltaRealization::new(a, v_minus, v_0, v_plus, vector_potential)?;
    r.extra_phase_pi = extra_phase_pi;
    Ok(r)
}

/// Direct five-factor product
/// `𝒱_δ(v₊ − iA)·𝒢(A,k;a)·𝒱_δ(v₀)·𝒢(A,k;a)·𝒱_δ(v₋ + iA)`.
pub fn three_delta_matrix(r: &ThreeDeltaRealization, k: f64) -> Result<ComplexMat2> {
    finite("k", k)?;
    if k < 0.0 {
        return Err(Error::NegativeWavenumber(k));
    }
    Ok(three_delta_matrix_energy(r, k * k))
}

/// [`three_delta_matrix`] at energy `E = k²`, any sign.
pub fn three_delta_matrix_energy(r: &ThreeDeltaRealization, energy: f64) -> ComplexMat2 {
    let a_vec = r.vector_potential;
    let g = propagator_energy(a_vec, energy, r.a);
    let m = complex_delta_matrix(Complex::new(r.v_plus, -a_vec))
        * g
        * complex_delta_matrix(Complex::new(r.v_0, 0.0))
        * g
        * complex_delta_matrix(Complex::new(r.v_minus, a_vec));
    if r.extra_phase_pi {
        -m
    } else {
        m
    }
}

/// The real unimodular part `𝒰_a(k)` from its closed-form entries; it does
/// not depend on the vector potential.
pub fn u_elements_closed_form(r: &ThreeDeltaRealization, k: f64) -> Result<RealMat2> {
    finite("k", k)?;
    if k < 0.0 {
        return Err(Error::NegativeWavenumber(k));
    }
    Ok(u_closed_form_energy(r, k * k))
}

/// [`u_elements_closed_form`] at energy `E`, any sign.
pub fn u_closed_form_energy(r: &ThreeDeltaRealization, energy: f64) -> RealMat2 {
    let (m, log_scale) = closed_form(r, energy, DoubleAngle::new(energy * r.a * r.a));
    debug_assert_eq!(log_scale, 0.0);
    m
}

/// [`u_closed_form_energy`] divided by `e^{2κa}` when `E·a² < −1`; returns
/// the matrix and the natural log of the removed factor.
pub fn u_closed_form_energy_scaled(r: &ThreeDeltaRealization, energy: f64) -> (RealMat2, f64) {
    closed_form(r, energy, DoubleAngle::scaled(energy * r.a * r.a))
}

/// Both algebraic forms of each entry are exact; they differ in how much
/// cancellation floating point has to absorb. The literal form
///
/// ```text
/// U21 = sin(2ka)/k + sin²(ka)/k²·v₀
/// U11 = cos 2ka + sin(2ka)/(2k)·v₀ + U21·v₊        (U22 with v₋)
/// U12 = cos²(ka)(v₊+v₀+v₋) − sin²(ka)(v₊+v₋)
///       + sin(2ka)/(2k)·(−2k² + v₀(v₊+v₋)) + U21·v₊v₋
/// ```
///
/// is well-behaved when the strengths are bounded, but when `v₀ ~ 1/a²` and
/// `v± ~ −1/a` its terms grow like `1/a²` and cancel down to O(1). Writing
/// `v₀ = g/a²`, `v± = −1/a + w±` and collecting powers of `1/a` gives
///
/// ```text
/// U21 = g·h1 + a·p2
/// U11 = g·w₊·h1 + g·h3/a + a·w₊·p2 + h4            (U22 with w₋)
/// U12 = g·w₊w₋·h1 + g(w₊+w₋)·h3/a + g·h5/a² + a·w₊w₋·p2 + (w₊+w₋)·h4 + h6/a
/// ```
///
/// whose coefficients (see [`DoubleAngle`]) vanish at the rate needed to
/// keep every term bounded. Each entry takes the form whose largest term is
/// smaller.
fn closed_form(r: &ThreeDeltaRealization, energy: f64, h: DoubleAngle) -> (RealMat2, f64) {
    let a = r.a;
    let (vm, v0, vp) = (r.v_minus, r.v_0, r.v_plus);
    // sin(2ka)/(2k)
    let half_p2 = 0.5 * a * h.p2;

    let u21 = v0 * a * a * h.h1 + a * h.p2;

    let literal_diag = |v: f64| [h.cos2, half_p2 * v0, u21 * v];
    let literal_12 = [
        h.c_sq * (vp + v0 + vm),
        -h.t_sn_sq * (vp + vm),
        -2.0 * energy * half_p2,
        half_p2 * v0 * (vp + vm),
        u21 * vp * vm,
    ];

    let g = v0 * a * a;
    let (wm, wp) = (vm + 1.0 / a, vp + 1.0 / a);
    let split_diag = |w: f64| [g * w * h.h1, g * h.h3 / a, a * w * h.p2, h.h4];
    let split_12 = [
        g * wp * wm * h.h1,
        g * (wp + wm) * h.h3 / a,
        g * h.h5 / (a * a),
        a * wp * wm * h.p2,
        (wp + wm) * h.h4,
        h.h6 / a,
    ];

    let u11 = better_sum(&literal_diag(vp), &split_diag(wp));
    let u22 = better_sum(&literal_diag(vm), &split_diag(wm));
    let u12 = better_sum(&literal_12, &split_12);

    let m = Mat2::new(u11, u12, u21, u22);
    let m = if r.extra_phase_pi { -m } else { m };
    (m, h.log_scale)
}

fn better_sum(a: &[f64], b: &[f64]) -> f64 {
    let peak = |xs: &[f64]| xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let pick = if peak(b) < peak(a) { b } else { a };
    pick.iter().sum()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn coupled() -> PointParams {
        PointParams::new(0.0, 3.0, -2.0, -7.0, 5.0).unwrap()
    }

    fn uncoupled() -> PointParams {
        PointParams::new(0.0, 5.0, 3.0, 0.0, 0.2).unwrap()
    }

    #[test]
    fn branches() {
        assert_eq!(classify_branch(&coupled()), BranchTag::GammaNonZero);
        assert_eq!(classify_branch(&uncoupled()), BranchTag::GammaZero);
        let neg = PointParams::new(0.0, -1.0, 0.4, 0.0, -1.0).unwrap();
        assert_eq!(classify_branch(&neg), BranchTag::GammaZeroNegativeIdentity);
    }

    #[test]
    fn coupled_strengths_at_two_tenths() {
        let r = realize(&coupled(), 0.2).unwrap();
        assert!((r.v_0 + 175.0).abs() < 1e-12);
        assert!((r.v_plus - (-5.0 + 4.0 / -7.0)).abs() < 1e-12);
        assert!((r.v_minus - (-5.0 + 6.0 / -7.0)).abs() < 1e-12);
        assert!((r.v_plus + 5.571428571428571).abs() < 1e-12);
        assert!((r.v_minus + 5.857142857142857).abs() < 1e-12);
        assert_eq!(r.vector_potential, 0.0);
        assert!(!r.extra_phase_pi);
    }

    #[test]
    fn vector_potential_grows_as_inverse_spacing() {
        let p = coupled().with_theta(0.6).unwrap();
        for a in [0.2, 0.01, 1e-4] {
            let r = realize(&p, a).unwrap();
            assert!((2.0 * r.vector_potential * a - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn single_delta_reduction() {
        let v = -1.3;
        for a in [0.5, 0.01, 1e-5] {
            let r = realize(&PointParams::delta_potential(v).unwrap(), a).unwrap();
            assert_eq!((r.v_plus, r.v_minus, r.v_0), (0.0, 0.0, v));
        }
    }

    #[test]
    fn eps_potential_reduction() {
        let u = 0.8;
        let a = 0.05;
        let r = realize(&PointParams::eps_potential(u).unwrap(), a).unwrap();
        assert_eq!(r.v_0, u / (a * a));
        assert_eq!(r.v_plus, -1.0 / a + 2.0 / u);
        assert_eq!(r.v_minus, r.v_plus);
    }

    #[test]
    fn negative_identity_escape() {
        let p = PointParams::new(0.3, -1.0, 0.4, 0.0, -1.0).unwrap();
        let r = realize(&p, 0.1).unwrap();
        assert!(r.extra_phase_pi);
        assert_eq!((r.v_plus, r.v_minus, r.v_0), (0.0, 0.0, -0.4));
        assert!((r.vector_potential - 1.5).abs() < 1e-15);
        // U_a → −𝒱_δ(−β) = [[−1, β], [0, −1]]
        let u = u_elements_closed_form(&r, 0.9).unwrap();
        let small = realize(&p, 1e-7).unwrap();
        let u_small = u_elements_closed_form(&small, 0.9).unwrap();
        assert!((u_small.m11 + 1.0).abs() < 1e-6);
        assert!((u_small.m12 - 0.4).abs() < 1e-6);
        assert!(u_small.m21.abs() < 1e-6);
        assert!((u.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_gamma_zero_schedule_is_reported() {
        // α + δ + 2 = 0 with αδ = 1 forces α = δ = −1, which routes to the
        // escape branch; the guard only fires just outside that tolerance.
        let p = PointParams::new(0.0, -1.0 + 5e-7, 0.0, 0.0, 1.0 / (-1.0 + 5e-7)).unwrap();
        assert_eq!(classify_branch(&p), BranchTag::GammaZero);
        assert!(matches!(
            realize(&p, 0.1),
            Err(Error::DegenerateSchedule { .. })
        ));
    }

    #[test]
    fn rejects_bad_spacing() {
        assert!(realize(&coupled(), 0.0).is_err());
        assert!(realize(&coupled(), -0.1).is_err());
        assert!(ThreeDeltaRealization::new(0.1, f64::INFINITY, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn free_composite_is_free_propagation() {
        let r = ThreeDeltaRealization::new(0.3, 0.0, 0.0, 0.0, 0.0).unwrap();
        let k = 1.4;
        let m = three_delta_matrix(&r, k).unwrap();
        let g = crate::transfer::propagator(0.0, k, 0.6).unwrap();
        for (x, y) in m.entries().iter().zip(g.entries()) {
            assert!((**x - *y).norm() < 1e-15);
        }
        let u = u_elements_closed_form(&r, k).unwrap();
        assert!((u.m11 - (2.0 * k * 0.3f64).cos()).abs() < 1e-15);
        assert!((u.m21 - (2.0 * k * 0.3f64).sin() / k).abs() < 1e-15);
        assert!((u.m12 + k * (2.0 * k * 0.3f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_direct_product_on_coupled_case() {
        // oracle: the five-matrix product, with the gauge phase removed
        let p = coupled().with_theta(0.9).unwrap();
        let r = realize(&p, 0.2).unwrap();
        let direct = three_delta_matrix(&r, 1.0).unwrap();
        let phase = Complex::from_polar(1.0, -2.0 * r.vector_potential * r.a);
        let u = u_elements_closed_form(&r, 1.0).unwrap();
        for (d, c) in direct.entries().iter().zip(u.entries()) {
            let z = **d * phase;
            assert!((z.re - c).abs() < 1e-12 * (1.0 + c.abs()), "{z} vs {c}");
            assert!(z.im.abs() < 1e-12 * (1.0 + c.abs()));
        }
        let det = direct.det();
        let expect = Complex::from_polar(1.0, 4.0 * r.vector_potential * r.a);
        assert!((det - expect).norm() < 1e-11);
    }

    #[test]
    fn closed_form_matches_literal_formulas_at_moderate_spacing() {
        let r = realize(&coupled(), 0.2).unwrap();
        let (k, a) = (1.0f64, 0.2f64);
        let (vm, v0, vp) = (r.v_minus, r.v_0, r.v_plus);
        let s2 = (2.0 * k * a).sin();
        let c2 = (2.0 * k * a).cos();
        let s1 = (k * a).sin();
        let c1 = (k * a).cos();
        let u21 = s2 / k + s1 * s1 / (k * k) * v0;
        let u11 = c2 + s2 / (2.0 * k) * v0 + u21 * vp;
        let u22 = c2 + s2 / (2.0 * k) * v0 + u21 * vm;
        let u12 = c1 * c1 * (vp + v0 + vm) - s1 * s1 * (vp + vm)
            + s2 / (2.0 * k) * (-2.0 * k * k + v0 * (vp + vm))
            + u21 * vp * vm;
        let u = u_elements_closed_form(&r, k).unwrap();
        assert!((u.m11 - u11).abs() < 1e-11);
        assert!((u.m12 - u12).abs() < 1e-11);
        assert!((u.m21 - u21).abs() < 1e-12);
        assert!((u.m22 - u22).abs() < 1e-11);
    }

    // 60-digit evaluations of the literal closed forms at k = 1.
    const COUPLED_REFERENCE: [(f64, [f64; 4]); 3] = [
        (
            1e-2,
            [
                3.0117049073564318522,
                -2.016738505463585143,
                -6.9797680030844224763,
                5.0059243368091239883,
            ],
        ),
        (
            1e-4,
            [
                3.0001190276191873594,
                -2.0001686943078875852,
                -6.9997999766680000311,
                5.0000618780957587968,
            ],
        ),
        (
            1e-6,
            [
                3.0000011904741904763,
                -2.0000016870735124712,
                -6.999997999997666668,
                5.0000006190449523815,
            ],
        ),
    ];
    const UNCOUPLED_REFERENCE: [(f64, [f64; 4]); 3] = [
        (
            1e-2,
            [
                5.0495311231480081491,
                2.9583688618128913503,
                0.020165327804518264023,
                0.20985245006362478365,
            ],
        ),
        (
            1e-4,
            [
                5.0004999533311112311,
                2.9995866366688534185,
                0.00020001666533327778044,
                0.20009998533244450045,
            ],
        ),
        (
            1e-6,
            [
                5.0000049999953333311,
                2.9999958666636666689,
                2.0000016666653333328e-6,
                0.20000099999853333244,
            ],
        ),
    ];

    #[test]
    fn closed_form_agrees_with_high_precision_reference() {
        for (p, table) in [
            (coupled(), COUPLED_REFERENCE),
            (uncoupled(), UNCOUPLED_REFERENCE),
        ] {
            for (a, want) in table {
                let u = u_elements_closed_form(&realize(&p, a).unwrap(), 1.0).unwrap();
                let got = [u.m11, u.m12, u.m21, u.m22];
                for (g, w) in got.iter().zip(want) {
                    assert!((g - w).abs() < 1e-8, "a={a}: {g} vs {w}");
                }
                assert!((u.det() - 1.0).abs() < 1e-9, "a={a}: det {}", u.det());
            }
        }
    }

    #[test]
    fn gamma_zero_constraint_vanishes() {
        let r = realize(&uncoupled(), 0.2).unwrap();
        assert!(r.gamma_zero_constraint().abs() < 1e-9 * (r.v_plus.abs() + r.v_minus.abs()));
    }

    #[test]
    fn scaled_closed_form_is_consistent() {
        let r = realize(&coupled(), 0.2).unwrap();
        let e = -80.0 * 80.0;
        let (m, log) = u_closed_form_energy_scaled(&r, e);
        let plain = u_closed_form_energy(&r, e);
        let f = log.exp();
        for (s, p) in m.entries().iter().zip(plain.entries()) {
            assert!((**s * f - *p).abs() <= 1e-10 * plain.max_abs());
        }
        let direct = three_delta_matrix_energy(&r, e);
        for (d, p) in direct.entries().iter().zip(plain.entries()) {
            assert!((d.re - *p).abs() <= 1e-9 * plain.max_abs());
        }
    }
}
