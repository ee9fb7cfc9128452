//! Even circular functions evaluated through `t = x²`.
//!
//! Every transfer-matrix entry in this crate is an even function of the
//! phase `x = k·L` once the odd factors are pulled out, so it can be written
//! in terms of the energy-like variable `t = E·L²`. For `t < 0` the phase is
//! imaginary, `x = i·y` with `y = √(−t)`, and the same formulas turn
//! hyperbolic. Near `t = 0` the functions with removable singularities are
//! summed from their Taylor series.
//!
//! Hyperbolic values grow like `e^y`; the `scaled` constructors divide that
//! growth out and report it as a natural-log scale so that callers can keep
//! working with sign-correct, finite numbers at large `y`.

/// Below this `|t|` the series are used.
const SERIES_LIMIT: f64 = 1.0;
/// Terms kept in each series; `|t|^18 / 36!` is far below an ulp for `|t| ≤ 1`.
const SERIES_TERMS: usize = 18;

/// `Σ_{n≥0} c_n t^n` with `c_n` produced by `coeff(n)`.
fn series(t: f64, coeff: impl Fn(usize) -> f64) -> f64 {
    // Horner from the tail keeps the small terms from being swamped.
    (0..SERIES_TERMS)
        .rev()
        .fold(0.0, |acc, n| acc * t + coeff(n))
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `cos √t`.
pub fn cos_t(t: f64) -> f64 {
    if t >= 0.0 {
        t.sqrt().cos()
    } else {
        (-t).sqrt().cosh()
    }
}

/// `sin √t / √t`, equal to 1 at `t = 0`.
pub fn sinc_t(t: f64) -> f64 {
    if t.abs() <= SERIES_LIMIT {
        series(t, |n| sign(n) / factorial(2 * n + 1))
    } else if t > 0.0 {
        let x = t.sqrt();
        x.sin() / x
    } else {
        let y = (-t).sqrt();
        y.sinh() / y
    }
}

/// `cos √t − sin √t / √t`, which behaves like `−t/3` near zero.
pub fn cos_minus_sinc_t(t: f64) -> f64 {
    if t.abs() <= SERIES_LIMIT {
        // Σ_{n≥1} (−1)^n t^n · 2n / (2n+1)!
        t * series(t, |n| {
            let m = n + 1;
            sign(m) * (2 * m) as f64 / factorial(2 * m + 1)
        })
    } else {
        cos_t(t) - sinc_t(t)
    }
}

/// `(1 − cos √t) / t`, equal to 1/2 at `t = 0`.
pub fn versin_over_t(t: f64) -> f64 {
    if t.abs() <= SERIES_LIMIT {
        series(t, |n| sign(n) / factorial(2 * n + 2))
    } else {
        (1.0 - cos_t(t)) / t
    }
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `cos √t` and `sin √t / √t`, optionally scaled by `e^{−√(−t)}` for `t < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenPair {
    pub cos: f64,
    pub sinc: f64,
    /// Natural log of the factor divided out of both values.
    pub log_scale: f64,
}

impl EvenPair {
    pub fn new(t: f64) -> Self {
        Self {
            cos: cos_t(t),
            sinc: sinc_t(t),
            log_scale: 0.0,
        }
    }

    /// Same values divided by `e^y`, `y = √(−t)`, when `t < −1`.
    pub fn scaled(t: f64) -> Self {
        if t >= -SERIES_LIMIT {
            return Self::new(t);
        }
        let y = (-t).sqrt();
        let damp = (-2.0 * y).exp();
        Self {
            cos: 0.5 * (1.0 + damp),
            sinc: 0.5 * (1.0 - damp) / y,
            log_scale: y,
        }
    }
}

/// The coefficient functions of the three-delta composite matrix at
/// half-width phase `x` with `t = x²`.
///
/// With `C = cos x`, `Sn = sin x / x`, `D = C − Sn`:
///
/// | field  | value                         | small-`t` behaviour |
/// |--------|-------------------------------|---------------------|
/// | `h1`   | `Sn²`                         | `1`                 |
/// | `p2`   | `sin 2x / x = 2·Sn·C`         | `2`                 |
/// | `h3`   | `Sn·D`                        | `−t/3`              |
/// | `h4`   | `cos 2x − 2·Sn·C`             | `−1`                |
/// | `h5`   | `D²`                          | `t²/9`              |
/// | `h6`   | `2·Sn·C·(1 − t) − 2·cos 2x`   | `2t/3`              |
/// | `cos2` | `cos 2x`                      | `1`                 |
/// | `c_sq` | `C²`                          | `1`                 |
/// | `t_sn_sq` | `t·Sn² = sin² x`           | `t`                 |
///
/// All are homogeneous of degree two in the growing exponential, so a
/// common `e^{−2y}` scale can be applied for large negative `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleAngle {
    pub h1: f64,
    pub p2: f64,
    pub h3: f64,
    pub h4: f64,
    pub h5: f64,
    pub h6: f64,
    pub cos2: f64,
    pub c_sq: f64,
    pub t_sn_sq: f64,
    pub log_scale: f64,
}

impl DoubleAngle {
    pub fn new(t: f64) -> Self {
        Self::build(t, false)
    }

    /// Values divided by `e^{2y}` when `t < −1`, with `log_scale = 2y`.
    pub fn scaled(t: f64) -> Self {
        Self::build(t, true)
    }

    fn build(t: f64, scaled: bool) -> Self {
        if t.abs() <= SERIES_LIMIT {
            let sn = sinc_t(t);
            let d = cos_minus_sinc_t(t);
            let q = versin_over_t(t);
            let c = 1.0 - t * q;
            // Sn·C − 1 without cancelling two O(1) numbers.
            let snc_minus_one = -2.0 * t * q + t * t * q * q - d * (1.0 - t * q);
            let snc = 1.0 + snc_minus_one;
            let cos2 = 1.0 - 2.0 * t * sn * sn;
            return Self {
                h1: sn * sn,
                p2: 2.0 * snc,
                h3: sn * d,
                h4: -1.0 - 2.0 * t * sn * sn - 2.0 * snc_minus_one,
                h5: d * d,
                h6: 2.0 * snc_minus_one - 2.0 * t * snc + 4.0 * t * sn * sn,
                cos2,
                c_sq: c * c,
                t_sn_sq: t * sn * sn,
                log_scale: 0.0,
            };
        }
        let single = if scaled {
            EvenPair::scaled(t)
        } else {
            EvenPair::new(t)
        };
        // "one" in the same scaled units as the products below
        let unit = (-2.0 * single.log_scale).exp();
        let (c, sn) = (single.cos, single.sinc);
        let d = c - sn;
        let snc = sn * c;
        let cos2 = 2.0 * c * c - unit;
        Self {
            h1: sn * sn,
            p2: 2.0 * snc,
            h3: sn * d,
            h4: cos2 - 2.0 * snc,
            h5: d * d,
            h6: 2.0 * snc * (1.0 - t) - 2.0 * cos2,
            cos2,
            c_sq: c * c,
            t_sn_sq: t * sn * sn,
            log_scale: 2.0 * single.log_scale,
        }
    }
}
