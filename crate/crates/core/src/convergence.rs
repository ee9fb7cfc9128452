//! `a → 0` studies: element-wise convergence of `𝒰_a(k)`, the small-`a`
//! expansion of `[𝒰_a]₂₁`, and drift of box levels toward the exact ones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::renorm::{classify_branch, realize, u_elements_closed_form, BranchTag};
use crate::spectrum::{exact_spectrum, paired_spectra, BoxDomain, ScanOptions};
use crate::transfer::PointParams;

/// Default spacings; below `1e-7` the `γ/a²` strength costs too many digits.
pub const DEFAULT_A_SEQ: [f64; 9] = [0.2, 0.1, 0.05, 0.02, 0.01, 1e-3, 1e-4, 1e-5, 1e-6];

/// Residuals below this are rounding noise and are left out of slope fits.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub a: f64,
    /// `|[𝒰_a]ᵢⱼ − Uᵢⱼ|` in row-major order.
    pub element_errors: [f64; 4],
    /// `|det 𝒰_a − 1|`.
    pub det_error: f64,
    pub k_n_error: Option<f64>,
}

fn check_a_seq(a_seq: &[f64]) -> Result<()> {
    for &a in a_seq {
        finite("a", a)?;
        if a <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "a_seq",
                reason: format!("spacings must be positive, got {a}"),
            });
        }
    }
    if a_seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter {
            name: "a_seq",
            reason: "spacings must be strictly descending".into(),
        });
    }
    Ok(())
}

/// One row per spacing, in the order of `a_seq`.
pub fn u_limit_table(p: &PointParams, k: f64, a_seq: &[f64]) -> Result<Vec<ConvergenceRow>> {
    check_a_seq(a_seq)?;
    let target = p.u_matrix();
    a_seq
        .par_iter()
        .map(|&a| {
            let u = u_elements_closed_form(&realize(p, a)?, k)?;
            let err = |x: f64, y: f64| (x - y).abs();
            Ok(ConvergenceRow {
                a,
                element_errors: [
                    err(u.m11, target.m11),
                    err(u.m12, target.m12),
                    err(u.m21, target.m21),
                    err(u.m22, target.m22),
                ],
                det_error: (u.det() - 1.0).abs(),
                k_n_error: None,
            })
        })
        .collect()
}

/// `[𝒰_a(k)]₂₁ − γ − 2a + (γ/3)k²a²`, which is `O(a³)` on the `γ ≠ 0`
/// schedule.
///
/// On that schedule `[𝒰_a(0)]₂₁ = γ + 2a` exactly, so the constant part is
/// subtracted as the `k = 0` value; this keeps the schedule's own rounding
/// out of the residual.
pub fn expansion_residual(p: &PointParams, k: f64, a: f64) -> Result<f64> {
    if classify_branch(p) != BranchTag::GammaNonZero {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: "the expansion applies to the gamma != 0 schedule".into(),
        });
    }
    let r = realize(p, a)?;
    let u = u_elements_closed_form(&r, k)?;
    let u0 = u_elements_closed_form(&r, 0.0)?;
    Ok(u.m21 - u0.m21 + p.gamma() / 3.0 * k * k * a * a)
}

/// Least-squares slope of `log y` against `log x`, skipping `y` at or below
/// [`NOISE_FLOOR`]. `None` with fewer than two usable points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && y.abs() > NOISE_FLOOR && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if used.len() < 2 {
        return None;
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fitted order of the expansion residual over `a_seq` (expected ≈ 3).
pub fn expansion_check(p: &PointParams, k: f64, a_seq: &[f64]) -> Result<Option<f64>> {
    let points = a_seq
        .iter()
        .map(|&a| Ok((a, expansion_residual(p, k, a)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(loglog_slope(&points))
}

/// Fitted convergence order of each element error.
pub fn element_slopes(rows: &[ConvergenceRow]) -> [Option<f64>; 4] {
    std::array::from_fn(|i| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.a, r.element_errors[i])).collect();
        loglog_slope(&pts)
    })
}

/// Whether the last `count` values never increase; values at or below
/// [`NOISE_FLOOR`] count as converged.
pub fn nonincreasing_tail(values: &[f64], count: usize) -> bool {
    let start = values.len().saturating_sub(count);
    values[start..]
        .windows(2)
        .all(|w| w[1] <= w[0] || w[1] <= NOISE_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub a: f64,
    pub k_n: f64,
    /// `kₙ(a) − kₙ`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftTable {
    pub n: usize,
    pub k_exact: f64,
    pub bound: bool,
    pub rows: Vec<DriftRow>,
}

/// Level `n` of the approximant at each spacing against the exact level
/// `n`, both numbered as in [`paired_spectra`].
pub fn eigenvalue_drift(
    p: &PointParams,
    d: &BoxDomain,
    n: usize,
    a_seq: &[f64],
    opts: &ScanOptions,
) -> Result<DriftTable> {
    check_a_seq(a_seq)?;
    let rows: Vec<(DriftRow, bool, f64)> = a_seq
        .par_iter()
        .map(|&a| {
            let s = paired_spectra(p, d, a, opts)?;
            let approx = *s.approx.require(n)?;
            let exact = *s.exact.require(n)?;
            if approx.bound != exact.bound {
                return Err(Error::Numerical(format!(
                    "level {n} changes sign of energy at a = {a}"
                )));
            }
            Ok((
                DriftRow {
                    a,
                    k_n: approx.k,
                    error: approx.k - exact.k,
                },
                exact.bound,
                exact.k,
            ))
        })
        .collect::<Result<_>>()?;
    let (k_exact, bound) = match rows.first() {
        Some((_, b, k)) => (*k, *b),
        None => {
            // No spacings: report the exact level alone.
            let e = *exact_spectrum(p, d, opts)?.require(n)?;
            (e.k, e.bound)
        }
    };
    Ok(DriftTable {
        n,
        k_exact,
        bound,
        rows: rows.into_iter().map(|r| r.0).collect(),
    })
}
