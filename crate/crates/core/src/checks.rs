//! Invariant suite behind `pointint check`, plus the individual probes it
//! is built from.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::convergence::{expansion_check, u_limit_table, DEFAULT_A_SEQ};
use crate::error::Result;
use crate::renorm::{
    classify_branch, realize, three_delta_matrix, u_elements_closed_form, BranchTag,
    ThreeDeltaRealization,
};
use crate::spectrum::{
    count_nodes, eigenfunction_approx_level, eigenfunction_exact_level, find_eigenvalues,
    paired_spectra, secular_approx, secular_exact, uniform_grid, BoxDomain, Eigenpair,
    PairedSpectra, ScanOptions, WaveSamples,
};
use crate::transfer::{connection_matrix, propagator, Complex, PointParams, StateVec};

/// Step for the one-sided limits at the origin.
pub const JUMP_STEP: f64 = 1e-6;
/// Step for the central-difference ODE check.
pub const ODE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `|det 𝒢(A,k;x) − e^{2iAx}|`.
pub fn propagator_det_error(a_vec: f64, k: f64, x: f64) -> Result<f64> {
    let g = propagator(a_vec, k, x)?;
    Ok((g.det() - Complex::new(0.0, 2.0 * a_vec * x).exp()).norm())
}

/// Secular function of the approximant through the complex five-factor
/// product with the vector potential switched on, phase removed.
pub fn secular_approx_direct(r: &ThreeDeltaRealization, d: &BoxDomain, k: f64) -> Result<f64> {
    d.check_spacing(r.a)?;
    let left = propagator(0.0, k, -r.a - d.x1)?;
    let right = propagator(0.0, k, d.x2 - r.a)?;
    let m = right * three_delta_matrix(r, k)? * left;
    let mut phase = Complex::new(0.0, -2.0 * r.vector_potential * r.a).exp();
    if r.extra_phase_pi {
        phase = -phase;
    }
    Ok((m.m21 * phase).re)
}

/// Secular function of the exact interaction with the full `e^{iθ}U`,
/// phase removed afterwards.
pub fn secular_exact_direct(p: &PointParams, d: &BoxDomain, k: f64) -> Result<f64> {
    let m = propagator(0.0, k, d.x2)? * connection_matrix(p) * propagator(0.0, k, -d.x1)?;
    Ok((m.m21 * Complex::new(0.0, -p.theta()).exp()).re)
}

/// Largest pairwise gap between root lists; infinite when the counts differ.
fn max_gap(lists: &[Vec<f64>]) -> f64 {
    let first = &lists[0];
    lists[1..]
        .iter()
        .map(|l| {
            if l.len() != first.len() {
                f64::INFINITY
            } else {
                l.iter()
                    .zip(first)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            }
        })
        .fold(0.0, f64::max)
}

/// Spectrum spread across gauge angles, for the exact interaction, the
/// approximant's real closed form, and both complex direct chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeSpread {
    pub exact: f64,
    pub approx: f64,
    pub exact_direct: f64,
    pub approx_direct: f64,
}

impl GaugeSpread {
    pub fn max(&self) -> f64 {
        self.exact
            .max(self.approx)
            .max(self.exact_direct)
            .max(self.approx_direct)
    }
}

pub fn gauge_spread(
    p: &PointParams,
    d: &BoxDomain,
    a: f64,
    opts: &ScanOptions,
    thetas: &[f64],
) -> Result<GaugeSpread> {
    let scan = |f: &(dyn Fn(f64) -> f64 + Sync)| -> Result<Vec<f64>> {
        Ok(find_eigenvalues(f, opts.k_lo, opts.k_hi, opts.grid_steps)?
            .roots
            .iter()
            .map(|e| e.k)
            .collect())
    };
    let per_theta: Vec<[Vec<f64>; 4]> = thetas
        .par_iter()
        .map(|&theta| {
            let q = p.with_theta(theta)?;
            let r = realize(&q, a)?;
            Ok([
                scan(&|k| secular_exact(&q, d, k))?,
                scan(&|k| secular_approx(&r, d, k).unwrap_or(f64::NAN))?,
                scan(&|k| secular_exact_direct(&q, d, k).unwrap_or(f64::NAN))?,
                scan(&|k| secular_approx_direct(&r, d, k).unwrap_or(f64::NAN))?,
            ])
        })
        .collect::<Result<_>>()?;
    let column = |i: usize| -> Vec<Vec<f64>> { per_theta.iter().map(|c| c[i].clone()).collect() };
    Ok(GaugeSpread {
        exact: max_gap(&column(0)),
        approx: max_gap(&column(1)),
        exact_direct: max_gap(&column(2)),
        approx_direct: max_gap(&column(3)),
    })
}

/// Relative mismatch of `Ψ(+0) = 𝒱Ψ(−0)` for an exact eigenfunction, with
/// both one-sided limits reconstructed from samples at `±h`, `±2h`, `±3h`
/// (quadratic extrapolation, so the error is `O(h²)`).
pub fn jump_residual(p: &PointParams, d: &BoxDomain, level: &Eigenpair) -> Result<f64> {
    let h = JUMP_STEP;
    let grid = [d.x1, -3.0 * h, -2.0 * h, -h, h, 2.0 * h, 3.0 * h, d.x2];
    let w = eigenfunction_exact_level(p, d, level, &grid)?;
    let f = &w.phis;
    // samples ordered outward from the origin: s[0] at ±h, s[2] at ±3h
    let limit = |s: [Complex; 3], sign: f64| {
        StateVec::new(
            (s[0] * -5.0 + s[1] * 8.0 - s[2] * 3.0) * (sign / (2.0 * h)),
            s[0] * 3.0 - s[1] * 3.0 + s[2],
        )
    };
    let left = limit([f[3], f[2], f[1]], -1.0);
    let right = limit([f[4], f[5], f[6]], 1.0);
    let mapped = connection_matrix(p) * left;
    let diff = StateVec::new(right.dphi - mapped.dphi, right.phi - mapped.phi);
    Ok(diff.norm_max() / right.norm_max().max(mapped.norm_max()))
}

fn ode_step(energy: f64) -> f64 {
    if energy.abs() <= 100.0 {
        ODE_STEP
    } else {
        ODE_STEP * 10.0 / energy.abs().sqrt()
    }
}

/// Stencil centres spread over the box, at least `2h` from every point in
/// `avoid` and outside every interval in `skip`.
fn stencil_grid(d: &BoxDomain, h: f64, avoid: &[f64], skip: Option<(f64, f64)>) -> Vec<f64> {
    let centres = 400;
    let step = (d.width() - 4.0 * h) / centres as f64;
    let mut xs = Vec::new();
    for i in 0..centres {
        let c = d.x1 + 2.0 * h + (i as f64 + 0.5) * step;
        if avoid.iter().any(|s| (c - s).abs() < 2.0 * h) {
            continue;
        }
        if let Some((lo, hi)) = skip {
            if c > lo - 2.0 * h && c < hi + 2.0 * h {
                continue;
            }
        }
        xs.extend([c - h, c, c + h]);
    }
    xs
}

fn stencil_residual(w: &WaveSamples, energy: f64, h: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for t in w.phis.chunks_exact(3) {
        let lap = t[0] - t[1] * 2.0 + t[2];
        worst = worst.max((lap + t[1] * (energy * h * h)).norm());
        scale = scale.max(t[1].norm());
    }
    worst / (h * h * energy.abs().max(f64::MIN_POSITIVE) * scale)
}

/// Relative central-difference residual of `−φ″ = Eφ` for the exact
/// eigenfunction, away from the origin.
pub fn ode_residual_exact(p: &PointParams, d: &BoxDomain, level: &Eigenpair) -> Result<f64> {
    let e = level.energy();
    let h = ode_step(e);
    let w = eigenfunction_exact_level(p, d, level, &stencil_grid(d, h, &[0.0], None))?;
    Ok(stencil_residual(&w, e, h))
}

/// Same for the approximant, outside `[−a, a]`.
pub fn ode_residual_approx(
    r: &ThreeDeltaRealization,
    d: &BoxDomain,
    level: &Eigenpair,
) -> Result<f64> {
    let e = level.energy();
    let h = ode_step(e);
    let grid = stencil_grid(d, h, &[], Some((-r.a, r.a)));
    let w = eigenfunction_approx_level(r, d, level, &grid)?;
    Ok(stencil_residual(&w, e, h))
}

/// `max_n |kₙ − nπ/(x2 − x1)|` over the first `count` free-box levels.
pub fn free_box_error(d: &BoxDomain, count: usize) -> Result<f64> {
    let k_hi = (count as f64 + 0.5) * PI / d.width();
    let steps = 400 * (count + 1);
    let scan = find_eigenvalues(
        |k| secular_exact(&PointParams::free(), d, k),
        1e-3,
        k_hi,
        steps,
    )?;
    if scan.roots.len() != count {
        return Ok(f64::INFINITY);
    }
    Ok(scan
        .roots
        .iter()
        .map(|e| (e.k - e.n as f64 * PI / d.width()).abs())
        .fold(0.0, f64::max))
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        detail,
    }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> CheckOutcome {
    outcome(name, false, err.to_string())
}

/// Everything the suite needs about one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckInput {
    pub params: PointParams,
    pub domain: BoxDomain,
    pub a: f64,
    pub scan: ScanOptions,
    pub sample_points: usize,
}

/// Levels inspected by the eigenfunction checks.
const MAX_LEVEL: usize = 15;

/// Runs every invariant on `input`; the report passes iff all checks do.
pub fn run_checks(input: &CheckInput) -> CheckReport {
    let CheckInput {
        params: p,
        domain: d,
        a,
        scan: opts,
        sample_points,
    } = *input;
    let mut checks = vec![
        check_propagator_det(),
        check_composite_det(&p),
        check_limits(&p),
        check_free_box(&d),
    ];
    if classify_branch(&p) == BranchTag::GammaNonZero {
        checks.push(match expansion_check(&p, 1.0, &[1e-2, 1e-3, 1e-4]) {
            Ok(Some(s)) => outcome(
                "expansion_slope",
                (2.7..=3.3).contains(&s),
                format!("slope {s:.4}"),
            ),
            Ok(None) => outcome(
                "expansion_slope",
                false,
                "residual below noise floor".into(),
            ),
            Err(e) => failed("expansion_slope", e),
        });
    }
    checks.push(match gauge_spread(&p, &d, a, &opts, &[0.0, 0.7, PI, 2.3]) {
        Ok(g) => outcome("gauge_invariance", g.max() <= 1e-10, format!("{g:?}")),
        Err(e) => failed("gauge_invariance", e),
    });
    match paired_spectra(&p, &d, a, &opts) {
        Ok(s) => checks.extend(spectrum_checks(&p, &d, &s, sample_points)),
        Err(e) => checks.push(failed("spectrum", e)),
    }
    CheckReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn check_propagator_det() -> CheckOutcome {
    let mut worst = 0.0f64;
    for a_vec in [-3.0, 0.0, 0.4, 2.5] {
        for k in [0.0, 1e-3, 0.7, 3.0] {
            for x in [-2.0, -0.1, 0.0, 0.3, 5.0] {
                match propagator_det_error(a_vec, k, x) {
                    Ok(e) => worst = worst.max(e),
                    Err(e) => return failed("propagator_determinant", e),
                }
            }
        }
    }
    outcome(
        "propagator_determinant",
        worst <= 1e-10,
        format!("max error {worst:e}"),
    )
}

fn check_composite_det(p: &PointParams) -> CheckOutcome {
    let mut worst = 0.0f64;
    for &a in &DEFAULT_A_SEQ {
        let r = match realize(p, a) {
            Ok(r) => r,
            Err(e) => return failed("composite_determinant", e),
        };
        for k in [0.1, 0.5, 1.0, 2.0] {
            match u_elements_closed_form(&r, k) {
                Ok(u) => worst = worst.max((u.det() - 1.0).abs()),
                Err(e) => return failed("composite_determinant", e),
            }
        }
    }
    outcome(
        "composite_determinant",
        worst <= 1e-8,
        format!("max |det - 1| {worst:e}"),
    )
}

fn check_limits(p: &PointParams) -> CheckOutcome {
    match u_limit_table(p, 1.0, &[1e-6]) {
        Ok(rows) => {
            let worst = rows[0].element_errors.iter().cloned().fold(0.0, f64::max);
            outcome(
                "limit_convergence",
                worst <= 1e-4,
                format!("max element error at a=1e-6: {worst:e}"),
            )
        }
        Err(e) => failed("limit_convergence", e),
    }
}

fn check_free_box(d: &BoxDomain) -> CheckOutcome {
    match free_box_error(d, 12) {
        Ok(e) => outcome("free_box_oracle", e <= 1e-9, format!("max error {e:e}")),
        Err(e) => failed("free_box_oracle", e),
    }
}

fn spectrum_checks(
    p: &PointParams,
    d: &BoxDomain,
    s: &PairedSpectra,
    sample_points: usize,
) -> Vec<CheckOutcome> {
    let grid = uniform_grid(d, sample_points.max(2));
    let spacing = PI / d.width();
    let mut out = Vec::new();

    let mut worst_gap = 0.0f64;
    for e in s.exact.scattering() {
        if let Some(ap) = s.approx.level(e.n).filter(|l| !l.bound) {
            worst_gap = worst_gap.max((e.k - ap.k).abs());
        }
    }
    out.push(outcome(
        "interlacing",
        worst_gap < spacing,
        format!("max |k_exact - k_approx| {worst_gap:.3e} vs spacing {spacing:.3e}"),
    ));

    let approx_levels: Vec<&Eigenpair> = s
        .approx
        .levels
        .iter()
        .filter(|l| l.n <= MAX_LEVEL)
        .collect();
    let exact_levels: Vec<&Eigenpair> =
        s.exact.levels.iter().filter(|l| l.n <= MAX_LEVEL).collect();
    let r = &s.realization;

    let approx_waves: Vec<Result<WaveSamples>> = approx_levels
        .par_iter()
        .map(|l| eigenfunction_approx_level(r, d, l, &grid))
        .collect();
    let exact_waves: Vec<Result<WaveSamples>> = exact_levels
        .par_iter()
        .map(|l| eigenfunction_exact_level(p, d, l, &grid))
        .collect();

    let mut node_bad = Vec::new();
    let mut norm_worst = 0.0f64;
    let mut wall_worst = 0.0f64;
    let mut errors = Vec::new();
    for (l, w) in approx_levels.iter().zip(&approx_waves) {
        match w {
            Ok(w) => {
                let nodes = count_nodes(w);
                if nodes + 1 != l.n {
                    node_bad.push(format!("n={} has {nodes}", l.n));
                }
                norm_worst = norm_worst.max((w.norm_sq() - 1.0).abs());
                wall_worst = wall_worst
                    .max(w.phis[0].norm())
                    .max(w.phis[w.phis.len() - 1].norm());
            }
            Err(e) => errors.push(format!("approx n={}: {e}", l.n)),
        }
    }
    for (l, w) in exact_levels.iter().zip(&exact_waves) {
        match w {
            Ok(w) => {
                norm_worst = norm_worst.max((w.norm_sq() - 1.0).abs());
                wall_worst = wall_worst
                    .max(w.phis[0].norm())
                    .max(w.phis[w.phis.len() - 1].norm());
            }
            Err(e) => errors.push(format!("exact n={}: {e}", l.n)),
        }
    }
    if !errors.is_empty() {
        out.push(outcome("eigenfunctions", false, errors.join("; ")));
    }
    out.push(outcome(
        "node_law_approx",
        node_bad.is_empty() && !approx_levels.is_empty(),
        if node_bad.is_empty() {
            format!("levels 1..={} have n-1 nodes", approx_levels.len())
        } else {
            node_bad.join(", ")
        },
    ));
    out.push(outcome(
        "normalization",
        norm_worst <= 1e-6,
        format!("max |norm - 1| {norm_worst:e}"),
    ));
    out.push(outcome(
        "boundary_values",
        wall_worst <= 1e-8,
        format!("max |phi| at walls {wall_worst:e}"),
    ));

    let jumps: Vec<(usize, Result<f64>)> = exact_levels
        .par_iter()
        .filter(|l| l.n <= 13)
        .map(|l| (l.n, jump_residual(p, d, l)))
        .collect();
    out.push(summarize("jump_condition", jumps, 1e-4));

    let ode: Vec<(usize, Result<f64>)> = exact_levels
        .par_iter()
        .map(|l| (l.n, ode_residual_exact(p, d, l)))
        .chain(
            approx_levels
                .par_iter()
                .map(|l| (l.n, ode_residual_approx(r, d, l))),
        )
        .collect();
    out.push(summarize("ode_residual", ode, 1e-4));
    out
}

fn summarize(name: &'static str, items: Vec<(usize, Result<f64>)>, tol: f64) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (n, v) in items {
        match v {
            Ok(v) if v <= tol => worst = worst.max(v),
            Ok(v) => bad.push(format!("n={n}: {v:e}")),
            Err(e) => bad.push(format!("n={n}: {e}")),
        }
    }
    if bad.is_empty() {
        outcome(name, true, format!("max {worst:e}"))
    } else {
        outcome(name, false, bad.join(", "))
    }
}
