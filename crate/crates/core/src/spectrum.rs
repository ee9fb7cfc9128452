//! Dirichlet-box levels and eigenfunctions.
//!
//! The interaction sits at the origin of a box `[x1, x2]` with `φ(x1) =
//! φ(x2) = 0`. Starting from `Ψ(x1) = (1, 0)` and transferring to `x2`, the
//! levels are the zeros of the `(2,1)` entry of the full chain (the secular
//! function).
//!
//! Levels are numbered from the bottom of the spectrum, negative energies
//! included. For negative energies the wave number is imaginary, `k = iκ`,
//! and an [`Eigenpair`] then stores `κ` with `bound = true`. The three-δ
//! approximant is an ordinary Sturm-Liouville problem, so the number of its
//! levels below `E` is the number of interior zeros of the `E`-solution;
//! this gives its bound levels without any scanning. The exact interaction
//! breaks that rule (its eigenfunctions can lose nodes at the origin), so
//! its negative levels are scanned inside the window allowed by the
//! infinite-line bound states `γκ² + (α+δ)κ + β = 0`.
//!
//! As `a → 0` some approximant levels dive to `−∞` and have no exact
//! counterpart; [`paired_spectra`] numbers the exact levels after those, so
//! that the `n`-th exact level is the limit of the `n`-th approximant level.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::renorm::{u_closed_form_energy_scaled, ThreeDeltaRealization};
use crate::transfer::{
    complex_delta_matrix, connection_matrix, free_propagator_scaled, propagator_energy_scaled,
    Complex, ComplexMat2, PointParams, RealMat2, StateVec,
};

/// Bisection stops once the bracket is this narrow (in `k` or `κ`).
pub const ROOT_TOLERANCE: f64 = 1e-12;
/// Default lower edge of the positive-`k` scan.
pub const DEFAULT_K_LO: f64 = 1e-3;
/// Relative residual above which a proposed `k` is rejected.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-6;
/// Samples with `|φ|` below this are sign-neutral when counting nodes.
pub const NODE_FLOOR: f64 = 1e-10;

const BOUND_SCAN_STEPS: usize = 4000;

/// The interval `[x1, x2]`, `x1 < 0 < x2`, with Dirichlet walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub x1: f64,
    pub x2: f64,
}

impl BoxDomain {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        finite("x1", x1)?;
        finite("x2", x2)?;
        if x1 >= 0.0 {
            return Err(Error::InvalidParameter {
                name: "x1",
                reason: format!("left wall must be negative, got {x1}"),
            });
        }
        if x2 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "x2",
                reason: format!("right wall must be positive, got {x2}"),
            });
        }
        Ok(Self { x1, x2 })
    }

    /// `[−half_width, half_width]`.
    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    /// Largest spacing `a` that keeps all three δ's inside.
    pub fn max_spacing(&self) -> f64 {
        (-self.x1).min(self.x2)
    }

    pub fn check_spacing(&self, a: f64) -> Result<()> {
        if a >= self.max_spacing() {
            return Err(Error::Geometry {
                a,
                limit: self.max_spacing(),
            });
        }
        Ok(())
    }
}

/// A level: quantum number and wave number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    /// 1-based, counted from the lowest level.
    pub n: usize,
    /// `k > 0`, or `κ > 0` when `bound`.
    pub k: f64,
    /// Negative energy, `E = −κ²`.
    pub bound: bool,
}

impl Eigenpair {
    pub fn energy(&self) -> f64 {
        if self.bound {
            -self.k * self.k
        } else {
            self.k * self.k
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScanWarning {
    /// Two neighbouring roots closer than four grid spacings.
    GridTooCoarse { k_left: f64, k_right: f64 },
    /// The lowest root was bracketed by the first grid cell.
    RootAtScanEdge { k: f64 },
    /// The exact problem has more bound levels than the approximant.
    BoundCountMismatch { exact: usize, approx: usize },
}

impl std::fmt::Display for ScanWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScanWarning::GridTooCoarse { k_left, k_right } => write!(
                f,
                "grid too coarse: roots {k_left:.9} and {k_right:.9} are within 4 grid steps"
            ),
            ScanWarning::RootAtScanEdge { k } => {
                write!(f, "lowest root {k:.9} sits in the first scan cell; raise grid_steps or lower k_lo")
            }
            ScanWarning::BoundCountMismatch { exact, approx } => write!(
                f,
                "exact problem has {exact} bound levels but the approximant only {approx}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootScan {
    /// Numbered from 1 upward from `k_lo`.
    pub roots: Vec<Eigenpair>,
    pub warnings: Vec<ScanWarning>,
}

/// Scan `f` on `grid_steps` uniform points of `[k_lo, k_hi]` and bisect
/// every sign change down to [`ROOT_TOLERANCE`]. Grid points where `f` is
/// exactly zero are roots.
pub fn find_eigenvalues(
    f: impl Fn(f64) -> f64,
    k_lo: f64,
    k_hi: f64,
    grid_steps: usize,
) -> Result<RootScan> {
    finite("k_lo", k_lo)?;
    finite("k_hi", k_hi)?;
    if !(k_lo > 0.0 && k_lo < k_hi) {
        return Err(Error::InvalidParameter {
            name: "k_range",
            reason: format!("need 0 < k_lo < k_hi, got ({k_lo}, {k_hi})"),
        });
    }
    if grid_steps < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_steps",
            reason: format!("need at least 2 grid points, got {grid_steps}"),
        });
    }
    let step = (k_hi - k_lo) / (grid_steps - 1) as f64;
    let ks: Vec<f64> = (0..grid_steps)
        .map(|i| {
            if i + 1 == grid_steps {
                k_hi
            } else {
                k_lo + i as f64 * step
            }
        })
        .collect();
    let fs: Vec<f64> = ks.iter().map(|&k| f(k)).collect();
    if let Some(i) = fs.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "secular function is {} at k = {}",
            fs[i], ks[i]
        )));
    }

    let mut found: Vec<(f64, usize)> = Vec::new();
    for i in 0..grid_steps {
        if fs[i] == 0.0 {
            found.push((ks[i], i));
        } else if i + 1 < grid_steps && fs[i] * fs[i + 1] < 0.0 {
            found.push((bisect(&f, ks[i], ks[i + 1], fs[i]), i));
        }
    }

    let mut warnings = Vec::new();
    if let Some(&(k, 0)) = found.first() {
        warnings.push(ScanWarning::RootAtScanEdge { k });
    }
    for w in found.windows(2) {
        if w[1].0 - w[0].0 < 4.0 * step {
            warnings.push(ScanWarning::GridTooCoarse {
                k_left: w[0].0,
                k_right: w[1].0,
            });
        }
    }
    let roots = found
        .into_iter()
        .enumerate()
        .map(|(i, (k, _))| Eigenpair {
            n: i + 1,
            k,
            bound: false,
        })
        .collect();
    Ok(RootScan { roots, warnings })
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= ROOT_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A value `m·e^{log}` kept in split form.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scaled<T> {
    m: T,
    log: f64,
}

fn chain_scaled(parts: &[(RealMat2, f64)]) -> (RealMat2, f64) {
    parts
        .iter()
        .fold((RealMat2::identity(), 0.0), |(acc, log), (m, l)| {
            let prod = *m * acc;
            let norm = prod.max_abs();
            if norm > 0.0 && norm.is_finite() {
                (prod.scale(1.0 / norm), log + l + norm.ln())
            } else {
                (prod, log + l)
            }
        })
}

/// Secular function of the exact interaction at wave number `k > 0`.
///
/// The phase `e^{iθ}` is dropped, so the result is real and θ-independent.
pub fn secular_exact(p: &PointParams, d: &BoxDomain, k: f64) -> f64 {
    let (v, log) = secular_exact_energy(p, d, k * k);
    v * log.exp()
}

/// Secular function at energy `E` in split form `(value, log_scale)`; the
/// true value is `value·e^{log_scale}`.
pub fn secular_exact_energy(p: &PointParams, d: &BoxDomain, energy: f64) -> (f64, f64) {
    let (m, log) = exact_chain(p, d, energy);
    (m.m21, log)
}

fn exact_chain(p: &PointParams, d: &BoxDomain, energy: f64) -> (RealMat2, f64) {
    chain_scaled(&[
        free_propagator_scaled(energy, -d.x1),
        (p.u_matrix(), 0.0),
        free_propagator_scaled(energy, d.x2),
    ])
}

/// Secular function of the three-δ approximant at wave number `k > 0`,
/// built on the real closed form of `𝒰_a(k)`; the gauge phase `e^{2iAa}`
/// cannot move a zero and is dropped.
pub fn secular_approx(r: &ThreeDeltaRealization, d: &BoxDomain, k: f64) -> Result<f64> {
    let (v, log) = secular_approx_energy(r, d, k * k)?;
    Ok(v * log.exp())
}

pub fn secular_approx_energy(
    r: &ThreeDeltaRealization,
    d: &BoxDomain,
    energy: f64,
) -> Result<(f64, f64)> {
    d.check_spacing(r.a)?;
    let (m, log) = approx_chain(r, d, energy);
    Ok((m.m21, log))
}

fn approx_chain(r: &ThreeDeltaRealization, d: &BoxDomain, energy: f64) -> (RealMat2, f64) {
    chain_scaled(&[
        free_propagator_scaled(energy, -r.a - d.x1),
        u_closed_form_energy_scaled(r, energy),
        free_propagator_scaled(energy, d.x2 - r.a),
    ])
}

/// Residual bound used to accept a level: the secular value relative to the
/// largest magnitude the chain could produce.
fn relative_residual(parts: &[(RealMat2, f64)], value: (f64, f64)) -> f64 {
    let bound_log: f64 = parts.iter().map(|(m, l)| m.max_abs().ln() + l).sum();
    (value.0.abs().ln() + value.1 - bound_log).exp()
}

/// Scan options for positive wave numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub k_lo: f64,
    pub k_hi: f64,
    pub grid_steps: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            k_lo: DEFAULT_K_LO,
            k_hi: 1.2,
            grid_steps: 5000,
        }
    }
}

/// Levels in ascending energy, bound levels first.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub levels: Vec<Eigenpair>,
    pub bound_count: usize,
    pub warnings: Vec<ScanWarning>,
}

impl Spectrum {
    pub fn level(&self, n: usize) -> Option<&Eigenpair> {
        self.levels.iter().find(|e| e.n == n)
    }

    pub fn require(&self, n: usize) -> Result<&Eigenpair> {
        self.level(n).ok_or(Error::LevelNotFound {
            n,
            available: self.levels.len(),
        })
    }

    /// Positive-`k` levels only.
    pub fn scattering(&self) -> impl Iterator<Item = &Eigenpair> {
        self.levels.iter().filter(|e| !e.bound)
    }

    fn renumbered(mut self, offset: usize) -> Self {
        for e in &mut self.levels {
            e.n += offset;
        }
        self
    }
}

fn assemble(bound: Vec<f64>, scan: RootScan, warnings: Vec<ScanWarning>) -> Spectrum {
    let bound_count = bound.len();
    let mut levels: Vec<Eigenpair> = bound
        .into_iter()
        .enumerate()
        .map(|(i, kappa)| Eigenpair {
            n: i + 1,
            k: kappa,
            bound: true,
        })
        .collect();
    levels.extend(scan.roots.into_iter().map(|e| Eigenpair {
        n: e.n + bound_count,
        ..e
    }));
    let mut all = warnings;
    all.extend(scan.warnings);
    Spectrum {
        levels,
        bound_count,
        warnings: all,
    }
}

/// Number of interior zeros of the approximant's solution at energy
/// `E ≤ 0` started from `Ψ(x1) = (1, 0)`, which equals the number of its
/// levels strictly below `E`.
pub fn approx_levels_below(r: &ThreeDeltaRealization, d: &BoxDomain, energy: f64) -> Result<usize> {
    d.check_spacing(r.a)?;
    if energy > 0.0 {
        return Err(Error::InvalidParameter {
            name: "energy",
            reason: "zero counting is only implemented for E <= 0".into(),
        });
    }
    // On each free segment a solution of φ″ = κ²φ has at most one zero, so
    // signs at the breakpoints are enough.
    let segments = [
        (-r.a - d.x1, r.v_minus),
        (r.a, r.v_0),
        (r.a, r.v_plus),
        (d.x2 - r.a, 0.0),
    ];
    let mut psi = (1.0f64, 0.0f64); // (φ′, φ)
    let mut sign = 1.0f64;
    let mut zeros = 0;
    for (i, &(len, v)) in segments.iter().enumerate() {
        let (g, _) = free_propagator_scaled(energy, len);
        let dphi = g.m11 * psi.0 + g.m12 * psi.1;
        let phi = g.m21 * psi.0 + g.m22 * psi.1;
        let last = i + 1 == segments.len();
        let here = if phi != 0.0 {
            phi.signum()
        } else if last {
            // Just left of the wall the sign is opposite to φ′.
            -dphi.signum()
        } else {
            // Crossing exactly at a breakpoint; φ′ carries the new sign.
            zeros += 1;
            sign = dphi.signum();
            let n = dphi.abs().max(f64::MIN_POSITIVE);
            psi = ((dphi + v * phi) / n, phi / n);
            continue;
        };
        if here != sign {
            zeros += 1;
            sign = here;
        }
        let n = dphi.abs().max(phi.abs()).max(f64::MIN_POSITIVE);
        psi = ((dphi + v * phi) / n, phi / n);
    }
    Ok(zeros)
}

/// `κ` of every negative-energy level of the approximant, deepest first.
pub fn approx_bound_levels(r: &ThreeDeltaRealization, d: &BoxDomain) -> Result<Vec<f64>> {
    let count = approx_levels_below(r, d, 0.0)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    // A sum of attractive δ's of total strength S cannot bind below −S²/4.
    let kappa_hi = 0.5 * r.attractive_strength() * (1.0 + 1e-9) + 1e-9;
    if approx_levels_below(r, d, -kappa_hi * kappa_hi)? != 0 {
        return Err(Error::Numerical(format!(
            "level below the lower bound -{kappa_hi}^2"
        )));
    }
    (1..=count)
        .map(|j| {
            let (mut lo, mut hi) = (0.0f64, kappa_hi);
            for _ in 0..300 {
                if hi - lo <= ROOT_TOLERANCE * hi.max(1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if approx_levels_below(r, d, -mid * mid)? >= j {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect()
}

/// `κ` of every negative-energy level of the exact interaction, deepest
/// first.
pub fn exact_bound_levels(p: &PointParams, d: &BoxDomain) -> Result<Vec<f64>> {
    let (alpha, beta, gamma, delta) = (p.alpha(), p.beta(), p.gamma(), p.delta());
    // Decaying solutions e^{κx}, e^{−κx} on the line match when
    // γκ² + (α+δ)κ + β = 0; Dirichlet walls only push levels up.
    let line_roots: Vec<f64> = if gamma.abs() > 0.0 {
        let disc = (alpha + delta).powi(2) - 4.0 * gamma * beta;
        if disc < 0.0 {
            Vec::new()
        } else {
            let s = disc.sqrt();
            vec![
                (-(alpha + delta) + s) / (2.0 * gamma),
                (-(alpha + delta) - s) / (2.0 * gamma),
            ]
        }
    } else if alpha + delta != 0.0 {
        vec![-beta / (alpha + delta)]
    } else {
        Vec::new()
    };
    let Some(kappa_line) = line_roots.into_iter().filter(|k| *k > 0.0).reduce(f64::max) else {
        return Ok(Vec::new());
    };
    let kappa_hi = 1.05 * kappa_line + 1e-3;
    let f = |kappa: f64| secular_exact_energy(p, d, -kappa * kappa).0;
    let scan = find_eigenvalues(f, 1e-9, kappa_hi, BOUND_SCAN_STEPS)?;
    let mut kappas: Vec<f64> = scan.roots.iter().map(|e| e.k).collect();
    kappas.reverse();
    Ok(kappas)
}

/// All levels of the exact interaction up to `k_hi`, numbered from its own
/// ground state.
pub fn exact_spectrum(p: &PointParams, d: &BoxDomain, opts: &ScanOptions) -> Result<Spectrum> {
    let bound = exact_bound_levels(p, d)?;
    let scan = find_eigenvalues(
        |k| secular_exact(p, d, k),
        opts.k_lo,
        opts.k_hi,
        opts.grid_steps,
    )?;
    Ok(assemble(bound, scan, Vec::new()))
}

/// All levels of the three-δ approximant up to `k_hi`.
pub fn approx_spectrum(
    r: &ThreeDeltaRealization,
    d: &BoxDomain,
    opts: &ScanOptions,
) -> Result<Spectrum> {
    d.check_spacing(r.a)?;
    let bound = approx_bound_levels(r, d)?;
    let scan = find_eigenvalues(
        |k| secular_approx(r, d, k).unwrap_or(f64::NAN),
        opts.k_lo,
        opts.k_hi,
        opts.grid_steps,
    )?;
    Ok(assemble(bound, scan, Vec::new()))
}

/// Levels whose approximant counterparts run off to `−∞` as `a → 0`.
pub fn escaped_level_count(
    p: &PointParams,
    d: &BoxDomain,
    r: &ThreeDeltaRealization,
) -> Result<(usize, Option<ScanWarning>)> {
    let approx = approx_levels_below(r, d, 0.0)?;
    let exact = exact_bound_levels(p, d)?.len();
    if exact > approx {
        return Ok((0, Some(ScanWarning::BoundCountMismatch { exact, approx })));
    }
    Ok((approx - exact, None))
}

/// Exact and approximant spectra with matching quantum numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSpectra {
    pub exact: Spectrum,
    pub approx: Spectrum,
    pub realization: ThreeDeltaRealization,
    /// Approximant levels with no exact counterpart (`n = 1..=escaped`).
    pub escaped: usize,
}

pub fn paired_spectra(
    p: &PointParams,
    d: &BoxDomain,
    a: f64,
    opts: &ScanOptions,
) -> Result<PairedSpectra> {
    let r = crate::renorm::realize(p, a)?;
    d.check_spacing(a)?;
    let approx = approx_spectrum(&r, d, opts)?;
    let (escaped, warning) = escaped_level_count(p, d, &r)?;
    let mut exact = exact_spectrum(p, d, opts)?.renumbered(escaped);
    exact.warnings.extend(warning);
    Ok(PairedSpectra {
        exact,
        approx,
        realization: r,
        escaped,
    })
}

/// Which problem a sampled eigenfunction belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveKind {
    Exact,
    ThreeDelta,
}

/// An eigenfunction sampled on an ascending grid, unit-normalized with
/// `φ′(x1) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSamples {
    pub xs: Vec<f64>,
    pub phis: Vec<Complex>,
    pub kind: WaveKind,
    /// `φ(−0)` on the same normalization when the grid contains `x = 0`;
    /// the sample at `0` itself is the right limit.
    pub left_limit_at_zero: Option<Complex>,
}

impl WaveSamples {
    /// `∫|φ|² dx` by the trapezoid rule on the sample grid.
    pub fn norm_sq(&self) -> f64 {
        trapezoid(&self.xs, &self.phis)
    }
}

fn trapezoid(xs: &[f64], phis: &[Complex]) -> f64 {
    xs.windows(2)
        .zip(phis.windows(2))
        .map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0].norm_sqr() + p[1].norm_sqr()))
        .sum()
}

/// `points` uniform samples of the box with the nearest interior sample
/// moved onto `x = 0`.
pub fn uniform_grid(d: &BoxDomain, points: usize) -> Vec<f64> {
    let points = points.max(3);
    let step = d.width() / (points - 1) as f64;
    let mut xs: Vec<f64> = (0..points)
        .map(|i| {
            if i + 1 == points {
                d.x2
            } else {
                d.x1 + i as f64 * step
            }
        })
        .collect();
    let nearest = ((-d.x1) / step).round() as usize;
    let nearest = nearest.clamp(1, points - 2);
    xs[nearest] = 0.0;
    xs
}

fn check_grid(d: &BoxDomain, grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "need at least two samples".into(),
        });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "samples must be strictly ascending".into(),
        });
    }
    if grid[0] < d.x1 || grid[grid.len() - 1] > d.x2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "samples must lie inside the box".into(),
        });
    }
    Ok(())
}

/// A state vector `v·e^{log}` with `v` kept near unit size.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ScaledState(Scaled<StateVec>);

impl ScaledState {
    fn start() -> Self {
        Self(Scaled {
            m: StateVec::real(1.0, 0.0),
            log: 0.0,
        })
    }

    fn apply(self, (m, log): (ComplexMat2, f64)) -> Self {
        Self(Scaled {
            m: m * self.0.m,
            log: self.0.log + log,
        })
        .renormalized()
    }

    fn renormalized(self) -> Self {
        let n = self.0.m.norm_max();
        if n > 0.0 && n.is_finite() {
            Self(Scaled {
                m: self.0.m.scale(Complex::new(1.0 / n, 0.0)),
                log: self.0.log + n.ln(),
            })
        } else {
            self
        }
    }

    fn times(self, c: Scaled<Complex>) -> Self {
        Self(Scaled {
            m: self.0.m.scale(c.m),
            log: self.0.log + c.log,
        })
        .renormalized()
    }

    /// Least-squares `c` with `c·self ≈ target`.
    fn match_to(self, target: Self) -> Scaled<Complex> {
        let (r, t) = (self.0.m, target.0.m);
        let num = r.dphi.conj() * t.dphi + r.phi.conj() * t.phi;
        let den = r.dphi.norm_sqr() + r.phi.norm_sqr();
        Scaled {
            m: num / den,
            log: target.0.log - self.0.log,
        }
    }

    fn unscaled(self) -> StateVec {
        self.0.m.scale(Complex::new(self.0.log.exp(), 0.0))
    }
}

fn free_step(energy: f64, x: f64) -> (ComplexMat2, f64) {
    let (m, log) = free_propagator_scaled(energy, x);
    (m.to_complex(), log)
}

fn plain(m: ComplexMat2) -> (ComplexMat2, f64) {
    (m, 0.0)
}

// Both wave builders integrate inward from each wall and join the halves at
// the origin. Shooting across the whole box instead would amplify the
// eigenvalue's last-digit error by `e^{κ(x2−x1)}` for deep levels.

/// Exact-interaction eigenfunction candidate at energy `E`, with
/// `Ψ(x1) = (1, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct ExactWave {
    domain: BoxDomain,
    energy: f64,
    left_of_zero: ScaledState,
    right_of_zero: ScaledState,
    right_scale: Scaled<Complex>,
}

impl ExactWave {
    pub fn new(p: &PointParams, d: &BoxDomain, energy: f64) -> Self {
        let left = ScaledState::start().apply(free_step(energy, -d.x1));
        let joined = left.apply(plain(connection_matrix(p)));
        let right = ScaledState::start().apply(free_step(energy, -d.x2));
        let right_scale = right.match_to(joined);
        Self {
            domain: *d,
            energy,
            left_of_zero: left,
            right_of_zero: right.times(right_scale),
            right_scale,
        }
    }

    fn scaled_at(&self, x: f64) -> ScaledState {
        if x < 0.0 {
            ScaledState::start().apply(free_step(self.energy, x - self.domain.x1))
        } else {
            ScaledState::start()
                .apply(free_step(self.energy, x - self.domain.x2))
                .times(self.right_scale)
        }
    }

    /// `Ψ(x)`; at `x = 0` the right limit. Unnormalized; may overflow for
    /// deep levels in wide boxes.
    pub fn state_at(&self, x: f64) -> StateVec {
        self.scaled_at(x).unscaled()
    }

    /// `Ψ(−0)`.
    pub fn left_limit(&self) -> StateVec {
        self.left_of_zero.unscaled()
    }

    /// `Ψ(+0)`.
    pub fn right_limit(&self) -> StateVec {
        self.right_of_zero.unscaled()
    }
}

/// Three-δ eigenfunction candidate at energy `E`, with `Ψ(x1) = (1, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct ApproxWave {
    domain: BoxDomain,
    energy: f64,
    a: f64,
    field: f64,
    after_minus: ScaledState,
    before_plus: ScaledState,
    right_scale: Scaled<Complex>,
}

impl ApproxWave {
    pub fn new(r: &ThreeDeltaRealization, d: &BoxDomain, energy: f64) -> Result<Self> {
        d.check_spacing(r.a)?;
        // The escape branch's extra π is realized as additional field on
        // (−a, a), which keeps φ continuous.
        let field = if r.extra_phase_pi {
            r.vector_potential + std::f64::consts::PI / (2.0 * r.a)
        } else {
            r.vector_potential
        };
        let delta = |v: f64, im: f64| plain(complex_delta_matrix(Complex::new(v, im)));
        let after_minus = ScaledState::start()
            .apply(free_step(energy, -r.a - d.x1))
            .apply(delta(r.v_minus, field));
        let left_at_zero = after_minus.apply(propagator_energy_scaled(field, energy, r.a));
        let before_plus = ScaledState::start()
            .apply(free_step(energy, r.a - d.x2))
            .apply(delta(-r.v_plus, field));
        let right_at_zero = before_plus
            .apply(propagator_energy_scaled(field, energy, -r.a))
            .apply(delta(-r.v_0, 0.0));
        let right_scale = right_at_zero.match_to(left_at_zero);
        Ok(Self {
            domain: *d,
            energy,
            a: r.a,
            field,
            after_minus,
            before_plus,
            right_scale,
        })
    }

    fn scaled_at(&self, x: f64) -> ScaledState {
        let a = self.a;
        if x <= -a {
            ScaledState::start().apply(free_step(self.energy, x - self.domain.x1))
        } else if x <= 0.0 {
            self.after_minus
                .apply(propagator_energy_scaled(self.field, self.energy, x + a))
        } else if x <= a {
            self.before_plus
                .apply(propagator_energy_scaled(self.field, self.energy, x - a))
                .times(self.right_scale)
        } else {
            ScaledState::start()
                .apply(free_step(self.energy, x - self.domain.x2))
                .times(self.right_scale)
        }
    }

    /// `Ψ(x)`, unnormalized. At `0` and `±a`, `φ′` is the left limit.
    pub fn state_at(&self, x: f64) -> StateVec {
        self.scaled_at(x).unscaled()
    }
}

fn normalize(
    xs: &[f64],
    states: Vec<ScaledState>,
    extra: Option<ScaledState>,
) -> (Vec<Complex>, Option<Complex>) {
    let top = states
        .iter()
        .chain(extra.iter())
        .filter(|s| s.0.m.phi.norm() > 0.0)
        .map(|s| s.0.log + s.0.m.phi.norm().ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let top = if top.is_finite() { top } else { 0.0 };
    let rescale = |s: &ScaledState| s.0.m.phi * (s.0.log - top).exp();
    let phis: Vec<Complex> = states.iter().map(rescale).collect();
    let left = extra.as_ref().map(rescale);
    let norm = trapezoid(xs, &phis).sqrt();
    let inv = if norm > 0.0 { 1.0 / norm } else { 1.0 };
    (
        phis.into_iter().map(|z| z * inv).collect(),
        left.map(|z| z * inv),
    )
}

fn ensure_eigen(k: f64, parts: &[(RealMat2, f64)], value: (f64, f64)) -> Result<()> {
    let residual = relative_residual(parts, value);
    if residual.is_nan() || residual > EIGEN_RESIDUAL_TOLERANCE {
        return Err(Error::NotAnEigenvalue {
            k,
            residual,
            tolerance: EIGEN_RESIDUAL_TOLERANCE,
        });
    }
    Ok(())
}

/// Sampled exact eigenfunction for a positive wave number.
pub fn eigenfunction_exact(
    p: &PointParams,
    d: &BoxDomain,
    k: f64,
    grid: &[f64],
) -> Result<WaveSamples> {
    eigenfunction_exact_at_energy(p, d, k * k, grid)
}

/// Sampled exact eigenfunction for a level of either sign.
pub fn eigenfunction_exact_level(
    p: &PointParams,
    d: &BoxDomain,
    level: &Eigenpair,
    grid: &[f64],
) -> Result<WaveSamples> {
    eigenfunction_exact_at_energy(p, d, level.energy(), grid)
}

pub fn eigenfunction_exact_at_energy(
    p: &PointParams,
    d: &BoxDomain,
    energy: f64,
    grid: &[f64],
) -> Result<WaveSamples> {
    check_grid(d, grid)?;
    let parts = [
        free_propagator_scaled(energy, -d.x1),
        (p.u_matrix(), 0.0),
        free_propagator_scaled(energy, d.x2),
    ];
    ensure_eigen(
        energy.abs().sqrt(),
        &parts,
        secular_exact_energy(p, d, energy),
    )?;
    let wave = ExactWave::new(p, d, energy);
    let states: Vec<ScaledState> = grid.iter().map(|&x| wave.scaled_at(x)).collect();
    let has_zero = grid.contains(&0.0);
    let (phis, left) = normalize(grid, states, has_zero.then_some(wave.left_of_zero));
    Ok(WaveSamples {
        xs: grid.to_vec(),
        phis,
        kind: WaveKind::Exact,
        left_limit_at_zero: left,
    })
}

/// Sampled approximant eigenfunction for a positive wave number.
pub fn eigenfunction_approx(
    r: &ThreeDeltaRealization,
    d: &BoxDomain,
    k: f64,
    grid: &[f64],
) -> Result<WaveSamples> {
    eigenfunction_approx_at_energy(r, d, k * k, grid)
}

pub fn eigenfunction_approx_level(
    r: &ThreeDeltaRealization,
    d: &BoxDomain,
    level: &Eigenpair,
    grid: &[f64],
) -> Result<WaveSamples> {
    eigenfunction_approx_at_energy(r, d, level.energy(), grid)
}

pub fn eigenfunction_approx_at_energy(
    r: &ThreeDeltaRealization,
    d: &BoxDomain,
    energy: f64,
    grid: &[f64],
) -> Result<WaveSamples> {
    d.check_spacing(r.a)?;
    check_grid(d, grid)?;
    let parts = [
        free_propagator_scaled(energy, -r.a - d.x1),
        u_closed_form_energy_scaled(r, energy),
        free_propagator_scaled(energy, d.x2 - r.a),
    ];
    ensure_eigen(
        energy.abs().sqrt(),
        &parts,
        secular_approx_energy(r, d, energy)?,
    )?;
    let wave = ApproxWave::new(r, d, energy)?;
    let states: Vec<ScaledState> = grid.iter().map(|&x| wave.scaled_at(x)).collect();
    let (phis, _) = normalize(grid, states, None);
    Ok(WaveSamples {
        xs: grid.to_vec(),
        phis,
        kind: WaveKind::ThreeDelta,
        left_limit_at_zero: None,
    })
}

/// Sign changes of `Re φ` strictly inside the box. Samples below
/// [`NODE_FLOOR`] take the sign of their nearest non-tiny neighbour, which
/// amounts to skipping them.
pub fn count_nodes(w: &WaveSamples) -> usize {
    let n = w.phis.len();
    if n < 3 {
        return 0;
    }
    let mut last: Option<bool> = None;
    let mut nodes = 0;
    for z in &w.phis[1..n - 1] {
        if z.re.abs() < NODE_FLOOR {
            continue;
        }
        let positive = z.re > 0.0;
        if let Some(prev) = last {
            if prev != positive {
                nodes += 1;
            }
        }
        last = Some(positive);
    }
    nodes
}
