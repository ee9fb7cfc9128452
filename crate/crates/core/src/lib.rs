//! One-dimensional generalized point interactions and their realization by
//! three nearby δ-potentials with distance-renormalized strengths.
//!
//! The crate is organised bottom-up:
//!
//! - [`transfer`]: 2×2 transfer matrices on `(φ′, φ)`, the propagator with a
//!   constant vector potential, and δ / ε / general connection matrices.
//! - [`renorm`]: the strength schedules `(θ, α, β, γ, δ, a) ↦ (v₋, v₀, v₊, A)`
//!   and the composite matrix `𝒰_a(k)`.
//! - [`spectrum`]: Dirichlet-box levels and eigenfunctions for the exact
//!   interaction and for its three-δ approximation.
//! - [`convergence`]: `a → 0` tables, expansion residuals and level drift.
//! - [`cli`] and [`checks`]: the `pointint` command line and its invariant
//!   suite.
//!
//! Units are `ħ = 2m = 1`; energies are `E = k²`.

pub mod checks;
pub mod cli;
pub mod convergence;
pub mod error;
pub mod renorm;
pub mod spectrum;
pub mod transfer;
pub mod trig;

pub use error::{Error, Result};
pub use renorm::{classify_branch, realize, BranchTag, ThreeDeltaRealization};
pub use spectrum::{BoxDomain, Eigenpair, ScanOptions, WaveKind, WaveSamples};
pub use transfer::{Complex, ComplexMat2, PointParams, RealMat2, StateVec};
