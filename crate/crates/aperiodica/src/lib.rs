//! # aperiodica
//!
//! Generation and harmonic analysis of aperiodic Delone point sets.
//!
//! The crate generates point sets in low-dimensional Euclidean space —
//! lattices, tilings built from symbol sequences, and cut-and-project model
//! sets — and computes their combinatorial and spectral statistics:
//!
//! - [`pointset`]: point-set samples, Delone parameters (packing/covering
//!   radii), difference sets and Meyer diagnostics;
//! - [`sequence`]: conversions between marked symbol sequences and
//!   one-dimensional Delone sets, word-complexity census;
//! - [`patches`]: centered ball patches, the patch census `N(S)`, patch
//!   frequencies, repetitivity and patch-counting entropy;
//! - [`cps`]: cut-and-project schemes over `R^N x R^m` with windows,
//!   star map, model-set enumeration, dual lattice and Fourier module;
//! - [`autocorr`]: finite-volume autocorrelation estimators and the exact
//!   window-overlap oracle for model sets;
//! - [`diffraction`]: averaged exponential sums (Bragg amplitudes), peak
//!   scans, closed-form model-set intensities, smoothing-kernel consistency
//!   checks and symmetry checks;
//! - [`hull`]: the hull metric, the torus dynamical system of a scheme, and
//!   uniform averaging of twisted translates with an analytic projection
//!   oracle.
//!
//! ## Conventions
//!
//! All sign and normalization choices used across the crate are fixed here
//! and referenced by the individual modules:
//!
//! - **Waves.** A point `x` scatters the plane wave `xi -> exp(-i xi . x)`.
//!   Averaged amplitudes are `c_S(xi) = (1/vol B_S) sum_{x in B_S} exp(-i xi . x)`.
//! - **Torus pairing.** Characters of the torus `R^d / Z^d` (lattice
//!   coordinates) are `v -> exp(2 pi i q . v)`; the factor `2 pi` lives in
//!   the dual basis `2 pi B^{-T}`, not in the pairing.
//! - **Haar normalization.** User bases have covolume `|det B| != 1`; all
//!   density and intensity formulas divide internal-space volumes by the
//!   covolume so that results agree with the unit-covolume convention:
//!   point density `= vol(W)/covol`, peak intensity
//!   `A_k = |int_W exp(i k* . y) dy|^2 / covol^2`.
//! - **Ball volumes.** Exact: `2S` in 1D, `pi S^2` in 2D, `4/3 pi S^3` in 3D.
//! - **Windows.** Half-open where applicable (intervals `[a, b)`, boxes
//!   `[lo, hi)` per axis) so that lattice translates select without double
//!   counting; boundaries have measure zero.
//!
//! ## Exactness policy
//!
//! Generated point sets carry integer lattice labels whenever available
//! (model sets: the lattice coordinate `q`; sequence tilings: per-symbol
//! counts). Combinatorial operations (difference sets, patch census) group
//! by exact label arithmetic when labels are present and only fall back to
//! quantized floating-point keys (at `1e-9 x packing radius`) otherwise.

pub mod autocorr;
pub mod cps;
pub mod diffraction;
pub mod error;
pub mod geom;
pub mod hull;
pub mod patches;
pub mod pointset;
pub mod report;
pub mod sequence;

pub use error::{Error, Result};
pub use pointset::{DeloneParams, DifferenceSet, PointSet, Region};

/// Library version recorded in CSV headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
