//! Numerical laboratory for the fractional Laplacian in the half space.
//!
//! Closed-form Green and Poisson kernels, principal-value evaluation of
//! `(-Δ)^s`, exact harmonic-polynomial machinery, distributional identity
//! checks, convergence studies and a walk-on-spheres Monte Carlo oracle.

pub mod error;
pub mod field;
pub mod harmonics;
pub mod identities;
pub mod kernels;
pub mod limits;
pub mod pvlap;
pub mod quad;
pub mod special;
pub mod wos;

pub use error::{FracError, Result};
pub use field::{Growth, ScalarField, Singularity};
pub use harmonics::{MultiIndex, Polynomial, RadialKernel};
pub use identities::{BumpKind, BumpSpec, IdentityReport, TestFunction};
pub use kernels::{BoundaryLayerMeasure, GreenNorm, KernelValue, NormMode, Point};
pub use limits::{CompactBox, ConvergenceStudy, RateFit};
pub use pvlap::{EvalResult, QuadratureSpec};
pub use quad::{QuadOptions, QuadResult};
pub use special::{constants_for, Constants, CsMode, FracOrder};
pub use wos::{ExteriorData, WalkConfig, WalkStats};
