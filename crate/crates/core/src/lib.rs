//! Monte Carlo laboratory for random walks on the BC-type hypergroups
//! `(C_q^B, *_p)` over the Weyl chamber of type B.
//!
//! The crate is organised around five subsystems:
//!
//! * [`algebra`] — exact small-matrix kernels over ℝ, ℂ and ℍ (Dieudonné
//!   determinants, principal minors, the power function, singular values,
//!   and the conjugated product matrix entering every spherical integrand).
//! * [`chamber`] — Weyl-chamber geometry and model bookkeeping: chamber
//!   membership, the `ln cosh` transform and its inverse, half-sums of
//!   positive roots, and multiplicity parameters.
//! * [`sampling`] — all randomness: reproducible counter-based streams,
//!   Haar measure on `U(q, F)`, the matrix-ball measure, the hypergroup
//!   convolution sampler and the random-walk engine.
//! * [`special`] — Monte Carlo evaluation of spherical functions and moment
//!   functions of type A and BC, measure moments, spherical Fourier
//!   transforms, and finite-difference application of the radial operator.
//! * [`clt`] — experiment drivers and statistical verdicts for the four
//!   limit theorems, plus the Gaussian characteristic-function targets.
//!
//! Everything downstream of a seed is deterministic: samplers draw from
//! per-task counter-based streams, so results do not depend on worker
//! count or scheduling order.

pub mod algebra;
pub mod chamber;
pub mod clt;
pub mod sampling;
pub mod special;

pub use algebra::{FMatrix, ScalarField, SpectralParam};
pub use chamber::{ChamberKind, ChamberPoint, ModelParams};
pub use sampling::{EmpiricalMeasure, MeasureSpec, RngStream};
