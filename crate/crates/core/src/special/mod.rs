//! Monte Carlo evaluation of spherical functions, moment functions,
//! measure moments, spherical Fourier transforms, and finite-difference
//! application of the radial operator.
//!
//! All integrals are plain MC averages with standard errors from sample
//! variance. When quantities at nearby spectral or space points are
//! compared (finite differences, modified-vs-BC moment gaps), the same
//! Haar/ball draws are reused across the compared points, which collapses
//! the variance of the differences.

mod engine;
mod estimate;
mod fourier;
mod moments;
mod operator;
mod phi;

pub use estimate::{CEstimate, Estimate, MomentBlock, MultiIndex};
pub use fourier::{fourier_bc, fourier_bc_cloud, in_dual_region};
pub use moments::{
    measure_moments, moment_a, moment_bc, moment_gap_first, moment_modified, MomentKind,
};
pub use operator::{apply_l_fd, l_eigen_check, second_derivative_at_zero, LEigenCheck};
pub use phi::{phi_a, phi_a_grid, phi_bc, phi_bc_grid};

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::chamber::ChamberError;
use crate::sampling::SamplerError;

#[derive(Debug, Error)]
pub enum SpecialError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Chamber(#[from] ChamberError),
    #[error("measure does not admit the required moments: {0}")]
    NonIntegrableSpec(String),
    #[error(
        "finite-difference stencil leaves the open chamber at {coords:?} with step {h}"
    )]
    StencilLeavesChamber { coords: Vec<f64>, h: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
