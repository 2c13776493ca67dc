//! Exact small-matrix kernel over ℝ, ℂ, ℍ.
//!
//! Matrices over all three fields are stored through a single complex
//! representation: real and complex matrices verbatim, quaternionic
//! matrices via the standard 2×2 complex-block embedding per entry.
//! Determinants of quaternionic matrices are taken in the Dieudonné
//! sense, i.e. as the square root of the complex determinant of the
//! embedding.

mod graded;
mod matrix;
mod ops;
mod quat;
#[cfg(test)]
mod tests;

pub use matrix::FMatrix;
pub use ops::{
    dieudonne_det, g_matrix, power_function, principal_minor, singular_values,
};
pub(crate) use graded::{cb_log_leading_minors, graded_log_singular_values};
pub(crate) use ops::{
    g_matrix_unchecked, hermitian_chol_log_diag, log_minor_increments, power_from_increments,
};
pub use quat::Quat;

use num_complex::Complex64;
use thiserror::Error;

/// Entry-wise tolerance for Hermiticity and unitarity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Slack allowed on the top singular value of a matrix-ball element.
pub const BALL_TOL: f64 = 1e-12;

/// The scalar field a matrix lives over: ℝ, ℂ or ℍ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
    Quaternion,
}

impl ScalarField {
    /// Real dimension d of the field: 1, 2 or 4.
    pub fn dim(self) -> usize {
        match self {
            ScalarField::Real => 1,
            ScalarField::Complex => 2,
            ScalarField::Quaternion => 4,
        }
    }

    /// Block size of one field scalar inside the complex representation.
    pub(crate) fn embed(self) -> usize {
        match self {
            ScalarField::Quaternion => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarField::Real => "real",
            ScalarField::Complex => "complex",
            ScalarField::Quaternion => "quaternion",
        }
    }
}

impl std::fmt::Display for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Spectral variable λ ∈ ℂ^q of a spherical function.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParam {
    lambda: Vec<Complex64>,
}

impl SpectralParam {
    pub fn new(lambda: Vec<Complex64>) -> Result<Self, AlgebraError> {
        if lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AlgebraError::NonFiniteSpectral);
        }
        Ok(SpectralParam { lambda })
    }

    pub fn from_real(lambda: &[f64]) -> Self {
        SpectralParam {
            lambda: lambda.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// λ = re − i·shift, the usual way a real grid point is anchored to a
    /// half-sum of positive roots.
    pub fn from_real_shifted(re: &[f64], shift: &[f64]) -> Self {
        assert_eq!(re.len(), shift.len());
        SpectralParam {
            lambda: re
                .iter()
                .zip(shift)
                .map(|(&a, &s)| Complex64::new(a, -s))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.lambda
    }

    /// Exponent vector (iλ − ρ)/2 of the power function inside a spherical
    /// integrand with shift vector ρ.
    pub fn exponent(&self, rho: &[f64]) -> Vec<Complex64> {
        assert_eq!(self.lambda.len(), rho.len());
        self.lambda
            .iter()
            .zip(rho)
            .map(|(&l, &r)| (Complex64::i() * l - Complex64::new(r, 0.0)) * 0.5)
            .collect()
    }

    /// Σ λ_k², the analytic square entering eigenvalue targets.
    pub fn sum_of_squares(&self) -> Complex64 {
        self.lambda.iter().map(|z| z * z).sum()
    }
}

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max asymmetry {asym:.3e} exceeds tolerance)")]
    NotHermitian { asym: f64 },
    #[error("principal minor index {r} out of range for size {q}")]
    IndexOutOfRange { r: usize, q: usize },
    #[error("matrix has a non-positive principal minor; power function undefined")]
    NonPositiveMinor,
    #[error("matrix is not unitary (max deviation {dev:.3e})")]
    NotUnitary { dev: f64 },
    #[error("matrix lies outside the unit matrix ball (top singular value {sigma1})")]
    NotInBall { sigma1: f64 },
    #[error("decomposition failed to converge")]
    ConvergenceFailure,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("spectral parameter has non-finite entries")]
    NonFiniteSpectral,
    #[error("embedded matrix violates the quaternionic block symmetry")]
    BrokenEmbedding,
}
