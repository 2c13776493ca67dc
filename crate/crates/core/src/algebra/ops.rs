use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{AlgebraError, FMatrix, ScalarField, SpectralParam, BALL_TOL, HERMITIAN_TOL};
use crate::chamber::{ChamberKind, ChamberPoint};

/// Cholesky factorization of a complex Hermitian matrix that actually
/// certifies positive definiteness: returns ln of the (strictly positive,
/// real) diagonal of L, or None on a non-positive pivot.
///
/// nalgebra's generic Cholesky takes complex square roots and therefore
/// "succeeds" on indefinite Hermitian matrices; every positivity-sensitive
/// path in this crate goes through this routine instead.
pub(crate) fn hermitian_chol_log_diag(m: &DMatrix<Complex64>) -> Option<Vec<f64>> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut l = vec![Complex64::new(0.0, 0.0); n * n]; // row-major lower triangle
    let mut log_diag = Vec::with_capacity(n);
    let mut diag = vec![0.0f64; n];
    for j in 0..n {
        let mut sum = m[(j, j)].re;
        for k in 0..j {
            sum -= l[j * n + k].norm_sqr();
        }
        if !(sum > 0.0) {
            return None;
        }
        let d = sum.sqrt();
        diag[j] = d;
        log_diag.push(d.ln());
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    Some(log_diag)
}

/// Determinant in the Dieudonné sense: the classical |det| for ℝ and ℂ,
/// and the square root of the complex-embedding determinant for ℍ.
///
/// The input must be square and Hermitian (positive semidefiniteness is a
/// caller obligation and is not checked beyond what the arithmetic needs).
pub fn dieudonne_det(m: &FMatrix) -> Result<f64, AlgebraError> {
    if !m.is_square() {
        return Err(AlgebraError::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(AlgebraError::NotHermitian { asym: defect });
    }
    Ok(det_hermitian_block(m))
}

/// Determinant of an (already validated) Hermitian matrix, folded through
/// the field convention.
fn det_hermitian_block(m: &FMatrix) -> f64 {
    if m.rows() == 0 {
        return 1.0;
    }
    let det = m.embedded().determinant().norm();
    match m.field() {
        ScalarField::Quaternion => det.sqrt(),
        _ => det,
    }
}

/// r-th principal minor Δ_r(M), with the convention Δ_0 ≡ 1.
pub fn principal_minor(m: &FMatrix, r: usize) -> Result<f64, AlgebraError> {
    if !m.is_square() {
        return Err(AlgebraError::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    if r > m.rows() {
        return Err(AlgebraError::IndexOutOfRange { r, q: m.rows() });
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(AlgebraError::NotHermitian { asym: defect });
    }
    if r == 0 {
        return Ok(1.0);
    }
    Ok(det_hermitian_block(&m.leading_block(r)))
}

/// Increments of the log-minor sequence: y_r = ln Δ_r − ln Δ_{r−1} for
/// r = 1..q, computed from a single Cholesky factorisation. Fails with
/// `NonPositiveMinor` when the matrix is not positive definite.
///
/// This is the shared integrand core: the power function is
/// exp(Σ ν_r y_r) and the moment-function factors are y_r / 2.
pub(crate) fn log_minor_increments(m: &FMatrix) -> Result<Vec<f64>, AlgebraError> {
    let q = m.rows();
    let e = m.field().embed();
    let log_diag =
        hermitian_chol_log_diag(m.embedded()).ok_or(AlgebraError::NonPositiveMinor)?;
    let scale = 2.0 / e as f64;
    let mut out = Vec::with_capacity(q);
    for r in 0..q {
        let mut acc = 0.0;
        for k in 0..e {
            acc += log_diag[r * e + k];
        }
        out.push(scale * acc);
    }
    Ok(out)
}

/// Power function Δ_ν from precomputed log-minor increments.
pub(crate) fn power_from_increments(increments: &[f64], exponent: &[Complex64]) -> Complex64 {
    debug_assert_eq!(increments.len(), exponent.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (y, nu) in increments.iter().zip(exponent) {
        acc += nu * *y;
    }
    acc.exp()
}

/// Power function Δ_λ(M) = Δ_1^{λ1−λ2} ⋯ Δ_{q−1}^{λ_{q−1}−λ_q} Δ_q^{λ_q}
/// of a Hermitian positive-definite matrix, with complex powers taken
/// through the real logarithms of the (strictly positive) minors.
pub fn power_function(m: &FMatrix, lam: &SpectralParam) -> Result<Complex64, AlgebraError> {
    if !m.is_square() {
        return Err(AlgebraError::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    if lam.len() != m.rows() {
        return Err(AlgebraError::DimensionMismatch { expected: m.rows(), got: lam.len() });
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(AlgebraError::NotHermitian { asym: defect });
    }
    let increments = log_minor_increments(m)?;
    Ok(power_from_increments(&increments, lam.components()))
}

/// Singular values σ_1 ≥ … ≥ σ_q of a square matrix over the field.
/// Quaternionic singular values come in pairs in the embedding and are
/// deduplicated; values are clamped to [0, ∞).
pub fn singular_values(m: &FMatrix) -> Result<Vec<f64>, AlgebraError> {
    if !m.is_square() {
        return Err(AlgebraError::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    let svd = m
        .embedded()
        .clone()
        .try_svd(false, false, f64::EPSILON, 512)
        .ok_or(AlgebraError::ConvergenceFailure)?;
    let mut sv: Vec<f64> = svd.singular_values.iter().map(|&s| s.max(0.0)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if m.field() == ScalarField::Quaternion {
        sv = sv.into_iter().step_by(2).collect();
    }
    Ok(sv)
}

/// Top singular value; cheaper entry point for ball-membership checks.
pub fn operator_norm(m: &FMatrix) -> Result<f64, AlgebraError> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// The Hermitian positive semidefinite matrix
/// u*(cosh x̲ + sinh x̲ · w)(cosh x̲ + sinh x̲ · w)* u
/// after validating that u is unitary and w lies in the matrix ball.
pub fn g_matrix(
    x: &ChamberPoint,
    u: &FMatrix,
    w: &FMatrix,
) -> Result<FMatrix, AlgebraError> {
    assert_eq!(x.kind(), ChamberKind::TypeB, "g matrix needs a type-B chamber point");
    let q = x.rank();
    if u.rows() != q || u.cols() != q {
        return Err(AlgebraError::DimensionMismatch { expected: q, got: u.rows() });
    }
    if w.rows() != q || w.cols() != q {
        return Err(AlgebraError::DimensionMismatch { expected: q, got: w.rows() });
    }
    let dev = u.unitary_defect();
    if dev > HERMITIAN_TOL {
        return Err(AlgebraError::NotUnitary { dev });
    }
    let sigma1 = operator_norm(w)?;
    if sigma1 > 1.0 + BALL_TOL {
        return Err(AlgebraError::NotInBall { sigma1 });
    }
    Ok(g_matrix_unchecked(x.coords(), u, w))
}

/// Same as [`g_matrix`] without precondition checks; used in Monte Carlo
/// interiors where u and w come from our own samplers.
pub(crate) fn g_matrix_unchecked(x: &[f64], u: &FMatrix, w: &FMatrix) -> FMatrix {
    let field = u.field();
    let e = field.embed();
    let q = x.len();
    // cosh x̲ + sinh x̲ · w on the embedding: row block i of w scaled by
    // sinh x_i, plus cosh x_i on the diagonal.
    let mut a = w.embedded().clone();
    for i in 0..q {
        let s = x[i].sinh();
        for k in 0..e {
            let row = i * e + k;
            for j in 0..a.ncols() {
                a[(row, j)] *= s;
            }
            a[(row, row)] += Complex64::new(x[i].cosh(), 0.0);
        }
    }
    let p = &a * a.adjoint();
    let g = u.embedded().adjoint() * p * u.embedded();
    let mut g = FMatrix::from_embedded_unchecked(field, q, q, g);
    g.hermitize();
    g
}
