use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{AlgebraError, Quat, ScalarField};

/// Dense matrix over ℝ, ℂ or ℍ, stored through its complex representation.
///
/// Real and complex matrices are stored as-is (real ones carry zero
/// imaginary parts); a quaternionic r×c matrix is stored as the 2r×2c
/// complex matrix obtained by replacing every entry with its 2×2 block
/// [[α, β], [−β̄, ᾱ]]. Block-aligned products, adjoints and leading
/// submatrices of the representation then correspond exactly to the same
/// operations over the original field.
#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix {
    field: ScalarField,
    rows: usize,
    cols: usize,
    data: DMatrix<Complex64>,
}

impl FMatrix {
    /// Wrap an already-embedded complex matrix. For ℍ the block symmetry
    /// J·conj(M)·J⁻¹ = M is validated entry-wise.
    pub fn from_embedded(
        field: ScalarField,
        rows: usize,
        cols: usize,
        data: DMatrix<Complex64>,
    ) -> Result<Self, AlgebraError> {
        let e = field.embed();
        if data.nrows() != rows * e || data.ncols() != cols * e {
            return Err(AlgebraError::DimensionMismatch {
                expected: rows * e,
                got: data.nrows(),
            });
        }
        if field == ScalarField::Quaternion {
            for i in 0..rows {
                for j in 0..cols {
                    let a = data[(2 * i, 2 * j)];
                    let b = data[(2 * i, 2 * j + 1)];
                    let c = data[(2 * i + 1, 2 * j)];
                    let d = data[(2 * i + 1, 2 * j + 1)];
                    if (c + b.conj()).norm() > 1e-9 || (d - a.conj()).norm() > 1e-9 {
                        return Err(AlgebraError::BrokenEmbedding);
                    }
                }
            }
        }
        if field == ScalarField::Real {
            let imag = data.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if imag > 1e-9 {
                return Err(AlgebraError::BrokenEmbedding);
            }
        }
        Ok(FMatrix { field, rows, cols, data })
    }

    pub(crate) fn from_embedded_unchecked(
        field: ScalarField,
        rows: usize,
        cols: usize,
        data: DMatrix<Complex64>,
    ) -> Self {
        debug_assert_eq!(data.nrows(), rows * field.embed());
        debug_assert_eq!(data.ncols(), cols * field.embed());
        FMatrix { field, rows, cols, data }
    }

    pub fn identity(q: usize, field: ScalarField) -> Self {
        let e = field.embed();
        FMatrix {
            field,
            rows: q,
            cols: q,
            data: DMatrix::identity(q * e, q * e),
        }
    }

    pub fn zeros(rows: usize, cols: usize, field: ScalarField) -> Self {
        let e = field.embed();
        FMatrix {
            field,
            rows,
            cols,
            data: DMatrix::zeros(rows * e, cols * e),
        }
    }

    /// Diagonal matrix with real entries, over any of the three fields.
    pub fn from_real_diag(field: ScalarField, diag: &[f64]) -> Self {
        let q = diag.len();
        let e = field.embed();
        let mut data = DMatrix::zeros(q * e, q * e);
        for (i, &v) in diag.iter().enumerate() {
            for k in 0..e {
                data[(i * e + k, i * e + k)] = Complex64::new(v, 0.0);
            }
        }
        FMatrix { field, rows: q, cols: q, data }
    }

    pub fn from_real_entries(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        let data = DMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(entries[i * cols + j], 0.0)
        });
        FMatrix { field: ScalarField::Real, rows, cols, data }
    }

    pub fn from_complex_entries(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        let data = DMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j]);
        FMatrix { field: ScalarField::Complex, rows, cols, data }
    }

    pub fn from_quat_entries(rows: usize, cols: usize, entries: &[Quat]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        let mut data = DMatrix::zeros(2 * rows, 2 * cols);
        for i in 0..rows {
            for j in 0..cols {
                let (alpha, beta) = entries[i * cols + j].block_row();
                data[(2 * i, 2 * j)] = alpha;
                data[(2 * i, 2 * j + 1)] = beta;
                data[(2 * i + 1, 2 * j)] = -beta.conj();
                data[(2 * i + 1, 2 * j + 1)] = alpha.conj();
            }
        }
        FMatrix { field: ScalarField::Quaternion, rows, cols, data }
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// The underlying complex representation (embedded size).
    pub fn embedded(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Field-level entry (i, j). For ℍ this folds the 2×2 block back into a
    /// quaternion; for ℝ and ℂ the quaternion has zero j/k (and i) parts.
    pub fn quat_entry(&self, i: usize, j: usize) -> Quat {
        match self.field {
            ScalarField::Real => Quat::from_real(self.data[(i, j)].re),
            ScalarField::Complex => {
                let z = self.data[(i, j)];
                Quat::new(z.re, z.im, 0.0, 0.0)
            }
            ScalarField::Quaternion => Quat::from_block_row(
                self.data[(2 * i, 2 * j)],
                self.data[(2 * i, 2 * j + 1)],
            ),
        }
    }

    pub fn adjoint(&self) -> FMatrix {
        FMatrix {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            data: self.data.adjoint(),
        }
    }

    pub fn mul(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.field, other.field, "field mismatch in product");
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        FMatrix {
            field: self.field,
            rows: self.rows,
            cols: other.cols,
            data: &self.data * &other.data,
        }
    }

    pub fn add(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.field, other.field);
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        FMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.field, other.field);
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        FMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: &self.data - &other.data,
        }
    }

    /// Scale row block i by diag[i] (row scaling over the field; real
    /// scalars commute with everything, so this is exact for ℍ too).
    pub fn scale_rows_real(&self, diag: &[f64]) -> FMatrix {
        assert_eq!(diag.len(), self.rows);
        let e = self.field.embed();
        let mut data = self.data.clone();
        for i in 0..self.rows {
            for k in 0..e {
                for j in 0..data.ncols() {
                    data[(i * e + k, j)] *= diag[i];
                }
            }
        }
        FMatrix { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    /// Max entry deviation from the adjoint; 0 for exactly Hermitian input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let adj = self.data.adjoint();
        (&self.data - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Max entry deviation of M*M from the identity.
    pub fn unitary_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.data.nrows();
        let prod = self.data.adjoint() * &self.data;
        let eye = DMatrix::<Complex64>::identity(n, n);
        (prod - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_defect() <= tol
    }

    /// Replace by the Hermitian part (M + M*)/2; cleans rounding noise on
    /// matrices known to be Hermitian by construction.
    pub fn hermitize(&mut self) {
        assert!(self.is_square());
        let adj = self.data.adjoint();
        self.data = (&self.data + adj) * Complex64::new(0.5, 0.0);
    }

    /// Squared Frobenius norm over the field: tr(M*M) counted with one
    /// term per field entry (half the embedded norm for ℍ).
    pub fn frobenius_sq_field(&self) -> f64 {
        let raw: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        raw / self.field.embed() as f64
    }

    /// Leading r×r field-level submatrix (top-left block).
    pub fn leading_block(&self, r: usize) -> FMatrix {
        assert!(r <= self.rows && r <= self.cols);
        let e = self.field.embed();
        FMatrix {
            field: self.field,
            rows: r,
            cols: r,
            data: self.data.view((0, 0), (r * e, r * e)).into_owned(),
        }
    }
}
