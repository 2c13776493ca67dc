use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::SamplerError;
use crate::algebra::{FMatrix, Quat, ScalarField};

/// One draw from the normalized Haar measure on U(q, F).
///
/// Standard construction: fill a q×q matrix with independent field
/// Gaussians and orthonormalize its columns by modified Gram–Schmidt.
/// Normalizing with positive real norms fixes the QR phase ambiguity
/// (R has positive diagonal), which makes the Q factor exactly
/// Haar-distributed for all three fields.
pub fn haar_unitary<R: Rng>(
    q: usize,
    field: ScalarField,
    rng: &mut R,
) -> Result<FMatrix, SamplerError> {
    match field {
        ScalarField::Real => {
            let cols = mgs::<f64, _>(q, rng)?;
            let mut entries = vec![0.0; q * q];
            for (j, col) in cols.iter().enumerate() {
                for i in 0..q {
                    entries[i * q + j] = col[i];
                }
            }
            Ok(FMatrix::from_real_entries(q, q, &entries))
        }
        ScalarField::Complex => {
            let cols = mgs::<Complex64, _>(q, rng)?;
            let mut entries = vec![Complex64::new(0.0, 0.0); q * q];
            for (j, col) in cols.iter().enumerate() {
                for i in 0..q {
                    entries[i * q + j] = col[i];
                }
            }
            Ok(FMatrix::from_complex_entries(q, q, &entries))
        }
        ScalarField::Quaternion => {
            let cols = mgs::<Quat, _>(q, rng)?;
            let mut entries = vec![Quat::ZERO; q * q];
            for (j, col) in cols.iter().enumerate() {
                for i in 0..q {
                    entries[i * q + j] = col[i];
                }
            }
            Ok(FMatrix::from_quat_entries(q, q, &entries))
        }
    }
}

/// Scalar operations needed by Gram–Schmidt over a (skew-)field.
trait GramScalar: Copy {
    fn gaussian<R: Rng>(rng: &mut R) -> Self;
    fn conj(self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn add(self, o: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn norm_sq(self) -> f64;
    fn zero() -> Self;
}

impl GramScalar for f64 {
    fn gaussian<R: Rng>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
    fn conj(self) -> Self {
        self
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm_sq(self) -> f64 {
        self * self
    }
    fn zero() -> Self {
        0.0
    }
}

impl GramScalar for Complex64 {
    fn gaussian<R: Rng>(rng: &mut R) -> Self {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

impl GramScalar for Quat {
    fn gaussian<R: Rng>(rng: &mut R) -> Self {
        Quat::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        )
    }
    fn conj(self) -> Self {
        Quat::conj(self)
    }
    fn mul(self, o: Self) -> Self {
        Quat::mul(self, o)
    }
    fn sub(self, o: Self) -> Self {
        Quat::sub(self, o)
    }
    fn add(self, o: Self) -> Self {
        Quat::add(self, o)
    }
    fn scale(self, s: f64) -> Self {
        Quat::scale(self, s)
    }
    fn norm_sq(self) -> f64 {
        Quat::norm_sq(self)
    }
    fn zero() -> Self {
        Quat::ZERO
    }
}

/// Modified Gram–Schmidt on a q×q Gaussian matrix; returns orthonormal
/// columns. Columns whose residual norm collapses (measure zero) are
/// redrawn; persistent failure reports a decomposition error.
fn mgs<S: GramScalar, R: Rng>(q: usize, rng: &mut R) -> Result<Vec<Vec<S>>, SamplerError> {
    let mut cols: Vec<Vec<S>> = Vec::with_capacity(q);
    for _ in 0..q {
        let mut attempts = 0;
        loop {
            let mut v: Vec<S> = (0..q).map(|_| S::gaussian(rng)).collect();
            // project out previously fixed columns: v -= u <u, v>
            for u in &cols {
                let mut dot = S::zero();
                for i in 0..q {
                    dot = dot.add(u[i].conj().mul(v[i]));
                }
                for i in 0..q {
                    v[i] = v[i].sub(u[i].mul(dot));
                }
            }
            let norm_sq: f64 = v.iter().map(|s| s.norm_sq()).sum();
            if norm_sq > 1e-24 {
                let inv = norm_sq.sqrt().recip();
                for s in v.iter_mut() {
                    *s = s.scale(inv);
                }
                cols.push(v);
                break;
            }
            attempts += 1;
            if attempts > 64 {
                return Err(SamplerError::Decomposition(
                    crate::algebra::AlgebraError::ConvergenceFailure,
                ));
            }
        }
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;

    #[test]
    fn samples_are_unitary_all_fields() {
        let mut rng = RngStream::root(11).rng();
        for field in [ScalarField::Real, ScalarField::Complex, ScalarField::Quaternion] {
            for q in 1..=4 {
                let u = haar_unitary(q, field, &mut rng).unwrap();
                assert!(u.is_unitary(1e-10), "field {field} q {q}");
            }
        }
    }

    #[test]
    fn rank_one_real_is_a_fair_sign() {
        let mut rng = RngStream::root(23).rng();
        let n = 100_000;
        let mut plus = 0usize;
        for _ in 0..n {
            let u = haar_unitary(1, ScalarField::Real, &mut rng).unwrap();
            let v = u.quat_entry(0, 0).w;
            assert!((v.abs() - 1.0).abs() < 1e-12);
            if v > 0.0 {
                plus += 1;
            }
        }
        // 3 sigma band around n/2 for a fair coin
        let dev = (plus as f64 - n as f64 / 2.0).abs();
        assert!(dev < 3.0 * (n as f64 / 4.0).sqrt(), "sign bias: {plus}/{n}");
    }

    #[test]
    fn first_entry_second_moment_matches_one_over_q() {
        let mut rng = RngStream::root(5).rng();
        for field in [ScalarField::Real, ScalarField::Complex, ScalarField::Quaternion] {
            for q in [2usize, 3] {
                let n = 20_000;
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for _ in 0..n {
                    let u = haar_unitary(q, field, &mut rng).unwrap();
                    let m = u.quat_entry(0, 0).norm_sq();
                    sum += m;
                    sumsq += m * m;
                }
                let mean = sum / n as f64;
                let var = (sumsq / n as f64 - mean * mean).max(0.0);
                let se = (var / n as f64).sqrt();
                let expect = 1.0 / q as f64;
                assert!(
                    (mean - expect).abs() < 4.0 * se + 1e-12,
                    "E|u11|^2 = {mean} vs {expect} (se {se}, field {field}, q {q})"
                );
            }
        }
    }
}
