use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpecialError;

/// Monte Carlo estimate of a real quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_mc: u64,
}

impl Estimate {
    pub fn exact(value: f64, n_mc: u64) -> Self {
        Estimate { value, std_error: 0.0, n_mc }
    }

    /// |value − other.value| within k combined standard errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        let combined = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        (self.value - other.value).abs() <= k * combined
    }
}

/// Monte Carlo estimate of a complex quantity. The standard error is the
/// square root of the summed component variances of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CEstimate {
    pub re: f64,
    pub im: f64,
    pub std_error: f64,
    pub n_mc: u64,
}

impl CEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn exact(value: Complex64, n_mc: u64) -> Self {
        CEstimate { re: value.re, im: value.im, std_error: 0.0, n_mc }
    }

    pub fn distance_to(&self, target: Complex64) -> f64 {
        (self.value() - target).norm()
    }
}

/// Multiindex l ∈ ℕ_0^q of a moment function, of order |l| = Σ l_r ≤ 4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndex {
    parts: Vec<usize>,
}

impl MultiIndex {
    pub fn new(parts: Vec<usize>) -> Result<Self, SpecialError> {
        let order: usize = parts.iter().sum();
        if order > 4 {
            return Err(SpecialError::InvalidInput(format!(
                "moment order {order} exceeds the supported maximum 4"
            )));
        }
        Ok(MultiIndex { parts })
    }

    /// e_j, the j-th (0-based) first-order index.
    pub fn unit(q: usize, j: usize) -> Self {
        let mut parts = vec![0; q];
        parts[j] = 1;
        MultiIndex { parts }
    }

    pub fn order(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Π y_r^{l_r} over the factor vector y.
    pub fn apply(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.parts.len());
        let mut acc = 1.0;
        for (v, &l) in y.iter().zip(&self.parts) {
            for _ in 0..l {
                acc *= v;
            }
        }
        acc
    }
}

/// Grouped first and second moments of a measure: the dispersion vector
/// m_1, the matrix m_2 of second moments, and Σ = m_2 − m_1ᵀm_1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentBlock {
    pub m1: Vec<Estimate>,
    pub m2: Vec<Vec<Estimate>>,
    pub sigma: Vec<Vec<Estimate>>,
    pub n_mc: u64,
}

impl MomentBlock {
    pub fn q(&self) -> usize {
        self.m1.len()
    }

    pub fn m1_values(&self) -> Vec<f64> {
        self.m1.iter().map(|e| e.value).collect()
    }

    pub fn sigma_values(&self) -> Vec<Vec<f64>> {
        self.sigma
            .iter()
            .map(|row| row.iter().map(|e| e.value).collect())
            .collect()
    }

    pub fn max_sigma_std_error(&self) -> f64 {
        self.sigma
            .iter()
            .flatten()
            .map(|e| e.std_error)
            .fold(0.0, f64::max)
    }
}
