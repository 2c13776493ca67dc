//! Log-space kernels for strongly graded matrices.
//!
//! A walk state with large coordinates produces integrand and convolution
//! matrices whose spectra span hundreds of orders of magnitude. Plain
//! Cholesky loses the small pivots to cancellation and plain SVD computes
//! the small singular values with absolute error ε·σ_1, which is pure
//! noise once σ_1/σ_q exceeds 1/ε. The routines here avoid both failure
//! modes by never forming the graded scales explicitly:
//!
//! * minors of u*·diag(e^{d})·u expand by Cauchy–Binet into sums of
//!   positive terms, evaluated by log-sum-exp — no cancellation at all;
//! * singular-value products Π_{i≤r} σ_i equal the spectral norm of the
//!   r-th compound matrix, whose entries are r-minors that factor into an
//!   exact scale times an O(1) determinant.

use nalgebra::DMatrix;
use num_complex::Complex64;

const LOG_FLOOR: f64 = -1e12;

/// All index subsets of {0..n} of size r, as sorted vectors.
fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == r {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, r, current, out);
            current.pop();
        }
    }
    rec(0, n, r, &mut current, &mut out);
    out
}

fn minor(m: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> Complex64 {
    let r = rows.len();
    let sub = DMatrix::from_fn(r, r, |i, j| m[(rows[i], cols[j])]);
    sub.determinant()
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return LOG_FLOOR;
    }
    let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    m + s.ln()
}

/// ln Δ_m(u*·diag(e^{d})·u) for m = 1..n on the embedded level, via the
/// Cauchy–Binet expansion Σ_{|S|=m} e^{Σ_S d} |det u[S, 1..m]|².
/// Every term is nonnegative, so the result is accurate for any grading.
pub(crate) fn cb_log_leading_minors(d_log: &[f64], u: &DMatrix<Complex64>) -> Vec<f64> {
    let n = d_log.len();
    debug_assert_eq!(u.nrows(), n);
    let cols: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        let mut terms = Vec::new();
        for s in subsets(n, m) {
            let det = minor(u, &s, &cols[..m]);
            let mag = det.norm_sqr();
            if mag > 0.0 {
                let scale: f64 = s.iter().map(|&k| d_log[k]).sum();
                terms.push(scale + mag.ln());
            }
        }
        out.push(log_sum_exp(&terms));
    }
    out
}

/// ln σ_1 ≥ … ≥ ln σ_n of diag(e^{row})·a·diag(e^{col}) on the embedded
/// level, through spectral norms of compound matrices: Π_{i≤r} σ_i equals
/// ‖C_r‖₂ where C_r holds the r-minors, each factored into its exact
/// log-scale and an O(1) determinant of `a`.
pub(crate) fn graded_log_singular_values(
    row_log: &[f64],
    a: &DMatrix<Complex64>,
    col_log: &[f64],
) -> Vec<f64> {
    let n = row_log.len();
    debug_assert_eq!(a.nrows(), n);
    debug_assert_eq!(a.ncols(), n);
    let mut log_products = Vec::with_capacity(n);
    for r in 1..=n {
        let row_sets = subsets(n, r);
        let col_sets = subsets(n, r);
        // entry (I, J): exp(Σ_I row + Σ_J col − shift)·det(a[I, J])
        let row_scales: Vec<f64> = row_sets
            .iter()
            .map(|s| s.iter().map(|&k| row_log[k]).sum())
            .collect();
        let col_scales: Vec<f64> = col_sets
            .iter()
            .map(|s| s.iter().map(|&k| col_log[k]).sum())
            .collect();
        let dets: Vec<Vec<Complex64>> = row_sets
            .iter()
            .map(|ri| col_sets.iter().map(|cj| minor(a, ri, cj)).collect())
            .collect();
        let mut shift = f64::NEG_INFINITY;
        for (i, row) in dets.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                let mag = d.norm();
                if mag > 0.0 {
                    shift = shift.max(row_scales[i] + col_scales[j] + mag.ln());
                }
            }
        }
        if !shift.is_finite() {
            log_products.push(LOG_FLOOR);
            continue;
        }
        let k = row_sets.len();
        let compound = DMatrix::from_fn(k, k, |i, j| {
            let mag = dets[i][j].norm();
            if mag > 0.0 {
                dets[i][j] * (row_scales[i] + col_scales[j] - shift).exp()
            } else {
                Complex64::default()
            }
        });
        let top = compound
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        log_products.push(if top > 0.0 { shift + top.ln() } else { LOG_FLOOR });
    }
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for lp in log_products {
        out.push(lp - prev);
        prev = lp;
    }
    // rounding can disturb the ordering from the telescoping differences
    out.sort_by(|x, y| y.partial_cmp(x).unwrap());
    out
}
