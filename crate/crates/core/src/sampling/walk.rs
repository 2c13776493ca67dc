use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::{haar_unitary, MeasureSpec, MpSampler, RngStream, SamplerError};
use crate::algebra::{singular_values, FMatrix};
use crate::chamber::{ChamberKind, ChamberPoint, ModelParams};
use crate::sampling::EmpiricalMeasure;

/// One exact sample from the convolution δ_x *_p δ_y: draw v from Haar
/// measure and w from the matrix-ball measure, then take
/// arcosh of the singular values of sinh x̲ · w · sinh y̲ + cosh x̲ · v · cosh y̲.
///
/// All singular values of the argument are ≥ 1 up to rounding; they are
/// clamped to 1 before arcosh.
pub fn convolve_point_pair<R: Rng>(
    x: &ChamberPoint,
    y: &ChamberPoint,
    params: &ModelParams,
    rng: &mut R,
) -> Result<ChamberPoint, SamplerError> {
    let mut mp = MpSampler::new(params)?;
    convolve_with_sampler(x, y, params, &mut mp, rng)
}

/// Above this combined coordinate spread the singular values of the dense
/// convolution argument span more than f64 can resolve and the log-space
/// compound route takes over.
const CONV_GRADED_SPREAD: f64 = 12.0;
const CONV_GRADED_SCALE: f64 = 250.0;

pub(crate) fn convolve_with_sampler<R: Rng>(
    x: &ChamberPoint,
    y: &ChamberPoint,
    params: &ModelParams,
    mp: &mut MpSampler,
    rng: &mut R,
) -> Result<ChamberPoint, SamplerError> {
    assert_eq!(x.kind(), ChamberKind::TypeB);
    assert_eq!(y.kind(), ChamberKind::TypeB);
    let q = params.q();
    assert_eq!(x.rank(), q);
    assert_eq!(y.rank(), q);
    let v = haar_unitary(q, params.field(), rng)?;
    let w = mp.sample(rng)?;
    let top = x.coords()[0] + y.coords()[0];
    let bottom = x.coords()[q - 1] + y.coords()[q - 1];
    let coords = if top - bottom > CONV_GRADED_SPREAD || top > CONV_GRADED_SCALE {
        conv_coords_graded(x, y, &v, &w)
    } else {
        conv_coords_dense(x, y, &v, &w)?
    };
    Ok(ChamberPoint::new_b(coords).expect("sorted arcosh values are in the chamber"))
}

fn conv_coords_dense(
    x: &ChamberPoint,
    y: &ChamberPoint,
    v: &FMatrix,
    w: &FMatrix,
) -> Result<Vec<f64>, SamplerError> {
    let sinh_x: Vec<f64> = x.coords().iter().map(|&t| t.sinh()).collect();
    let cosh_x: Vec<f64> = x.coords().iter().map(|&t| t.cosh()).collect();
    let sinh_y: Vec<f64> = y.coords().iter().map(|&t| t.sinh()).collect();
    let cosh_y: Vec<f64> = y.coords().iter().map(|&t| t.cosh()).collect();
    // sinh x̲ · w · sinh y̲ + cosh x̲ · v · cosh y̲ via row/column scaling
    let a = scale_rows_cols(w, &sinh_x, &sinh_y);
    let b = scale_rows_cols(v, &cosh_x, &cosh_y);
    let sigma = singular_values(&a.add(&b))?;
    Ok(sigma.iter().map(|&s| arcosh_clamped(s)).collect())
}

/// Log-space route: factor the argument as
/// diag(e^x/2) · [(1−ε_x)w(1−ε_y) + (1+ε_x)v(1+ε_y)] · diag(e^y/2)
/// with ε = e^{−2·coord} ∈ (0, 1], and take singular values through
/// compound-matrix norms so small ones survive extreme grading.
fn conv_coords_graded(
    x: &ChamberPoint,
    y: &ChamberPoint,
    v: &FMatrix,
    w: &FMatrix,
) -> Vec<f64> {
    let q = x.rank();
    let e = v.field().embed();
    let eps_x: Vec<f64> = x.coords().iter().map(|&t| (-2.0 * t).exp()).collect();
    let eps_y: Vec<f64> = y.coords().iter().map(|&t| (-2.0 * t).exp()).collect();
    let lo_x: Vec<f64> = eps_x.iter().map(|&t| 1.0 - t).collect();
    let hi_x: Vec<f64> = eps_x.iter().map(|&t| 1.0 + t).collect();
    let lo_y: Vec<f64> = eps_y.iter().map(|&t| 1.0 - t).collect();
    let hi_y: Vec<f64> = eps_y.iter().map(|&t| 1.0 + t).collect();
    let core = scale_rows_cols(w, &lo_x, &lo_y).add(&scale_rows_cols(v, &hi_x, &hi_y));
    let mut row_log = Vec::with_capacity(q * e);
    let mut col_log = Vec::with_capacity(q * e);
    for i in 0..q {
        for _ in 0..e {
            row_log.push(x.coords()[i] - std::f64::consts::LN_2);
            col_log.push(y.coords()[i] - std::f64::consts::LN_2);
        }
    }
    let mut log_sigma =
        crate::algebra::graded_log_singular_values(&row_log, core.embedded(), &col_log);
    if v.field() == crate::algebra::ScalarField::Quaternion {
        log_sigma = log_sigma.into_iter().step_by(2).collect();
    }
    log_sigma.iter().map(|&ls| arcosh_from_log(ls)).collect()
}

fn arcosh_from_log(log_sigma: f64) -> f64 {
    if log_sigma > 20.0 {
        log_sigma + std::f64::consts::LN_2
    } else {
        arcosh_clamped(log_sigma.exp())
    }
}

fn scale_rows_cols(m: &FMatrix, rows: &[f64], cols: &[f64]) -> FMatrix {
    let e = m.field().embed();
    let mut data = m.embedded().clone();
    for i in 0..rows.len() {
        for k in 0..e {
            let r = i * e + k;
            for j in 0..data.ncols() {
                data[(r, j)] *= rows[i];
            }
        }
    }
    for j in 0..cols.len() {
        for k in 0..e {
            let c = j * e + k;
            for i in 0..data.nrows() {
                data[(i, c)] *= Complex64::new(cols[j], 0.0);
            }
        }
    }
    FMatrix::from_embedded_unchecked(m.field(), m.rows(), m.cols(), data)
}

fn arcosh_clamped(s: f64) -> f64 {
    let s = s.max(1.0);
    if s > 1e8 {
        s.ln() + std::f64::consts::LN_2
    } else {
        (s + (s * s - 1.0).sqrt()).ln()
    }
}

/// State of S_n: starts at the hypergroup identity and convolves one
/// ν_c-draw per step.
pub fn simulate_walk<R: Rng>(
    spec: &MeasureSpec,
    n: usize,
    params: &ModelParams,
    rng: &mut R,
) -> Result<ChamberPoint, SamplerError> {
    spec.validate()?;
    if spec.rank() != params.q() {
        return Err(SamplerError::InvalidSpec(format!(
            "measure rank {} does not match model rank {}",
            spec.rank(),
            params.q()
        )));
    }
    let mut mp = MpSampler::new(params)?;
    let mut state = ChamberPoint::zero(params.q(), ChamberKind::TypeB);
    for _ in 0..n {
        let step = spec.sample(rng);
        state = convolve_with_sampler(&state, &step, params, &mut mp, rng)?;
    }
    Ok(state)
}

/// Independent walks on independent streams. The output is deterministic
/// given (stream, replicas) regardless of scheduling: replica i draws only
/// from `stream.child(i)` and rows are stored in replica order.
pub fn simulate_ensemble(
    spec: &MeasureSpec,
    n: usize,
    params: &ModelParams,
    replicas: usize,
    stream: &RngStream,
) -> Result<EmpiricalMeasure, SamplerError> {
    spec.validate()?;
    if replicas == 0 {
        return Err(SamplerError::InvalidSpec("replicas must be >= 1".into()));
    }
    let rows: Result<Vec<Vec<f64>>, SamplerError> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.child(i as u64).rng();
            let point = simulate_walk(spec, n, params, &mut rng)?;
            Ok(point.into_coords())
        })
        .collect();
    Ok(EmpiricalMeasure {
        points: rows?,
        q: params.q(),
        seed: stream.seed(),
        stream_count: replicas as u64,
        model: *params,
        walk_length: n,
    })
}
