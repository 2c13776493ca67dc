use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::engine::{run_chunks, ComplexSums};
use super::{CEstimate, SpecialError};
use crate::algebra::{
    g_matrix_unchecked, log_minor_increments, power_from_increments, FMatrix, ScalarField,
    SpectralParam,
};
use crate::chamber::{rho_a, ChamberKind, ChamberPoint, ModelParams};
use crate::sampling::{haar_unitary, MpSampler, RngStream};

/// What a spherical integrand is built from per draw.
#[derive(Clone)]
enum Kind {
    /// u ↦ u*·e^{2x̲}·u with u Haar on U(q, F)
    A { q: usize, field: ScalarField },
    /// (u, w) ↦ g(x, u, w) with u Haar and w from the matrix-ball measure
    Bc { params: ModelParams },
}

/// Spherical function of type A at one point:
/// the Haar average of Δ_{(iλ−ρ^A)/2}(u⁻¹ e^{2x̲} u).
pub fn phi_a(
    lam: &SpectralParam,
    x: &ChamberPoint,
    field: ScalarField,
    n_mc: u64,
    stream: &RngStream,
) -> Result<CEstimate, SpecialError> {
    let out = phi_a_grid(
        &[(lam.clone(), x.coords().to_vec())],
        field,
        x.rank(),
        n_mc,
        stream,
    )?;
    Ok(out[0])
}

/// Spherical function of type A on a grid of (λ, x) points evaluated with
/// shared Haar draws; x coordinates may repeat (the conjugated matrix is
/// factorized once per distinct x per draw).
pub fn phi_a_grid(
    points: &[(SpectralParam, Vec<f64>)],
    field: ScalarField,
    q: usize,
    n_mc: u64,
    stream: &RngStream,
) -> Result<Vec<CEstimate>, SpecialError> {
    let rho = rho_a(q, field.dim());
    let prepared = prepare_points(points, q, &rho)?;
    evaluate_grid(Kind::A { q, field }, prepared, n_mc, stream)
}

/// Spherical function of type BC at one point:
/// the Haar × matrix-ball average of Δ_{(iλ−ρ)/2}(g(x, u, w)).
pub fn phi_bc(
    lam: &SpectralParam,
    x: &ChamberPoint,
    params: &ModelParams,
    n_mc: u64,
    stream: &RngStream,
) -> Result<CEstimate, SpecialError> {
    assert_eq!(x.kind(), ChamberKind::TypeB);
    let out = phi_bc_grid(
        &[(lam.clone(), x.coords().to_vec())],
        params,
        n_mc,
        stream,
    )?;
    Ok(out[0])
}

/// Spherical function of type BC on a grid of (λ, x) points with shared
/// (u, w) draws across the whole grid.
pub fn phi_bc_grid(
    points: &[(SpectralParam, Vec<f64>)],
    params: &ModelParams,
    n_mc: u64,
    stream: &RngStream,
) -> Result<Vec<CEstimate>, SpecialError> {
    let rho = params.rho_bc();
    let prepared = prepare_points(points, params.q(), &rho)?;
    evaluate_grid(Kind::Bc { params: *params }, prepared, n_mc, stream)
}

struct Prepared {
    unique_coords: Vec<Vec<f64>>,
    /// (coords index, power-function exponent) per requested point
    point_map: Vec<(usize, Vec<Complex64>)>,
}

fn prepare_points(
    points: &[(SpectralParam, Vec<f64>)],
    q: usize,
    rho: &[f64],
) -> Result<Prepared, SpecialError> {
    if points.is_empty() {
        return Err(SpecialError::InvalidInput("empty evaluation grid".into()));
    }
    let mut unique_coords: Vec<Vec<f64>> = Vec::new();
    let mut point_map = Vec::with_capacity(points.len());
    for (lam, coords) in points {
        if lam.len() != q || coords.len() != q {
            return Err(SpecialError::InvalidInput(format!(
                "rank mismatch: expected {q}, got lambda {} / x {}",
                lam.len(),
                coords.len()
            )));
        }
        let idx = match unique_coords.iter().position(|c| c == coords) {
            Some(i) => i,
            None => {
                unique_coords.push(coords.clone());
                unique_coords.len() - 1
            }
        };
        point_map.push((idx, lam.exponent(rho)));
    }
    Ok(Prepared { unique_coords, point_map })
}

struct GridAcc {
    sums: ComplexSums,
    err: Option<SpecialError>,
}

fn evaluate_grid(
    kind: Kind,
    prepared: Prepared,
    n_mc: u64,
    stream: &RngStream,
) -> Result<Vec<CEstimate>, SpecialError> {
    if n_mc == 0 {
        return Err(SpecialError::InvalidInput("n_mc must be positive".into()));
    }
    let width = prepared.point_map.len();
    let acc = run_chunks(
        n_mc,
        stream,
        || GridAcc { sums: ComplexSums::new(width), err: None },
        |rng, count, acc| {
            let mut draw = match DrawCtx::new(&kind) {
                Ok(d) => d,
                Err(e) => {
                    acc.err = Some(e);
                    return;
                }
            };
            let mut increments = vec![Vec::new(); prepared.unique_coords.len()];
            for _ in 0..count {
                if let Err(e) = draw.next(rng) {
                    acc.err = Some(e);
                    return;
                }
                for (ci, coords) in prepared.unique_coords.iter().enumerate() {
                    match draw.log_increments(coords) {
                        Ok(y) => increments[ci] = y,
                        Err(e) => {
                            acc.err = Some(e);
                            return;
                        }
                    }
                }
                for (slot, (ci, exponent)) in prepared.point_map.iter().enumerate() {
                    let v = power_from_increments(&increments[*ci], exponent);
                    acc.sums.push(slot, v.re, v.im);
                }
                acc.sums.bump();
            }
        },
        |a, b| {
            if a.err.is_none() {
                if let Some(e) = b.err {
                    a.err = Some(e);
                } else {
                    a.sums.merge(&b.sums);
                }
            }
        },
    );
    if let Some(e) = acc.err {
        return Err(e);
    }
    Ok((0..width).map(|s| acc.sums.estimate(s)).collect())
}

/// Per-chunk draw state: holds the ball sampler (which may carry chain
/// state) and the current (u, w) pair.
struct DrawCtx {
    kind: Kind,
    mp: Option<MpSampler>,
    u: Option<FMatrix>,
    w: Option<FMatrix>,
}

impl DrawCtx {
    fn new(kind: &Kind) -> Result<Self, SpecialError> {
        let mp = match kind {
            Kind::A { .. } => None,
            Kind::Bc { params } => Some(MpSampler::new(params)?),
        };
        Ok(DrawCtx { kind: kind.clone(), mp, u: None, w: None })
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> Result<(), SpecialError> {
        match &self.kind {
            Kind::A { q, field } => {
                self.u = Some(haar_unitary(*q, *field, rng)?);
            }
            Kind::Bc { params } => {
                self.u = Some(haar_unitary(params.q(), params.field(), rng)?);
                self.w = Some(self.mp.as_mut().expect("bc has sampler").sample(rng)?);
            }
        }
        Ok(())
    }

    fn log_increments(&self, coords: &[f64]) -> Result<Vec<f64>, SpecialError> {
        let u = self.u.as_ref().expect("draw initialized");
        match &self.kind {
            Kind::A { field, .. } => a_log_increments(coords, u, *field),
            Kind::Bc { .. } => {
                let m = g_matrix_unchecked(coords, u, self.w.as_ref().expect("bc draw"));
                Ok(log_minor_increments(&m)?)
            }
        }
    }
}

/// u*·e^{2x̲}·u, the type-A integrand matrix.
pub(crate) fn conjugated_exp_diag(x: &[f64], u: &FMatrix, field: ScalarField) -> FMatrix {
    let exp2: Vec<f64> = x.iter().map(|&t| (2.0 * t).exp()).collect();
    let d = FMatrix::from_real_diag(field, &exp2);
    let mut m = u.adjoint().mul(&d).mul(u);
    m.hermitize();
    m
}

/// Coordinate spread above which Cholesky on the dense A-integrand loses
/// its small pivots and the Cauchy–Binet log-space route takes over.
const A_GRADED_SPREAD: f64 = 12.0;

/// Log-minor increments of the type-A integrand u*·e^{2x̲}·u, routed by
/// the coordinate spread of x.
pub(crate) fn a_log_increments(
    coords: &[f64],
    u: &FMatrix,
    field: ScalarField,
) -> Result<Vec<f64>, SpecialError> {
    let max = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = coords.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min <= A_GRADED_SPREAD {
        let m = conjugated_exp_diag(coords, u, field);
        return Ok(log_minor_increments(&m)?);
    }
    let e = field.embed();
    let mut d_log = Vec::with_capacity(coords.len() * e);
    for &x in coords {
        for _ in 0..e {
            d_log.push(2.0 * x);
        }
    }
    let leading = crate::algebra::cb_log_leading_minors(&d_log, u.embedded());
    let mut out = Vec::with_capacity(coords.len());
    let mut prev = 0.0;
    for r in 1..=coords.len() {
        let cur = leading[r * e - 1];
        out.push((cur - prev) / e as f64);
        prev = cur;
    }
    Ok(out)
}
