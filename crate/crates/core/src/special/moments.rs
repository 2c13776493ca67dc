use serde::{Deserialize, Serialize};

use super::engine::{run_chunks, RealSums};
use super::phi::a_log_increments;
use super::{Estimate, MomentBlock, MultiIndex, SpecialError};
use crate::algebra::{g_matrix_unchecked, log_minor_increments, FMatrix, ScalarField};
use crate::chamber::{log_cosh_map, ChamberKind, ChamberPoint, ModelParams};
use crate::sampling::{haar_unitary, MeasureSpec, MpSampler, RngStream};

/// Which family of moment functions to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    /// Modified moments m̃_l(x) = m^A_l(ln cosh x); the p → ∞ limits.
    AModified,
    /// BC(p) moments from the g-matrix integrand.
    Bc,
}

/// Moment function of type A at x ∈ C_q^A: the Haar average of
/// Π_r ((ln Δ_r − ln Δ_{r−1})/2)^{l_r} on u*·e^{2x̲}·u.
pub fn moment_a(
    l: &MultiIndex,
    x: &ChamberPoint,
    field: ScalarField,
    n_mc: u64,
    stream: &RngStream,
) -> Result<Estimate, SpecialError> {
    let q = x.rank();
    check_index(l, q)?;
    let coords = x.coords().to_vec();
    scalar_mc(n_mc, stream, move |rng| {
        let u = haar_unitary(q, field, rng)?;
        let mut y = a_log_increments(&coords, &u, field)?;
        y.iter_mut().for_each(|v| *v *= 0.5);
        Ok(l.apply(&y))
    })
}

/// Moment function of type BC(p) at x ∈ C_q^B: the Haar × ball average of
/// the same product evaluated on g(x, u, w).
pub fn moment_bc(
    l: &MultiIndex,
    x: &ChamberPoint,
    params: &ModelParams,
    n_mc: u64,
    stream: &RngStream,
) -> Result<Estimate, SpecialError> {
    assert_eq!(x.kind(), ChamberKind::TypeB);
    check_index(l, params.q())?;
    let coords = x.coords().to_vec();
    let params = *params;
    stateful_scalar_mc(
        n_mc,
        stream,
        move || MpSampler::new(&params),
        move |mp, rng| {
            let u = haar_unitary(params.q(), params.field(), rng)?;
            let w = mp.sample(rng)?;
            let m = g_matrix_unchecked(&coords, &u, &w);
            let y = half_increments(&m)?;
            Ok(l.apply(&y))
        },
    )
}

/// Modified moment function m̃_l(x) = m^A_l(T(x)); bit-identical to
/// calling [`moment_a`] at the transformed point on the same stream.
pub fn moment_modified(
    l: &MultiIndex,
    x: &ChamberPoint,
    field: ScalarField,
    n_mc: u64,
    stream: &RngStream,
) -> Result<Estimate, SpecialError> {
    assert_eq!(x.kind(), ChamberKind::TypeB);
    let t = log_cosh_map(x);
    let t = ChamberPoint::new_a(t.into_coords())?;
    moment_a(l, &t, field, n_mc, stream)
}

/// First and second moments of a measure, grouped: the dispersion vector
/// m_1(ν), the second-moment matrix m_2(ν), and Σ(ν) = m_2 − m_1ᵀm_1.
/// Both integration levels (x ~ ν and the spherical draws) run in one
/// joint MC loop.
pub fn measure_moments(
    spec: &MeasureSpec,
    kind: MomentKind,
    params: &ModelParams,
    n_mc: u64,
    stream: &RngStream,
) -> Result<MomentBlock, SpecialError> {
    spec.validate().map_err(SpecialError::Sampler)?;
    if spec.rank() != params.q() {
        return Err(SpecialError::InvalidInput(format!(
            "measure rank {} does not match model rank {}",
            spec.rank(),
            params.q()
        )));
    }
    if !spec.has_moments(4) {
        return Err(SpecialError::NonIntegrableSpec(
            "measure lacks classical fourth moments".into(),
        ));
    }
    let q = params.q();
    let width = q + q * (q + 1) / 2;
    let spec = spec.clone();
    let params = *params;

    struct Acc {
        sums: RealSums,
        err: Option<SpecialError>,
    }
    let acc = run_chunks(
        n_mc,
        stream,
        || Acc { sums: RealSums::new(width), err: None },
        |rng, count, acc| {
            let mut mp = match kind {
                MomentKind::AModified => None,
                MomentKind::Bc => match MpSampler::new(&params) {
                    Ok(s) => Some(s),
                    Err(e) => {
                        acc.err = Some(e.into());
                        return;
                    }
                },
            };
            for _ in 0..count {
                let x = spec.sample(rng);
                let result = (|| -> Result<Vec<f64>, SpecialError> {
                    let u = haar_unitary(q, params.field(), rng)?;
                    match kind {
                        MomentKind::AModified => {
                            let t = log_cosh_map(&x);
                            let mut y = a_log_increments(t.coords(), &u, params.field())?;
                            y.iter_mut().for_each(|v| *v *= 0.5);
                            Ok(y)
                        }
                        MomentKind::Bc => {
                            let w = mp.as_mut().expect("bc sampler").sample(rng)?;
                            half_increments(&g_matrix_unchecked(x.coords(), &u, &w))
                        }
                    }
                })();
                let y = match result {
                    Ok(y) => y,
                    Err(e) => {
                        acc.err = Some(e);
                        return;
                    }
                };
                for r in 0..q {
                    acc.sums.push(r, y[r]);
                }
                let mut slot = q;
                for r in 0..q {
                    for s in r..q {
                        acc.sums.push(slot, y[r] * y[s]);
                        slot += 1;
                    }
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

    let m1: Vec<Estimate> = (0..q).map(|r| acc.sums.estimate(r)).collect();
    let mut m2 = vec![vec![Estimate::exact(0.0, 0); q]; q];
    let mut slot = q;
    for r in 0..q {
        for s in r..q {
            let est = acc.sums.estimate(slot);
            m2[r][s] = est;
            m2[s][r] = est;
            slot += 1;
        }
    }
    let mut sigma = vec![vec![Estimate::exact(0.0, 0); q]; q];
    for r in 0..q {
        for s in 0..q {
            let value = m2[r][s].value - m1[r].value * m1[s].value;
            let se = (m2[r][s].std_error.powi(2)
                + (m1[r].value * m1[s].std_error).powi(2)
                + (m1[s].value * m1[r].std_error).powi(2))
            .sqrt();
            sigma[r][s] = Estimate { value, std_error: se, n_mc: acc.sums.n };
        }
    }
    Ok(MomentBlock { m1, m2, sigma, n_mc: acc.sums.n })
}

/// m^p_{e_1}(ν) − m̃_{e_1}(ν) estimated with common random numbers: per
/// draw the first log-minor increments of g(x, u, w) and of g(x, u, 0)
/// are differenced, so the estimate of the gap has a standard error of
/// the gap's own order instead of the moments' order.
pub fn moment_gap_first(
    spec: &MeasureSpec,
    params: &ModelParams,
    n_mc: u64,
    stream: &RngStream,
) -> Result<Estimate, SpecialError> {
    spec.validate().map_err(SpecialError::Sampler)?;
    if !spec.has_moments(4) {
        return Err(SpecialError::NonIntegrableSpec(
            "measure lacks classical fourth moments".into(),
        ));
    }
    let q = params.q();
    let spec = spec.clone();
    let params = *params;
    stateful_scalar_mc(
        n_mc,
        stream,
        move || MpSampler::new(&params),
        move |mp, rng| {
            let x = spec.sample(rng);
            let u = haar_unitary(q, params.field(), rng)?;
            let w = mp.sample(rng)?;
            let with_w = half_increments(&g_matrix_unchecked(x.coords(), &u, &w))?;
            let zero = FMatrix::zeros(q, q, params.field());
            let without = half_increments(&g_matrix_unchecked(x.coords(), &u, &zero))?;
            Ok(with_w[0] - without[0])
        },
    )
}

fn half_increments(m: &FMatrix) -> Result<Vec<f64>, SpecialError> {
    let mut y = log_minor_increments(m)?;
    y.iter_mut().for_each(|v| *v *= 0.5);
    Ok(y)
}

fn check_index(l: &MultiIndex, q: usize) -> Result<(), SpecialError> {
    if l.len() != q {
        return Err(SpecialError::InvalidInput(format!(
            "multiindex length {} does not match rank {q}",
            l.len()
        )));
    }
    Ok(())
}

/// MC average of a scalar integrand drawn fresh per iteration.
fn scalar_mc<F>(n_mc: u64, stream: &RngStream, f: F) -> Result<Estimate, SpecialError>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64, SpecialError> + Sync,
{
    stateful_scalar_mc(n_mc, stream, || Ok::<(), crate::sampling::SamplerError>(()), move |_, rng| f(rng))
}

/// MC average of a scalar integrand with per-chunk sampler state.
fn stateful_scalar_mc<S, I, F, E>(
    n_mc: u64,
    stream: &RngStream,
    init: I,
    f: F,
) -> Result<Estimate, SpecialError>
where
    I: Fn() -> Result<S, E> + Sync,
    F: Fn(&mut S, &mut rand_chacha::ChaCha8Rng) -> Result<f64, SpecialError> + Sync,
    E: Into<SpecialError> + Send,
{
    struct Acc {
        sums: RealSums,
        err: Option<SpecialError>,
    }
    let acc = run_chunks(
        n_mc,
        stream,
        || Acc { sums: RealSums::new(1), err: None },
        |rng, count, acc| {
            let mut state = match init() {
                Ok(s) => s,
                Err(e) => {
                    acc.err = Some(e.into());
                    return;
                }
            };
            for _ in 0..count {
                match f(&mut state, rng) {
                    Ok(v) => {
                        acc.sums.push(0, v);
                        acc.sums.bump();
                    }
                    Err(e) => {
                        acc.err = Some(e);
                        return;
                    }
                }
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
    Ok(acc.sums.estimate(0))
}
