use super::engine::{run_chunks, ComplexSums};
use super::{CEstimate, SpecialError};
use crate::algebra::{
    g_matrix_unchecked, log_minor_increments, power_from_increments, SpectralParam,
};
use crate::chamber::ModelParams;
use crate::sampling::{haar_unitary, EmpiricalMeasure, MeasureSpec, MpSampler, RngStream};

/// Whether Im λ lies in the convex hull of the Weyl orbit of ρ (the region
/// where the spherical functions, hence the transform, are bounded).
///
/// For the signed-permutation orbit this is weak majorization of the
/// rearranged absolute values by ρ.
pub fn in_dual_region(lam: &SpectralParam, rho: &[f64]) -> bool {
    let mut im: Vec<f64> = lam.components().iter().map(|z| z.im.abs()).collect();
    im.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut sorted_rho = rho.to_vec();
    sorted_rho.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc_im = 0.0;
    let mut acc_rho = 0.0;
    for (a, b) in im.iter().zip(&sorted_rho) {
        acc_im += a;
        acc_rho += b;
        if acc_im > acc_rho + 1e-9 {
            return false;
        }
    }
    true
}

/// Spherical Fourier transform of a step measure at λ: the joint MC
/// average of the BC integrand over x ~ ν_c and the spherical draws.
/// Evaluation outside the bounded dual region proceeds, but the caller
/// loses the |·| ≤ 1 contract (check [`in_dual_region`]).
pub fn fourier_bc(
    spec: &MeasureSpec,
    lam: &SpectralParam,
    params: &ModelParams,
    n_mc: u64,
    stream: &RngStream,
) -> Result<CEstimate, SpecialError> {
    spec.validate().map_err(SpecialError::Sampler)?;
    if lam.len() != params.q() {
        return Err(SpecialError::InvalidInput("lambda rank mismatch".into()));
    }
    let exponent = lam.exponent(&params.rho_bc());
    let q = params.q();
    let spec = spec.clone();
    let params = *params;

    struct Acc {
        sums: ComplexSums,
        err: Option<SpecialError>,
    }
    let acc = run_chunks(
        n_mc,
        stream,
        || Acc { sums: ComplexSums::new(1), err: None },
        |rng, count, acc| {
            let mut mp = match MpSampler::new(&params) {
                Ok(s) => s,
                Err(e) => {
                    acc.err = Some(e.into());
                    return;
                }
            };
            for _ in 0..count {
                let x = spec.sample(rng);
                let value = (|| -> Result<num_complex::Complex64, SpecialError> {
                    let u = haar_unitary(q, params.field(), rng)?;
                    let w = mp.sample(rng)?;
                    let m = g_matrix_unchecked(x.coords(), &u, &w);
                    let y = log_minor_increments(&m)?;
                    Ok(power_from_increments(&y, &exponent))
                })();
                match value {
                    Ok(v) => {
                        acc.sums.push(0, v.re, v.im);
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

/// Empirical spherical Fourier transform of a sample cloud on a λ-grid.
///
/// Each cloud point gets its own independent draw pool (child stream
/// keyed by the point index), so MC noise averages out across points and
/// the reported standard error — computed from the scatter of per-point
/// values — covers both noise sources.
pub fn fourier_bc_cloud(
    cloud: &EmpiricalMeasure,
    lams: &[SpectralParam],
    params: &ModelParams,
    n_mc_per_point: u64,
    stream: &RngStream,
) -> Result<Vec<CEstimate>, SpecialError> {
    if cloud.is_empty() {
        return Err(SpecialError::InvalidInput("empty cloud".into()));
    }
    if lams.is_empty() {
        return Err(SpecialError::InvalidInput("empty lambda grid".into()));
    }
    let rho = params.rho_bc();
    let exponents: Vec<Vec<num_complex::Complex64>> =
        lams.iter().map(|l| l.exponent(&rho)).collect();
    let q = params.q();
    let n_points = cloud.len();

    struct Acc {
        sums: ComplexSums,
        err: Option<SpecialError>,
    }
    // parallel over cloud points; chunk layout fixed by the point count
    let k = (n_points as u64).min(128).max(1);
    let bounds: Vec<(usize, usize)> = (0..k)
        .map(|i| {
            let lo = (i * n_points as u64 / k) as usize;
            let hi = ((i + 1) * n_points as u64 / k) as usize;
            (lo, hi)
        })
        .collect();
    use rayon::prelude::*;
    let mut parts: Vec<Acc> = bounds
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = Acc { sums: ComplexSums::new(exponents.len()), err: None };
            for i in lo..hi {
                let mut rng = stream.child(i as u64).rng();
                let mut mp = match MpSampler::new(params) {
                    Ok(s) => s,
                    Err(e) => {
                        acc.err = Some(e.into());
                        return acc;
                    }
                };
                // per-point MC average of the integrand for every lambda
                let mut point_sums = vec![num_complex::Complex64::new(0.0, 0.0); exponents.len()];
                for _ in 0..n_mc_per_point {
                    let draw = (|| -> Result<Vec<f64>, SpecialError> {
                        let u = haar_unitary(q, params.field(), &mut rng)?;
                        let w = mp.sample(&mut rng)?;
                        let m = g_matrix_unchecked(&cloud.points[i], &u, &w);
                        Ok(log_minor_increments(&m)?)
                    })();
                    let y = match draw {
                        Ok(y) => y,
                        Err(e) => {
                            acc.err = Some(e);
                            return acc;
                        }
                    };
                    for (s, exp) in exponents.iter().enumerate() {
                        point_sums[s] += power_from_increments(&y, exp);
                    }
                }
                for (s, total) in point_sums.iter().enumerate() {
                    let v = total / n_mc_per_point as f64;
                    acc.sums.push(s, v.re, v.im);
                }
                acc.sums.bump();
            }
            acc
        })
        .collect();
    let mut out = parts.remove(0);
    for part in parts {
        if out.err.is_none() {
            if let Some(e) = part.err {
                out.err = Some(e);
            } else {
                out.sums.merge(&part.sums);
            }
        }
    }
    if let Some(e) = out.err {
        return Err(e);
    }
    Ok((0..exponents.len()).map(|s| out.sums.estimate(s)).collect())
}
