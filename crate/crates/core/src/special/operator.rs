use num_complex::Complex64;

use super::engine::run_chunks;
use super::{SpecialError};
use crate::algebra::{
    g_matrix_unchecked, log_minor_increments, power_from_increments, SpectralParam,
};
use crate::chamber::{ChamberKind, ChamberPoint, ModelParams};
use crate::sampling::{haar_unitary, MpSampler, RngStream};

/// Result of comparing L φ against the eigenvalue target
/// −(λ_1² + … + λ_q² + ‖ρ‖²)·φ by shared-randomness finite differences.
#[derive(Debug, Clone)]
pub struct LEigenCheck {
    pub l_phi: Complex64,
    pub l_phi_se: f64,
    pub phi: Complex64,
    pub phi_se: f64,
    pub eigenvalue: Complex64,
    pub residual_rel: f64,
}

/// The radial hypergeometric operator at x, applied to an arbitrary
/// function handle by central finite differences:
///
/// L = Σ_i [∂_i² + (2k_1 coth x_i + 4k_2 coth 2x_i) ∂_i]
///   + 2k_3 Σ_{i<j} [coth(x_i+x_j)(∂_i+∂_j) + coth(x_i−x_j)(∂_i−∂_j)].
///
/// x must be strictly interior and h small enough that the stencil stays
/// interior.
pub fn apply_l_fd(
    f: &dyn Fn(&[f64]) -> Complex64,
    x: &ChamberPoint,
    params: &ModelParams,
    h: f64,
) -> Result<Complex64, SpecialError> {
    assert_eq!(x.kind(), ChamberKind::TypeB);
    check_stencil(x.coords(), h)?;
    let q = params.q();
    let center = f(x.coords());
    let mut plus = Vec::with_capacity(q);
    let mut minus = Vec::with_capacity(q);
    for i in 0..q {
        let mut up = x.coords().to_vec();
        up[i] += h;
        let mut dn = x.coords().to_vec();
        dn[i] -= h;
        plus.push(f(&up));
        minus.push(f(&dn));
    }
    Ok(assemble_l(x.coords(), params, h, center, &plus, &minus))
}

fn check_stencil(coords: &[f64], h: f64) -> Result<(), SpecialError> {
    if !(h > 0.0) {
        return Err(SpecialError::InvalidInput("step must be positive".into()));
    }
    let interior = coords.last().map(|&l| l > h).unwrap_or(false)
        && coords.windows(2).all(|w| w[0] - w[1] > h);
    if !interior {
        return Err(SpecialError::StencilLeavesChamber { coords: coords.to_vec(), h });
    }
    Ok(())
}

fn coth(t: f64) -> f64 {
    1.0 / t.tanh()
}

fn assemble_l(
    coords: &[f64],
    params: &ModelParams,
    h: f64,
    center: Complex64,
    plus: &[Complex64],
    minus: &[Complex64],
) -> Complex64 {
    let q = coords.len();
    let (k1, k2, k3) = params.multiplicities();
    let mut acc = Complex64::new(0.0, 0.0);
    let d1: Vec<Complex64> = (0..q)
        .map(|i| (plus[i] - minus[i]) / (2.0 * h))
        .collect();
    for i in 0..q {
        let d2 = (plus[i] - center * 2.0 + minus[i]) / (h * h);
        let a = 2.0 * k1 * coth(coords[i]) + 4.0 * k2 * coth(2.0 * coords[i]);
        acc += d2 + d1[i] * a;
    }
    for i in 0..q {
        for j in i + 1..q {
            let c_plus = coth(coords[i] + coords[j]);
            let c_minus = coth(coords[i] - coords[j]);
            acc += ((d1[i] + d1[j]) * c_plus + (d1[i] - d1[j]) * c_minus) * (2.0 * k3);
        }
    }
    acc
}

/// Shared-randomness eigenvalue check: evaluates the spherical function on
/// the full 2q+1 stencil with the SAME (u, w) draws, assembles L φ, and
/// reports the relative residual against −(Σλ² + ‖ρ‖²)·φ. Standard errors
/// come from the spread of per-chunk assemblies.
pub fn l_eigen_check(
    lam: &SpectralParam,
    x: &ChamberPoint,
    params: &ModelParams,
    h: f64,
    n_mc: u64,
    stream: &RngStream,
) -> Result<LEigenCheck, SpecialError> {
    assert_eq!(x.kind(), ChamberKind::TypeB);
    check_stencil(x.coords(), h)?;
    let q = params.q();
    if lam.len() != q {
        return Err(SpecialError::InvalidInput("lambda rank mismatch".into()));
    }
    // stencil layout: [center, +e_1, −e_1, +e_2, −e_2, …]
    let mut stencil: Vec<Vec<f64>> = vec![x.coords().to_vec()];
    for i in 0..q {
        let mut up = x.coords().to_vec();
        up[i] += h;
        stencil.push(up);
        let mut dn = x.coords().to_vec();
        dn[i] -= h;
        stencil.push(dn);
    }
    let exponent = lam.exponent(&params.rho_bc());
    let params_c = *params;

    struct Acc {
        /// per-chunk (L φ, φ) assembled from the chunk's own means
        assemblies: Vec<(Complex64, Complex64)>,
        sums: Vec<Complex64>,
        n: u64,
        err: Option<SpecialError>,
    }
    let width = stencil.len();
    let acc = run_chunks(
        n_mc,
        stream,
        || Acc { assemblies: Vec::new(), sums: vec![Complex64::default(); width], n: 0, err: None },
        |rng, count, acc| {
            let mut mp = match MpSampler::new(&params_c) {
                Ok(s) => s,
                Err(e) => {
                    acc.err = Some(e.into());
                    return;
                }
            };
            let mut local = vec![Complex64::default(); width];
            let mut done = 0u64;
            for _ in 0..count {
                let draw = (|| -> Result<(), SpecialError> {
                    let u = haar_unitary(q, params_c.field(), rng)?;
                    let w = mp.sample(rng)?;
                    for (slot, coords) in stencil.iter().enumerate() {
                        let m = g_matrix_unchecked(coords, &u, &w);
                        let y = log_minor_increments(&m)?;
                        local[slot] += power_from_increments(&y, &exponent);
                    }
                    Ok(())
                })();
                if let Err(e) = draw {
                    acc.err = Some(e);
                    return;
                }
                done += 1;
            }
            if done > 0 {
                let means: Vec<Complex64> =
                    local.iter().map(|v| v / done as f64).collect();
                let center = means[0];
                let plus: Vec<Complex64> = (0..q).map(|i| means[1 + 2 * i]).collect();
                let minus: Vec<Complex64> = (0..q).map(|i| means[2 + 2 * i]).collect();
                let l_phi = assemble_l(&stencil[0], &params_c, h, center, &plus, &minus);
                acc.assemblies.push((l_phi, center));
                for (s, v) in local.iter().enumerate() {
                    acc.sums[s] += v;
                }
                acc.n += done;
            }
        },
        |a, b| {
            if a.err.is_none() {
                if let Some(e) = b.err {
                    a.err = Some(e);
                } else {
                    a.assemblies.extend(b.assemblies);
                    for (s, v) in b.sums.iter().enumerate() {
                        a.sums[s] += v;
                    }
                    a.n += b.n;
                }
            }
        },
    );
    if let Some(e) = acc.err {
        return Err(e);
    }
    let n = acc.n.max(1) as f64;
    let means: Vec<Complex64> = acc.sums.iter().map(|v| v / n).collect();
    let center = means[0];
    let plus: Vec<Complex64> = (0..q).map(|i| means[1 + 2 * i]).collect();
    let minus: Vec<Complex64> = (0..q).map(|i| means[2 + 2 * i]).collect();
    let l_phi = assemble_l(x.coords(), params, h, center, &plus, &minus);
    let (l_se, phi_se) = chunk_spread(&acc.assemblies);
    let eigenvalue = -(lam.sum_of_squares() + params.rho_norm_sq());
    let target = eigenvalue * center;
    let residual_rel = (l_phi - target).norm() / target.norm().max(1e-300);
    Ok(LEigenCheck {
        l_phi,
        l_phi_se: l_se,
        phi: center,
        phi_se,
        eigenvalue,
        residual_rel,
    })
}

fn chunk_spread(assemblies: &[(Complex64, Complex64)]) -> (f64, f64) {
    let c = assemblies.len();
    if c < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mean_l = assemblies.iter().map(|(l, _)| l).sum::<Complex64>() / c as f64;
    let mean_p = assemblies.iter().map(|(_, p)| p).sum::<Complex64>() / c as f64;
    let var_l: f64 = assemblies.iter().map(|(l, _)| (l - mean_l).norm_sqr()).sum::<f64>()
        / (c - 1) as f64;
    let var_p: f64 = assemblies.iter().map(|(_, p)| (p - mean_p).norm_sqr()).sum::<f64>()
        / (c - 1) as f64;
    ((var_l / c as f64).sqrt(), (var_p / c as f64).sqrt())
}

/// Symmetric-difference estimate of ∂²φ^p_λ/∂x_1²(0), with the center
/// value pinned to the exact φ(0) = 1. Used to decide which constant
/// scales the second derivative at the origin.
pub fn second_derivative_at_zero(
    lam: &SpectralParam,
    params: &ModelParams,
    h: f64,
    n_mc: u64,
    stream: &RngStream,
) -> Result<(Complex64, f64), SpecialError> {
    let q = params.q();
    if lam.len() != q {
        return Err(SpecialError::InvalidInput("lambda rank mismatch".into()));
    }
    let mut up = vec![0.0; q];
    up[0] = h;
    let mut dn = vec![0.0; q];
    dn[0] = -h;
    let stencil = [up, dn];
    let exponent = lam.exponent(&params.rho_bc());
    let params_c = *params;

    struct Acc {
        assemblies: Vec<Complex64>,
        sum: [Complex64; 2],
        n: u64,
        err: Option<SpecialError>,
    }
    let acc = run_chunks(
        n_mc,
        stream,
        || Acc { assemblies: Vec::new(), sum: [Complex64::default(); 2], n: 0, err: None },
        |rng, count, acc| {
            let mut mp = match MpSampler::new(&params_c) {
                Ok(s) => s,
                Err(e) => {
                    acc.err = Some(e.into());
                    return;
                }
            };
            let mut local = [Complex64::default(); 2];
            let mut done = 0u64;
            for _ in 0..count {
                let draw = (|| -> Result<(), SpecialError> {
                    let u = haar_unitary(q, params_c.field(), rng)?;
                    let w = mp.sample(rng)?;
                    for (slot, coords) in stencil.iter().enumerate() {
                        let m = g_matrix_unchecked(coords, &u, &w);
                        let y = log_minor_increments(&m)?;
                        local[slot] += power_from_increments(&y, &exponent);
                    }
                    Ok(())
                })();
                if let Err(e) = draw {
                    acc.err = Some(e);
                    return;
                }
                done += 1;
            }
            if done > 0 {
                let d2 = (local[0] / done as f64 + local[1] / done as f64
                    - Complex64::new(2.0, 0.0))
                    / (h * h);
                acc.assemblies.push(d2);
                acc.sum[0] += local[0];
                acc.sum[1] += local[1];
                acc.n += done;
            }
        },
        |a, b| {
            if a.err.is_none() {
                if let Some(e) = b.err {
                    a.err = Some(e);
                } else {
                    a.assemblies.extend(b.assemblies);
                    a.sum[0] += b.sum[0];
                    a.sum[1] += b.sum[1];
                    a.n += b.n;
                }
            }
        },
    );
    if let Some(e) = acc.err {
        return Err(e);
    }
    let n = acc.n.max(1) as f64;
    let d2 = (acc.sum[0] / n + acc.sum[1] / n - Complex64::new(2.0, 0.0)) / (h * h);
    let c = acc.assemblies.len();
    let se = if c >= 2 {
        let mean = acc.assemblies.iter().sum::<Complex64>() / c as f64;
        let var: f64 = acc.assemblies.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>()
            / (c - 1) as f64;
        (var / c as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok((d2, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ScalarField;

    #[test]
    fn constant_function_is_annihilated() {
        let params = ModelParams::new(2, ScalarField::Real, 6.0).unwrap();
        let x = ChamberPoint::new_b(vec![1.0, 0.4]).unwrap();
        let f = |_: &[f64]| Complex64::new(3.25, -1.0);
        let v = apply_l_fd(&f, &x, &params, 1e-3).unwrap();
        assert!(v.norm() < 1e-6, "L(const) = {v}");
    }

    #[test]
    fn stencil_validation() {
        let params = ModelParams::new(2, ScalarField::Real, 6.0).unwrap();
        let f = |_: &[f64]| Complex64::new(0.0, 0.0);
        let boundary = ChamberPoint::new_b(vec![1.0, 0.005]).unwrap();
        assert!(matches!(
            apply_l_fd(&f, &boundary, &params, 1e-2),
            Err(SpecialError::StencilLeavesChamber { .. })
        ));
        let tight_gap = ChamberPoint::new_b(vec![1.0, 0.995]).unwrap();
        assert!(matches!(
            apply_l_fd(&f, &tight_gap, &params, 1e-2),
            Err(SpecialError::StencilLeavesChamber { .. })
        ));
    }

    #[test]
    fn eigen_check_rank_one_quick() {
        // coarse version of the acceptance run: 5% residual needs many
        // more draws; here we only require the right ballpark
        let params = ModelParams::new(1, ScalarField::Real, 5.0).unwrap();
        let lam = SpectralParam::from_real(&[0.7]);
        let x = ChamberPoint::new_b(vec![0.8]).unwrap();
        let stream = RngStream::root(600);
        let check = l_eigen_check(&lam, &x, &params, 1e-2, 400_000, &stream).unwrap();
        assert!(
            check.residual_rel < 0.25,
            "relative residual too large: {} (Lphi {}, target {})",
            check.residual_rel,
            check.l_phi,
            check.eigenvalue * check.phi
        );
    }

    #[test]
    fn second_derivative_matches_pqd_at_d1() {
        let params = ModelParams::new(1, ScalarField::Real, 5.0).unwrap();
        let lam = SpectralParam::from_real(&[0.6]);
        let stream = RngStream::root(601);
        let (d2, se) = second_derivative_at_zero(&lam, &params, 2e-2, 400_000, &stream).unwrap();
        let eigen = 0.36 + params.rho_norm_sq();
        let expect = -eigen / params.laplace_coeff_pqd();
        assert!(
            (d2.re - expect).abs() < 6.0 * se + 0.02 * expect.abs(),
            "∂²φ(0) = {} vs expected {expect} (se {se})",
            d2.re
        );
    }
}
