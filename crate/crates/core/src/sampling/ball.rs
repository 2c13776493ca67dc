use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{SamplerError, REJECTION_CAP};
use crate::algebra::hermitian_chol_log_diag;
use crate::algebra::{FMatrix, Quat, ScalarField};
use crate::chamber::ModelParams;

/// Proposal strategy of the matrix-ball sampler.
///
/// The target density on the ball {w : w*w ≤ I} is Δ(I − w*w)^γ up to
/// normalization. All three routes accept with the exact density ratio:
///
/// * `BoxReject` — uniform proposals on the ball (componentwise box,
///   rejected to the ball), then Δ^γ-thinning. Exact; efficient for small
///   exponents and small rank.
/// * `GaussReject` — Gaussian proposals with componentwise variance
///   1/(2γ); since Δ(I − w*w) ≤ exp(−tr w*w) the Gaussian is a valid
///   envelope and the acceptance ratio tends to 1 as γ grows. Exact;
///   this is what makes large dimension parameters affordable.
/// * `HitAndRun` — Metropolis hit-and-run chain targeting the density
///   directly, with a long burn-in and thinning. Approximate (correlated
///   draws); used for rank ≥ 3 at small exponents where box rejection is
///   hopeless, and as a cross-check of the exact routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallStrategy {
    BoxReject,
    GaussReject,
    HitAndRun,
}

const HIT_AND_RUN_BURN_IN: usize = 2048;
const HIT_AND_RUN_THIN: usize = 4;

/// Sampler for the matrix-ball measure with density Δ(I − w*w)^γ.
///
/// Holds the chain state for the hit-and-run route, so batch consumers
/// should construct one sampler and reuse it.
#[derive(Debug, Clone)]
pub struct MpSampler {
    q: usize,
    field: ScalarField,
    gamma: f64,
    strategy: BallStrategy,
    chain: Option<ChainState>,
}

#[derive(Debug, Clone)]
struct ChainState {
    w: DMatrix<Complex64>,
    log_delta: f64,
}

impl MpSampler {
    pub fn new(params: &ModelParams) -> Result<Self, SamplerError> {
        let gamma = params.ball_exponent();
        if gamma < -1e-12 {
            return Err(SamplerError::UnsupportedExponent {
                gamma,
                q: params.q(),
                d: params.d(),
                p: params.p(),
            });
        }
        let gamma = gamma.max(0.0);
        let q = params.q();
        let d = params.d();
        // Route by expected efficiency. With n = dq² real degrees of
        // freedom, the Gaussian envelope concentrates at tr(w*w) ≈ n/(2γ),
        // so it needs γ of order n to land inside the ball; box rejection
        // pays vol(ball)/2^n and dies quickly in n.
        let n_dof = (d * q * q) as f64;
        let strategy = if gamma >= f64::max(2.0, n_dof / 2.0) {
            BallStrategy::GaussReject
        } else if n_dof <= 8.0 {
            BallStrategy::BoxReject
        } else {
            BallStrategy::HitAndRun
        };
        Ok(MpSampler { q, field: params.field(), gamma, strategy, chain: None })
    }

    pub fn strategy(&self) -> BallStrategy {
        self.strategy
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> Result<FMatrix, SamplerError> {
        match self.strategy {
            BallStrategy::BoxReject => self.sample_box(rng),
            BallStrategy::GaussReject => self.sample_gauss(rng),
            BallStrategy::HitAndRun => self.sample_chain(rng),
        }
    }

    fn sample_box<R: Rng>(&mut self, rng: &mut R) -> Result<FMatrix, SamplerError> {
        for _ in 0..REJECTION_CAP {
            let w = random_field_matrix(self.q, self.field, rng, |r| r.random_range(-1.0..1.0));
            let Some(log_delta) = ball_log_delta(self.field, w.embedded()) else {
                continue; // outside the ball
            };
            if self.gamma == 0.0 || rng.random::<f64>().ln() < self.gamma * log_delta {
                return Ok(w);
            }
        }
        Err(self.cap_error())
    }

    fn sample_gauss<R: Rng>(&mut self, rng: &mut R) -> Result<FMatrix, SamplerError> {
        let sd = (2.0 * self.gamma).recip().sqrt();
        for _ in 0..REJECTION_CAP {
            let w = random_field_matrix(self.q, self.field, rng, |r| {
                let g: f64 = r.sample(StandardNormal);
                g * sd
            });
            let Some(log_delta) = ball_log_delta(self.field, w.embedded()) else {
                continue;
            };
            let trace = w.frobenius_sq_field();
            // log of Δ^γ / exp(−γ tr), always ≤ 0
            let log_ratio = self.gamma * (log_delta + trace);
            if rng.random::<f64>().ln() < log_ratio {
                return Ok(w);
            }
        }
        Err(self.cap_error())
    }

    fn sample_chain<R: Rng>(&mut self, rng: &mut R) -> Result<FMatrix, SamplerError> {
        let n = self.q * self.field.embed();
        if self.chain.is_none() {
            let mut state = ChainState { w: DMatrix::zeros(n, n), log_delta: 0.0 };
            for _ in 0..HIT_AND_RUN_BURN_IN {
                self.chain_step(&mut state, rng);
            }
            self.chain = Some(state);
        }
        let mut state = self.chain.take().expect("chain initialized above");
        for _ in 0..HIT_AND_RUN_THIN {
            self.chain_step(&mut state, rng);
        }
        let w = FMatrix::from_embedded_unchecked(self.field, self.q, self.q, state.w.clone());
        self.chain = Some(state);
        Ok(w)
    }

    /// One Metropolis hit-and-run update: uniform point on the chord of
    /// the ball through the state, accepted with the density ratio.
    fn chain_step<R: Rng>(&self, state: &mut ChainState, rng: &mut R) {
        let dir = random_field_matrix(self.q, self.field, rng, |r| r.sample(StandardNormal));
        let dir = dir.embedded();
        let norm: f64 = dir.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return;
        }
        let dir = dir / Complex64::new(norm, 0.0);
        let s_plus = chord_end(&state.w, &dir, 1.0);
        let s_minus = -chord_end(&state.w, &dir, -1.0);
        if !(s_plus > s_minus) {
            return;
        }
        let s = rng.random_range(s_minus..s_plus);
        let candidate = &state.w + &dir * Complex64::new(s, 0.0);
        let Some(log_delta) = ball_log_delta(self.field, &candidate) else {
            return;
        };
        if self.gamma == 0.0
            || rng.random::<f64>().ln() < self.gamma * (log_delta - state.log_delta)
        {
            state.w = candidate;
            state.log_delta = log_delta;
        }
    }

    fn cap_error(&self) -> SamplerError {
        SamplerError::RejectionCapExceeded {
            cap: REJECTION_CAP,
            strategy: self.strategy,
            gamma: self.gamma,
            q: self.q,
        }
    }
}

/// One draw from the matrix-ball measure; convenience wrapper that builds
/// a fresh sampler. Batch consumers should hold an [`MpSampler`].
pub fn sample_mp<R: Rng>(params: &ModelParams, rng: &mut R) -> Result<FMatrix, SamplerError> {
    MpSampler::new(params)?.sample(rng)
}

/// Signed chord endpoint: largest t ≥ 0 with w + sign·t·dir still inside
/// the ball, found by doubling and bisection on the Cholesky predicate.
fn chord_end(w: &DMatrix<Complex64>, dir: &DMatrix<Complex64>, sign: f64) -> f64 {
    let inside = |t: f64| {
        let cand = w + dir * Complex64::new(sign * t, 0.0);
        in_open_ball(&cand)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while inside(hi) {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return hi;
        }
    }
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn in_open_ball(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    let h = DMatrix::<Complex64>::identity(n, n) - m.adjoint() * m;
    hermitian_chol_log_diag(&h).is_some()
}

/// ln Δ(I − w*w) in the field convention (Dieudonné for ℍ), or None when
/// w is outside the open ball.
fn ball_log_delta(field: ScalarField, embedded: &DMatrix<Complex64>) -> Option<f64> {
    let n = embedded.nrows();
    let h = DMatrix::<Complex64>::identity(n, n) - embedded.adjoint() * embedded;
    let log_diag = hermitian_chol_log_diag(&h)?;
    Some(2.0 * log_diag.iter().sum::<f64>() / field.embed() as f64)
}

fn random_field_matrix<R: Rng>(
    q: usize,
    field: ScalarField,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> f64,
) -> FMatrix {
    match field {
        ScalarField::Real => {
            let entries: Vec<f64> = (0..q * q).map(|_| draw(rng)).collect();
            FMatrix::from_real_entries(q, q, &entries)
        }
        ScalarField::Complex => {
            let entries: Vec<Complex64> = (0..q * q)
                .map(|_| Complex64::new(draw(rng), draw(rng)))
                .collect();
            FMatrix::from_complex_entries(q, q, &entries)
        }
        ScalarField::Quaternion => {
            let entries: Vec<Quat> = (0..q * q)
                .map(|_| Quat::new(draw(rng), draw(rng), draw(rng), draw(rng)))
                .collect();
            FMatrix::from_quat_entries(q, q, &entries)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::singular_values;
    use crate::sampling::RngStream;

    #[test]
    fn refuses_negative_exponent() {
        // d = 1, p = 2q gives gamma = −1/2
        let params = ModelParams::new(1, ScalarField::Real, 2.0).unwrap();
        match MpSampler::new(&params) {
            Err(SamplerError::UnsupportedExponent { gamma, .. }) => {
                assert!((gamma + 0.5).abs() < 1e-12)
            }
            other => panic!("expected UnsupportedExponent, got {other:?}"),
        }
    }

    #[test]
    fn strategy_selection() {
        let small = ModelParams::new(1, ScalarField::Real, 3.0).unwrap();
        assert_eq!(MpSampler::new(&small).unwrap().strategy(), BallStrategy::BoxReject);
        let large = ModelParams::new(1, ScalarField::Real, 101.0).unwrap();
        assert_eq!(MpSampler::new(&large).unwrap().strategy(), BallStrategy::GaussReject);
        let rank3 = ModelParams::new(3, ScalarField::Real, 8.0).unwrap();
        assert_eq!(MpSampler::new(&rank3).unwrap().strategy(), BallStrategy::HitAndRun);
    }

    #[test]
    fn samples_stay_in_ball_all_strategies() {
        let mut rng = RngStream::root(3).rng();
        let configs = [
            ModelParams::new(2, ScalarField::Real, 6.0).unwrap(),
            ModelParams::new(2, ScalarField::Real, 64.0).unwrap(),
            ModelParams::new(2, ScalarField::Complex, 5.0).unwrap(),
            ModelParams::new(1, ScalarField::Quaternion, 2.5).unwrap(),
            ModelParams::new(3, ScalarField::Real, 7.0).unwrap(),
        ];
        for params in configs {
            let mut sampler = MpSampler::new(&params).unwrap();
            for _ in 0..64 {
                let w = sampler.sample(&mut rng).unwrap();
                let s1 = singular_values(&w).unwrap()[0];
                assert!(s1 <= 1.0 + 1e-10, "sigma1 = {s1} for {params:?}");
            }
        }
    }

    #[test]
    fn rank_one_real_p3_looks_uniform() {
        // gamma = 0: exactly uniform on [−1, 1]
        let params = ModelParams::new(1, ScalarField::Real, 3.0).unwrap();
        let mut sampler = MpSampler::new(&params).unwrap();
        let mut rng = RngStream::root(17).rng();
        let n = 50_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| sampler.sample(&mut rng).unwrap().quat_entry(0, 0).w)
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let cdf = (x + 1.0) / 2.0;
            d = d.max(((i + 1) as f64 / n as f64 - cdf).abs());
            d = d.max((i as f64 / n as f64 - cdf).abs());
        }
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn gauss_and_box_routes_agree_in_distribution() {
        // p = 7 at q = 1, d = 1 (gamma = 2) picks the Gaussian route; force
        // the box route on the same target and compare marginals.
        let params = ModelParams::new(1, ScalarField::Real, 7.0).unwrap();
        let mut gauss = MpSampler::new(&params).unwrap();
        assert_eq!(gauss.strategy(), BallStrategy::GaussReject);
        let mut boxed = MpSampler { strategy: BallStrategy::BoxReject, ..gauss.clone() };
        let mut rng = RngStream::root(9).rng();
        let n = 40_000;
        let a: Vec<f64> = (0..n)
            .map(|_| gauss.sample(&mut rng).unwrap().quat_entry(0, 0).w)
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|_| boxed.sample(&mut rng).unwrap().quat_entry(0, 0).w)
            .collect();
        let d = two_sample_ks(a, b);
        let crit = 1.95 * ((2.0 / n as f64) as f64).sqrt(); // ~p = 0.001
        assert!(d < crit, "two-sample KS {d} vs {crit}");
    }

    #[test]
    fn hit_and_run_matches_box_at_rank_two() {
        // Cross-check of the chain route against exact rejection.
        let params = ModelParams::new(2, ScalarField::Real, 6.0).unwrap();
        let exact = MpSampler::new(&params).unwrap();
        assert_eq!(exact.strategy(), BallStrategy::BoxReject);
        let mut exact = exact;
        let mut chain = MpSampler {
            strategy: BallStrategy::HitAndRun,
            chain: None,
            ..exact.clone()
        };
        let mut rng = RngStream::root(31).rng();
        let n = 8_000;
        let a: Vec<f64> = (0..n)
            .map(|_| {
                let w = exact.sample(&mut rng).unwrap();
                singular_values(&w).unwrap()[0]
            })
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|_| {
                let w = chain.sample(&mut rng).unwrap();
                singular_values(&w).unwrap()[0]
            })
            .collect();
        let d = two_sample_ks(a, b);
        // chain draws are correlated, so use a wide band
        assert!(d < 0.05, "two-sample KS between chain and exact: {d}");
    }

    #[test]
    fn weighted_singular_moment_decays_like_one_over_p() {
        // E[σ1²/Δ(I−w*w)²] ≤ C/p on a doubling grid of p. Near the small-p
        // end the weight Δ^{-2} is heavy-tailed, so the check is the fixed
        // upper bound plus monotone decay at the 1/p rate overall, not
        // flatness of p·E.
        let mut rng = RngStream::root(41).rng();
        let mut means = Vec::new();
        for p in [8.0, 16.0, 32.0, 64.0] {
            let params = ModelParams::new(2, ScalarField::Real, p).unwrap();
            let mut sampler = MpSampler::new(&params).unwrap();
            let n = 40_000;
            let mut acc = 0.0;
            for _ in 0..n {
                let w = sampler.sample(&mut rng).unwrap();
                let s1 = singular_values(&w).unwrap()[0];
                let ld = ball_log_delta(ScalarField::Real, w.embedded()).unwrap();
                acc += s1 * s1 * (-2.0 * ld).exp();
            }
            means.push(acc / n as f64);
        }
        for (i, p) in [8.0, 16.0, 32.0, 64.0].iter().enumerate() {
            assert!(means[i] * p <= 150.0, "bound C/p violated: {means:?}");
        }
        for w in means.windows(2) {
            assert!(w[1] < w[0], "moment should decrease in p: {means:?}");
        }
        assert!(
            means[0] / means[3] >= 8.0,
            "decay across the 8x p-range should be at least 8x: {means:?}"
        );
    }

    fn two_sample_ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut d: f64 = 0.0;
        let (mut i, mut j) = (0usize, 0usize);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }
}
