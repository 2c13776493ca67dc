use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::sampling::RngStream;

/// Deterministic chunk layout: a pure function of the draw count, never of
/// the worker count, so results are bit-identical under any scheduling.
pub(crate) fn chunk_sizes(n_mc: u64) -> Vec<u64> {
    if n_mc == 0 {
        return vec![0];
    }
    let k = (n_mc / 2048).clamp(1, 256);
    let base = n_mc / k;
    let extra = n_mc % k;
    (0..k).map(|i| base + u64::from(i < extra)).collect()
}

/// Run `body` over the chunks of an MC budget in parallel, each chunk on
/// its own child stream, and fold the per-chunk accumulators in chunk
/// order.
pub(crate) fn run_chunks<A, I, B, M>(
    n_mc: u64,
    stream: &RngStream,
    init: I,
    body: B,
    mut merge: M,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    B: Fn(&mut ChaCha8Rng, u64, &mut A) + Sync,
    M: FnMut(&mut A, A),
{
    let sizes = chunk_sizes(n_mc);
    let mut parts: Vec<A> = sizes
        .par_iter()
        .enumerate()
        .map(|(idx, &count)| {
            let mut acc = init();
            let mut rng = stream.child(idx as u64).rng();
            body(&mut rng, count, &mut acc);
            acc
        })
        .collect();
    let mut out = parts.remove(0);
    for part in parts {
        merge(&mut out, part);
    }
    out
}

/// Running mean/variance sums for a fixed-width vector of complex values.
#[derive(Debug, Clone)]
pub(crate) struct ComplexSums {
    pub n: u64,
    pub sum_re: Vec<f64>,
    pub sum_im: Vec<f64>,
    pub sq_re: Vec<f64>,
    pub sq_im: Vec<f64>,
}

impl ComplexSums {
    pub fn new(width: usize) -> Self {
        ComplexSums {
            n: 0,
            sum_re: vec![0.0; width],
            sum_im: vec![0.0; width],
            sq_re: vec![0.0; width],
            sq_im: vec![0.0; width],
        }
    }

    pub fn push(&mut self, slot: usize, re: f64, im: f64) {
        self.sum_re[slot] += re;
        self.sum_im[slot] += im;
        self.sq_re[slot] += re * re;
        self.sq_im[slot] += im * im;
    }

    pub fn bump(&mut self) {
        self.n += 1;
    }

    pub fn merge(&mut self, other: &ComplexSums) {
        self.n += other.n;
        for i in 0..self.sum_re.len() {
            self.sum_re[i] += other.sum_re[i];
            self.sum_im[i] += other.sum_im[i];
            self.sq_re[i] += other.sq_re[i];
            self.sq_im[i] += other.sq_im[i];
        }
    }

    pub fn estimate(&self, slot: usize) -> crate::special::CEstimate {
        let n = self.n.max(1) as f64;
        let mre = self.sum_re[slot] / n;
        let mim = self.sum_im[slot] / n;
        let var_re = (self.sq_re[slot] / n - mre * mre).max(0.0);
        let var_im = (self.sq_im[slot] / n - mim * mim).max(0.0);
        crate::special::CEstimate {
            re: mre,
            im: mim,
            std_error: ((var_re + var_im) / n).sqrt(),
            n_mc: self.n,
        }
    }
}

/// Running mean/variance sums for a fixed-width vector of real values.
#[derive(Debug, Clone)]
pub(crate) struct RealSums {
    pub n: u64,
    pub sum: Vec<f64>,
    pub sq: Vec<f64>,
}

impl RealSums {
    pub fn new(width: usize) -> Self {
        RealSums { n: 0, sum: vec![0.0; width], sq: vec![0.0; width] }
    }

    pub fn push(&mut self, slot: usize, v: f64) {
        self.sum[slot] += v;
        self.sq[slot] += v * v;
    }

    pub fn bump(&mut self) {
        self.n += 1;
    }

    pub fn merge(&mut self, other: &RealSums) {
        self.n += other.n;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sq[i] += other.sq[i];
        }
    }

    pub fn estimate(&self, slot: usize) -> crate::special::Estimate {
        let n = self.n.max(1) as f64;
        let mean = self.sum[slot] / n;
        let var = (self.sq[slot] / n - mean * mean).max(0.0);
        crate::special::Estimate {
            value: mean,
            std_error: (var / n).sqrt(),
            n_mc: self.n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_layout_is_exact_partition() {
        for n in [0u64, 1, 100, 2048, 5000, 1_000_000] {
            let sizes = chunk_sizes(n);
            assert_eq!(sizes.iter().sum::<u64>(), n);
            assert!(sizes.len() <= 256);
        }
    }

    #[test]
    fn run_chunks_is_deterministic_under_pools() {
        use rand::Rng;
        let stream = RngStream::root(5).child(9);
        let run = || {
            run_chunks(
                100_000,
                &stream,
                || 0.0f64,
                |rng, count, acc| {
                    for _ in 0..count {
                        *acc += rng.random::<f64>();
                    }
                },
                |a, b| *a += b,
            )
        };
        let reference = run();
        for threads in [1usize, 3] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let got = pool.install(run);
            assert_eq!(got.to_bits(), reference.to_bits());
        }
    }
}
