use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SamplerError;
use crate::chamber::{ChamberKind, ChamberPoint, ModelParams};

/// Named one-dimensional base law of a product pushforward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum BaseLaw {
    /// |N(0, sigma²)|
    HalfNormal { sigma: f64 },
    /// Uniform on [lo, hi] with 0 ≤ lo < hi
    UniformInterval { lo: f64, hi: f64 },
    /// Exponential with the given rate
    Exponential { rate: f64 },
    /// |Cauchy| scaled; has no finite moments of any positive order
    HalfCauchy { scale: f64 },
}

impl BaseLaw {
    fn validate(&self) -> Result<(), SamplerError> {
        let ok = match *self {
            BaseLaw::HalfNormal { sigma } => sigma > 0.0 && sigma.is_finite(),
            BaseLaw::UniformInterval { lo, hi } => lo >= 0.0 && hi > lo && hi.is_finite(),
            BaseLaw::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            BaseLaw::HalfCauchy { scale } => scale > 0.0 && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SamplerError::InvalidSpec(format!("bad base law {self:?}")))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            BaseLaw::HalfNormal { sigma } => {
                let g: f64 = rng.sample(StandardNormal);
                (g * sigma).abs()
            }
            BaseLaw::UniformInterval { lo, hi } => rng.random_range(lo..hi),
            BaseLaw::Exponential { rate } => -rng.random::<f64>().ln() / rate,
            BaseLaw::HalfCauchy { scale } => {
                let u: f64 = rng.random_range(-0.5..0.5);
                (scale * (std::f64::consts::PI * u).tan()).abs()
            }
        }
    }

    /// E[x²] when finite.
    fn second_moment(&self) -> Option<f64> {
        match *self {
            BaseLaw::HalfNormal { sigma } => Some(sigma * sigma),
            BaseLaw::UniformInterval { lo, hi } => {
                Some((hi * hi * hi - lo * lo * lo) / (3.0 * (hi - lo)))
            }
            BaseLaw::Exponential { rate } => Some(2.0 / (rate * rate)),
            BaseLaw::HalfCauchy { .. } => None,
        }
    }

    fn has_moments(&self, _order: usize) -> bool {
        !matches!(self, BaseLaw::HalfCauchy { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureVariant {
    /// Finite mixture of point masses in C_q^B.
    DiracMixture { atoms: Vec<ChamberPoint>, weights: Vec<f64> },
    /// Product of one-dimensional laws, sorted descending into the chamber.
    Pushforward { laws: Vec<BaseLaw> },
}

/// A step measure ν on C_q^B together with the compression factor c of
/// D_c(x) = c·x; the walk increments are drawn from ν_c = D_c(ν).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub variant: MeasureVariant,
    pub compression: f64,
}

impl MeasureSpec {
    pub fn dirac_mixture(
        atoms: Vec<ChamberPoint>,
        weights: Vec<f64>,
        compression: f64,
    ) -> Result<Self, SamplerError> {
        let spec = MeasureSpec {
            variant: MeasureVariant::DiracMixture { atoms, weights },
            compression,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn single_atom(atom: ChamberPoint) -> Result<Self, SamplerError> {
        MeasureSpec::dirac_mixture(vec![atom], vec![1.0], 1.0)
    }

    pub fn pushforward(laws: Vec<BaseLaw>, compression: f64) -> Result<Self, SamplerError> {
        let spec = MeasureSpec { variant: MeasureVariant::Pushforward { laws }, compression };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if !(self.compression > 0.0 && self.compression <= 1.0) {
            return Err(SamplerError::InvalidSpec(format!(
                "compression must lie in (0, 1], got {}",
                self.compression
            )));
        }
        match &self.variant {
            MeasureVariant::DiracMixture { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() {
                    return Err(SamplerError::InvalidSpec(
                        "atom and weight counts must match and be nonempty".into(),
                    ));
                }
                let q = atoms[0].rank();
                for a in atoms {
                    if a.kind() != ChamberKind::TypeB {
                        return Err(SamplerError::InvalidSpec(
                            "atoms must be type-B chamber points".into(),
                        ));
                    }
                    if a.rank() != q {
                        return Err(SamplerError::InvalidSpec("atoms have mixed ranks".into()));
                    }
                }
                if weights.iter().any(|&w| w < 0.0) {
                    return Err(SamplerError::InvalidSpec("negative weight".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(SamplerError::InvalidSpec(format!(
                        "weights sum to {total}, expected 1"
                    )));
                }
            }
            MeasureVariant::Pushforward { laws } => {
                if laws.is_empty() {
                    return Err(SamplerError::InvalidSpec("empty pushforward".into()));
                }
                for law in laws {
                    law.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        match &self.variant {
            MeasureVariant::DiracMixture { atoms, .. } => atoms[0].rank(),
            MeasureVariant::Pushforward { laws } => laws.len(),
        }
    }

    /// True when the measure is the point mass at the identity (which the
    /// limit theorems exclude).
    pub fn is_delta_zero(&self) -> bool {
        match &self.variant {
            MeasureVariant::DiracMixture { atoms, .. } => atoms.iter().all(|a| a.is_zero()),
            MeasureVariant::Pushforward { .. } => false,
        }
    }

    pub fn has_moments(&self, order: usize) -> bool {
        match &self.variant {
            MeasureVariant::DiracMixture { .. } => true,
            MeasureVariant::Pushforward { laws } => laws.iter().all(|l| l.has_moments(order)),
        }
    }

    /// Copy with the compression replaced (used by inner normalizations).
    pub fn with_compression(&self, c: f64) -> Result<Self, SamplerError> {
        let spec = MeasureSpec { variant: self.variant.clone(), compression: c };
        spec.validate()?;
        Ok(spec)
    }

    /// ∫ ‖x‖² dν (before compression), when finite. For atom mixtures this
    /// is an exact finite sum.
    pub fn second_moment_norm(&self) -> Option<f64> {
        match &self.variant {
            MeasureVariant::DiracMixture { atoms, weights } => Some(
                atoms
                    .iter()
                    .zip(weights)
                    .map(|(a, &w)| w * a.norm_sq())
                    .sum(),
            ),
            MeasureVariant::Pushforward { laws } => {
                // sorting permutes coordinates, so the squared norm is the
                // sum of the per-coordinate second moments
                let mut total = 0.0;
                for law in laws {
                    total += law.second_moment()?;
                }
                Some(total)
            }
        }
    }

    /// One draw from ν_c = D_c(ν).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> ChamberPoint {
        let point = match &self.variant {
            MeasureVariant::DiracMixture { atoms, weights } => {
                let mut u: f64 = rng.random();
                let mut idx = atoms.len() - 1;
                for (i, &w) in weights.iter().enumerate() {
                    if u < w {
                        idx = i;
                        break;
                    }
                    u -= w;
                }
                atoms[idx].clone()
            }
            MeasureVariant::Pushforward { laws } => {
                let mut coords: Vec<f64> = laws.iter().map(|l| l.sample(rng)).collect();
                coords.sort_by(|a, b| b.partial_cmp(a).unwrap());
                ChamberPoint::new_b(coords).expect("sorted nonnegative draw is in the chamber")
            }
        };
        point.compressed(self.compression)
    }
}

/// A weighted sample cloud in ℝ^q with provenance: the output of every
/// simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub points: Vec<Vec<f64>>,
    pub q: usize,
    pub seed: u64,
    pub stream_count: u64,
    pub model: ModelParams,
    pub walk_length: usize,
}

impl EmpiricalMeasure {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `x1,...,xq`, one row per replica, full-precision
    /// (shortest round-trip) decimal floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.q).map(|i| format!("x{i}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.points {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.q];
        for row in &self.points {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let n = self.points.len().max(1) as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Per-coordinate standard deviation.
    pub fn spread(&self) -> Vec<f64> {
        let mean = self.mean();
        let mut s = vec![0.0; self.q];
        for row in &self.points {
            for ((acc, v), m) in s.iter_mut().zip(row).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let n = (self.points.len().max(2) - 1) as f64;
        s.iter_mut().for_each(|v| *v = (*v / n).sqrt());
        s
    }
}
