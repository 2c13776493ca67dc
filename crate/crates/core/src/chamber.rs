//! Weyl-chamber geometry and model bookkeeping.
//!
//! Points of walks live in the closed chamber of type B
//! (x_1 ≥ … ≥ x_q ≥ 0); the A-type chamber drops the nonnegativity
//! constraint. [`ModelParams`] bundles the rank q, the scalar field and
//! the dimension parameter p together with everything derived from them:
//! half-sums of positive roots, the three multiplicities, and the density
//! exponent of the matrix-ball measure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::ScalarField;

/// Ordering violations up to this size are rounding noise and get snapped.
pub const CHAMBER_SNAP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ChamberError {
    #[error("coordinates violate the {kind:?} chamber ordering by {violation:.3e}")]
    NotInChamber { kind: ChamberKind, violation: f64 },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChamberKind {
    TypeA,
    TypeB,
}

/// A point of the Weyl chamber, the state space of the walks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberPoint {
    kind: ChamberKind,
    coords: Vec<f64>,
}

impl ChamberPoint {
    /// Point of C_q^B. Ordering/nonnegativity violations below
    /// [`CHAMBER_SNAP`] are repaired (sorted descending, negatives clamped);
    /// anything larger is an error.
    pub fn new_b(coords: Vec<f64>) -> Result<Self, ChamberError> {
        let violation = b_violation(&coords);
        if violation > CHAMBER_SNAP {
            return Err(ChamberError::NotInChamber { kind: ChamberKind::TypeB, violation });
        }
        let mut coords = coords;
        if violation > 0.0 {
            coords.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for c in coords.iter_mut() {
                if *c < 0.0 {
                    *c = 0.0;
                }
            }
        }
        Ok(ChamberPoint { kind: ChamberKind::TypeB, coords })
    }

    /// Point of C_q^A (descending coordinates, any sign).
    pub fn new_a(coords: Vec<f64>) -> Result<Self, ChamberError> {
        let violation = a_violation(&coords);
        if violation > CHAMBER_SNAP {
            return Err(ChamberError::NotInChamber { kind: ChamberKind::TypeA, violation });
        }
        let mut coords = coords;
        if violation > 0.0 {
            coords.sort_by(|a, b| b.partial_cmp(a).unwrap());
        }
        Ok(ChamberPoint { kind: ChamberKind::TypeA, coords })
    }

    /// The hypergroup identity 0 ∈ C_q^B (also valid as an A-point).
    pub fn zero(q: usize, kind: ChamberKind) -> Self {
        ChamberPoint { kind, coords: vec![0.0; q] }
    }

    pub fn kind(&self) -> ChamberKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    /// Component-wise compression D_c(x) = c·x; stays in the chamber for c ≥ 0.
    pub fn compressed(&self, c: f64) -> ChamberPoint {
        ChamberPoint {
            kind: self.kind,
            coords: self.coords.iter().map(|&x| c * x).collect(),
        }
    }
}

fn b_violation(coords: &[f64]) -> f64 {
    let mut v: f64 = 0.0;
    for w in coords.windows(2) {
        v = v.max(w[1] - w[0]);
    }
    if let Some(&last) = coords.last() {
        v = v.max(-last);
    }
    v
}

fn a_violation(coords: &[f64]) -> f64 {
    let mut v: f64 = 0.0;
    for w in coords.windows(2) {
        v = v.max(w[1] - w[0]);
    }
    v
}

/// Full parameterization of one hypergroup: rank q, scalar field (giving
/// d = dim_ℝ F) and the real dimension parameter p ≥ 2q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    q: usize,
    field: ScalarField,
    p: f64,
}

impl ModelParams {
    pub fn new(q: usize, field: ScalarField, p: f64) -> Result<Self, ChamberError> {
        if q == 0 {
            return Err(ChamberError::InvalidParams("rank q must be at least 1".into()));
        }
        if !p.is_finite() || p < 2.0 * q as f64 {
            return Err(ChamberError::InvalidParams(format!(
                "dimension parameter p = {p} must satisfy p >= 2q = {}",
                2 * q
            )));
        }
        Ok(ModelParams { q, field, p })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.field.dim()
    }

    pub fn with_p(&self, p: f64) -> Result<Self, ChamberError> {
        ModelParams::new(self.q, self.field, p)
    }

    /// Multiplicities (k_1, k_2, k_3) = (d(p−q)/2, (d−1)/2, d/2) attached to
    /// the three root lengths.
    pub fn multiplicities(&self) -> (f64, f64, f64) {
        let d = self.d() as f64;
        (d * (self.p - self.q as f64) / 2.0, (d - 1.0) / 2.0, d / 2.0)
    }

    /// BC-type half-sum of positive roots: ρ_i = (d/2)(p + q + 2 − 2i) − 1.
    pub fn rho_bc(&self) -> Vec<f64> {
        let d = self.d() as f64;
        (1..=self.q)
            .map(|i| d / 2.0 * (self.p + (self.q + 2) as f64 - 2.0 * i as f64) - 1.0)
            .collect()
    }

    pub fn rho_norm_sq(&self) -> f64 {
        self.rho_bc().iter().map(|r| r * r).sum()
    }

    /// Exponent γ = d(p/2 + 1/2 − q) − 1 of the matrix-ball density.
    pub fn ball_exponent(&self) -> f64 {
        let d = self.d() as f64;
        d * (self.p / 2.0 + 0.5 - self.q as f64) - 1.0
    }

    /// Coefficient in front of ∂²φ(0) when the radial operator is collapsed
    /// at the origin, as displayed through the multiplicities:
    /// q + 2q·k_1 + 4q·k_2 + 2q(q−1)·k_3 = q(d(p+1) − 1).
    pub fn laplace_coeff_formal(&self) -> f64 {
        let (k1, k2, k3) = self.multiplicities();
        let q = self.q as f64;
        q + 2.0 * q * k1 + 4.0 * q * k2 + 2.0 * q * (q - 1.0) * k3
    }

    /// The same coefficient in the flat form p·q·d.
    pub fn laplace_coeff_pqd(&self) -> f64 {
        self.p * (self.q * self.d()) as f64
    }
}

/// A-type half-sum of positive roots: ρ^A_l = (d/2)(q + 1 − 2l).
pub fn rho_a(q: usize, d: usize) -> Vec<f64> {
    (1..=q)
        .map(|l| d as f64 / 2.0 * ((q + 1) as f64 - 2.0 * l as f64))
        .collect()
}

/// Orthogonal projection onto the hyperplane of zero coordinate sum.
pub fn project_a(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|&v| v - mean).collect()
}

/// The transform T(x) = (ln cosh x_1, …, ln cosh x_q), mapping C_q^B into
/// itself; each coordinate is within ln 2 of the input.
pub fn log_cosh_map(x: &ChamberPoint) -> ChamberPoint {
    assert_eq!(x.kind(), ChamberKind::TypeB);
    ChamberPoint {
        kind: ChamberKind::TypeB,
        coords: x.coords().iter().map(|&v| ln_cosh(v)).collect(),
    }
}

/// Numerically stable ln cosh: for large |x| use |x| + ln((1 + e^{−2|x|})/2).
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    if a > 20.0 {
        a + ((1.0 + (-2.0 * a).exp()) / 2.0).ln()
    } else {
        a + (1.0 + (-2.0 * a).exp()).ln() - std::f64::consts::LN_2
    }
}

/// Component-wise inverse of [`log_cosh_map`]: y ↦ arcosh(e^y).
pub fn inverse_log_cosh(y: &ChamberPoint) -> ChamberPoint {
    assert_eq!(y.kind(), ChamberKind::TypeB);
    ChamberPoint {
        kind: ChamberKind::TypeB,
        coords: y.coords().iter().map(|&v| arcosh_exp(v)).collect(),
    }
}

/// arcosh(e^y) for y ≥ 0, evaluated as y + ln(1 + sqrt(1 − e^{−2y})).
pub fn arcosh_exp(y: f64) -> f64 {
    debug_assert!(y >= -1e-12);
    let y = y.max(0.0);
    y + (1.0 + (1.0 - (-2.0 * y).exp()).max(0.0).sqrt()).ln()
}
