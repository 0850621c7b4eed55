//! Separable product measurements and their ingest checks.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::proportional;
use crate::exact::{ExactScalar, HermitianOp};
use crate::lp::{max_min_positive, LpProblem};

type Q = ExactScalar;

/// The party owning a node or operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasurementError {
    #[error("a measurement needs at least one outcome")]
    Empty,
    #[error("outcome {outcome}, side {side}: expected dimension {expected}, found {found}")]
    DimensionMismatch { outcome: usize, side: Side, expected: usize, found: usize },
    #[error("outcome {outcome}, side {side}: operator is not positive semidefinite")]
    NotPsd { outcome: usize, side: Side },
    #[error("outcome {outcome}, side {side}: operator is zero")]
    ZeroOperator { outcome: usize, side: Side },
    #[error("outcomes {first} and {second} are equal up to positive scaling")]
    DuplicateOutcome { first: usize, second: usize },
    #[error("no strictly positive weights make the outcomes sum to the identity")]
    NotASeparableMeasurement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub a: HermitianOp,
    pub b: HermitianOp,
}

/// Product pairs `(Â_j, B̂_j)`, indexed from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparableMeasurement {
    d_a: usize,
    d_b: usize,
    outcomes: Vec<Outcome>,
}

impl SeparableMeasurement {
    /// Checks dimensions, positivity, nonzero-ness and pairwise distinctness.
    /// Completeness is checked separately by [`validate_measurement`].
    pub fn new(d_a: usize, d_b: usize, outcomes: Vec<Outcome>) -> Result<Self, MeasurementError> {
        if outcomes.is_empty() {
            return Err(MeasurementError::Empty);
        }
        for (idx, o) in outcomes.iter().enumerate() {
            let outcome = idx + 1;
            for (side, op, d) in [(Side::A, &o.a, d_a), (Side::B, &o.b, d_b)] {
                if op.dim() != d {
                    return Err(MeasurementError::DimensionMismatch { outcome, side, expected: d, found: op.dim() });
                }
                if op.is_zero() {
                    return Err(MeasurementError::ZeroOperator { outcome, side });
                }
                if !op.is_psd() {
                    return Err(MeasurementError::NotPsd { outcome, side });
                }
            }
        }
        for i in 0..outcomes.len() {
            for j in (i + 1)..outcomes.len() {
                let same_a = proportional(&outcomes[i].a, &outcomes[j].a).expect("checked").is_some();
                let same_b = proportional(&outcomes[i].b, &outcomes[j].b).expect("checked").is_some();
                if same_a && same_b {
                    return Err(MeasurementError::DuplicateOutcome { first: i + 1, second: j + 1 });
                }
            }
        }
        Ok(SeparableMeasurement { d_a, d_b, outcomes })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn dim(&self, side: Side) -> usize {
        match side {
            Side::A => self.d_a,
            Side::B => self.d_b,
        }
    }

    /// Number of outcomes `N₀`.
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// `Â_j` or `B̂_j` for 1-based `j`.
    pub fn op(&self, side: Side, j: usize) -> &HermitianOp {
        let o = &self.outcomes[j - 1];
        match side {
            Side::A => &o.a,
            Side::B => &o.b,
        }
    }

    /// `Σ w_j Â_j ⊗ B̂_j` for 1-based `(j, w_j)` pairs.
    pub fn weighted_sum(&self, weights: &[(usize, Q)]) -> HermitianOp {
        let mut acc = HermitianOp::zero(self.d_a * self.d_b);
        for (j, w) in weights {
            let o = &self.outcomes[j - 1];
            acc = acc.add(&o.a.kron(&o.b).scale(w)).expect("same dimension");
        }
        acc
    }

    /// Same measurement with outcomes reordered: new outcome `i` is old `perm[i]` (0-based).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let outcomes = perm.iter().map(|&i| self.outcomes[i].clone()).collect();
        SeparableMeasurement { d_a: self.d_a, d_b: self.d_b, outcomes }
    }

    /// Same measurement with `Â_j ↦ λ_j Â_j`, `B̂_j ↦ μ_j B̂_j`.
    pub fn rescaled(&self, factors: &[(Q, Q)]) -> Self {
        let outcomes =
            self.outcomes.iter().zip(factors).map(|(o, (l, m))| Outcome { a: o.a.scale(l), b: o.b.scale(m) }).collect();
        SeparableMeasurement { d_a: self.d_a, d_b: self.d_b, outcomes }
    }
}

/// Strictly positive weights `r̂_j` with `Σ r̂_j Â_j ⊗ B̂_j = I`.
///
/// Among all solutions the one maximizing `min_j r̂_j` (capped at 1) is
/// returned, so the answer is deterministic.
pub fn validate_measurement(m: &SeparableMeasurement) -> Result<Vec<Q>, MeasurementError> {
    let n = m.len();
    let products: Vec<_> = m.outcomes.iter().map(|o| o.a.kron(&o.b).vectorize()).collect();
    let target = HermitianOp::identity(m.d_a * m.d_b).vectorize();
    let mut lp = LpProblem::new(n);
    for coord in 0..target.len() {
        let row: Vec<Q> = products.iter().map(|v| v.0[coord].clone()).collect();
        let rhs = target.0[coord].clone();
        if row.iter().all(Zero::is_zero) {
            if !rhs.is_zero() {
                return Err(MeasurementError::NotASeparableMeasurement);
            }
            continue;
        }
        lp.push_row(row, rhs);
    }
    let r = max_min_positive(&lp)
        .strictly_positive()
        .map(<[Q]>::to_vec)
        .ok_or(MeasurementError::NotASeparableMeasurement)?;
    debug_assert!({
        let w: Vec<_> = r.iter().cloned().enumerate().map(|(i, q)| (i + 1, q)).collect();
        m.weighted_sum(&w) == HermitianOp::identity(m.d_a * m.d_b)
    });
    Ok(r)
}

/// `I_A ⊗ I_B` as a single outcome; the smallest valid measurement.
pub fn trivial_measurement(d_a: usize, d_b: usize) -> SeparableMeasurement {
    SeparableMeasurement::new(d_a, d_b, vec![Outcome { a: HermitianOp::identity(d_a), b: HermitianOp::identity(d_b) }])
        .expect("identity is a valid outcome")
}
