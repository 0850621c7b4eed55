//! Exact scalars, Gaussian rationals and Hermitian operators.
//!
//! Everything on the search path is computed in exact rational arithmetic;
//! floating point only enters once a protocol has been solved and is being
//! turned into Kraus operators.

mod complex;
mod hermitian;

pub use complex::ExactComplex;
pub use hermitian::{op_linear_combine, AlgebraError, HermitianOp, RealVector};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type ExactScalar = BigRational;

/// `n/d` as an exact scalar. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> ExactScalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"3"`, `"-1/3"` and friends. Returns `None` for malformed input or
/// a zero denominator.
pub fn parse_scalar(s: &str) -> Option<ExactScalar> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

pub fn scalar_to_f64(q: &ExactScalar) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}
