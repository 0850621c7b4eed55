use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ExactComplex, ExactScalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("matrix is not Hermitian at entry ({row}, {col})")]
    NotHermitian { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coefficient #{index} is negative")]
    NegativeCoefficient { index: usize },
    #[error("expected {expected} entries, found {found}")]
    WrongEntryCount { expected: usize, found: usize },
    #[error("operators must have dimension at least 1")]
    ZeroDimension,
}

/// Real coordinates of a Hermitian operator.
///
/// For a `d×d` operator the layout is: the `d` diagonal entries, then for
/// every pair `i < j` in row-major order the pair `(Re X[i][j], Im X[i][j])`.
/// The layout is part of the crate's contract: constraint matrices built
/// from it are reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealVector(pub Vec<ExactScalar>);

impl RealVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[ExactScalar] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

/// A `d×d` Hermitian matrix with Gaussian-rational entries.
///
/// Hermiticity is checked at construction and preserved by every operation
/// exposed here, so downstream code never re-validates it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HermitianOp {
    dim: usize,
    entries: Vec<ExactComplex>,
}

impl HermitianOp {
    /// Builds an operator from row-major entries, rejecting non-Hermitian input.
    pub fn new(dim: usize, entries: Vec<ExactComplex>) -> Result<Self, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(AlgebraError::WrongEntryCount { expected: dim * dim, found: entries.len() });
        }
        for i in 0..dim {
            for j in i..dim {
                if entries[i * dim + j] != entries[j * dim + i].conj() {
                    return Err(AlgebraError::NotHermitian { row: i, col: j });
                }
            }
        }
        Ok(HermitianOp { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<ExactComplex>>) -> Result<Self, AlgebraError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(AlgebraError::WrongEntryCount { expected: dim, found: row.len() });
            }
            entries.extend(row);
        }
        HermitianOp::new(dim, entries)
    }

    /// Real symmetric operator from row-major rational entries.
    pub fn from_real(dim: usize, entries: Vec<ExactScalar>) -> Result<Self, AlgebraError> {
        HermitianOp::new(dim, entries.into_iter().map(ExactComplex::real).collect())
    }

    pub fn zero(dim: usize) -> Self {
        HermitianOp { dim, entries: vec![ExactComplex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = HermitianOp::zero(dim);
        for i in 0..dim {
            op.entries[i * dim + i] = ExactComplex::one();
        }
        op
    }

    pub fn diagonal(diag: &[ExactScalar]) -> Self {
        let dim = diag.len();
        let mut op = HermitianOp::zero(dim);
        for (i, d) in diag.iter().enumerate() {
            op.entries[i * dim + i] = ExactComplex::real(d.clone());
        }
        op
    }

    /// `[i]`, the projector onto the `i`-th standard basis vector.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut op = HermitianOp::zero(dim);
        op.entries[i * dim + i] = ExactComplex::one();
        op
    }

    /// Normalized projector `|v⟩⟨v| / ⟨v|v⟩`. Panics on the zero vector.
    pub fn projector(v: &[ExactComplex]) -> Self {
        let dim = v.len();
        let norm: ExactScalar = v.iter().map(ExactComplex::norm_sqr).sum();
        assert!(!norm.is_zero(), "projector onto the zero vector");
        let mut entries = Vec::with_capacity(dim * dim);
        for a in v {
            for b in v {
                entries.push((a * &b.conj()).scale(&(ExactScalar::one() / &norm)));
            }
        }
        HermitianOp { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> &ExactComplex {
        &self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[ExactComplex] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<ExactComplex>> {
        self.entries.chunks(self.dim).map(<[ExactComplex]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn trace(&self) -> ExactScalar {
        (0..self.dim).map(|i| self.entry(i, i).re.clone()).sum()
    }

    pub fn scale(&self, s: &ExactScalar) -> Self {
        HermitianOp { dim: self.dim, entries: self.entries.iter().map(|e| e.scale(s)).collect() }
    }

    fn check_dim(&self, other: &HermitianOp) -> Result<(), AlgebraError> {
        if self.dim != other.dim {
            return Err(AlgebraError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &HermitianOp) -> Result<Self, AlgebraError> {
        self.check_dim(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(HermitianOp { dim: self.dim, entries })
    }

    pub fn sub(&self, other: &HermitianOp) -> Result<Self, AlgebraError> {
        self.check_dim(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(HermitianOp { dim: self.dim, entries })
    }

    /// Kronecker product `self ⊗ other`; dimensions multiply.
    pub fn kron(&self, other: &HermitianOp) -> HermitianOp {
        let (m, n) = (self.dim, other.dim);
        let dim = m * n;
        let mut entries = vec![ExactComplex::zero(); dim * dim];
        for i in 0..m {
            for j in 0..m {
                let a = self.entry(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        entries[(i * n + k) * dim + (j * n + l)] = a * other.entry(k, l);
                    }
                }
            }
        }
        HermitianOp { dim, entries }
    }

    /// Coordinates in the fixed real basis documented on [`RealVector`].
    pub fn vectorize(&self) -> RealVector {
        let d = self.dim;
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            debug_assert!(self.entry(i, i).is_real());
            out.push(self.entry(i, i).re.clone());
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let e = self.entry(i, j);
                out.push(e.re.clone());
                out.push(e.im.clone());
            }
        }
        RealVector(out)
    }

    /// Coefficients `c_1..c_d` of the characteristic polynomial
    /// `x^d + c_1 x^{d-1} + … + c_d`, by Faddeev–LeVerrier.
    pub fn char_poly(&self) -> Vec<ExactScalar> {
        let d = self.dim;
        let mut coeffs = Vec::with_capacity(d);
        // M_0 = 0, c_0 = 1; M_k = A·M_{k-1} + c_{k-1}·I; c_k = -tr(A·M_k)/k
        let mut m = vec![ExactComplex::zero(); d * d];
        let mut prev = ExactScalar::one();
        for k in 1..=d {
            let mut next = matmul(&self.entries, &m, d);
            for i in 0..d {
                next[i * d + i] = &next[i * d + i] + &ExactComplex::real(prev.clone());
            }
            let am = matmul(&self.entries, &next, d);
            let tr: ExactComplex = (0..d).fold(ExactComplex::zero(), |acc, i| &acc + &am[i * d + i]);
            debug_assert!(tr.is_real());
            let c = -tr.re / ExactScalar::from_integer((k as i64).into());
            coeffs.push(c.clone());
            prev = c;
            m = next;
        }
        coeffs
    }

    /// Exact positive-semidefiniteness test.
    ///
    /// A Hermitian matrix has real eigenvalues, so all of them are `≥ 0`
    /// exactly when the characteristic polynomial coefficients alternate in
    /// sign: `(-1)^k c_k ≥ 0` for every `k`.
    pub fn is_psd(&self) -> bool {
        self.char_poly().iter().enumerate().all(|(idx, c)| {
            let k = idx + 1;
            if k % 2 == 0 {
                !c.is_negative()
            } else {
                !c.is_positive()
            }
        })
    }

    /// Rank from the characteristic polynomial: the multiplicity of the zero
    /// eigenvalue is the number of trailing zero coefficients.
    pub fn rank(&self) -> usize {
        let coeffs = self.char_poly();
        let trailing = coeffs.iter().rev().take_while(|c| c.is_zero()).count();
        self.dim - trailing
    }
}

fn matmul(a: &[ExactComplex], b: &[ExactComplex], d: usize) -> Vec<ExactComplex> {
    let mut out = vec![ExactComplex::zero(); d * d];
    for i in 0..d {
        for k in 0..d {
            let x = &a[i * d + k];
            if x.is_zero() {
                continue;
            }
            for j in 0..d {
                let y = &b[k * d + j];
                if !y.is_zero() {
                    out[i * d + j] = &out[i * d + j] + &(x * y);
                }
            }
        }
    }
    out
}

/// Nonnegative combination `Σ c_i·X_i`. An empty list yields the zero
/// operator of dimension `dim`.
pub fn op_linear_combine(dim: usize, terms: &[(ExactScalar, &HermitianOp)]) -> Result<HermitianOp, AlgebraError> {
    let mut acc = HermitianOp::zero(dim);
    for (index, (c, op)) in terms.iter().enumerate() {
        if op.dim != dim {
            return Err(AlgebraError::DimensionMismatch { expected: dim, found: op.dim });
        }
        if c.is_negative() {
            return Err(AlgebraError::NegativeCoefficient { index });
        }
        if c.is_zero() {
            continue;
        }
        for (a, b) in acc.entries.iter_mut().zip(&op.entries) {
            *a = &*a + &b.scale(c);
        }
    }
    Ok(acc)
}

impl fmt::Debug for HermitianOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for HermitianOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.dim).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{e}")?;
            }
        }
        write!(f, "]")
    }
}

impl Serialize for HermitianOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<ExactComplex>>::deserialize(d)?;
        HermitianOp::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use nalgebra::{DMatrix, SymmetricEigen};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn plus_projector() -> HermitianOp {
        HermitianOp::projector(&[ExactComplex::one(), ExactComplex::one()])
    }

    #[test]
    fn vectorize_identity_and_zero() {
        assert_eq!(HermitianOp::identity(2).vectorize().0, vec![int(1), int(1), int(0), int(0)]);
        let z = HermitianOp::zero(3).vectorize();
        assert_eq!(z.len(), 9);
        assert!(z.is_zero());
    }

    #[test]
    fn vectorize_plus_projector() {
        // (|0⟩+|1⟩)(⟨0|+⟨1|)/2 has every entry 1/2
        let p = plus_projector();
        for e in p.entries() {
            assert_eq!(*e, ExactComplex::real(rat(1, 2)));
        }
        assert_eq!(p.vectorize().0, vec![rat(1, 2), rat(1, 2), rat(1, 2), int(0)]);
    }

    #[test]
    fn vectorize_orders_upper_triangle_row_major() {
        let x = HermitianOp::from_rows(vec![
            vec![ExactComplex::from_ints(1, 0), ExactComplex::from_ints(2, 3), ExactComplex::from_ints(4, 5)],
            vec![ExactComplex::from_ints(2, -3), ExactComplex::from_ints(6, 0), ExactComplex::from_ints(7, -8)],
            vec![ExactComplex::from_ints(4, -5), ExactComplex::from_ints(7, 8), ExactComplex::from_ints(9, 0)],
        ])
        .unwrap();
        let v: Vec<i64> = x.vectorize().0.iter().map(|q| q.to_integer().try_into().unwrap()).collect();
        assert_eq!(v, vec![1, 6, 9, 2, 3, 4, 5, 7, -8]);
    }

    #[test]
    fn non_hermitian_rejected() {
        let err = HermitianOp::new(
            2,
            vec![
                ExactComplex::from_ints(1, 0),
                ExactComplex::from_ints(1, 1),
                ExactComplex::from_ints(1, 1),
                ExactComplex::from_ints(0, 0),
            ],
        )
        .unwrap_err();
        assert_eq!(err, AlgebraError::NotHermitian { row: 0, col: 1 });
        let err = HermitianOp::from_real(2, vec![int(1), int(2), int(3), int(4)]).unwrap_err();
        assert_eq!(err, AlgebraError::NotHermitian { row: 0, col: 1 });
    }

    #[test]
    fn psd_examples() {
        assert!(HermitianOp::identity(3).is_psd());
        assert!(!HermitianOp::diagonal(&[int(1), rat(-1, 4)]).is_psd());
        let p = plus_projector();
        // eigenvalues {1, 0}: x² - x
        assert_eq!(p.char_poly(), vec![int(-1), int(0)]);
        assert!(p.is_psd());
        assert_eq!(p.rank(), 1);
        assert!(HermitianOp::zero(2).is_psd());
        assert!(!HermitianOp::from_real(2, vec![int(0), int(1), int(1), int(0)]).unwrap().is_psd());
    }

    #[test]
    fn linear_combine_examples() {
        let p0 = HermitianOp::basis_projector(2, 0);
        let p1 = HermitianOp::basis_projector(2, 1);
        assert_eq!(op_linear_combine(2, &[(int(1), &p0), (int(1), &p1)]).unwrap(), HermitianOp::identity(2));
        assert_eq!(op_linear_combine(3, &[]).unwrap(), HermitianOp::zero(3));
        assert!(matches!(
            op_linear_combine(2, &[(int(1), &HermitianOp::identity(3))]),
            Err(AlgebraError::DimensionMismatch { .. })
        ));
        assert!(matches!(op_linear_combine(2, &[(int(-1), &p0)]), Err(AlgebraError::NegativeCoefficient { index: 0 })));
    }

    #[test]
    fn combine_plus_minus_gives_diagonal_pair() {
        // [1+2] + [1-2] = [1] + [2] on a qutrit
        let e = |v: [i64; 3]| v.map(|x| ExactComplex::from_ints(x, 0));
        let a6 = HermitianOp::projector(&e([0, 1, 1]));
        let a7 = HermitianOp::projector(&e([0, 1, -1]));
        let sum = op_linear_combine(3, &[(int(1), &a6), (int(1), &a7)]).unwrap();
        let expect = HermitianOp::basis_projector(3, 1).add(&HermitianOp::basis_projector(3, 2)).unwrap();
        assert_eq!(sum, expect);
        assert!(sum.is_psd());
    }

    #[test]
    fn kron_of_identities() {
        assert_eq!(HermitianOp::identity(2).kron(&HermitianOp::identity(3)), HermitianOp::identity(6));
    }

    fn random_hermitian(rng: &mut impl Rng, d: usize) -> HermitianOp {
        let mut rows = vec![vec![ExactComplex::zero(); d]; d];
        for i in 0..d {
            rows[i][i] = ExactComplex::real(rat(rng.gen_range(-20..=20), rng.gen_range(1..=7)));
            for j in (i + 1)..d {
                let z = ExactComplex::new(
                    rat(rng.gen_range(-20..=20), rng.gen_range(1..=7)),
                    rat(rng.gen_range(-20..=20), rng.gen_range(1..=7)),
                );
                rows[j][i] = z.conj();
                rows[i][j] = z;
            }
        }
        HermitianOp::from_rows(rows).unwrap()
    }

    fn float_min_eigen(op: &HermitianOp) -> f64 {
        let d = op.dim();
        let m = DMatrix::from_fn(d, d, |i, j| {
            let (re, im) = op.entry(i, j).to_f64_pair();
            Complex64::new(re, im)
        });
        SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn psd_agrees_with_float_eigensolver() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        let (mut pos, mut neg) = (0, 0);
        while checked < 1000 {
            let d = if checked % 2 == 0 { 2 } else { 3 };
            let mut op = random_hermitian(&mut rng, d);
            // shift half of the samples towards PSD so both verdicts occur
            if rng.gen_bool(0.5) {
                op = op.add(&HermitianOp::identity(d).scale(&int(rng.gen_range(0..60)))).unwrap();
            }
            let lmin = float_min_eigen(&op);
            if lmin.abs() < 1e-6 {
                continue;
            }
            checked += 1;
            assert_eq!(op.is_psd(), lmin > -1e-9, "disagreement on {op}");
            if lmin > 0.0 {
                pos += 1
            } else {
                neg += 1
            }
        }
        assert!(pos > 100 && neg > 100);
    }

    fn small_hermitian(d: usize) -> impl Strategy<Value = HermitianOp> {
        prop::collection::vec((-9i64..=9, 1i64..=5, -9i64..=9, 1i64..=5), d * d).prop_map(move |raw| {
            let mut rows = vec![vec![ExactComplex::zero(); d]; d];
            for i in 0..d {
                for j in i..d {
                    let (a, b, c, e) = raw[i * d + j];
                    if i == j {
                        rows[i][i] = ExactComplex::real(rat(a, b));
                    } else {
                        let z = ExactComplex::new(rat(a, b), rat(c, e));
                        rows[j][i] = z.conj();
                        rows[i][j] = z;
                    }
                }
            }
            HermitianOp::from_rows(rows).unwrap()
        })
    }

    proptest! {
        #[test]
        fn vectorize_is_linear_and_injective(
            x in small_hermitian(3),
            y in small_hermitian(3),
            (n, den) in (-9i64..=9, 1i64..=9),
        ) {
            let alpha = rat(n, den);
            let lhs = x.add(&y.scale(&alpha)).unwrap().vectorize();
            let vx = x.vectorize();
            let vy = y.vectorize();
            let rhs: Vec<ExactScalar> = vx.0.iter().zip(&vy.0).map(|(a, b)| a + b * &alpha).collect();
            prop_assert_eq!(lhs.0, rhs);
            prop_assert_eq!(vx == vy, x == y);
            prop_assert_eq!(vx.is_zero(), x.is_zero());
        }
    }
}
