//! Convex cones of PSD operators and their mutual intersections.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::{op_linear_combine, ExactScalar, HermitianOp};
use crate::lp::{lp_feasible, max_min_positive, LpProblem};

type Q = ExactScalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("a cone needs at least one generator")]
    Empty,
    #[error("generator #{0} is the zero operator")]
    ZeroGenerator(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("an intersection query needs at least two cones")]
    TooFewCones,
}

/// The cone `{Σ c_i G_i : c_i ≥ 0}` over nonzero PSD generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    generators: Vec<HermitianOp>,
}

impl Cone {
    pub fn new(generators: Vec<HermitianOp>) -> Result<Self, ConeError> {
        let first = generators.first().ok_or(ConeError::Empty)?;
        let dim = first.dim();
        for (i, g) in generators.iter().enumerate() {
            if g.dim() != dim {
                return Err(ConeError::DimensionMismatch { expected: dim, found: g.dim() });
            }
            if g.is_zero() {
                return Err(ConeError::ZeroGenerator(i));
            }
        }
        Ok(Cone { generators })
    }

    pub fn generators(&self) -> &[HermitianOp] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }
}

/// Coefficients for every cone in a query together with the common point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionWitness {
    pub coefficients: Vec<Vec<Q>>,
    pub common_point: HermitianOp,
}

impl IntersectionWitness {
    /// Exact re-check against the cones the witness was produced for.
    pub fn is_valid_for(&self, cones: &[Cone]) -> bool {
        if self.coefficients.len() != cones.len() || self.common_point.is_zero() {
            return false;
        }
        if self.common_point.trace() != Q::one() {
            return false;
        }
        cones.iter().zip(&self.coefficients).all(|(cone, coeffs)| {
            if coeffs.len() != cone.generators.len() || coeffs.iter().any(Signed::is_negative) {
                return false;
            }
            let terms: Vec<_> = coeffs.iter().cloned().zip(cone.generators.iter()).collect();
            op_linear_combine(cone.dim(), &terms).is_ok_and(|p| p == self.common_point)
        })
    }
}

fn intersection_lp(cones: &[Cone]) -> Result<(LpProblem, Vec<usize>), ConeError> {
    if cones.len() < 2 {
        return Err(ConeError::TooFewCones);
    }
    let dim = cones[0].dim();
    for c in cones {
        if c.dim() != dim {
            return Err(ConeError::DimensionMismatch { expected: dim, found: c.dim() });
        }
    }
    let mut offsets = Vec::with_capacity(cones.len());
    let mut n = 0;
    for c in cones {
        offsets.push(n);
        n += c.generators.len();
    }
    let vecs: Vec<Vec<_>> = cones.iter().map(|c| c.generators.iter().map(|g| g.vectorize()).collect()).collect();
    let mut lp = LpProblem::new(n);
    // combo(cone 0) - combo(cone i) = 0, coordinate by coordinate
    for i in 1..cones.len() {
        for coord in 0..dim * dim {
            let mut row = vec![Q::zero(); n];
            for (g, v) in vecs[0].iter().enumerate() {
                row[offsets[0] + g] = v.0[coord].clone();
            }
            for (g, v) in vecs[i].iter().enumerate() {
                row[offsets[i] + g] = -&v.0[coord];
            }
            if row.iter().any(|x| !x.is_zero()) {
                lp.push_row(row, Q::zero());
            }
        }
    }
    let mut norm = vec![Q::zero(); n];
    for (g, op) in cones[0].generators.iter().enumerate() {
        norm[offsets[0] + g] = op.trace();
    }
    lp.push_row(norm, Q::one());
    Ok((lp, offsets))
}

fn witness_from(cones: &[Cone], offsets: &[usize], x: &[Q]) -> IntersectionWitness {
    let coefficients: Vec<Vec<Q>> =
        cones.iter().zip(offsets).map(|(c, &o)| x[o..o + c.generators.len()].to_vec()).collect();
    let terms: Vec<_> = coefficients[0].iter().cloned().zip(cones[0].generators.iter()).collect();
    let common_point = op_linear_combine(cones[0].dim(), &terms).expect("dimensions checked");
    let w = IntersectionWitness { coefficients, common_point };
    debug_assert!(w.is_valid_for(cones));
    w
}

/// A common nonzero point of all cones, if one exists.
///
/// Nonzero-ness is enforced by normalizing the trace of the first cone's
/// combination to 1: a nonnegative combination of nonzero PSD operators has
/// positive trace unless every coefficient vanishes.
pub fn cones_intersect(cones: &[Cone]) -> Result<Option<IntersectionWitness>, ConeError> {
    let (lp, offsets) = intersection_lp(cones)?;
    Ok(match lp_feasible(&lp) {
        (true, Some(x)) => Some(witness_from(cones, &offsets, &x)),
        _ => None,
    })
}

/// Like [`cones_intersect`], but every generator coefficient must be strictly
/// positive: the common point lies in the relative interior of every cone.
pub fn cones_intersect_strict(cones: &[Cone]) -> Result<Option<IntersectionWitness>, ConeError> {
    let (lp, offsets) = intersection_lp(cones)?;
    Ok(max_min_positive(&lp).strictly_positive().map(|x| witness_from(cones, &offsets, x)))
}

/// `λ > 0` with `x = λ·y`, if it exists.
pub fn proportional(x: &HermitianOp, y: &HermitianOp) -> Result<Option<Q>, ConeError> {
    if x.dim() != y.dim() {
        return Err(ConeError::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    if x.is_zero() {
        return Err(ConeError::ZeroGenerator(0));
    }
    if y.is_zero() {
        return Err(ConeError::ZeroGenerator(1));
    }
    // the diagonal of a nonzero PSD operator is nonzero, and real
    let d = x.dim();
    let i = (0..d).find(|&i| !y.entry(i, i).is_zero()).expect("nonzero PSD has a nonzero diagonal");
    let lambda = &x.entry(i, i).re / &y.entry(i, i).re;
    if !lambda.is_positive() {
        return Ok(None);
    }
    Ok((y.scale(&lambda) == *x).then_some(lambda))
}

/// Outcome of a family enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilySearch {
    /// Maximal families, each sorted, in lexicographic order.
    pub families: Vec<Vec<usize>>,
    /// True when a neighbourhood exceeded the size cap and was searched greedily.
    pub capped: bool,
}

/// Maximal sets (size ≥ 2) of items `0..n` accepted by `valid`, restricted to
/// sets containing at least one fresh item.
///
/// `valid` must be hereditary (every subset of a valid set is valid), which
/// holds for mutual cone intersection. For each fresh item the search runs
/// over its pairwise-valid neighbourhood; a set maximal inside the closed
/// neighbourhood of one of its members is maximal globally. Neighbourhoods
/// larger than `cap` are grown greedily unless `exhaustive` is set.
pub fn maximal_families(
    n: usize,
    fresh: &[bool],
    mut valid: impl FnMut(&[usize]) -> bool,
    cap: usize,
    exhaustive: bool,
) -> FamilySearch {
    let mut memo: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut check = |set: &[usize]| -> bool {
        let mut key = set.to_vec();
        key.sort_unstable();
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let v = valid(&key);
        memo.insert(key, v);
        v
    };

    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut capped = false;
    for f in (0..n).filter(|&f| fresh[f]) {
        let nbrs: Vec<usize> = (0..n).filter(|&o| o != f && check(&[f, o])).collect();
        if nbrs.is_empty() {
            continue;
        }
        if nbrs.len() + 1 > cap && !exhaustive {
            capped = true;
            for &start in &nbrs {
                let mut set = vec![f, start];
                for &o in &nbrs {
                    if set.contains(&o) {
                        continue;
                    }
                    set.push(o);
                    if !check(&set) {
                        set.pop();
                    }
                }
                set.sort_unstable();
                found.insert(set);
            }
            continue;
        }
        // every valid set containing f inside {f} ∪ nbrs, by backtracking
        let mut valid_sets: Vec<Vec<usize>> = Vec::new();
        let mut stack: Vec<(Vec<usize>, usize)> = vec![(vec![f], 0)];
        while let Some((set, from)) = stack.pop() {
            for (idx, &o) in nbrs.iter().enumerate().skip(from) {
                let mut next = set.clone();
                next.push(o);
                // pairwise pre-filter before the full query
                if next.len() > 2 && !set[1..].iter().all(|&s| check(&[s, o])) {
                    continue;
                }
                if check(&next) {
                    valid_sets.push(next.clone());
                    stack.push((next, idx + 1));
                }
            }
        }
        let as_sets: Vec<BTreeSet<usize>> = valid_sets.iter().map(|s| s.iter().copied().collect()).collect();
        for s in &as_sets {
            let maximal = !as_sets.iter().any(|t| t.len() == s.len() + 1 && s.is_subset(t));
            if maximal {
                found.insert(s.iter().copied().collect());
            }
        }
    }
    // greedy growth can produce non-maximal sets; drop those contained in others
    let all: Vec<Vec<usize>> = found.into_iter().collect();
    let families = all
        .iter()
        .filter(|s| !all.iter().any(|t| t.len() > s.len() && s.iter().all(|x| t.contains(x))))
        .cloned()
        .collect();
    FamilySearch { families, capped }
}

/// Every maximal subset of `items` whose cones mutually intersect, as sorted
/// id sets in lexicographic order.
pub fn mutually_intersecting_families(items: &[(usize, Cone)]) -> Result<Vec<BTreeSet<usize>>, ConeError> {
    if let Some((_, first)) = items.first() {
        for (_, c) in items {
            if c.dim() != first.dim() {
                return Err(ConeError::DimensionMismatch { expected: first.dim(), found: c.dim() });
            }
        }
    }
    let fresh = vec![true; items.len()];
    let search = maximal_families(
        items.len(),
        &fresh,
        |set| {
            let cones: Vec<Cone> = set.iter().map(|&i| items[i].1.clone()).collect();
            matches!(cones_intersect(&cones), Ok(Some(_)))
        },
        usize::MAX,
        true,
    );
    let mut out: Vec<BTreeSet<usize>> =
        search.families.into_iter().map(|f| f.into_iter().map(|i| items[i].0).collect()).collect();
    out.sort();
    Ok(out)
}
