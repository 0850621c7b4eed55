//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use locc_core::exact::{int, rat, ExactComplex, ExactScalar, HermitianOp};
use std::collections::BTreeMap;

use locc_core::measurement::{Outcome, SeparableMeasurement};
use locc_core::tree::{structural_ledger, Coefficients, LeafRef, Tree, TreeNode};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Q = ExactScalar;

pub fn random_rat<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Q {
    rat(rng.gen_range(lo..=hi), rng.gen_range(1..=den))
}

/// Positive rational in `[1/5, 5]`.
pub fn random_positive<R: Rng>(rng: &mut R) -> Q {
    rat(rng.gen_range(1..=5), rng.gen_range(1..=5))
}

pub fn random_vector<R: Rng>(rng: &mut R, d: usize, complex: bool) -> Vec<ExactComplex> {
    loop {
        let v: Vec<ExactComplex> = (0..d)
            .map(|_| ExactComplex::from_ints(rng.gen_range(-2..=2), if complex { rng.gen_range(-1..=1) } else { 0 }))
            .collect();
        if v.iter().any(|z| z != &ExactComplex::from_ints(0, 0)) {
            return v;
        }
    }
}

/// Unnormalized `v v†`.
pub fn outer(v: &[ExactComplex]) -> HermitianOp {
    let d = v.len();
    let entries = (0..d * d).map(|i| &v[i / d] * &v[i % d].conj()).collect();
    HermitianOp::new(d, entries).unwrap()
}

/// Random PSD operator of the given dimension with small rational entries.
pub fn random_psd<R: Rng>(rng: &mut R, d: usize) -> HermitianOp {
    let terms = rng.gen_range(1..=d.max(1));
    let mut acc = HermitianOp::zero(d);
    for _ in 0..terms {
        let complex = rng.gen_bool(0.3);
        let v = random_vector(rng, d, complex);
        acc = acc.add(&outer(&v).scale(&random_positive(rng))).unwrap();
    }
    acc
}

/// `v† E⁻¹ v` for an invertible 2x2 or 1x1 operator.
fn inverse_form(e: &HermitianOp, v: &[ExactComplex]) -> Q {
    if e.dim() == 1 {
        return v[0].norm_sqr() / e.trace();
    }
    let (a, b, c) = (e.entry(0, 0).clone(), e.entry(0, 1).clone(), e.entry(1, 1).clone());
    let det = (&a * &c - &b * &b.conj()).re;
    // adj(E) = [[c, -b], [-b*, a]]
    let adj = [[c, -b.clone()], [-b.conj(), a]];
    let mut s = ExactComplex::from_ints(0, 0);
    for i in 0..2 {
        for j in 0..2 {
            s = s + &(&v[i].conj() * &adj[i][j]) * &v[j];
        }
    }
    s.re / det
}

/// Splits a PSD operator into two PSD parts summing to it. Full-rank parents
/// are split by peeling off a rank-one piece; others proportionally.
pub fn split_psd<R: Rng>(rng: &mut R, e: &HermitianOp) -> (HermitianOp, HermitianOp) {
    let fractions = [rat(1, 3), rat(1, 2), rat(2, 3), int(1)];
    if e.rank() == e.dim() && e.dim() > 1 {
        let complex = rng.gen_bool(0.3);
        let v = random_vector(rng, e.dim(), complex);
        let c = fractions.choose(rng).unwrap().clone() / inverse_form(e, &v);
        let piece = outer(&v).scale(&c);
        let rest = e.sub(&piece).unwrap();
        if !rest.is_zero() {
            return (piece, rest);
        }
    }
    let s = fractions[..3].choose(rng).unwrap().clone();
    (e.scale(&s), e.scale(&(int(1) - s)))
}

/// A measurement implemented by a random protocol: starting from the
/// trivial outcome, a random leaf is refined by a random party until there
/// are `n` outcomes. Outcomes are shuffled and rescaled. `None` if two
/// outcomes came out proportional.
pub fn random_locc_instance<R: Rng>(rng: &mut R, d_a: usize, d_b: usize, n: usize) -> Option<SeparableMeasurement> {
    let mut leaves = vec![(HermitianOp::identity(d_a), HermitianOp::identity(d_b))];
    while leaves.len() < n {
        let i = rng.gen_range(0..leaves.len());
        let (a, b) = leaves.swap_remove(i);
        if rng.gen_bool(0.5) {
            let (a1, a2) = split_psd(rng, &a);
            leaves.push((a1, b.clone()));
            leaves.push((a2, b));
        } else {
            let (b1, b2) = split_psd(rng, &b);
            leaves.push((a.clone(), b1));
            leaves.push((a, b2));
        }
    }
    leaves.shuffle(rng);
    let outcomes = leaves
        .into_iter()
        .map(|(a, b)| Outcome { a: a.scale(&random_positive(rng)), b: b.scale(&random_positive(rng)) })
        .collect();
    SeparableMeasurement::new(d_a, d_b, outcomes).ok()
}

/// Random positive rescaling factors, one pair per outcome.
pub fn random_factors<R: Rng>(rng: &mut R, n: usize) -> Vec<(Q, Q)> {
    (0..n).map(|_| (random_positive(rng), random_positive(rng))).collect()
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Solves `M x = c` exactly for a square-or-tall `M` with independent
/// columns. `None` if the columns are dependent or the system inconsistent.
fn solve_unique(mut rows: Vec<Vec<Q>>, cols: usize) -> Option<Vec<Q>> {
    use num_traits::Zero;
    let mut pivot_row = 0;
    for col in 0..cols {
        let p = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(pivot_row, p);
        let inv = Q::from_integer(1.into()) / rows[pivot_row][col].clone();
        for v in rows[pivot_row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in 0..=cols {
                    let sub = &f * &rows[pivot_row][c];
                    rows[r][c] = &rows[r][c] - &sub;
                }
            }
        }
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some(rows[..cols].iter().map(|r| r[cols].clone()).collect())
}

/// Independent check for a nonzero common point of two cones: enumerates
/// every basic solution of `Σ a_i g_i = Σ b_k h_k`, `Σ a_i tr g_i = 1`,
/// `a, b ≥ 0`. A feasible polyhedron always has one.
pub fn brute_force_intersect(g: &[HermitianOp], h: &[HermitianOp]) -> bool {
    use num_traits::Signed;
    let columns: Vec<Vec<Q>> = g
        .iter()
        .map(|x| {
            let mut v = x.vectorize().0;
            v.push(x.trace());
            v
        })
        .chain(h.iter().map(|x| {
            let mut v: Vec<Q> = x.vectorize().0.iter().map(|c| -c.clone()).collect();
            v.push(int(0));
            v
        }))
        .collect();
    let n_rows = columns[0].len();
    let n = columns.len();
    for mask in 1u32..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let rows: Vec<Vec<Q>> = (0..n_rows)
            .map(|r| {
                let mut row: Vec<Q> = subset.iter().map(|&c| columns[c][r].clone()).collect();
                row.push(if r + 1 == n_rows { int(1) } else { int(0) });
                row
            })
            .collect();
        if let Some(x) = solve_unique(rows, subset.len()) {
            if x.iter().all(|v| !v.is_negative()) {
                return true;
            }
        }
    }
    false
}

fn rebuild(n: &TreeNode, map: &BTreeMap<LeafRef, LeafRef>) -> TreeNode {
    match n.leaf {
        Some(r) => TreeNode::leaf(n.side, *map.get(&r).unwrap_or(&r)),
        None => TreeNode::internal(n.side, n.children.iter().map(|c| rebuild(c, map)).collect()),
    }
}

fn internal_paths(n: &TreeNode, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if n.is_leaf() {
        return;
    }
    out.push(path.clone());
    for (i, c) in n.children.iter().enumerate() {
        path.push(i);
        internal_paths(c, path, out);
        path.pop();
    }
}

/// Duplicates a random child subtree next to itself under fresh copy
/// indices, splitting the child-side coefficients of its leaves as
/// `λ` / `1 − λ`. A valid solution stays valid.
pub fn inject_congruent<R: Rng>(rng: &mut R, t: &Tree, coeffs: &Coefficients) -> (Tree, Coefficients) {
    let mut paths = Vec::new();
    internal_paths(&t.root, &mut Vec::new(), &mut paths);
    // the node above the double root has a single child by definition
    paths.retain(|p| !p.is_empty());
    let path = paths.choose(rng).unwrap();
    let mut root = t.root.clone();
    let mut node = &mut root;
    for &i in path {
        node = &mut node.children[i];
    }
    let i = rng.gen_range(0..node.children.len());
    let child = node.children[i].clone();
    let mut next_k: BTreeMap<usize, usize> = BTreeMap::new();
    for r in t.leaves() {
        let k = next_k.entry(r.j).or_insert(0);
        *k = (*k).max(r.k);
    }
    let mut map = BTreeMap::new();
    for r in child.leaves() {
        let k = next_k.get_mut(&r.j).unwrap();
        *k += 1;
        map.insert(r, LeafRef::new(r.j, *k));
    }
    node.children.insert(i + 1, rebuild(&child, &map));
    let root = rebuild(&root, &BTreeMap::new());

    let lambda = [rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(3, 4)].choose(rng).unwrap().clone();
    let mut out = coeffs.clone();
    for (old, new) in &map {
        out.q.insert(*new, coeffs.q[old].clone());
        out.p.insert(*new, coeffs.p[old].clone());
        let split = out.side_mut(child.side);
        split.insert(*new, &split[old] * &(int(1) - &lambda));
        split.insert(*old, &split[old] * &lambda);
    }
    let tree = Tree { ledger: structural_ledger(&root), depth: root.depth(), root, id: t.id };
    (tree, out)
}

/// Qubit operators for the cone queries.
pub fn qubit_pool() -> Vec<HermitianOp> {
    let c = ExactComplex::from_ints;
    let vecs = [
        [c(1, 0), c(0, 0)],
        [c(0, 0), c(1, 0)],
        [c(1, 0), c(1, 0)],
        [c(1, 0), c(-1, 0)],
        [c(1, 0), c(0, 1)],
        [c(1, 0), c(0, -1)],
        [c(1, 0), c(2, 0)],
        [c(2, 0), c(-1, 0)],
    ];
    let mut pool: Vec<HermitianOp> = vecs.iter().map(|v| HermitianOp::projector(v)).collect();
    pool.push(HermitianOp::identity(2));
    pool.push(HermitianOp::diagonal(&[int(1), int(2)]));
    pool
}
