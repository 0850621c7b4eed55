//! Local Kraus operators for a solved protocol tree.
//!
//! Node operators are evaluated exactly and converted to floating point
//! once; square roots and support inverses are the only inexact steps.
//!
//! For a node `c` with accumulated product `G_prev` for its party (the
//! product at `c`'s grandparent, `I` at the roots) the local operator is
//! `K_c = √(G_prev⁺† v_c G_prev⁺)`, so that `(K_c G_prev)†(K_c G_prev) = v_c`
//! and the siblings of `c` close to the range projector of `G_prev`. The
//! completion operator `I − P` fills the rest and is never reached.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::engine::LoccProtocol;
use crate::exact::{scalar_to_f64, HermitianOp};
use crate::measurement::{SeparableMeasurement, Side};
use crate::tree::{evaluate_terms, side_terms, Coefficients, LeafRef, TreeNode};

pub type FloatOp = DMatrix<Complex64>;

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrausError {
    #[error("eigenvalue {0:e} is below the PSD tolerance")]
    NegativeEigenvalue(f64),
    #[error("closure residual {residual:e} at node {node}")]
    Closure { node: String, residual: f64 },
}

pub fn to_float(op: &HermitianOp) -> FloatOp {
    let d = op.dim();
    DMatrix::from_fn(d, d, |i, j| {
        let (re, im) = op.entry(i, j).to_f64_pair();
        Complex64::new(re, im)
    })
}

fn eigen(op: &FloatOp) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    // symmetrize away rounding before the Hermitian solver
    let h = (op + op.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
}

fn rebuild(e: &SymmetricEigen<Complex64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> FloatOp {
    let d = e.eigenvalues.len();
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(f(e.eigenvalues[i]), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &e.eigenvectors * diag * e.eigenvectors.adjoint()
}

/// Positive square root. Eigenvalues in `[-1e-10, 0)` are clamped to 0, as
/// are those below `1e-12 · λ_max`: rounding noise of order 1e-16 would
/// otherwise survive the root as 1e-8.
pub fn psd_sqrt(op: &FloatOp) -> Result<FloatOp, KrausError> {
    let e = eigen(op);
    if let Some(&bad) = e.eigenvalues.iter().find(|&&l| l < -1e-10) {
        return Err(KrausError::NegativeEigenvalue(bad));
    }
    let cut = 1e-12 * e.eigenvalues.iter().cloned().fold(0.0, f64::max);
    Ok(rebuild(&e, |l| if l > cut { l.sqrt() } else { 0.0 }))
}

/// Inverse on the support: eigenvalues above `rank_tol · λ_max` are
/// inverted, the rest set to 0.
pub fn support_inverse(op: &FloatOp, rank_tol: f64) -> FloatOp {
    let e = eigen(op);
    let max = e.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = rank_tol * max;
    rebuild(&e, |l| if max > 0.0 && l > cut { 1.0 / l } else { 0.0 })
}

pub fn max_abs(m: &FloatOp) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm.
pub fn op_norm(m: &FloatOp) -> f64 {
    let g = m.adjoint() * m;
    eigen(&g).eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
}

fn identity(d: usize) -> FloatOp {
    DMatrix::identity(d, d)
}

/// One local measurement: performed by `party` at the node reached by
/// `path` (child indices from the root), one Kraus operator per child.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementStep {
    pub path: Vec<usize>,
    pub party: Side,
    pub kraus: Vec<FloatOp>,
    /// `I − P`, present when `P ≠ I`.
    pub completion: Option<FloatOp>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausProtocol {
    pub root: TreeNode,
    pub coefficients: Coefficients,
    pub d_a: usize,
    pub d_b: usize,
    pub steps: Vec<MeasurementStep>,
}

impl KrausProtocol {
    pub fn step(&self, path: &[usize]) -> Option<&MeasurementStep> {
        self.steps.iter().find(|s| s.path == path)
    }
}

/// Builds the local instrument for every internal node of a solved protocol.
pub fn realize(p: &LoccProtocol, m: &SeparableMeasurement, rank_tol: f64) -> Result<KrausProtocol, KrausError> {
    let mut steps = Vec::new();
    let root = &p.tree.root;
    let start = Frame {
        g: [identity(m.d_a()), identity(m.d_b())],
        v: [to_float(&HermitianOp::identity(m.d_a())), to_float(&HermitianOp::identity(m.d_b()))],
    };
    walk(root, &mut Vec::new(), &start, &p.coefficients, m, rank_tol, &mut steps)?;
    Ok(KrausProtocol { root: root.clone(), coefficients: p.coefficients.clone(), d_a: m.d_a(), d_b: m.d_b(), steps })
}

fn idx(side: Side) -> usize {
    match side {
        Side::A => 0,
        Side::B => 1,
    }
}

/// Accumulated products and node operators per party along a path.
#[derive(Clone)]
struct Frame {
    g: [FloatOp; 2],
    v: [FloatOp; 2],
}

fn walk(
    node: &TreeNode,
    path: &mut Vec<usize>,
    frame: &Frame,
    coeffs: &Coefficients,
    m: &SeparableMeasurement,
    rank_tol: f64,
    steps: &mut Vec<MeasurementStep>,
) -> Result<(), KrausError> {
    if node.is_leaf() {
        return Ok(());
    }
    let party = node.side.other();
    let s = idx(party);
    let g_prev = &frame.g[s];
    let g_pinv = support_inverse(&frame.v[s], rank_tol) * g_prev.adjoint();
    let d = g_prev.nrows();
    let mut kraus = Vec::with_capacity(node.children.len());
    let mut closure = FloatOp::zeros(d, d);
    let mut frames = Vec::with_capacity(node.children.len());
    for c in &node.children {
        let v_c = to_float(&evaluate_terms(&side_terms(c, party), party, coeffs, m));
        let k = psd_sqrt(&(g_pinv.adjoint() * &v_c * &g_pinv))?;
        closure += k.adjoint() * &k;
        let mut f = frame.clone();
        f.g[s] = &k * g_prev;
        f.v[s] = v_c;
        frames.push(f);
        kraus.push(k);
    }
    // Σ K†K must be the range projector of the previous product
    let proj = g_prev * &g_pinv;
    let residual = max_abs(&(&closure - &proj));
    if residual > 1e-8 {
        return Err(KrausError::Closure { node: format!("{path:?}"), residual });
    }
    let comp = identity(d) - proj;
    let completion = (max_abs(&comp) > 1e-12).then_some(comp);
    steps.push(MeasurementStep { path: path.clone(), party, kraus, completion });
    for (i, (c, f)) in node.children.iter().zip(&frames).enumerate() {
        path.push(i);
        walk(c, path, f, coeffs, m, rank_tol, steps)?;
        path.pop();
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstrumentReport {
    /// Max over steps of `‖Σ K†K + C†C − I‖_max`.
    pub closure_residual: f64,
    /// Max over leaves of `‖path product − r̂_jk Â_j ⊗ B̂_j‖_max`.
    pub leaf_residual: f64,
    /// `‖Σ_leaves path product − I‖_max`.
    pub completeness_residual: f64,
    /// Max spectral norm of a completion operator applied along its path.
    pub completion_path_norm: f64,
    pub passed: bool,
}

/// Recomputes every path product from the local Kraus operators alone.
pub fn verify_instrument(kp: &KrausProtocol, m: &SeparableMeasurement, tol: f64) -> InstrumentReport {
    let steps: BTreeMap<&[usize], &MeasurementStep> = kp.steps.iter().map(|s| (s.path.as_slice(), s)).collect();
    let mut report = InstrumentReport {
        closure_residual: 0.0,
        leaf_residual: 0.0,
        completeness_residual: 0.0,
        completion_path_norm: 0.0,
        passed: false,
    };
    for s in &kp.steps {
        let d = s.kraus[0].nrows();
        let mut sum = FloatOp::zeros(d, d);
        for k in &s.kraus {
            sum += k.adjoint() * k;
        }
        if let Some(c) = &s.completion {
            sum += c.adjoint() * c;
        }
        report.closure_residual = report.closure_residual.max(max_abs(&(sum - identity(d))));
    }
    let n = kp.d_a * kp.d_b;
    let mut total = FloatOp::zeros(n, n);
    let mut missing_step = false;
    let mut stack: Vec<(&TreeNode, Vec<usize>, [FloatOp; 2])> =
        vec![(&kp.root, vec![], [identity(kp.d_a), identity(kp.d_b)])];
    while let Some((node, path, g)) = stack.pop() {
        if let Some(r) = node.leaf {
            let pa = g[0].adjoint() * &g[0];
            let pb = g[1].adjoint() * &g[1];
            let product = pa.kronecker(&pb);
            total += &product;
            let target = leaf_target(kp, m, &r);
            report.leaf_residual = report.leaf_residual.max(max_abs(&(product - target)));
            continue;
        }
        let Some(step) = steps.get(path.as_slice()) else {
            missing_step = true;
            continue;
        };
        let s = idx(step.party);
        if let Some(c) = &step.completion {
            report.completion_path_norm = report.completion_path_norm.max(op_norm(&(c * &g[s])));
        }
        for (i, (child, k)) in node.children.iter().zip(&step.kraus).enumerate() {
            let mut next = g.clone();
            next[s] = k * &g[s];
            let mut p = path.clone();
            p.push(i);
            stack.push((child, p, next));
        }
    }
    report.completeness_residual = max_abs(&(total - identity(n)));
    report.passed = !missing_step
        && report.closure_residual < tol
        && report.leaf_residual < tol
        && report.completeness_residual < tol
        && report.completion_path_norm < 1e-10;
    report
}

fn leaf_target(kp: &KrausProtocol, m: &SeparableMeasurement, r: &LeafRef) -> FloatOp {
    let q = kp.coefficients.q.get(r).map_or(0.0, scalar_to_f64);
    let p = kp.coefficients.p.get(r).map_or(0.0, scalar_to_f64);
    let a = to_float(m.op(Side::A, r.j)) * Complex64::new(q, 0.0);
    let b = to_float(m.op(Side::B, r.j)) * Complex64::new(p, 0.0);
    a.kronecker(&b)
}
