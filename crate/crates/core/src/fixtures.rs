//! Bundled measurement instances.

use crate::exact::{int, rat, ExactComplex, ExactScalar, HermitianOp};
use crate::measurement::{Outcome, SeparableMeasurement};

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] =
    &["bennett9", "product_basis_2x2", "product_basis_3x3", "conditional_basis", "example1", "example4", "example5"];

pub fn by_name(name: &str) -> Option<SeparableMeasurement> {
    Some(match name {
        "bennett9" => bennett9(),
        "product_basis_2x2" => product_basis(2, 2),
        "product_basis_3x3" => product_basis(3, 3),
        "conditional_basis" => conditional_basis(),
        "example1" => example1(),
        "example4" => example4(),
        "example5" => example5(),
        _ => return None,
    })
}

/// Normalized projector onto an integer vector.
fn proj(v: &[i64]) -> HermitianOp {
    HermitianOp::projector(&v.iter().map(|&x| ExactComplex::from_ints(x, 0)).collect::<Vec<_>>())
}

fn real(d: usize, rows: &[&[ExactScalar]]) -> HermitianOp {
    HermitianOp::from_real(d, rows.iter().flat_map(|r| r.iter().cloned()).collect()).expect("symmetric")
}

fn pair(a: HermitianOp, b: HermitianOp) -> Outcome {
    Outcome { a, b }
}

fn build(d_a: usize, d_b: usize, outcomes: Vec<Outcome>) -> SeparableMeasurement {
    SeparableMeasurement::new(d_a, d_b, outcomes).expect("bundled fixture is valid")
}

/// The nine product states of "nonlocality without entanglement".
pub fn bennett9() -> SeparableMeasurement {
    let e = |i: usize| proj(&[(i == 0) as i64, (i == 1) as i64, (i == 2) as i64]);
    build(
        3,
        3,
        vec![
            pair(e(1), e(1)),
            pair(e(0), proj(&[1, 1, 0])),
            pair(e(0), proj(&[1, -1, 0])),
            pair(e(2), proj(&[0, 1, 1])),
            pair(e(2), proj(&[0, 1, -1])),
            pair(proj(&[0, 1, 1]), e(0)),
            pair(proj(&[0, 1, -1]), e(0)),
            pair(proj(&[1, 1, 0]), e(2)),
            pair(proj(&[1, -1, 0]), e(2)),
        ],
    )
}

/// Both parties measure in their standard bases; outcome `(i, k)` is listed
/// at position `i·d_b + k`.
pub fn product_basis(d_a: usize, d_b: usize) -> SeparableMeasurement {
    let mut outcomes = Vec::new();
    for i in 0..d_a {
        for k in 0..d_b {
            outcomes.push(pair(HermitianOp::basis_projector(d_a, i), HermitianOp::basis_projector(d_b, k)));
        }
    }
    build(d_a, d_b, outcomes)
}

/// Alice measures `{[0], [1]}`; Bob then measures `{[0], [1]}` after outcome 0
/// and `{[+], [−]}` after outcome 1.
pub fn conditional_basis() -> SeparableMeasurement {
    let z = |i| HermitianOp::basis_projector(2, i);
    build(2, 2, vec![pair(z(0), z(0)), pair(z(0), z(1)), pair(z(1), proj(&[1, 1])), pair(z(1), proj(&[1, -1]))])
}

/// Qubit instance in which one pair of proportional B operators must be
/// merged while a third, also proportional, is held back.
///
/// `B̂_1 = B̂_2 = B̂_3 = b`, `B̂_4 = I − 2b`, `B̂_5 = I − b` with `b = [0+1]/4`;
/// `Â_4 = Â_1 + Â_2`, `Â_5 = I − Â_4`, `Â_3 = I`. All weights are 1.
pub fn example4() -> SeparableMeasurement {
    let i2 = HermitianOp::identity(2);
    let b = proj(&[1, 1]).scale(&rat(1, 4));
    let a1 = HermitianOp::basis_projector(2, 0).scale(&rat(1, 4));
    let a2 = b.clone();
    let a4 = a1.add(&a2).unwrap();
    let a5 = i2.sub(&a4).unwrap();
    build(
        2,
        2,
        vec![
            pair(a1, b.clone()),
            pair(a2, b.clone()),
            pair(i2.clone(), b.clone()),
            pair(a4, i2.sub(&b.scale(&int(2))).unwrap()),
            pair(a5, i2.sub(&b).unwrap()),
        ],
    )
}

/// Seven outcomes on a qubit (A) and a qutrit (B) whose protocol uses
/// outcome 1 on two leaves.
pub fn example5() -> SeparableMeasurement {
    let b = proj(&[1, 1, 0]).scale(&rat(1, 4));
    let b4 = HermitianOp::diagonal(&[rat(1, 2), int(0), rat(1, 2)]);
    let b5 =
        real(3, &[&[rat(1, 8), rat(-1, 8), int(0)], &[rat(-1, 8), rat(3, 8), int(0)], &[int(0), int(0), rat(1, 4)]]);
    let a1 = HermitianOp::basis_projector(2, 0).scale(&rat(1, 4));
    let a2 = HermitianOp::from_rows(vec![
        vec![ExactComplex::real(rat(1, 8)), ExactComplex::new(int(0), rat(-1, 8))],
        vec![ExactComplex::new(int(0), rat(1, 8)), ExactComplex::real(rat(1, 8))],
    ])
    .unwrap();
    let a3 = proj(&[1, -1]).scale(&rat(1, 4));
    let i2 = HermitianOp::identity(2);
    build(
        2,
        3,
        vec![
            pair(a1.clone(), b.clone()),
            pair(a2.clone(), b.scale(&rat(1, 2))),
            pair(a3.clone(), b.scale(&rat(1, 3))),
            pair(a1.add(&a2).unwrap().scale(&rat(1, 2)), b4.clone()),
            pair(a1.add(&a3).unwrap().scale(&rat(1, 3)), b5.clone()),
            pair(i2.sub(&a1).unwrap().sub(&a2).unwrap(), b.add(&b4).unwrap()),
            pair(i2.sub(&a1).unwrap().sub(&a3).unwrap(), b.add(&b5.scale(&int(2))).unwrap()),
        ],
    )
}

/// Five rank-one qubit projectors on each side, pairwise non-proportional.
///
/// Alice's states sit at rational points of the Bloch circle; Bob's are at
/// the doubled angles. The unique completing weights are listed in
/// [`example1_weights`].
pub fn example1() -> SeparableMeasurement {
    let m = |n: [i64; 3], d: i64| real(2, &[&[rat(n[0], d), rat(n[1], d)], &[rat(n[1], d), rat(n[2], d)]]);
    let a = [m([1, 0, 0], 1), m([1, -4, 16], 17), m([36, -30, 25], 61), m([121, 99, 81], 202), m([25, 85, 289], 314)];
    let b = [
        m([1, 0, 0], 1),
        m([225, 120, 64], 289),
        m([121, -660, 3600], 3721),
        m([400, 1980, 9801], 10201),
        m([17424, -11220, 7225], 24649),
    ];
    build(2, 2, a.into_iter().zip(b).map(|(a, b)| pair(a, b)).collect())
}

pub fn example1_weights() -> Vec<ExactScalar> {
    vec![rat(91, 102), rat(54043, 74518), rat(226981, 263017), rat(1030301, 1230501), rat(3869893, 5671693)]
}
