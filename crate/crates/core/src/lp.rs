//! Dense exact simplex over the rationals.
//!
//! Every problem is in standard equality form `A x = b, x ≥ 0`. Pivoting uses
//! Bland's rule (lowest eligible index enters, lowest basic index leaves on
//! ratio ties), which guarantees termination and makes every run
//! reproducible.

use num_traits::{One, Signed, Zero};

use crate::exact::ExactScalar;

type Q = ExactScalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem {
    pub rows: Vec<Vec<Q>>,
    pub rhs: Vec<Q>,
    pub num_vars: usize,
    /// Maximized when present.
    pub objective: Option<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Optimal {
        point: Vec<Q>,
        value: Q,
    },
    /// Feasible, objective unbounded above. The point is the last vertex visited.
    Unbounded {
        point: Vec<Q>,
    },
}

impl LpOutcome {
    pub fn point(&self) -> Option<&[Q]> {
        match self {
            LpOutcome::Infeasible => None,
            LpOutcome::Optimal { point, .. } | LpOutcome::Unbounded { point } => Some(point),
        }
    }
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem { rows: Vec::new(), rhs: Vec::new(), num_vars, objective: None }
    }

    pub fn push_row(&mut self, row: Vec<Q>, rhs: Q) {
        assert_eq!(row.len(), self.num_vars, "row length must equal the variable count");
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn with_objective(mut self, c: Vec<Q>) -> Self {
        assert_eq!(c.len(), self.num_vars);
        self.objective = Some(c);
        self
    }

    /// True when `x ≥ 0` and every row holds exactly.
    pub fn satisfied_by(&self, x: &[Q]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| dot(row, x) == *b)
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

/// Plain feasibility: returns a vertex of `{A x = b, x ≥ 0}` when nonempty.
pub fn lp_feasible(p: &LpProblem) -> (bool, Option<Vec<Q>>) {
    let plain = LpProblem { objective: None, ..p.clone() };
    match solve(&plain) {
        LpOutcome::Infeasible => (false, None),
        other => (true, other.point().map(<[Q]>::to_vec)),
    }
}

/// Two-phase simplex. Without an objective this stops after phase one.
pub fn solve(p: &LpProblem) -> LpOutcome {
    let m = p.rows.len();
    let n = p.num_vars;
    // tableau columns: n originals, m artificials, rhs
    let width = n + m + 1;
    let mut tab: Vec<Vec<Q>> = Vec::with_capacity(m);
    for (i, (row, b)) in p.rows.iter().zip(&p.rhs).enumerate() {
        let flip = b.is_negative();
        let mut r = Vec::with_capacity(width);
        r.extend(row.iter().map(|v| if flip { -v } else { v.clone() }));
        r.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
        r.push(if flip { -b } else { b.clone() });
        tab.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut phase1 = vec![Q::zero(); n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = -Q::one();
    }
    let all_cols = n + m;
    // phase one is bounded above by 0
    run_simplex(&mut tab, &mut basis, &phase1, all_cols);
    let infeasibility: Q =
        basis.iter().enumerate().filter(|(_, &v)| v >= n).map(|(i, _)| tab[i][width - 1].clone()).sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }

    // drive remaining (zero-valued) artificials out, dropping redundant rows
    let mut i = 0;
    while i < tab.len() {
        if basis[i] >= n {
            match (0..n).find(|&j| !tab[i][j].is_zero()) {
                Some(j) => {
                    pivot(&mut tab, i, j);
                    basis[i] = j;
                    i += 1;
                }
                None => {
                    tab.remove(i);
                    basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let Some(c) = &p.objective else {
        let point = extract(&tab, &basis, n);
        return LpOutcome::Optimal { point, value: Q::zero() };
    };
    let mut cost = c.clone();
    cost.extend((0..m).map(|_| Q::zero()));
    let bounded = run_simplex(&mut tab, &mut basis, &cost, n);
    let point = extract(&tab, &basis, n);
    if bounded {
        let value = dot(c, &point);
        LpOutcome::Optimal { point, value }
    } else {
        LpOutcome::Unbounded { point }
    }
}

fn extract(tab: &[Vec<Q>], basis: &[usize], n: usize) -> Vec<Q> {
    let mut x = vec![Q::zero(); n];
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            x[v] = tab[i].last().unwrap().clone();
        }
    }
    x
}

fn pivot(tab: &mut [Vec<Q>], r: usize, c: usize) {
    let inv = Q::one() / &tab[r][c];
    for v in tab[r].iter_mut() {
        if !v.is_zero() {
            *v = &*v * &inv;
        }
    }
    let prow = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, p) in row.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *v = &*v - &(&f * p);
            }
        }
    }
}

/// Maximizes `cost · x` over the columns `< allowed`. Returns false when unbounded.
fn run_simplex(tab: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: usize) -> bool {
    let rhs = tab.first().map_or(0, |r| r.len() - 1);
    loop {
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut reduced = cost[j].clone();
            for (i, &b) in basis.iter().enumerate() {
                if !tab[i][j].is_zero() && !cost[b].is_zero() {
                    reduced -= &cost[b] * &tab[i][j];
                }
            }
            reduced.is_positive()
        });
        let Some(j) = entering else { return true };
        let mut leave: Option<(usize, Q)> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[j].is_positive() {
                continue;
            }
            let ratio = &row[rhs] / &row[j];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((i, _)) = leave else { return false };
        pivot(tab, i, j);
        basis[i] = j;
    }
}

/// Result of the strict-positivity phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Positivity {
    Infeasible,
    /// Feasible, `t` is the largest attainable `min_i x_i` capped at 1.
    Feasible {
        t: Q,
        point: Vec<Q>,
    },
}

impl Positivity {
    pub fn strictly_positive(&self) -> Option<&[Q]> {
        match self {
            Positivity::Feasible { t, point } if t.is_positive() => Some(point),
            _ => None,
        }
    }
}

/// Maximizes `t` subject to `A x = b`, `x_i ≥ t`, `0 ≤ t ≤ 1`.
///
/// Solved through the substitution `x = t·1 + y`, `y ≥ 0`, with a slack `w`
/// for `t + w = 1`.
pub fn max_min_positive(p: &LpProblem) -> Positivity {
    let n = p.num_vars;
    let t_col = n;
    let mut lifted = LpProblem::new(n + 2);
    for (row, b) in p.rows.iter().zip(&p.rhs) {
        let mut r = row.clone();
        r.push(row.iter().sum());
        r.push(Q::zero());
        lifted.push_row(r, b.clone());
    }
    let mut cap = vec![Q::zero(); n + 2];
    cap[t_col] = Q::one();
    cap[t_col + 1] = Q::one();
    lifted.push_row(cap, Q::one());
    let mut c = vec![Q::zero(); n + 2];
    c[t_col] = Q::one();
    let lifted = lifted.with_objective(c);
    match solve(&lifted) {
        LpOutcome::Infeasible => Positivity::Infeasible,
        LpOutcome::Unbounded { .. } => unreachable!("t is capped at 1"),
        LpOutcome::Optimal { point, value } => {
            let x = point[..n].iter().map(|y| y + &value).collect();
            Positivity::Feasible { t: value, point: x }
        }
    }
}

/// A feasible point whose support is maximal: every variable that is positive
/// at some feasible point is positive here. Obtained by maximizing each
/// variable in turn (capped at 1) and averaging the optima.
pub fn max_support_point(p: &LpProblem) -> Option<Vec<Q>> {
    let n = p.num_vars;
    let (feasible, base) = lp_feasible(p);
    if !feasible {
        return None;
    }
    let mut points = vec![base.unwrap()];
    for i in 0..n {
        if points.iter().any(|x| x[i].is_positive()) {
            continue;
        }
        // maximize x_i with x_i + s = 1
        let mut q = LpProblem::new(n + 1);
        for (row, b) in p.rows.iter().zip(&p.rhs) {
            let mut r = row.clone();
            r.push(Q::zero());
            q.push_row(r, b.clone());
        }
        let mut cap = vec![Q::zero(); n + 1];
        cap[i] = Q::one();
        cap[n] = Q::one();
        q.push_row(cap, Q::one());
        let mut c = vec![Q::zero(); n + 1];
        c[i] = Q::one();
        if let LpOutcome::Optimal { point, value } = solve(&q.with_objective(c)) {
            if value.is_positive() {
                points.push(point[..n].to_vec());
            }
        }
    }
    let k = Q::from_integer(points.len().into());
    let mut avg = vec![Q::zero(); n];
    for x in &points {
        for (a, v) in avg.iter_mut().zip(x) {
            *a += v;
        }
    }
    Some(avg.into_iter().map(|a| a / &k).collect())
}
