//! The round loop: grow protocol trees backwards from the outcomes until one
//! closes to a double root or nothing new can be built.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cone::{cones_intersect_strict, maximal_families, proportional, Cone};
use crate::exact::{ExactScalar, HermitianOp};
use crate::lp::{max_min_positive, max_support_point, LpProblem};
use crate::measurement::{validate_measurement, MeasurementError, SeparableMeasurement, Side};
use crate::tree::{
    check_protocol, covered_outcomes, equivalence_signature, has_congruent_children, merge_and_extend, prune_zero,
    seed_trees, side_term_variants, structural_ledger, Coefficients, LeafRef, OpConstraint, Terms, Tree,
};

type Q = ExactScalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of rounds `L`.
    pub max_rounds: usize,
    /// Families whose candidate neighbourhood exceeds this are grown greedily.
    pub family_size_cap: usize,
    /// Upper bound on trees kept in one round.
    pub max_trees: usize,
    /// Search every neighbourhood exhaustively regardless of its size.
    pub exhaustive: bool,
    /// Merge only whole families, never proper subsets of them. A
    /// deliberately incomplete mode used to show that subset merges matter.
    pub maximal_subsets_only: bool,
    /// Distinct label term sets per tree used in cone queries.
    pub label_variant_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_rounds: 10,
            family_size_cap: 12,
            max_trees: 20_000,
            exhaustive: false,
            maximal_subsets_only: false,
            label_variant_cap: 8,
        }
    }
}

impl SearchConfig {
    pub fn with_max_rounds(max_rounds: usize) -> Self {
        SearchConfig { max_rounds, ..SearchConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ProtocolFound,
    NoLoccWithinL,
    NoLoccAnyRounds,
    InconclusiveCapped,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::ProtocolFound => "PROTOCOL_FOUND",
            Verdict::NoLoccWithinL => "NO_LOCC_WITHIN_L",
            Verdict::NoLoccAnyRounds => "NO_LOCC_ANY_ROUNDS",
            Verdict::InconclusiveCapped => "INCONCLUSIVE_CAPPED",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub round: usize,
    pub left_side: Option<Side>,
    /// Trees available for merging at the start of the round.
    pub trees_in: usize,
    /// Merged trees with a new signature.
    pub new_trees: usize,
    pub families: usize,
    pub subsets_tried: usize,
    pub class_d_skipped: usize,
    pub duplicates: usize,
    pub lp_calls: usize,
    pub feasibility_checks: usize,
    pub capped: bool,
    /// Outcome sets of the members of every new merge, in creation order.
    pub merges: Vec<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub rounds: Vec<RoundStats>,
}

impl SearchStats {
    pub fn rounds_used(&self) -> usize {
        self.rounds.len()
    }

    pub fn lp_calls(&self) -> usize {
        self.rounds.iter().map(|r| r.lp_calls + r.feasibility_checks).sum()
    }

    pub fn trees_built(&self) -> usize {
        self.rounds.iter().map(|r| r.new_trees).sum()
    }

    pub fn capped(&self) -> bool {
        self.rounds.iter().any(|r| r.capped)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoccProtocol {
    pub tree: Tree,
    pub coefficients: Coefficients,
    /// Round in which the tree was completed (0 for a single outcome).
    pub round: usize,
    /// True when zero-weight branches had to be pruned.
    pub pruned: bool,
}

impl LoccProtocol {
    /// `(leaf, r̂_jk)` for every leaf, in tree order.
    pub fn weights(&self) -> Vec<(LeafRef, Q)> {
        self.tree.leaves().into_iter().map(|r| (r, self.coefficients.weight(&r))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoLoccCertificate {
    pub verdict: Verdict,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SynthesisOutcome {
    Protocol { protocol: LoccProtocol, stats: SearchStats },
    NoLocc(NoLoccCertificate),
}

impl SynthesisOutcome {
    pub fn verdict(&self) -> Verdict {
        match self {
            SynthesisOutcome::Protocol { .. } => Verdict::ProtocolFound,
            SynthesisOutcome::NoLocc(c) => c.verdict,
        }
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            SynthesisOutcome::Protocol { stats, .. } => stats,
            SynthesisOutcome::NoLocc(c) => &c.stats,
        }
    }

    pub fn protocol(&self) -> Option<&LoccProtocol> {
        match self {
            SynthesisOutcome::Protocol { protocol, .. } => Some(protocol),
            SynthesisOutcome::NoLocc(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error("max_rounds must be at least 1")]
    ZeroRounds,
}

fn side_of_round(l: usize) -> Side {
    if l % 2 == 1 {
        Side::B
    } else {
        Side::A
    }
}

/// Operator equalities of one side as linear rows over the leaf variables.
fn push_equality(
    lp: &mut LpProblem,
    index: &BTreeMap<LeafRef, usize>,
    m: &SeparableMeasurement,
    side: Side,
    lhs: &Terms,
    rhs: Option<&Terms>,
) {
    let d = m.dim(side);
    let coords = d * d;
    let mut rows = vec![vec![Q::zero(); lp.num_vars]; coords];
    let mut add = |terms: &Terms, sign: &Q| {
        for r in terms {
            let v = m.op(side, r.j).vectorize();
            for (c, x) in v.0.iter().enumerate() {
                if !x.is_zero() {
                    rows[c][index[r]] += x * sign;
                }
            }
        }
    };
    add(lhs, &Q::one());
    let target = match rhs {
        Some(t) => {
            add(t, &-Q::one());
            vec![Q::zero(); coords]
        }
        None => HermitianOp::identity(d).vectorize().0,
    };
    for (row, b) in rows.into_iter().zip(target) {
        if row.iter().any(|x| !x.is_zero()) || !b.is_zero() {
            lp.push_row(row, b);
        }
    }
}

fn side_system(t: &Tree, m: &SeparableMeasurement, side: Side, leaves: &[LeafRef]) -> LpProblem {
    let index: BTreeMap<LeafRef, usize> = leaves.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let mut lp = LpProblem::new(leaves.len());
    let mut constraints: BTreeSet<OpConstraint> = t.ledger.iter().cloned().collect();
    constraints.extend(structural_ledger(&t.root));
    for c in constraints.iter().filter(|c| c.side == side) {
        push_equality(&mut lp, &index, m, side, &c.lhs, Some(&c.rhs));
    }
    let (n, first) = t.double_root();
    let root = if n.side == side { n } else { first };
    push_equality(&mut lp, &index, m, side, &root.label, None);
    lp
}

/// Solved tree: possibly pruned, with strictly positive coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feasible {
    pub tree: Tree,
    pub coefficients: Coefficients,
    pub pruned: bool,
}

/// Solves the ledger of a complete tree together with the identity roots.
///
/// The A and B systems are independent. Each is first solved for strictly
/// positive coefficients; failing that, a maximum-support solution is taken,
/// zero branches are pruned and the remaining protocol is re-checked exactly.
pub fn check_tree_feasibility(t: &Tree, m: &SeparableMeasurement) -> Option<Feasible> {
    let leaves = t.leaves();
    let qa = side_system(t, m, Side::A, &leaves);
    let pb = side_system(t, m, Side::B, &leaves);
    let to_map = |x: &[Q]| -> BTreeMap<LeafRef, Q> { leaves.iter().copied().zip(x.iter().cloned()).collect() };
    let strict_q = max_min_positive(&qa);
    let strict_p = max_min_positive(&pb);
    if let (Some(q), Some(p)) = (strict_q.strictly_positive(), strict_p.strictly_positive()) {
        let coefficients = Coefficients { q: to_map(q), p: to_map(p) };
        if check_protocol(t, &coefficients, m).is_ok() {
            return Some(Feasible { tree: t.clone(), coefficients, pruned: false });
        }
        return None;
    }
    let q = max_support_point(&qa)?;
    let p = max_support_point(&pb)?;
    let all = Coefficients { q: to_map(&q), p: to_map(&p) };
    let pruned = prune_zero(t, &all, m)?;
    let kept: BTreeSet<LeafRef> = pruned.leaves().into_iter().collect();
    let coefficients = Coefficients {
        q: all.q.into_iter().filter(|(r, _)| kept.contains(r)).collect(),
        p: all.p.into_iter().filter(|(r, _)| kept.contains(r)).collect(),
    };
    check_protocol(&pruned, &coefficients, m).ok()?;
    Some(Feasible { tree: pruned, coefficients, pruned: true })
}

struct Entry {
    tree: Tree,
    cones: Vec<Cone>,
}

fn entry(tree: Tree, m: &SeparableMeasurement, cap: usize) -> Entry {
    let side = tree.left_side();
    let cones = side_term_variants(&tree.root, side, cap)
        .into_iter()
        .map(|terms| {
            Cone::new(terms.iter().map(|r| m.op(side, r.j).clone()).collect()).expect("PSD nonzero generators")
        })
        .collect();
    Entry { tree, cones }
}

/// Groups of pairwise proportional operators (size ≥ 2), in index order.
fn proportional_classes(ops: &[&HermitianOp]) -> Vec<Vec<usize>> {
    let mut assigned = vec![false; ops.len()];
    let mut out = Vec::new();
    for i in 0..ops.len() {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = (i..ops.len())
            .filter(|&k| !assigned[k] && proportional(ops[k], ops[i]).expect("nonzero").is_some())
            .collect();
        for &k in &class {
            assigned[k] = true;
        }
        if class.len() >= 2 {
            out.push(class);
        }
    }
    out
}

/// Subsets of `family` with at least two members and one fresh member,
/// ordered by size, then lexicographically.
fn subsets(family: &[usize], fresh: &[bool], whole_only: bool) -> Vec<Vec<usize>> {
    if whole_only {
        return if family.iter().any(|&i| fresh[i]) { vec![family.to_vec()] } else { vec![] };
    }
    let n = family.len();
    let mut out: Vec<Vec<usize>> = (1u64..(1u64 << n))
        .filter(|mask| mask.count_ones() >= 2)
        .map(|mask| (0..n).filter(|b| mask >> b & 1 == 1).map(|b| family[b]).collect::<Vec<usize>>())
        .filter(|s| s.iter().any(|&i| fresh[i]))
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Runs the round loop on a validated measurement.
pub fn synthesize(m: &SeparableMeasurement, cfg: &SearchConfig) -> Result<SynthesisOutcome, SynthesisError> {
    if cfg.max_rounds == 0 {
        return Err(SynthesisError::ZeroRounds);
    }
    validate_measurement(m)?;
    let all_outcomes: BTreeSet<usize> = (1..=m.len()).collect();
    let seeds = seed_trees(m);
    let mut stats = SearchStats::default();

    if m.len() == 1 {
        if let Some(f) = check_tree_feasibility(&seeds[0], m) {
            let protocol = LoccProtocol { tree: f.tree, coefficients: f.coefficients, round: 0, pruned: f.pruned };
            return Ok(SynthesisOutcome::Protocol { protocol, stats });
        }
    }

    let mut next_id = seeds.len();
    let mut seen: HashSet<String> = seeds.iter().map(equivalence_signature).collect();
    let mut frontier: Vec<Entry> = seeds.into_iter().map(|t| entry(t, m, cfg.label_variant_cap)).collect();

    for l in 1..=cfg.max_rounds {
        let side = side_of_round(l);
        debug_assert!(frontier.iter().all(|e| e.tree.left_side() == side));
        let mut rs = RoundStats { round: l, left_side: Some(side), trees_in: frontier.len(), ..RoundStats::default() };
        let fresh: Vec<bool> = frontier.iter().map(|e| !e.tree.is_padded()).collect();

        let families: Vec<Vec<usize>> = if l == 1 {
            let ops: Vec<&HermitianOp> = frontier.iter().map(|e| &e.cones[0].generators()[0]).collect();
            proportional_classes(&ops)
        } else {
            let mut lp_calls = 0usize;
            let search = maximal_families(
                frontier.len(),
                &fresh,
                |set| {
                    lp_calls += 1;
                    let cones: Vec<Cone> = set.iter().flat_map(|&i| frontier[i].cones.iter().cloned()).collect();
                    matches!(cones_intersect_strict(&cones), Ok(Some(_)))
                },
                cfg.family_size_cap,
                cfg.exhaustive,
            );
            rs.lp_calls = lp_calls;
            rs.capped |= search.capped;
            search.families
        };
        rs.families = families.len();

        let mut next: Vec<Entry> = Vec::with_capacity(frontier.len());
        for e in &frontier {
            let t = merge_and_extend(&[&e.tree], next_id).expect("single tree");
            next_id += 1;
            next.push(entry(t, m, cfg.label_variant_cap));
        }

        let mut tried: HashSet<Vec<usize>> = HashSet::new();
        'families: for family in &families {
            for subset in subsets(family, &fresh, cfg.maximal_subsets_only) {
                if !tried.insert(subset.clone()) {
                    continue;
                }
                rs.subsets_tried += 1;
                let members: Vec<&Tree> = subset.iter().map(|&i| &frontier[i].tree).collect();
                let merged = merge_and_extend(&members, next_id).expect("frontier trees share shape");
                if has_congruent_children(&merged.root.children[0]) {
                    rs.class_d_skipped += 1;
                    continue;
                }
                if !seen.insert(equivalence_signature(&merged)) {
                    rs.duplicates += 1;
                    continue;
                }
                if next.len() >= cfg.max_trees {
                    rs.capped = true;
                    break 'families;
                }
                next_id += 1;
                rs.new_trees += 1;
                rs.merges.push(members.iter().map(|t| covered_outcomes(t).into_iter().collect()).collect());
                if covered_outcomes(&merged) == all_outcomes {
                    rs.feasibility_checks += 1;
                    if let Some(f) = check_tree_feasibility(&merged, m) {
                        stats.rounds.push(rs);
                        let protocol =
                            LoccProtocol { tree: f.tree, coefficients: f.coefficients, round: l, pruned: f.pruned };
                        return Ok(SynthesisOutcome::Protocol { protocol, stats });
                    }
                }
                next.push(entry(merged, m, cfg.label_variant_cap));
            }
        }

        let no_new = rs.new_trees == 0;
        stats.rounds.push(rs);
        if no_new {
            // in round 1 nothing merged on B; the seeds' A side is still unexplored
            let a_side_pending = l == 1 && {
                let ops: Vec<&HermitianOp> = m.outcomes().iter().map(|o| &o.a).collect();
                !proportional_classes(&ops).is_empty()
            };
            if !a_side_pending {
                let verdict = if stats.capped() { Verdict::InconclusiveCapped } else { Verdict::NoLoccAnyRounds };
                return Ok(SynthesisOutcome::NoLocc(NoLoccCertificate { verdict, stats }));
            }
        }
        frontier = next;
    }
    let verdict = if stats.capped() { Verdict::InconclusiveCapped } else { Verdict::NoLoccWithinL };
    Ok(SynthesisOutcome::NoLocc(NoLoccCertificate { verdict, stats }))
}
