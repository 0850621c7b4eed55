//! Double-rooted alternating-party protocol trees with symbolic labels.
//!
//! A leaf `(j, k)` stands for the outcome `q̂_jk Â_j ⊗ p̂_jk B̂_j`. The label
//! of a node of side `S` is the set of leaves whose `S`-operators sum to the
//! node operator: at nodes of side `S` one child branch is followed (all
//! branches must agree), at nodes of the other side every child contributes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact::{ExactScalar, HermitianOp};
use crate::measurement::{SeparableMeasurement, Side};

type Q = ExactScalar;

/// Outcome index `j` (1-based) and copy index `k` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LeafRef {
    pub j: usize,
    pub k: usize,
}

impl LeafRef {
    pub fn new(j: usize, k: usize) -> Self {
        LeafRef { j, k }
    }
}

impl fmt::Display for LeafRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.j, self.k)
    }
}

pub type Terms = BTreeSet<LeafRef>;

/// `Σ q̂_jk Â_j` (side A) or `Σ p̂_jk B̂_j` (side B) over `terms`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicLabel {
    pub side: Side,
    pub terms: Terms,
}

impl fmt::Display for SymbolicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.side, &self.terms)
    }
}

fn write_terms(f: &mut impl fmt::Write, side: Side, terms: &Terms) -> fmt::Result {
    let c = match side {
        Side::A => 'q',
        Side::B => 'p',
    };
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            f.write_str(" + ")?;
        }
        write!(f, "{c}{}.{} {side}{}", t.j, t.k, t.j)?;
    }
    Ok(())
}

/// Operator equality between two symbolic sums of the same side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpConstraint {
    pub side: Side,
    pub lhs: Terms,
    pub rhs: Terms,
}

impl OpConstraint {
    /// Normalized so `lhs ≤ rhs`; `None` for a trivial identity.
    pub fn new(side: Side, lhs: Terms, rhs: Terms) -> Option<Self> {
        match lhs.cmp(&rhs) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some(OpConstraint { side, lhs, rhs }),
            std::cmp::Ordering::Greater => Some(OpConstraint { side, lhs: rhs, rhs: lhs }),
        }
    }

    fn remap(&self, map: &BTreeMap<LeafRef, LeafRef>) -> Option<Self> {
        let f = |t: &Terms| t.iter().map(|r| map[r]).collect();
        OpConstraint::new(self.side, f(&self.lhs), f(&self.rhs))
    }
}

impl fmt::Display for OpConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.side, &self.lhs)?;
        f.write_str(" = ")?;
        write_terms(f, self.side, &self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub side: Side,
    pub label: Terms,
    pub children: Vec<TreeNode>,
    pub leaf: Option<LeafRef>,
}

impl TreeNode {
    pub fn leaf(side: Side, r: LeafRef) -> Self {
        TreeNode { side, label: BTreeSet::from([r]), children: Vec::new(), leaf: Some(r) }
    }

    /// Internal node; the label is computed from the children.
    pub fn internal(side: Side, children: Vec<TreeNode>) -> Self {
        assert!(!children.is_empty(), "internal nodes need a child");
        debug_assert!(children.iter().all(|c| c.side != side));
        let mut n = TreeNode { side, label: Terms::new(), children, leaf: None };
        n.label = side_terms(&n, side);
        n
    }

    pub fn is_leaf(&self) -> bool {
        self.leaf.is_some()
    }

    pub fn symbolic_label(&self) -> SymbolicLabel {
        SymbolicLabel { side: self.side, terms: self.label.clone() }
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<LeafRef> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<LeafRef>) {
        match self.leaf {
            Some(r) => out.push(r),
            None => self.children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Number of levels below and including this node.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(TreeNode::depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(TreeNode::node_count).sum::<usize>()
    }

    fn relabel(&mut self) {
        for c in &mut self.children {
            c.relabel();
        }
        if let Some(r) = self.leaf {
            self.label = BTreeSet::from([r]);
        } else {
            self.label = side_terms(self, self.side);
        }
    }

    fn remap(&mut self, map: &BTreeMap<LeafRef, LeafRef>) {
        if let Some(r) = self.leaf.as_mut() {
            *r = map[r];
        }
        self.label = self.label.iter().map(|r| map[r]).collect();
        for c in &mut self.children {
            c.remap(map);
        }
    }

    /// Sorts children by canonical key at every level (stable on ties).
    fn canonicalize(&mut self) {
        for c in &mut self.children {
            c.canonicalize();
        }
        self.children.sort_by_cached_key(canonical_key);
    }
}

/// Terms of the `side`-operator of `node`.
pub fn side_terms(node: &TreeNode, side: Side) -> Terms {
    if let Some(r) = node.leaf {
        return BTreeSet::from([r]);
    }
    if node.side == side {
        side_terms(&node.children[0], side)
    } else {
        node.children.iter().flat_map(|c| side_terms(c, side)).collect()
    }
}

/// Every term set obtainable for the `side`-operator of `node` by varying the
/// branch followed at same-side nodes, capped at `cap` distinct sets.
pub fn side_term_variants(node: &TreeNode, side: Side, cap: usize) -> Vec<Terms> {
    if let Some(r) = node.leaf {
        return vec![BTreeSet::from([r])];
    }
    let mut out: Vec<Terms> = Vec::new();
    if node.side == side {
        for c in &node.children {
            for v in side_term_variants(c, side, cap) {
                if !out.contains(&v) {
                    out.push(v);
                }
                if out.len() >= cap {
                    return out;
                }
            }
        }
    } else {
        out.push(Terms::new());
        for c in &node.children {
            let vs = side_term_variants(c, side, cap);
            let mut next = Vec::new();
            'outer: for base in &out {
                for v in &vs {
                    let u: Terms = base.union(v).copied().collect();
                    if !next.contains(&u) {
                        next.push(u);
                    }
                    if next.len() >= cap {
                        break 'outer;
                    }
                }
            }
            out = next;
        }
    }
    out
}

/// k-free canonical serialization of a subtree.
pub fn canonical_key(node: &TreeNode) -> String {
    let mut s = String::new();
    write_canonical(node, &mut s, false);
    s
}

fn write_canonical(node: &TreeNode, out: &mut String, compress: bool) {
    if compress {
        if let [y] = node.children.as_slice() {
            if let [z] = y.children.as_slice() {
                return write_canonical(z, out, true);
            }
        }
    }
    match node.leaf {
        Some(r) => {
            let _ = write!(out, "{}{}", node.side, r.j);
        }
        None => {
            let mut keys: Vec<String> = node
                .children
                .iter()
                .map(|c| {
                    let mut s = String::new();
                    write_canonical(c, &mut s, compress);
                    s
                })
                .collect();
            keys.sort();
            let _ = write!(out, "{}({})", node.side, keys.join(","));
        }
    }
}

/// True iff the subtrees agree up to child order and copy indices.
pub fn congruent(a: &TreeNode, b: &TreeNode) -> bool {
    canonical_key(a) == canonical_key(b)
}

/// True when two children of `node` are congruent.
pub fn has_congruent_children(node: &TreeNode) -> bool {
    let mut keys: Vec<String> = node.children.iter().map(canonical_key).collect();
    keys.sort();
    keys.windows(2).any(|w| w[0] == w[1])
}

/// Branch equalities implied by the tree shape: at every node with
/// several children, the branch operators of that node's side agree.
pub fn structural_ledger(root: &TreeNode) -> Vec<OpConstraint> {
    let mut out = BTreeSet::new();
    collect_structural(root, &mut out);
    out.into_iter().collect()
}

fn collect_structural(node: &TreeNode, out: &mut BTreeSet<OpConstraint>) {
    if node.children.len() >= 2 {
        let first = side_terms(&node.children[0], node.side);
        for c in &node.children[1..] {
            if let Some(k) = OpConstraint::new(node.side, first.clone(), side_terms(c, node.side)) {
                out.insert(k);
            }
        }
    }
    for c in &node.children {
        collect_structural(c, out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("cannot merge an empty set of trees")]
    Empty,
    #[error("trees to merge must share depth and left-most side")]
    ShapeMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    pub root: TreeNode,
    pub ledger: Vec<OpConstraint>,
    pub depth: usize,
    pub id: usize,
}

impl Tree {
    pub fn left_side(&self) -> Side {
        self.root.side
    }

    /// The two left-most nodes: the root and its first child.
    pub fn double_root(&self) -> (&TreeNode, &TreeNode) {
        (&self.root, &self.root.children[0])
    }

    pub fn leaves(&self) -> Vec<LeafRef> {
        self.root.leaves()
    }

    /// The tree is `X → Y → Z` with single children and an internal `Z`: a
    /// copy of the subtree at `Z` padded by two levels.
    pub fn is_padded(&self) -> bool {
        match self.root.children.as_slice() {
            [y] => matches!(y.children.as_slice(), [z] if !z.is_leaf()),
            _ => false,
        }
    }

    /// Deterministic text form with copy indices: one line for the node
    /// structure, then one line per ledger constraint.
    pub fn to_canonical_text(&self) -> String {
        let mut s = format!("tree {} depth {}\n", self.id, self.depth);
        write_node_text(&self.root, &mut s);
        s.push('\n');
        for c in &self.ledger {
            let _ = writeln!(s, "  {c}");
        }
        s
    }
}

fn write_node_text(node: &TreeNode, out: &mut String) {
    match node.leaf {
        Some(r) => {
            let _ = write!(out, "{}:{r}", node.side);
        }
        None => {
            let terms: Vec<String> = node.label.iter().map(LeafRef::to_string).collect();
            let _ = write!(out, "{}{{{}}}(", node.side, terms.join(","));
            for (i, c) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_node_text(c, out);
            }
            out.push(')');
        }
    }
}

/// One two-node tree per outcome: a B node over an A leaf `(j, 1)`.
pub fn seed_trees(m: &SeparableMeasurement) -> Vec<Tree> {
    (1..=m.len())
        .map(|j| {
            let leaf = TreeNode::leaf(Side::A, LeafRef::new(j, 1));
            Tree { root: TreeNode::internal(Side::B, vec![leaf]), ledger: Vec::new(), depth: 2, id: j - 1 }
        })
        .collect()
}

/// Merges the left-most nodes of `trees` into one node, reissues copy
/// indices, records the equalities between the merged labels and attaches
/// a new node of the opposite side on the left. A single tree is only
/// extended.
pub fn merge_and_extend(trees: &[&Tree], id: usize) -> Result<Tree, TreeError> {
    let first = trees.first().ok_or(TreeError::Empty)?;
    let side = first.left_side();
    if trees.iter().any(|t| t.left_side() != side || t.depth != first.depth) {
        return Err(TreeError::ShapeMismatch);
    }
    // move every member into a private index space first
    let mut counter = 0usize;
    let mut children = Vec::new();
    let mut ledger = BTreeSet::new();
    let mut root_labels = Vec::new();
    for t in trees {
        let mut map = BTreeMap::new();
        for r in t.leaves() {
            counter += 1;
            map.insert(r, LeafRef::new(r.j, counter));
        }
        let mut root = t.root.clone();
        root.remap(&map);
        root_labels.push(root.label.clone());
        ledger.extend(t.ledger.iter().filter_map(|c| c.remap(&map)));
        children.extend(root.children);
    }
    for l in &root_labels[1..] {
        ledger.extend(OpConstraint::new(side, root_labels[0].clone(), l.clone()));
    }
    let mut merged = TreeNode { side, label: Terms::new(), children, leaf: None };
    merged.canonicalize();
    let mut root = TreeNode { side: side.other(), label: Terms::new(), children: vec![merged], leaf: None };

    // reissue k per j in depth-first order
    let mut next_k: BTreeMap<usize, usize> = BTreeMap::new();
    let mut map = BTreeMap::new();
    for r in root.leaves() {
        let k = next_k.entry(r.j).or_insert(0);
        *k += 1;
        map.insert(r, LeafRef::new(r.j, *k));
    }
    root.remap(&map);
    root.relabel();
    let ledger: BTreeSet<OpConstraint> = ledger.iter().filter_map(|c| c.remap(&map)).collect();
    Ok(Tree { root, ledger: ledger.into_iter().collect(), depth: first.depth + 1, id })
}

/// Distinct outcome indices on the leaves.
pub fn covered_outcomes(t: &Tree) -> BTreeSet<usize> {
    t.leaves().into_iter().map(|r| r.j).collect()
}

/// Dedup key: k-free canonical form (with single-child padding chains
/// collapsed) plus the outcome set of the left-most label.
pub fn equivalence_signature(t: &Tree) -> String {
    let mut s = String::new();
    write_canonical(&t.root, &mut s, true);
    let js: BTreeSet<usize> = t.root.label.iter().map(|r| r.j).collect();
    let js: Vec<String> = js.iter().map(usize::to_string).collect();
    format!("{s}|{}", js.join(","))
}

/// A removed leaf whose `side` coefficient was added onto `kept`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Absorption {
    pub removed: LeafRef,
    pub kept: LeafRef,
    pub side: Side,
}

/// Collapses congruent sibling subtrees, keeping the first of each class.
pub fn collapse_congruent(t: &Tree) -> Tree {
    collapse_congruent_traced(t).0
}

/// Like [`collapse_congruent`], also returning which leaves were absorbed
/// into which, in the order the absorptions happened. Applying the trace
/// to a solution (adding the `side` coefficient of `removed` onto `kept`)
/// yields a solution of the collapsed tree.
pub fn collapse_congruent_traced(t: &Tree) -> (Tree, Vec<Absorption>) {
    let mut root = t.root.clone();
    let mut trace = Vec::new();
    while collapse_node(&mut root, &mut trace) {}
    root.relabel();
    let ledger = structural_ledger(&root);
    let depth = root.depth();
    (Tree { root, ledger, depth, id: t.id }, trace)
}

fn collapse_node(node: &mut TreeNode, trace: &mut Vec<Absorption>) -> bool {
    let mut changed = false;
    let keys: Vec<String> = node.children.iter().map(canonical_key).collect();
    let mut kept_at: BTreeMap<&str, usize> = BTreeMap::new();
    let mut drop = vec![false; keys.len()];
    for (i, key) in keys.iter().enumerate() {
        match kept_at.get(key.as_str()) {
            None => {
                kept_at.insert(key, i);
            }
            Some(&k) => {
                drop[i] = true;
                let side = node.side.other();
                for (removed, kept) in node.children[i].leaves().into_iter().zip(node.children[k].leaves()) {
                    trace.push(Absorption { removed, kept, side });
                }
                changed = true;
            }
        }
    }
    if changed {
        let mut idx = 0;
        node.children.retain(|_| {
            idx += 1;
            !drop[idx - 1]
        });
    }
    for c in &mut node.children {
        changed |= collapse_node(c, trace);
    }
    changed
}

/// Solved coefficients: `q̂` for side A and `p̂` for side B.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Coefficients {
    pub q: BTreeMap<LeafRef, Q>,
    pub p: BTreeMap<LeafRef, Q>,
}

impl Coefficients {
    pub fn side(&self, side: Side) -> &BTreeMap<LeafRef, Q> {
        match side {
            Side::A => &self.q,
            Side::B => &self.p,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut BTreeMap<LeafRef, Q> {
        match side {
            Side::A => &mut self.q,
            Side::B => &mut self.p,
        }
    }

    /// `r̂_jk = q̂_jk p̂_jk`.
    pub fn weight(&self, r: &LeafRef) -> Q {
        &self.q[r] * &self.p[r]
    }

    /// Applies a collapse trace.
    pub fn absorb(&mut self, trace: &[Absorption]) {
        for a in trace {
            let add = self.side(a.side)[&a.removed].clone();
            *self.side_mut(a.side).get_mut(&a.kept).expect("kept leaf has a coefficient") += add;
        }
    }
}

/// `Σ_{r ∈ terms} c_r X_{j(r)}` on `side`.
pub fn evaluate_terms(terms: &Terms, side: Side, coeffs: &Coefficients, m: &SeparableMeasurement) -> HermitianOp {
    let mut acc = HermitianOp::zero(m.dim(side));
    for r in terms {
        let c = &coeffs.side(side)[r];
        if !c.is_zero() {
            acc = acc.add(&m.op(side, r.j).scale(c)).expect("same dimension");
        }
    }
    acc
}

/// Why an exact protocol check failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolCheckError {
    #[error("missing or nonpositive coefficient for leaf {0}")]
    BadCoefficient(LeafRef),
    #[error("branch operators disagree at a node labelled {0}")]
    BranchMismatch(String),
    #[error("root on side {0} is not the identity")]
    RootNotIdentity(Side),
    #[error("outcome {0} is not covered")]
    Uncovered(usize),
    #[error("leaf products do not sum to the identity")]
    Incomplete,
}

/// Exact check of a solved tree: positive coefficients, equal branch
/// operators at every node, identity roots, full coverage and completeness.
pub fn check_protocol(t: &Tree, coeffs: &Coefficients, m: &SeparableMeasurement) -> Result<(), ProtocolCheckError> {
    let leaves = t.leaves();
    for r in &leaves {
        for side in [Side::A, Side::B] {
            match coeffs.side(side).get(r) {
                Some(c) if c.is_positive() => {}
                _ => return Err(ProtocolCheckError::BadCoefficient(*r)),
            }
        }
    }
    check_branches(&t.root, coeffs, m)?;
    let (n, first) = t.double_root();
    for node in [n, first] {
        let v = evaluate_terms(&side_terms(node, node.side), node.side, coeffs, m);
        if v != HermitianOp::identity(m.dim(node.side)) {
            return Err(ProtocolCheckError::RootNotIdentity(node.side));
        }
    }
    let covered: BTreeSet<usize> = leaves.iter().map(|r| r.j).collect();
    if let Some(j) = (1..=m.len()).find(|j| !covered.contains(j)) {
        return Err(ProtocolCheckError::Uncovered(j));
    }
    let weights: Vec<(usize, Q)> = leaves.iter().map(|r| (r.j, coeffs.weight(r))).collect();
    if m.weighted_sum(&weights) != HermitianOp::identity(m.d_a() * m.d_b()) {
        return Err(ProtocolCheckError::Incomplete);
    }
    Ok(())
}

fn check_branches(node: &TreeNode, coeffs: &Coefficients, m: &SeparableMeasurement) -> Result<(), ProtocolCheckError> {
    if node.children.len() >= 2 {
        let v0 = evaluate_terms(&side_terms(&node.children[0], node.side), node.side, coeffs, m);
        for c in &node.children[1..] {
            if evaluate_terms(&side_terms(c, node.side), node.side, coeffs, m) != v0 {
                let terms: Vec<String> = node.label.iter().map(LeafRef::to_string).collect();
                return Err(ProtocolCheckError::BranchMismatch(terms.join(",")));
            }
        }
    }
    node.children.iter().try_for_each(|c| check_branches(c, coeffs, m))
}

/// Removes every subtree whose own-side operator vanishes under `coeffs`,
/// then internal nodes left without children. The ledger is regenerated
/// from the remaining structure. `None` if a root disappears.
pub fn prune_zero(t: &Tree, coeffs: &Coefficients, m: &SeparableMeasurement) -> Option<Tree> {
    fn go(node: &TreeNode, coeffs: &Coefficients, m: &SeparableMeasurement) -> Option<TreeNode> {
        if evaluate_terms(&side_terms(node, node.side), node.side, coeffs, m).is_zero() {
            return None;
        }
        if node.is_leaf() {
            return Some(node.clone());
        }
        let children: Vec<TreeNode> = node.children.iter().filter_map(|c| go(c, coeffs, m)).collect();
        if children.is_empty() {
            return None;
        }
        Some(TreeNode { side: node.side, label: Terms::new(), children, leaf: None })
    }
    let mut root = go(&t.root, coeffs, m)?;
    root.relabel();
    let ledger = structural_ledger(&root);
    Some(Tree { depth: root.depth(), root, ledger, id: t.id })
}

/// Ledger constraints hold exactly under `coeffs`.
pub fn ledger_holds(ledger: &[OpConstraint], coeffs: &Coefficients, m: &SeparableMeasurement) -> bool {
    ledger.iter().all(|c| evaluate_terms(&c.lhs, c.side, coeffs, m) == evaluate_terms(&c.rhs, c.side, coeffs, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::trivial_measurement;

    fn seed(j: usize) -> Tree {
        let leaf = TreeNode::leaf(Side::A, LeafRef::new(j, 1));
        Tree { root: TreeNode::internal(Side::B, vec![leaf]), ledger: vec![], depth: 2, id: j }
    }

    fn terms(v: &[(usize, usize)]) -> Terms {
        v.iter().map(|&(j, k)| LeafRef::new(j, k)).collect()
    }

    #[test]
    fn seeds() {
        let m = trivial_measurement(2, 2);
        let s = seed_trees(&m);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].root.side, Side::B);
        assert_eq!(s[0].root.label, terms(&[(1, 1)]));
        assert_eq!(s[0].root.children[0].leaf, Some(LeafRef::new(1, 1)));
    }

    #[test]
    fn merge_two_seeds() {
        let (a, b) = (seed(6), seed(7));
        let t = merge_and_extend(&[&a, &b], 10).unwrap();
        assert_eq!(t.depth, 3);
        assert_eq!(t.root.side, Side::A);
        assert_eq!(t.root.label, terms(&[(6, 1), (7, 1)]));
        assert_eq!(t.ledger, vec![OpConstraint::new(Side::B, terms(&[(6, 1)]), terms(&[(7, 1)])).unwrap()]);
        assert_eq!(t.ledger, structural_ledger(&t.root));
        assert_eq!(t.to_canonical_text().lines().nth(1).unwrap(), "A{6.1,7.1}(B{6.1}(A:6.1 A:7.1))");
    }

    #[test]
    fn singleton_extension_adds_no_constraint() {
        let t = merge_and_extend(&[&seed(4)], 1).unwrap();
        assert!(t.ledger.is_empty());
        assert_eq!(t.depth, 3);
        assert_eq!(t.root.label, terms(&[(4, 1)]));
    }

    #[test]
    fn copies_get_fresh_k() {
        let a = merge_and_extend(&[&seed(1), &seed(2)], 0).unwrap();
        let b = merge_and_extend(&[&seed(1), &seed(3)], 1).unwrap();
        let t = merge_and_extend(&[&a, &b], 2).unwrap();
        let leaves = t.leaves();
        let unique: BTreeSet<_> = leaves.iter().collect();
        assert_eq!(unique.len(), leaves.len());
        assert_eq!(leaves.iter().filter(|r| r.j == 1).count(), 2);
        assert_eq!(covered_outcomes(&t), BTreeSet::from([1, 2, 3]));
        // ledger is equivalent to the structure: every structural equality is present
        for c in structural_ledger(&t.root) {
            assert!(t.ledger.contains(&c), "missing {c}");
        }
    }

    #[test]
    fn congruence() {
        assert!(congruent(&seed(1).root, &seed(1).root));
        assert!(!congruent(&seed(1).root, &seed(2).root));
        let x = merge_and_extend(&[&seed(1), &seed(4)], 0).unwrap();
        let mut y = x.clone();
        let map: BTreeMap<_, _> =
            [(LeafRef::new(1, 1), LeafRef::new(1, 7)), (LeafRef::new(4, 1), LeafRef::new(4, 3))].into();
        y.root.remap(&map);
        assert!(congruent(&x.root, &y.root));
        assert_eq!(equivalence_signature(&x), equivalence_signature(&y));
        assert_ne!(equivalence_signature(&seed(1)), equivalence_signature(&seed(2)));
    }

    #[test]
    fn signatures_separate_merge_choices() {
        // four ways to merge three proportional B nodes
        let s: Vec<Tree> = (1..=3).map(seed).collect();
        let subsets: [&[usize]; 4] = [&[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];
        let sigs: BTreeSet<String> = subsets
            .iter()
            .map(|sub| {
                let members: Vec<&Tree> = sub.iter().map(|&i| &s[i]).collect();
                equivalence_signature(&merge_and_extend(&members, 0).unwrap())
            })
            .collect();
        assert_eq!(sigs.len(), 4);
    }

    #[test]
    fn variants_cover_all_branches() {
        let t = merge_and_extend(&[&seed(1), &seed(2)], 0).unwrap();
        // root A label: one variant; B operator of the merged node: two variants
        assert_eq!(side_term_variants(&t.root, Side::A, 8), vec![terms(&[(1, 1), (2, 1)])]);
        let merged = &t.root.children[0];
        assert_eq!(side_term_variants(merged, Side::B, 8), vec![terms(&[(1, 1)]), terms(&[(2, 1)])]);
    }

    #[test]
    fn collapse_removes_duplicate_branch() {
        // two seeds for the same outcome merged: congruent children under one B node
        let t = merge_and_extend(&[&seed(1), &seed(1), &seed(2)], 0).unwrap();
        assert!(has_congruent_children(&t.root.children[0]));
        let (c, trace) = collapse_congruent_traced(&t);
        assert_eq!(c.leaves().len(), 2);
        assert_eq!(trace, vec![Absorption { removed: LeafRef::new(1, 2), kept: LeafRef::new(1, 1), side: Side::A }]);
        assert_eq!(covered_outcomes(&c), covered_outcomes(&t));
        assert_eq!(collapse_congruent(&c), c);
    }

    #[test]
    fn collapse_without_congruence_is_identity_on_structure() {
        let t = merge_and_extend(&[&seed(1), &seed(2)], 0).unwrap();
        let c = collapse_congruent(&t);
        assert_eq!(c.root, t.root);
        assert_eq!(c.ledger, t.ledger);
    }

    #[test]
    fn padded_detection() {
        let t = merge_and_extend(&[&seed(1), &seed(2)], 0).unwrap();
        assert!(!t.is_padded());
        let once = merge_and_extend(&[&t], 1).unwrap();
        let twice = merge_and_extend(&[&once], 2).unwrap();
        // the once-extended tree shows the merged node's label again
        assert!(once.is_padded());
        assert!(twice.is_padded());
        let s = merge_and_extend(&[&seed(3)], 3).unwrap();
        assert!(!s.is_padded());
        assert!(merge_and_extend(&[&s], 4).unwrap().is_padded());
        assert_eq!(equivalence_signature(&twice), equivalence_signature(&t));
    }

    #[test]
    fn merge_shape_errors() {
        let t = merge_and_extend(&[&seed(1)], 0).unwrap();
        assert_eq!(merge_and_extend(&[&t, &seed(2)], 0).unwrap_err(), TreeError::ShapeMismatch);
        assert_eq!(merge_and_extend(&[], 0).unwrap_err(), TreeError::Empty);
    }
}
