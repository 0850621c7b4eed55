//! Measurement files, run reports and DOT export.
//!
//! A measurement file is JSON:
//!
//! ```json
//! {"format": "locc-measurement/1", "dA": 2, "dB": 2,
//!  "outcomes": [{"A": [[["1","0"],["0","0"]], [["0","0"],["0","0"]]], "B": ...}]}
//! ```
//!
//! Every matrix entry is a `[re, im]` pair of exact fraction strings.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{SearchConfig, SearchStats, SynthesisOutcome, Verdict};
use crate::exact::{parse_scalar, AlgebraError, ExactComplex, HermitianOp};
use crate::kraus::InstrumentReport;
use crate::measurement::{MeasurementError, Outcome, SeparableMeasurement, Side};
use crate::tree::{Tree, TreeNode};

pub const MEASUREMENT_FORMAT: &str = "locc-measurement/1";
pub const REPORT_FORMAT: &str = "locc-report/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error("outcome {outcome}, side {side}, entry ({row}, {col}): malformed number {value:?}")]
    BadEntry { outcome: usize, side: Side, row: usize, col: usize, value: String },
    #[error("outcome {outcome}, side {side}: not Hermitian at entry ({row}, {col})")]
    NotHermitian { outcome: usize, side: Side, row: usize, col: usize },
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
}

pub fn read_measurement(path: &Path) -> Result<SeparableMeasurement, FormatError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    parse_measurement(&text)
}

fn schema(msg: impl Into<String>) -> FormatError {
    FormatError::Schema(msg.into())
}

fn parse_dim(doc: &Value, key: &str) -> Result<usize, FormatError> {
    match doc.get(key).and_then(Value::as_u64) {
        Some(d) if d >= 1 => Ok(d as usize),
        _ => Err(schema(format!("\"{key}\" must be a positive integer"))),
    }
}

fn parse_matrix(v: &Value, d: usize, outcome: usize, side: Side) -> Result<HermitianOp, FormatError> {
    let ctx = |msg: &str| schema(format!("outcome {outcome}, side {side}: {msg}"));
    let rows = v.as_array().ok_or_else(|| ctx("matrix must be an array of rows"))?;
    if rows.len() != d {
        return Err(ctx(&format!("expected {d} rows, found {}", rows.len())));
    }
    let mut entries = Vec::with_capacity(d * d);
    for (row, r) in rows.iter().enumerate() {
        let cols = r.as_array().ok_or_else(|| ctx(&format!("row {row} must be an array")))?;
        if cols.len() != d {
            return Err(ctx(&format!("row {row}: expected {d} entries, found {}", cols.len())));
        }
        for (col, e) in cols.iter().enumerate() {
            let bad = |value: String| FormatError::BadEntry { outcome, side, row, col, value };
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad(e.to_string()))?;
            let mut parts = Vec::with_capacity(2);
            for part in pair {
                let s = part.as_str().ok_or_else(|| bad(part.to_string()))?;
                parts.push(parse_scalar(s).ok_or_else(|| bad(s.to_string()))?);
            }
            let im = parts.pop().unwrap();
            let re = parts.pop().unwrap();
            entries.push(ExactComplex::new(re, im));
        }
    }
    HermitianOp::new(d, entries).map_err(|e| match e {
        AlgebraError::NotHermitian { row, col } => FormatError::NotHermitian { outcome, side, row, col },
        other => ctx(&other.to_string()),
    })
}

/// Exact parse; no floating point is involved.
pub fn parse_measurement(text: &str) -> Result<SeparableMeasurement, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    match doc.get("format").and_then(Value::as_str) {
        Some(MEASUREMENT_FORMAT) => {}
        Some(other) => return Err(schema(format!("unsupported format {other:?}"))),
        None => return Err(schema("missing \"format\"")),
    }
    let d_a = parse_dim(&doc, "dA")?;
    let d_b = parse_dim(&doc, "dB")?;
    let list = doc.get("outcomes").and_then(Value::as_array).ok_or_else(|| schema("\"outcomes\" must be an array"))?;
    let mut outcomes = Vec::with_capacity(list.len());
    for (i, o) in list.iter().enumerate() {
        let outcome = i + 1;
        let get = |k: &str| o.get(k).ok_or_else(|| schema(format!("outcome {outcome}: missing \"{k}\"")));
        let a = parse_matrix(get("A")?, d_a, outcome, Side::A)?;
        let b = parse_matrix(get("B")?, d_b, outcome, Side::B)?;
        outcomes.push(Outcome { a, b });
    }
    Ok(SeparableMeasurement::new(d_a, d_b, outcomes)?)
}

fn matrix_json(op: &HermitianOp) -> Value {
    serde_json::to_value(op.rows()).expect("serializable")
}

/// Inverse of [`parse_measurement`].
pub fn serialize_measurement(m: &SeparableMeasurement) -> String {
    let outcomes: Vec<Value> =
        m.outcomes().iter().map(|o| json!({"A": matrix_json(&o.a), "B": matrix_json(&o.b)})).collect();
    let doc = json!({"format": MEASUREMENT_FORMAT, "dA": m.d_a(), "dB": m.d_b(), "outcomes": outcomes});
    // one outcome per line keeps diffs readable
    let mut s = String::from("{\n");
    let _ = writeln!(s, "  \"format\": {},", doc["format"]);
    let _ = writeln!(s, "  \"dA\": {},\n  \"dB\": {},", doc["dA"], doc["dB"]);
    s.push_str("  \"outcomes\": [\n");
    for (i, o) in outcomes.iter().enumerate() {
        let sep = if i + 1 < outcomes.len() { "," } else { "" };
        let _ = writeln!(s, "    {o}{sep}");
    }
    s.push_str("  ]\n}\n");
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigSummary {
    pub max_rounds: usize,
    pub family_size_cap: usize,
    pub max_trees: usize,
    pub exhaustive: bool,
    pub rank_tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafWeight {
    pub leaf: String,
    pub q: String,
    pub p: String,
    pub r: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolSummary {
    pub round: usize,
    pub depth: usize,
    pub leaves: usize,
    pub pruned: bool,
    pub tree: String,
    pub ledger: Vec<String>,
    pub weights: Vec<LeafWeight>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub wall_ms: f64,
}

/// Machine-readable summary of one run. Field order is fixed; everything
/// except `timing` is a deterministic function of input and configuration.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub format: &'static str,
    pub input: String,
    pub outcomes: usize,
    pub verdict: Verdict,
    pub rounds_used: usize,
    pub trees_built: usize,
    pub lp_calls: usize,
    pub config: ConfigSummary,
    pub stats: SearchStats,
    pub protocol: Option<ProtocolSummary>,
    pub instrument: Option<InstrumentReport>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(
        input: &str,
        m: &SeparableMeasurement,
        cfg: &SearchConfig,
        rank_tol: f64,
        outcome: &SynthesisOutcome,
        instrument: Option<InstrumentReport>,
        wall_ms: f64,
    ) -> Self {
        let stats = outcome.stats().clone();
        let protocol = outcome.protocol().map(|p| ProtocolSummary {
            round: p.round,
            depth: p.tree.depth,
            leaves: p.tree.leaves().len(),
            pruned: p.pruned,
            tree: tree_line(&p.tree),
            ledger: p.tree.ledger.iter().map(ToString::to_string).collect(),
            weights: p
                .tree
                .leaves()
                .into_iter()
                .map(|r| LeafWeight {
                    leaf: r.to_string(),
                    q: p.coefficients.q[&r].to_string(),
                    p: p.coefficients.p[&r].to_string(),
                    r: p.coefficients.weight(&r).to_string(),
                })
                .collect(),
        });
        RunReport {
            format: REPORT_FORMAT,
            input: input.to_string(),
            outcomes: m.len(),
            verdict: outcome.verdict(),
            rounds_used: stats.rounds_used(),
            trees_built: stats.trees_built(),
            lp_calls: stats.lp_calls(),
            config: ConfigSummary {
                max_rounds: cfg.max_rounds,
                family_size_cap: cfg.family_size_cap,
                max_trees: cfg.max_trees,
                exhaustive: cfg.exhaustive,
                rank_tol,
            },
            stats,
            protocol,
            instrument,
            timing: Timing { wall_ms },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

fn tree_line(t: &Tree) -> String {
    t.to_canonical_text().lines().nth(1).unwrap_or_default().to_string()
}

/// Graphviz rendering, roots on the left. Nodes show their symbolic sums;
/// the double root also shows the identity it must equal.
pub fn to_dot(t: &Tree) -> String {
    let mut out = String::from("digraph protocol {\n  rankdir=LR;\n  node [shape=box, fontname=\"Helvetica\"];\n");
    let mut counter = 0usize;
    dot_node(&t.root, 0, &mut counter, &mut out);
    out.push_str("}\n");
    out
}

fn dot_node(node: &TreeNode, level: usize, counter: &mut usize, out: &mut String) -> usize {
    let id = *counter;
    *counter += 1;
    let sym = match node.side {
        Side::A => ('q', 'A'),
        Side::B => ('p', 'B'),
    };
    let mut label: String =
        node.label.iter().map(|r| format!("{}{}.{} {}{}", sym.0, r.j, r.k, sym.1, r.j)).collect::<Vec<_>>().join(" + ");
    if level < 2 {
        let _ = write!(label, "\\n= I_{}", node.side);
    }
    let style = if node.is_leaf() { ", style=rounded" } else { "" };
    let _ = writeln!(out, "  n{id} [label=\"{label}\"{style}];");
    for c in &node.children {
        let cid = dot_node(c, level + 1, counter, out);
        let _ = writeln!(out, "  n{id} -> n{cid};");
    }
    id
}
