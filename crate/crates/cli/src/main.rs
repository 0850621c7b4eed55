use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use locc_core::engine::{synthesize, LoccProtocol, SearchConfig, SynthesisOutcome, Verdict};
use locc_core::fixtures;
use locc_core::format::{read_measurement, serialize_measurement, to_dot, RunReport};
use locc_core::kraus::{realize, verify_instrument, DEFAULT_RANK_TOL};

#[derive(Parser)]
#[command(name = "locc", version, about = "Decide whether a separable product measurement is LOCC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a protocol implementing the measurement in FILE.
    Run {
        file: PathBuf,
        /// Maximum number of communication rounds.
        #[arg(long, default_value_t = 10)]
        max_rounds: usize,
        /// Enumerate every family exhaustively, ignoring --family-cap.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 12)]
        family_cap: usize,
        #[arg(long, default_value_t = 20_000)]
        max_trees: usize,
        /// Write the protocol tree as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the JSON run report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the canonical protocol text with solved coefficients.
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Eigenvalue cutoff for supports in the Kraus realization.
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Print a bundled measurement as a measurement file.
    Fixture {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

const INSTRUMENT_TOL: f64 = 1e-9;

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn protocol_text(p: &LoccProtocol) -> String {
    let mut s = p.tree.to_canonical_text();
    let _ = writeln!(s, "weights");
    for (r, w) in p.weights() {
        let _ = writeln!(s, "  {r} q={} p={} r={w}", p.coefficients.q[&r], p.coefficients.p[&r]);
    }
    s
}

struct RunArgs<'a> {
    file: &'a Path,
    cfg: SearchConfig,
    rank_tol: f64,
    dot: Option<&'a Path>,
    report: Option<&'a Path>,
    protocol: Option<&'a Path>,
}

fn run(args: RunArgs) -> Result<Verdict, String> {
    let start = Instant::now();
    let m = read_measurement(args.file).map_err(|e| format!("{}: {e}", args.file.display()))?;
    let outcome = synthesize(&m, &args.cfg).map_err(|e| e.to_string())?;
    let mut instrument = None;
    if let SynthesisOutcome::Protocol { protocol, .. } = &outcome {
        let kp = realize(protocol, &m, args.rank_tol).map_err(|e| format!("realization failed: {e}"))?;
        let rep = verify_instrument(&kp, &m, INSTRUMENT_TOL);
        if !rep.passed {
            return Err(format!("instrument check failed: {rep:?}"));
        }
        instrument = Some(rep);
        if let Some(path) = args.dot {
            write_file(path, &to_dot(&protocol.tree))?;
        }
        if let Some(path) = args.protocol {
            write_file(path, &protocol_text(protocol))?;
        }
    }
    let verdict = outcome.verdict();
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let report =
        RunReport::new(&args.file.display().to_string(), &m, &args.cfg, args.rank_tol, &outcome, instrument, wall_ms);
    if let Some(path) = args.report {
        write_file(path, &report.to_json())?;
    }
    println!("verdict: {verdict}");
    println!("rounds: {}", report.rounds_used);
    println!("trees: {}", report.trees_built);
    if let Some(p) = outcome.protocol() {
        print!("{}", protocol_text(p));
    }
    Ok(verdict)
}

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::ProtocolFound => 0,
        Verdict::NoLoccWithinL | Verdict::NoLoccAnyRounds => 2,
        Verdict::InconclusiveCapped => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { file, max_rounds, exhaustive, family_cap, max_trees, dot, report, protocol, rank_tol } => {
            if max_rounds == 0 {
                Err("--max-rounds must be at least 1".to_string())
            } else {
                let cfg = SearchConfig {
                    max_rounds,
                    exhaustive,
                    family_size_cap: family_cap,
                    max_trees,
                    ..SearchConfig::default()
                };
                run(RunArgs {
                    file: &file,
                    cfg,
                    rank_tol,
                    dot: dot.as_deref(),
                    report: report.as_deref(),
                    protocol: protocol.as_deref(),
                })
                .map(exit_code)
            }
        }
        Command::Fixture { name, output } => match fixtures::by_name(&name) {
            None => Err(format!("unknown fixture {name:?}; known: {}", fixtures::NAMES.join(", "))),
            Some(m) => {
                let text = serialize_measurement(&m);
                match output {
                    Some(path) => write_file(&path, &text).map(|_| 0),
                    None => {
                        print!("{text}");
                        Ok(0)
                    }
                }
            }
        },
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
