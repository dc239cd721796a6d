use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cyclo_core::analysis::search::{search_with, SearchBounds, SearchOutcome};
use cyclo_core::analysis::{
    check_index_transitions, refute_cut_free_candidate, rightmost_path, switching_points, IndexCheck,
    RefutationOutcome,
};
use cyclo_core::congruence::{is_root_like, CongruenceIndex, Fragment};
use cyclo_core::fixtures;
use cyclo_core::proofgraph::format::{from_json, to_json};
use cyclo_core::proofgraph::{Addr, PreProof};
use cyclo_core::syntax::{Formula, InductiveSystem};
use cyclo_core::trace::naive::naive_gtc_oracle;
use cyclo_core::trace::{check_gtc, cycle_normalize, trace_graph, Lasso};

#[derive(Parser)]
#[command(name = "cyclo", version, about = "Check, search and analyze cyclic proofs with inductive definitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GtcMode {
    Sizechange,
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Switching,
    Refute,
    IndexTransitions,
    Index,
    Rootlike,
}

#[derive(Subcommand)]
enum Command {
    /// Check a proof file: rule instances, buds and the trace condition.
    Check {
        /// Definitions file; defaults to the one named in the proof file.
        #[arg(long)]
        defs: Option<PathBuf>,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long, value_enum, default_value = "sizechange")]
        gtc: GtcMode,
        #[arg(long)]
        require_cut_free: bool,
    },
    /// Rewrite a proof so that every companion is an ancestor of its bud.
    Normalize {
        #[arg(long)]
        defs: Option<PathBuf>,
        #[arg(long)]
        proof: PathBuf,
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounded search for a cyclic proof of a sequent.
    Search {
        /// Definitions file; defaults to the TeF/FsT definitions.
        #[arg(long)]
        defs: Option<PathBuf>,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long, default_value_t = 6)]
        max_term_depth: u32,
        #[arg(long, default_value_t = 400)]
        max_nodes: usize,
        #[arg(long)]
        allow_cut: bool,
        /// Cut formula schema; repeatable. Defaults to TeF(nx(x)),
        /// TeF(nx(nx(x))) and FsT(nx(x)).
        #[arg(long = "cut-formula")]
        cut_formulas: Vec<String>,
        /// Write the proof found to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Reports on a cut-free proof of the counterexample.
    Analyze {
        #[arg(long)]
        defs: Option<PathBuf>,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long, value_enum)]
        report: Report,
    },
    /// Print the tree-unfolding of a proof down to a depth.
    Unfold {
        #[arg(long)]
        defs: Option<PathBuf>,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Check the shipped counterexample proof and run a short cut-free search.
    Selftest,
}

/// A finished command: its report and whether it succeeded.
struct Outcome {
    text: String,
    ok: bool,
}

const DEFAULT_POOL: [&str; 3] = ["TeF(nx(x))", "TeF(nx(nx(x)))", "FsT(nx(x))"];

const EXHAUSTED_CAVEAT: &str = "note: exhaustion only covers the stated bounds; \
it is evidence, not a proof, that no cut-free proof exists";

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_defs(path: &Path) -> Result<InductiveSystem> {
    InductiveSystem::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// The proof, its system and the `defs` field to write back out.
fn load_proof(defs: Option<&Path>, proof: &Path) -> Result<(InductiveSystem, PreProof, String)> {
    let text = read(proof)?;
    let system = defs.map(load_defs).transpose()?;
    let file = from_json(&text, system.as_ref(), proof.parent())
        .with_context(|| format!("in {}", proof.display()))?;
    Ok((file.system, file.proof, file.defs))
}

fn show_addr(a: &Addr) -> String {
    if a.is_root() {
        "root".to_string()
    } else {
        a.to_string()
    }
}

fn join_addrs(addrs: &[Addr]) -> String {
    addrs.iter().map(show_addr).collect::<Vec<_>>().join(", ")
}

fn show_lasso(l: &Lasso) -> String {
    let cycle: Vec<String> = l.cycle.iter().map(ToString::to_string).collect();
    format!("stem: {} / cycle: {}", show_addr(&l.stem), cycle.join("."))
}

fn check(system: &InductiveSystem, proof: &PreProof, gtc: GtcMode, require_cut_free: bool) -> Outcome {
    let mut text = String::new();
    let report = proof.check(system);
    if !report.is_valid() {
        let _ = writeln!(text, "invalid pre-proof");
        for (a, d) in &report.failures {
            let _ = writeln!(text, "  {}: {d}", show_addr(a));
        }
        return Outcome { text, ok: false };
    }
    let _ = writeln!(
        text,
        "valid pre-proof: {} nodes, {} buds, {}cycle-normal",
        proof.len(),
        proof.buds.len(),
        if report.cycle_normal { "" } else { "not " }
    );
    let (holds, lasso) = match gtc {
        GtcMode::Sizechange => {
            let v = check_gtc(system, proof);
            (v.holds, v.lasso)
        }
        GtcMode::Naive => {
            let v = naive_gtc_oracle(system, proof, 3 * proof.len());
            (v.holds, v.lasso)
        }
    };
    let mode = match gtc {
        GtcMode::Sizechange => "sizechange",
        GtcMode::Naive => "naive",
    };
    let _ = writeln!(text, "GTC ({mode}): {}", if holds { "PASS" } else { "FAIL" });
    if let Some(l) = lasso.filter(|_| !holds) {
        let _ = writeln!(text, "  {}", show_lasso(&l));
    }
    let cuts = &report.cut_nodes;
    if cuts.is_empty() {
        let _ = writeln!(text, "cut-free");
    } else {
        let _ = writeln!(text, "contains Cut at addresses {}", join_addrs(cuts));
    }
    let _ = writeln!(
        text,
        "summary: valid, {}, {}",
        if holds { "GTC holds" } else { "GTC fails" },
        if cuts.is_empty() { "cut-free" } else { "contains Cut" }
    );
    Outcome { text, ok: holds && (cuts.is_empty() || !require_cut_free) }
}

fn search(
    system: &InductiveSystem,
    goal: &str,
    bounds: SearchBounds,
    emit: Option<&Path>,
    defs_field: &str,
) -> Result<Outcome> {
    let goal = system.parse_sequent(goal).context("cannot parse the goal")?;
    let mut text = String::new();
    match search_with(system, &goal, &bounds, None)? {
        SearchOutcome::ProofFound(p) => {
            let _ = writeln!(text, "proof found: {} nodes, {} buds", p.len(), p.buds.len());
            let cuts = p.cut_nodes();
            if !cuts.is_empty() {
                let _ = writeln!(text, "cuts at {}", join_addrs(&cuts));
            }
            let json = to_json(defs_field, &p);
            match emit {
                Some(path) => {
                    std::fs::write(path, &json).with_context(|| format!("cannot write {}", path.display()))?;
                    let _ = writeln!(text, "written to {}", path.display());
                }
                None => text.push_str(&json),
            }
            Ok(Outcome { text, ok: true })
        }
        SearchOutcome::Exhausted(stats) => {
            let _ = writeln!(text, "exhausted up to depth {}", stats.depth_reached);
            let _ = writeln!(text, "  nodes expanded: {}", stats.nodes_expanded);
            let _ = writeln!(text, "  bud candidates: {}", stats.bud_candidates);
            let _ = writeln!(text, "  rejected by the trace condition: {}", stats.gtc_rejections);
            if !stats.is_complete() {
                let _ = writeln!(
                    text,
                    "  incomplete: {} rejections depended on earlier siblings, {} node cap hits",
                    stats.context_rejections, stats.node_cap_hits
                );
            }
            let _ = writeln!(text, "{EXHAUSTED_CAVEAT}");
            Ok(Outcome { text, ok: false })
        }
    }
}

fn analyze(system: &InductiveSystem, proof: &PreProof, report: Report) -> Result<Outcome> {
    let frag = Fragment::default();
    let mut text = String::new();
    match report {
        Report::Switching => {
            let points = switching_points(&frag, proof)?;
            let _ = writeln!(text, "{} switching points", points.len());
            for a in &points {
                let _ = writeln!(text, "  {}: {}", show_addr(a), proof.nodes[a].seq);
            }
            Ok(Outcome { text, ok: true })
        }
        Report::Refute => {
            let r = refute_cut_free_candidate(system, &frag, proof)?;
            let _ = writeln!(text, "switching points built: {}", join_addrs(&r.sigma_tildes));
            let ok = match r.outcome {
                RefutationOutcome::ContradictionFound => {
                    let _ = writeln!(text, "refuted: more switching points than nodes");
                    false
                }
                RefutationOutcome::GtcFailed(l) => {
                    let _ = writeln!(text, "refuted: GTC fails on {}", show_lasso(&l));
                    false
                }
                RefutationOutcome::InputInvalid(msg) => {
                    let _ = writeln!(text, "not a valid pre-proof: {msg}");
                    false
                }
            };
            Ok(Outcome { text, ok })
        }
        Report::Rootlike => {
            for (a, n) in &proof.nodes {
                if n.rule.is_bud() {
                    continue;
                }
                let _ = writeln!(text, "{}: {}", show_addr(a), n.seq);
                match is_root_like(&frag, &n.seq) {
                    Ok(r) => {
                        for line in r.render(&frag).lines() {
                            let _ = writeln!(text, "  {line}");
                        }
                    }
                    Err(e) => {
                        let _ = writeln!(text, "  {e}");
                    }
                }
            }
            Ok(Outcome { text, ok: true })
        }
        Report::Index => {
            for (a, n) in &proof.nodes {
                if n.rule.is_bud() {
                    continue;
                }
                let idx = CongruenceIndex::build(&n.seq.ante, &frag.next)?;
                let mut parts = Vec::new();
                for f in n.seq.ante.iter().filter(|f| f.predicate() == Some(&frag.tef)) {
                    let t = &f.terms()[0];
                    // the enumerated index honours CYCLO_SHIFT_CAP
                    let shown = match idx.index_by_enumeration(t, &frag.start_term(), None) {
                        Ok(v) => v.to_string(),
                        Err(e) => e.to_string(),
                    };
                    parts.push(format!("{f} -> {shown}"));
                }
                if parts.is_empty() {
                    parts.push(format!("no {} atoms", frag.tef));
                }
                let _ = writeln!(text, "{}: {}", show_addr(a), parts.join(", "));
            }
            Ok(Outcome { text, ok: true })
        }
        Report::IndexTransitions => index_transitions(system, &frag, proof),
    }
}

/// Index along every trace that follows the rightmost path from the root
/// for two laps' worth of nodes.
fn index_transitions(system: &InductiveSystem, frag: &Fragment, proof: &PreProof) -> Result<Outcome> {
    let mut text = String::new();
    let path = rightmost_path(system, frag, proof, &Addr::root(), 2 * proof.len() + 2)?;
    let _ = writeln!(text, "rightmost path of {} nodes", path.len());
    let root = &proof.nodes[&proof.resolve_unfolding(&Addr::root())?];
    let mut traces: Vec<Vec<Formula>> =
        root.seq.ante.iter().filter(|f| f.predicate() == Some(&frag.tef)).map(|f| vec![f.clone()]).collect();
    let mut ok = true;
    while let Some(trace) = traces.pop() {
        let i = trace.len() - 1;
        let here = proof.resolve_unfolding(&path[i])?;
        let next: Vec<Formula> = if i + 1 < path.len() {
            let k = *path[i + 1].0.last().expect("non-root");
            let g = trace_graph(system, proof, &here, k)?;
            g.iter().filter(|(a, _, _)| **a == trace[i]).map(|(_, b, _)| b.clone()).collect()
        } else {
            Vec::new()
        };
        if !next.is_empty() {
            for f in next {
                let mut t = trace.clone();
                t.push(f);
                traces.push(t);
            }
            continue;
        }
        let sub = &path[..trace.len()];
        let _ = writeln!(text, "trace from {} over {} nodes", trace[0], trace.len());
        match check_index_transitions(system, frag, proof, sub, &trace)? {
            IndexCheck::Ok(d) => {
                let ds: Vec<String> = d.iter().map(ToString::to_string).collect();
                let _ = writeln!(text, "  ok: {}", ds.join(" "));
            }
            IndexCheck::Violated(v) => {
                ok = false;
                let _ = writeln!(text, "  violated at {v}");
            }
            IndexCheck::NotUnfinished => {
                let _ = writeln!(text, "  not an unfinished path");
            }
        }
    }
    Ok(Outcome { text, ok })
}

fn unfold(proof: &PreProof, depth: usize) -> Result<Outcome> {
    let mut text = String::new();
    let mut stack = vec![Addr::root()];
    while let Some(sigma) = stack.pop() {
        let here = proof.resolve_unfolding(&sigma)?;
        let n = &proof.nodes[&here];
        let via = if here == sigma { String::new() } else { format!("  (= {})", show_addr(&here)) };
        let _ = writeln!(text, "{}{}: {}   [{}]{via}", "  ".repeat(sigma.len()), show_addr(&sigma), n.seq, n.rule);
        if sigma.len() < depth {
            let kids = proof.children(&here).len();
            for k in (0..kids).rev() {
                stack.push(sigma.child(k));
            }
        }
    }
    Ok(Outcome { text, ok: true })
}

fn selftest() -> Result<Outcome> {
    let sys = fixtures::tef_fst();
    let mut out = check(&sys, &fixtures::counterexample_proof(), GtcMode::Sizechange, false);
    let bounds = SearchBounds::cut_free(6, 6);
    match search_with(&sys, &fixtures::counterexample_goal(), &bounds, None)? {
        SearchOutcome::Exhausted(s) => {
            let _ = writeln!(out.text, "cut-free search to depth 6: exhausted ({} nodes expanded)", s.nodes_expanded);
        }
        SearchOutcome::ProofFound(_) => {
            let _ = writeln!(out.text, "cut-free search to depth 6: unexpected proof found");
            out.ok = false;
        }
    }
    let _ = writeln!(out.text, "selftest: {}", if out.ok { "PASS" } else { "FAIL" });
    Ok(out)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Check { defs, proof, gtc, require_cut_free } => {
            let (sys, p, _) = load_proof(defs.as_deref(), &proof)?;
            Ok(check(&sys, &p, gtc, require_cut_free))
        }
        Command::Normalize { defs, proof, out } => {
            let (_, p, defs_field) = load_proof(defs.as_deref(), &proof)?;
            let json = to_json(&defs_field, &cycle_normalize(&p));
            match out {
                Some(path) => {
                    std::fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?;
                    Ok(Outcome { text: format!("written to {}\n", path.display()), ok: true })
                }
                None => Ok(Outcome { text: json, ok: true }),
            }
        }
        Command::Search { defs, goal, max_depth, max_term_depth, max_nodes, allow_cut, cut_formulas, emit } => {
            let (sys, defs_field) = match &defs {
                Some(path) => {
                    let text = read(path)?;
                    let sys = InductiveSystem::parse(&text).with_context(|| format!("in {}", path.display()))?;
                    (sys, text)
                }
                None => (fixtures::tef_fst(), fixtures::TEF_FST_DEFS.to_string()),
            };
            let mut bounds = SearchBounds::cut_free(max_depth, max_term_depth);
            bounds.max_nodes = max_nodes;
            if allow_cut {
                let texts: Vec<String> = if cut_formulas.is_empty() {
                    DEFAULT_POOL.iter().map(|s| s.to_string()).collect()
                } else {
                    cut_formulas
                };
                let pool = texts
                    .iter()
                    .map(|f| sys.parse_formula(f).with_context(|| format!("cut formula {f}")))
                    .collect::<Result<Vec<_>>>()?;
                bounds = bounds.with_cuts(pool);
            } else if !cut_formulas.is_empty() {
                bail!("--cut-formula needs --allow-cut");
            }
            search(&sys, &goal, bounds, emit.as_deref(), &defs_field)
        }
        Command::Analyze { defs, proof, report } => {
            let (sys, p, _) = load_proof(defs.as_deref(), &proof)?;
            // the proof loaded fine, so analysis errors are about its content
            Ok(analyze(&sys, &p, report).unwrap_or_else(|e| Outcome { text: format!("{e:#}\n"), ok: false }))
        }
        Command::Unfold { defs, proof, depth } => {
            let (_, p, _) = load_proof(defs.as_deref(), &proof)?;
            unfold(&p, depth)
        }
        Command::Selftest => selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
