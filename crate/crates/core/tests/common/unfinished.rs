//! Suites for unfinished paths, run on the partial trees a cut-free search
//! for the counterexample builds, plus a few hand-made trees.

use std::collections::{BTreeMap, HashSet};
use std::hash::{DefaultHasher, Hash, Hasher};

use cyclo_core::analysis::search::{search_with, SearchBounds, SearchEvent, SearchOutcome, SearchStats};
use cyclo_core::analysis::{
    check_fragment, check_fragment_node, check_index_transitions, is_unfinished_path, right_assumption,
    rightmost_path, switching_points, IndexCheck,
};
use cyclo_core::congruence::{is_root_like, Fragment, IndexValue};
use cyclo_core::fixtures;
use cyclo_core::proofgraph::{Addr, PreProof, Rule};
use cyclo_core::syntax::{Formula, InductiveSystem};
use cyclo_core::trace::{find_progressing_trace, trace_graph, verify_trace, Lasso};

use super::SuiteResult;

/// Distinct partial trees seen at bud candidates, split by verdict.
#[derive(Debug, Default)]
pub struct Snapshots {
    pub accepted: Vec<PreProof>,
    pub rejected: Vec<PreProof>,
    pub stats: SearchStats,
    /// Nodes checked against the fragment shapes, and the failures.
    pub fragment: SuiteResult,
}

fn fingerprint(p: &PreProof) -> u64 {
    let mut h = DefaultHasher::new();
    format!("{p:?}").hash(&mut h);
    h.finish()
}

/// Run the cut-free search for the counterexample up to `depth`, keeping at
/// most `cap` snapshots of each kind and checking the fragment shapes of
/// every node the search creates.
pub fn search_snapshots(depth: usize, cap: usize) -> Snapshots {
    let sys = fixtures::tef_fst();
    let frag = Fragment::default();
    let mut out = Snapshots::default();
    let mut seen = HashSet::new();
    let mut observe = |e: &SearchEvent<'_>| match e {
        SearchEvent::Expanded { proof, addr } => {
            let n = &proof.nodes[*addr];
            out.fragment.cases += 1;
            if let Err(msg) = check_fragment_node(&frag, &n.seq, &n.rule) {
                out.fragment.fail(format!("{addr}: {} by {}: {msg}", n.seq, n.rule));
            }
        }
        SearchEvent::BudCandidate { proof, accepted, .. } => {
            out.fragment.cases += proof.len();
            for (a, msg) in check_fragment(&frag, proof) {
                out.fragment.fail(format!("{a}: {msg}"));
            }
            let bucket = if *accepted { &mut out.accepted } else { &mut out.rejected };
            if bucket.len() < cap && seen.insert(fingerprint(proof)) {
                bucket.push((*proof).clone());
            }
        }
    };
    let bounds = SearchBounds::cut_free(depth, 6);
    let outcome =
        search_with(&sys, &fixtures::counterexample_goal(), &bounds, Some(&mut observe)).expect("bounds are valid");
    match outcome {
        SearchOutcome::Exhausted(stats) => out.stats = stats,
        SearchOutcome::ProofFound(p) => out.fragment.fail(format!("cut-free proof found: {p:?}")),
    }
    out
}

fn is_tef_case(frag: &Fragment, rule: &Rule) -> bool {
    matches!(rule, Rule::Case { pred, .. } if *pred == frag.tef)
}

/// Unfinished paths from every root-like inner node, following the
/// definition step by step, up to `max_len` nodes. Each returned path is
/// maximal within the bound. Every node reached is checked to be root-like.
fn unfinished_paths(
    sys: &InductiveSystem,
    frag: &Fragment,
    p: &PreProof,
    max_len: usize,
    cap: usize,
    res: &mut SuiteResult,
) -> Vec<Vec<Addr>> {
    let right = right_assumption(sys, &frag.tef);
    let mut out = Vec::new();
    let starts: Vec<Addr> = p
        .inner_nodes()
        .filter(|a| is_root_like(frag, &p.nodes[*a].seq).is_ok_and(|r| r.is_root_like))
        .cloned()
        .collect();
    // a node's sequent does not depend on the path that reaches it
    let mut checked: HashSet<Addr> = HashSet::new();
    let switching: HashSet<Addr> = switching_points(frag, p).unwrap_or_default().into_iter().collect();
    for start in starts {
        let mut stack = vec![vec![start]];
        while let Some(path) = stack.pop() {
            if out.len() >= cap {
                return out;
            }
            let last = path.last().unwrap();
            let here = p.resolve_unfolding(last).expect("paths stay in the unfolding");
            let node = &p.nodes[&here];
            res.cases += 1;
            if checked.insert(here.clone()) {
                match is_root_like(frag, &node.seq) {
                    Ok(r) if r.is_root_like => {}
                    Ok(r) => res.fail(format!("{last} on an unfinished path is not root-like: {:?}", r.failed)),
                    Err(e) => res.fail(format!("{last}: {e}")),
                }
            }
            let mut extended = false;
            if path.len() < max_len {
                let switching = switching.contains(&here);
                for k in 0..p.children(&here).len() {
                    if is_tef_case(frag, &node.rule) && Some(k) != right && !switching {
                        continue;
                    }
                    let mut next = path.clone();
                    next.push(last.child(k));
                    stack.push(next);
                    extended = true;
                }
            }
            if !extended {
                out.push(path);
            }
        }
    }
    out
}

/// Every node on every unfinished path is root-like, and the enumerated
/// paths are unfinished by the library's own test.
pub fn invariant(trees: &[PreProof], res: &mut SuiteResult) {
    let sys = fixtures::tef_fst();
    let frag = Fragment::default();
    for p in trees {
        for path in unfinished_paths(&sys, &frag, p, 2 * p.len() + 2, 200, res) {
            if !is_unfinished_path(&sys, &frag, p, &path).unwrap_or(false) {
                res.fail(format!("enumerated path {path:?} is not unfinished: {p:?}"));
            }
        }
    }
}

/// Which clause of the index table a step falls under.
fn clause(frag: &Fragment, sys: &InductiveSystem, rule: &Rule, k: usize, progress: bool, before: IndexValue, after: IndexValue) -> &'static str {
    if before == IndexValue::Bot {
        return "bot stays bot";
    }
    match rule {
        Rule::Weak | Rule::Subst { .. } if after == IndexValue::Bot => "weak/subst to bot",
        Rule::Weak | Rule::Subst { .. } => "weak/subst keep",
        Rule::EqLa { .. } => "eqla keeps",
        Rule::UnfoldRight { .. } => "fst unfolding keeps",
        Rule::Case { .. } if progress => "progress adds one",
        Rule::Case { .. } if Some(k) == right_assumption(sys, &frag.tef) => "right case keeps",
        Rule::Case { .. } => "left case keeps",
        _ => "other",
    }
}

pub const INDEX_CLAUSES: [&str; 8] = [
    "bot stays bot",
    "weak/subst to bot",
    "weak/subst keep",
    "eqla keeps",
    "fst unfolding keeps",
    "progress adds one",
    "right case keeps",
    "left case keeps",
];

/// All traces along `path` that start at a `TeF` atom of its first node, cut
/// short where a trace cannot continue.
fn traces_along(sys: &InductiveSystem, p: &PreProof, path: &[Addr], cap: usize) -> Vec<Vec<Formula>> {
    let frag = Fragment::default();
    let first = p.resolve_unfolding(&path[0]).unwrap();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Formula>> = p.nodes[&first]
        .seq
        .ante
        .iter()
        .filter(|f| f.predicate() == Some(&frag.tef))
        .map(|f| vec![f.clone()])
        .collect();
    while let Some(t) = stack.pop() {
        if out.len() >= cap {
            break;
        }
        let i = t.len() - 1;
        if i + 1 == path.len() {
            out.push(t);
            continue;
        }
        let here = p.resolve_unfolding(&path[i]).unwrap();
        let k = *path[i + 1].0.last().unwrap();
        let g = trace_graph(sys, p, &here, k).expect("edge exists");
        let nexts: Vec<&Formula> = g.iter().filter(|(a, _, _)| *a == &t[i]).map(|(_, b, _)| b).collect();
        for b in &nexts {
            let mut u = t.clone();
            u.push((*b).clone());
            stack.push(u);
        }
        if nexts.is_empty() {
            out.push(t);
        }
    }
    out
}

/// Check the index table on every trace along every unfinished path and
/// count how often each clause was exercised.
pub fn index_table(trees: &[PreProof], res: &mut SuiteResult, coverage: &mut BTreeMap<&'static str, usize>) {
    let sys = fixtures::tef_fst();
    let frag = Fragment::default();
    let mut scratch = SuiteResult::default();
    for p in trees {
        for path in unfinished_paths(&sys, &frag, p, 2 * p.len() + 2, 40, &mut scratch) {
            for trace in traces_along(&sys, p, &path, 20) {
                let sub = &path[..trace.len()];
                res.cases += 1;
                let progress = match verify_trace(&sys, p, sub, &trace) {
                    Ok(v) => v,
                    Err(e) => {
                        res.fail(format!("enumerated trace rejected: {e}"));
                        continue;
                    }
                };
                match check_index_transitions(&sys, &frag, p, sub, &trace) {
                    Ok(IndexCheck::Ok(d)) => {
                        for k in 0..d.len().saturating_sub(1) {
                            let here = p.resolve_unfolding(&sub[k]).unwrap();
                            let child = *sub[k + 1].0.last().unwrap();
                            let c = clause(&frag, &sys, &p.nodes[&here].rule, child, progress.contains(&k), d[k], d[k + 1]);
                            *coverage.entry(c).or_default() += 1;
                        }
                    }
                    Ok(other) => res.fail(format!("{other:?} on {sub:?} / {trace:?}: {p:?}")),
                    Err(e) => res.fail(format!("{e} on {sub:?}")),
                }
            }
        }
    }
}

/// Simple cycles of the cyclic graph, each as (start node, child indices).
/// Every rotation is listed, since each gives a different stem.
fn simple_cycles(p: &PreProof, cap: usize) -> Vec<(Addr, Vec<usize>)> {
    let inner: Vec<Addr> = p.inner_nodes().cloned().collect();
    let pos: BTreeMap<&Addr, usize> = inner.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut cycles = Vec::new();
    for (si, start) in inner.iter().enumerate() {
        let mut stack: Vec<(Addr, Vec<usize>, Vec<Addr>)> = vec![(start.clone(), Vec::new(), vec![start.clone()])];
        while let Some((cur, ks, seen)) = stack.pop() {
            for (k, succ) in p.successors(&cur).into_iter().enumerate() {
                let Some(&j) = pos.get(&succ) else { continue };
                if j < si {
                    continue;
                }
                let mut ks2 = ks.clone();
                ks2.push(k);
                if succ == *start {
                    cycles.push((start.clone(), ks2));
                } else if !seen.contains(&succ) {
                    let mut seen2 = seen.clone();
                    seen2.push(succ.clone());
                    stack.push((succ, ks2, seen2));
                }
            }
        }
        if cycles.len() >= cap {
            break;
        }
    }
    let mut out = Vec::new();
    for (start, ks) in cycles {
        let mut at = start;
        for r in 0..ks.len() {
            let rotated: Vec<usize> = ks[r..].iter().chain(&ks[..r]).copied().collect();
            out.push((at.clone(), rotated));
            at = p.follow(&at.child(ks[r]));
        }
    }
    out
}

/// For every lasso of the graph read as an infinite path from a root-like
/// tree ancestor: if the path is unfinished and carries an infinitely
/// progressing trace, its cycle passes a switching point into the right
/// assumption. Without such a step no progressing trace may exist, and on
/// trees accepted by the search every unfinished lasso must have one.
pub fn switching_on_lassos(trees: &[PreProof], require_switch: bool, res: &mut SuiteResult) {
    let sys = fixtures::tef_fst();
    let frag = Fragment::default();
    let right = right_assumption(&sys, &frag.tef);
    for p in trees {
        let switching: Vec<Addr> = switching_points(&frag, p).unwrap_or_default();
        for (v, cycle) in simple_cycles(p, 50) {
            let lasso = Lasso { stem: v.clone(), cycle: cycle.clone() };
            let pumped = lasso.path(2);
            let mut ancestors: Vec<Addr> = (0..=v.len()).map(|n| Addr(v.0[..n].to_vec())).collect();
            ancestors.retain(|u| is_root_like(&frag, &p.nodes[u].seq).is_ok_and(|r| r.is_root_like));
            for u in ancestors {
                let mut path: Vec<Addr> = (u.len()..v.len()).map(|n| Addr(v.0[..n].to_vec())).collect();
                path.extend(pumped.iter().cloned());
                if !is_unfinished_path(&sys, &frag, p, &path).unwrap_or(false) {
                    continue;
                }
                res.cases += 1;
                let cycle_nodes = &pumped[..=cycle.len()];
                let has_switch = (0..cycle.len()).any(|i| {
                    let here = p.resolve_unfolding(&cycle_nodes[i]).unwrap();
                    switching.contains(&here) && Some(cycle[i]) == right
                });
                if has_switch {
                    continue;
                }
                let n = p.nodes[&v].seq.ante.len();
                if let Some(t) = find_progressing_trace(&sys, p, &lasso, 3.max(n + 1)) {
                    res.fail(format!("lasso {lasso} from {u} has no switching step but progresses: {:?}", t.formulas));
                }
                if require_switch {
                    res.fail(format!("accepted tree has unfinished lasso {lasso} from {u} without a switching step"));
                }
            }
        }
    }
}

/// From every root-like inner node the rightmost path never stops at a
/// rule without premises within `4·|nodes|` steps. Returns how many of
/// these paths ran through a bud.
pub fn rightmost(trees: &[PreProof], res: &mut SuiteResult) -> usize {
    let sys = fixtures::tef_fst();
    let frag = Fragment::default();
    let mut through_bud = 0;
    for p in trees {
        let max = 4 * p.len();
        for a in p.inner_nodes() {
            if !is_root_like(&frag, &p.nodes[a].seq).is_ok_and(|r| r.is_root_like) {
                continue;
            }
            res.cases += 1;
            let path = match rightmost_path(&sys, &frag, p, a, max) {
                Ok(path) => path,
                Err(e) => {
                    res.fail(format!("rightmost path from {a}: {e}"));
                    continue;
                }
            };
            let last = p.resolve_unfolding(path.last().unwrap()).unwrap();
            let rule = &p.nodes[&last].rule;
            let stuck = match rule {
                Rule::Axiom | Rule::EqR => true,
                Rule::UnfoldRight { pred, production, .. } => {
                    sys.production(pred, *production).is_some_and(|pr| pr.assumptions.is_empty())
                }
                _ => false,
            };
            if stuck {
                res.fail(format!("rightmost path from {a} ends at {rule} ({last})"));
            }
            if path.iter().any(|s| p.nodes.get(s).is_none_or(|n| n.rule.is_bud())) {
                through_bud += 1;
            }
        }
    }
    through_bud
}

/// Small partial trees whose traces reach the clauses the search never
/// produces: a second `TeF` atom carried through either case, and right
/// unfolding of `FsT`.
pub fn index_fixtures() -> Vec<PreProof> {
    use cyclo_core::syntax::{name, Substitution, Term};
    let sys = fixtures::tef_fst();
    let seq = |s: &str| sys.parse_sequent(s).unwrap();
    let addr = |s: &str| s.parse::<Addr>().unwrap();
    let case = |principal: &str| Rule::Case {
        pred: name("TeF"),
        principal: sys.parse_formula(principal).unwrap(),
        fresh: vec![vec![], vec![name("y")]],
    };
    let unfold = |v: &str| Rule::UnfoldRight {
        pred: name("FsT"),
        production: 1,
        theta: Substitution::single("x", Term::var(v)),
    };

    // TeF(z) has no index, so the root is a switching point and its left
    // case continues the path
    let mut a = PreProof::new();
    a.insert(addr(""), seq("s = x, TeF(x), TeF(z) |- FsT(nx(w))"), case("TeF(z)"));
    a.insert(addr("0"), seq("s = x, TeF(x), z = e |- FsT(nx(w))"), unfold("w"));
    a.insert(addr("1"), seq("s = x, TeF(x), z = y, TeF(nx(y)) |- FsT(nx(w))"), Rule::Weak);
    a.insert(addr("0.0"), seq("s = x, TeF(x), z = e |- FsT(w)"), Rule::Weak);
    a.insert(addr("0.0.0"), seq("TeF(x), z = e |- FsT(w)"), Rule::Weak);
    a.insert(addr("1.0"), seq("s = x, TeF(x), TeF(nx(y)) |- FsT(nx(w))"), Rule::Weak);

    // TeF(nx x) has index 1: its right case progresses and TeF(x) rides along
    let mut b = PreProof::new();
    b.insert(addr(""), seq("s = x, TeF(x), TeF(nx(x)) |- FsT(e)"), case("TeF(nx(x))"));
    b.insert(addr("0"), seq("s = x, TeF(x), nx(x) = e |- FsT(e)"), Rule::Weak);
    b.insert(addr("1"), seq("s = x, TeF(x), nx(x) = y, TeF(nx(y)) |- FsT(e)"), Rule::Weak);
    b.insert(addr("1.0"), seq("s = x, TeF(x), TeF(nx(y)) |- FsT(e)"), Rule::Weak);
    vec![a, b]
}

/// The refutation construction on each hand-built candidate either
/// produces more switching points than the candidate has nodes, or stops at
/// a lasso that really violates the trace condition. In both cases the
/// switching points it built are distinct and of increasing height.
pub fn refutation(res: &mut SuiteResult) {
    use cyclo_core::analysis::{refute_cut_free_candidate, RefutationOutcome};
    use cyclo_core::trace::check_gtc;
    let sys = fixtures::tef_fst();
    let frag = Fragment::default();
    for (label, p) in fixtures::gtc_fail_candidates() {
        res.cases += 1;
        let report = match refute_cut_free_candidate(&sys, &frag, &p) {
            Ok(r) => r,
            Err(e) => {
                res.fail(format!("{label}: {e}"));
                continue;
            }
        };
        let switching = switching_points(&frag, &p).unwrap_or_default();
        for w in report.sigma_tildes.windows(2) {
            if w[0].len() >= w[1].len() {
                res.fail(format!("{label}: heights do not increase at {} then {}", w[0], w[1]));
            }
        }
        for s in &report.sigma_tildes {
            let here = p.resolve_unfolding(s).map_err(|e| e.to_string());
            if !here.as_ref().is_ok_and(|h| switching.contains(h)) {
                res.fail(format!("{label}: {s} is not a switching point"));
            }
        }
        match report.outcome {
            RefutationOutcome::ContradictionFound => {
                if report.sigma_tildes.len() <= p.len() {
                    res.fail(format!("{label}: contradiction claimed after {} points", report.sigma_tildes.len()));
                }
            }
            RefutationOutcome::GtcFailed(lasso) => {
                if check_gtc(&sys, &p).holds {
                    res.fail(format!("{label}: construction reports a failing lasso on a proof that passes"));
                }
                let n = p.resolve_unfolding(&lasso.stem).map(|a| p.nodes[&a].seq.ante.len()).unwrap_or(0);
                if let Some(t) = find_progressing_trace(&sys, &p, &lasso, 3.max(n + 1)) {
                    res.fail(format!("{label}: lasso {lasso} has progressing trace {:?}", t.formulas));
                }
            }
            RefutationOutcome::InputInvalid(msg) => res.fail(format!("{label}: {msg}")),
        }
    }
}
