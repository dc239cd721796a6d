//! Analysis of cut-free proofs of `TeF(s) ⊢ FsT(e)`: the shape of their
//! sequents, switching points, unfinished and rightmost paths, the index of
//! a trace along such paths, and the construction showing that no cut-free
//! cyclic proof of the counterexample exists. Bounded proof search lives in
//! [`search`].

pub mod search;

use std::collections::BTreeSet;
use std::fmt;

pub use search::{search_cut_free, search_with, SearchBounds, SearchError, SearchEvent, SearchOutcome, SearchStats};

use crate::congruence::{check_fragment_shape, is_root_like, CongruenceError, CongruenceIndex, Fragment, IndexValue};
use crate::proofgraph::{Addr, PreProof, Rule};
use crate::syntax::{Formula, InductiveSystem, Sequent};
use crate::trace::{check_gtc, find_progressing_trace, verify_trace, Lasso, TraceError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("node {0} is outside the fragment: {1}")]
    OutOfFragment(Addr, String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("the proof contains Cut at {}", join_addrs(.0))]
    NotCutFree(Vec<Addr>),
    #[error("the proof is not cycle-normal")]
    NotCycleNormal,
    #[error("the root is {found}, expected {expected}")]
    WrongRoot { expected: String, found: String },
    #[error("{0}")]
    Congruence(#[from] CongruenceError),
    #[error("{0}")]
    Trace(#[from] TraceError),
    /// A step of the construction met a situation the lemmas rule out for
    /// valid proofs.
    #[error("lemma violated: {0}")]
    LemmaViolated(String),
}

fn join_addrs(addrs: &[Addr]) -> String {
    addrs.iter().map(|a| format!("\"{a}\"")).collect::<Vec<_>>().join(", ")
}

/// The rules that can occur in a cut-free proof of the counterexample.
pub fn is_fragment_rule(frag: &Fragment, rule: &Rule) -> bool {
    match rule {
        Rule::Weak | Rule::Subst { .. } | Rule::EqLa { .. } | Rule::Bud => true,
        Rule::UnfoldRight { pred, .. } => *pred == frag.fst,
        Rule::Case { pred, .. } => *pred == frag.tef,
        _ => false,
    }
}

/// The shape assertions every node of a cut-free proof of the
/// counterexample satisfies: equalities and `TeF` atoms on the left, `FsT`
/// atoms on the right, terms `nx^n` of a constant or variable, and one of
/// the fragment rules.
pub fn check_fragment_node(frag: &Fragment, seq: &Sequent, rule: &Rule) -> Result<(), String> {
    check_fragment_shape(frag, seq).map_err(|e| e.to_string())?;
    if !is_fragment_rule(frag, rule) {
        return Err(format!("rule {rule} is not used in cut-free proofs of the counterexample"));
    }
    Ok(())
}

pub fn check_fragment(frag: &Fragment, proof: &PreProof) -> Vec<(Addr, String)> {
    proof
        .nodes
        .iter()
        .filter_map(|(a, n)| check_fragment_node(frag, &n.seq, &n.rule).err().map(|e| (a.clone(), e)))
        .collect()
}

/// Index of `TeF(t)` in `Γ`: the shift of `t` relative to `s`.
pub fn index_in(frag: &Fragment, ante: &BTreeSet<Formula>, atom: &Formula) -> Result<IndexValue, CongruenceError> {
    let t = match atom {
        Formula::Atom(p, args) if *p == frag.tef && args.len() == 1 => &args[0],
        other => return Err(CongruenceError::OutOfFragment(other.to_string())),
    };
    let idx = CongruenceIndex::build(ante, &frag.next)?;
    idx.index_of(t, &frag.start_term())
}

fn is_switching(frag: &Fragment, seq: &Sequent, rule: &Rule) -> Result<bool, CongruenceError> {
    match rule {
        Rule::Case { pred, principal, .. } if *pred == frag.tef => {
            check_fragment_shape(frag, seq)?;
            Ok(index_in(frag, &seq.ante, principal)? == IndexValue::Bot)
        }
        _ => Ok(false),
    }
}

/// Tree addresses of all `Case TeF` nodes whose principal has index ⊥.
pub fn switching_points(frag: &Fragment, proof: &PreProof) -> Result<Vec<Addr>, AnalysisError> {
    let mut out = Vec::new();
    for (a, n) in &proof.nodes {
        if is_switching(frag, &n.seq, &n.rule).map_err(|e| AnalysisError::OutOfFragment(a.clone(), e.to_string()))? {
            out.push(a.clone());
        }
    }
    Ok(out)
}

/// Child index of the right assumption of `Case` on `pred`: the case for
/// the first production with an inductive assumption.
pub fn right_assumption(system: &InductiveSystem, pred: &str) -> Option<usize> {
    system.productions_of(pred).position(|p| p.assumptions.iter().any(|a| system.is_inductive_atom(a)))
}

/// Resolve each address of an unfolding path, checking that each is a
/// premise of the previous one.
fn resolve_path(proof: &PreProof, path: &[Addr]) -> Result<Vec<Addr>, AnalysisError> {
    let mut out = Vec::with_capacity(path.len());
    for (i, sigma) in path.iter().enumerate() {
        if i > 0 && sigma.parent().as_ref() != Some(&path[i - 1]) {
            return Err(AnalysisError::InvalidPath(format!("{sigma} does not follow {}", path[i - 1])));
        }
        out.push(proof.resolve_unfolding(sigma).map_err(|e| AnalysisError::InvalidPath(e.to_string()))?);
    }
    Ok(out)
}

/// Whether a path of the unfolding starts at a root-like sequent and enters
/// the left assumption of `Case TeF` only at switching points.
pub fn is_unfinished_path(
    system: &InductiveSystem,
    frag: &Fragment,
    proof: &PreProof,
    path: &[Addr],
) -> Result<bool, AnalysisError> {
    let nodes = resolve_path(proof, path)?;
    let Some(first) = nodes.first() else {
        return Err(AnalysisError::InvalidPath("empty path".into()));
    };
    let first = &proof.nodes[first];
    if !is_root_like(frag, &first.seq)?.is_root_like {
        return Ok(false);
    }
    let right = right_assumption(system, &frag.tef);
    for (i, here) in nodes.iter().enumerate().take(nodes.len().saturating_sub(1)) {
        let n = &proof.nodes[here];
        let k = *path[i + 1].0.last().expect("non-root");
        if matches!(&n.rule, Rule::Case { pred, .. } if *pred == frag.tef)
            && Some(k) != right
            && !is_switching(frag, &n.seq, &n.rule).map_err(|e| AnalysisError::OutOfFragment(here.clone(), e.to_string()))?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Premise followed by the rightmost path out of a node, or `None` at a
/// rule without premises.
fn rightmost_child(system: &InductiveSystem, frag: &Fragment, at: &Addr, rule: &Rule) -> Result<Option<usize>, AnalysisError> {
    match rule {
        Rule::Case { pred, .. } if *pred == frag.tef => Ok(right_assumption(system, pred)),
        Rule::Weak | Rule::Subst { .. } | Rule::EqLa { .. } => Ok(Some(0)),
        Rule::UnfoldRight { pred, production, .. } if *pred == frag.fst => {
            let n = system.production(pred, *production).map_or(0, |p| p.assumptions.len());
            Ok((n > 0).then_some(0))
        }
        Rule::Axiom | Rule::EqR => Ok(None),
        other => Err(AnalysisError::OutOfFragment(at.clone(), format!("rule {other}"))),
    }
}

/// The rightmost path of the unfolding from `start` (an unfolding
/// address), with at most `max_len` nodes.
pub fn rightmost_path(
    system: &InductiveSystem,
    frag: &Fragment,
    proof: &PreProof,
    start: &Addr,
    max_len: usize,
) -> Result<Vec<Addr>, AnalysisError> {
    let mut out = Vec::new();
    let mut cur = start.clone();
    while out.len() < max_len {
        let here = proof.resolve_unfolding(&cur).map_err(|e| AnalysisError::InvalidPath(e.to_string()))?;
        out.push(cur.clone());
        match rightmost_child(system, frag, &here, &proof.nodes[&here].rule)? {
            Some(k) if proof.nodes.contains_key(&here.child(k)) => cur = cur.child(k),
            _ => break,
        }
    }
    Ok(out)
}

/// The rightmost path inside the finite tree from `start`, ending at a bud,
/// a leaf or a missing premise.
fn rightmost_tree_path(
    system: &InductiveSystem,
    frag: &Fragment,
    proof: &PreProof,
    start: &Addr,
) -> Result<Vec<Addr>, AnalysisError> {
    let mut out = vec![start.clone()];
    let mut cur = start.clone();
    loop {
        let n = &proof.nodes[&cur];
        if n.rule.is_bud() {
            return Ok(out);
        }
        match rightmost_child(system, frag, &cur, &n.rule)? {
            Some(k) if proof.nodes.contains_key(&cur.child(k)) => {
                cur = cur.child(k);
                out.push(cur.clone());
            }
            _ => return Ok(out),
        }
    }
}

/// A clause of the index table that a trace step broke.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexViolation {
    pub position: usize,
    pub clause: &'static str,
    pub before: IndexValue,
    pub after: IndexValue,
}

impl fmt::Display for IndexViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "position {}: {} -> {} breaks \"{}\"", self.position, self.before, self.after, self.clause)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexCheck {
    /// Every step obeys the table; the indices along the trace.
    Ok(Vec<IndexValue>),
    Violated(IndexViolation),
    /// The path is not an unfinished path, so the table does not apply.
    NotUnfinished,
}

/// Compute the index of each trace formula and check each step against
/// the table: ⊥ is absorbing, Weak and Subst keep the index or lose it,
/// EqLa, `FsT` unfolding and non-progressing `Case` steps keep it, and a
/// progress point adds one.
pub fn check_index_transitions(
    system: &InductiveSystem,
    frag: &Fragment,
    proof: &PreProof,
    path: &[Addr],
    trace: &[Formula],
) -> Result<IndexCheck, AnalysisError> {
    let progress: BTreeSet<usize> = verify_trace(system, proof, path, trace)?.into_iter().collect();
    if !is_unfinished_path(system, frag, proof, path)? {
        return Ok(IndexCheck::NotUnfinished);
    }
    let nodes = resolve_path(proof, path)?;
    let mut d = Vec::with_capacity(trace.len());
    for (here, tau) in nodes.iter().zip(trace) {
        let v = index_in(frag, &proof.nodes[here].seq.ante, tau)
            .map_err(|e| AnalysisError::OutOfFragment(here.clone(), e.to_string()))?;
        d.push(v);
    }
    for k in 0..d.len().saturating_sub(1) {
        let (before, after) = (d[k], d[k + 1]);
        let rule = &proof.nodes[&nodes[k]].rule;
        let violated = |clause| Ok(IndexCheck::Violated(IndexViolation { position: k, clause, before, after }));
        if before == IndexValue::Bot {
            if after != IndexValue::Bot {
                return violated("bot stays bot");
            }
            continue;
        }
        let ok = match rule {
            Rule::Weak | Rule::Subst { .. } => after == before || after == IndexValue::Bot,
            Rule::Case { .. } if progress.contains(&k) => match before {
                IndexValue::Value(v) => after == IndexValue::Value(v + 1),
                _ => false,
            },
            _ => after == before,
        };
        if !ok {
            let clause = match rule {
                Rule::Weak | Rule::Subst { .. } => "Weak and Subst keep the index or make it bot",
                Rule::Case { .. } if progress.contains(&k) => "a progress point adds one",
                Rule::Case { .. } => "Case keeps the index off progress points",
                _ => "EqLa and FsT unfolding keep the index",
            };
            return violated(clause);
        }
    }
    Ok(IndexCheck::Ok(d))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefutationOutcome {
    /// More distinct switching points than the tree has nodes: the input
    /// cannot be both valid and satisfy the trace condition.
    ContradictionFound,
    InputInvalid(String),
    /// The construction stopped at a cycle without a switching point left
    /// through its right assumption. The lasso has no infinitely
    /// progressing trace.
    GtcFailed(Lasso),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefutationReport {
    pub outcome: RefutationOutcome,
    /// The switching points built before the construction stopped, with
    /// strictly increasing heights.
    pub sigma_tildes: Vec<Addr>,
}

/// Replay the construction of a sequence of switching points of strictly
/// increasing height on a cut-free cycle-normal candidate proof of the
/// counterexample. Starting from the root, follow the rightmost path to its
/// bud `μ`, take the path `π` from the root to `μ` followed forever by the
/// cycle from `μ`'s companion, pick the lowest switching point on it whose
/// successor is its right assumption, and continue from that point's left
/// assumption.
pub fn refute_cut_free_candidate(
    system: &InductiveSystem,
    frag: &Fragment,
    proof: &PreProof,
) -> Result<RefutationReport, AnalysisError> {
    let cuts = proof.cut_nodes();
    if !cuts.is_empty() {
        return Err(AnalysisError::NotCutFree(cuts));
    }
    if !proof.is_cycle_normal() {
        return Err(AnalysisError::NotCycleNormal);
    }
    let goal = Sequent::new(
        [Formula::Atom(frag.tef.clone(), vec![frag.start_term()])],
        [Formula::Atom(frag.fst.clone(), vec![frag.end_term()])],
    );
    match proof.root() {
        Some(r) if r.seq == goal => {}
        other => {
            return Err(AnalysisError::WrongRoot {
                expected: goal.to_string(),
                found: other.map_or_else(|| "nothing".to_string(), |n| n.seq.to_string()),
            })
        }
    }
    let report = proof.check(system);
    if let Some((a, e)) = report.failures.first() {
        return Ok(RefutationReport {
            outcome: RefutationOutcome::InputInvalid(format!("node \"{a}\": {e}")),
            sigma_tildes: Vec::new(),
        });
    }
    let violations = check_fragment(frag, proof);
    if let Some((a, e)) = violations.into_iter().next() {
        return Err(AnalysisError::OutOfFragment(a, e));
    }

    let right = right_assumption(system, &frag.tef);
    let mut sigma: Vec<Addr> = Vec::new();
    let mut alpha = Addr::root();
    while sigma.len() <= proof.len() {
        let tail = rightmost_tree_path(system, frag, proof, &alpha)?;
        let mu = tail.last().expect("non-empty").clone();
        let Some(companion) = proof.buds.get(&mu).cloned() else {
            return Err(AnalysisError::LemmaViolated(format!(
                "the rightmost path from root-like node \"{alpha}\" ends at \"{mu}\" without a bud"
            )));
        };
        // π1 is the chain of prefixes of μ; π2 revisits a suffix of it
        let mut chosen = None;
        for len in 0..mu.len() {
            let node = Addr(mu.0[..len].to_vec());
            let n = &proof.nodes[&node];
            let next = mu.0[len];
            let sw = is_switching(frag, &n.seq, &n.rule).map_err(|e| AnalysisError::OutOfFragment(node.clone(), e.to_string()))?;
            if sw && Some(next) == right {
                chosen = Some(node);
                break;
            }
        }
        let Some(next) = chosen else {
            let lasso = Lasso { stem: companion.clone(), cycle: mu.0[companion.len()..].to_vec() };
            let pumps = 3.max(proof.nodes[&companion].seq.ante.len() + 1);
            if find_progressing_trace(system, proof, &lasso, pumps).is_some() || check_gtc(system, proof).holds {
                return Err(AnalysisError::LemmaViolated(format!(
                    "the path through {lasso} has no usable switching point but the trace condition holds"
                )));
            }
            return Ok(RefutationReport { outcome: RefutationOutcome::GtcFailed(lasso), sigma_tildes: sigma });
        };
        if let Some(prev) = sigma.last() {
            if next.len() <= prev.len() {
                return Err(AnalysisError::LemmaViolated(format!(
                    "switching point \"{next}\" is not higher than \"{prev}\""
                )));
            }
        }
        let left = (0..).find(|&k| Some(k) != right).expect("two cases");
        alpha = next.child(left);
        sigma.push(next);
        if !proof.nodes.contains_key(&alpha) {
            return Ok(RefutationReport {
                outcome: RefutationOutcome::InputInvalid(format!("missing left assumption \"{alpha}\"")),
                sigma_tildes: sigma,
            });
        }
    }
    Ok(RefutationReport { outcome: RefutationOutcome::ContradictionFound, sigma_tildes: sigma })
}
