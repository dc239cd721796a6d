//! Traces along derivation edges, the global trace condition and cycle
//! normalization.

mod gtc;
pub mod naive;
mod normalize;

use std::collections::BTreeMap;

pub use gtc::{check_gtc, find_progressing_trace, GtcVerdict, Lasso, ProgressingTrace};
pub use normalize::cycle_normalize;

use crate::proofgraph::{case_additions, Addr, PreProof, Rule};
use crate::syntax::{Formula, InductiveSystem, Sequent};

/// The trace relation of one conclusion-to-premise edge: pairs of
/// antecedent inductive atoms, each marked with whether it is a progress
/// point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceGraph {
    pub pairs: BTreeMap<(Formula, Formula), bool>,
}

impl TraceGraph {
    fn add(&mut self, from: Formula, to: Formula, progress: bool) {
        *self.pairs.entry((from, to)).or_insert(false) |= progress;
    }

    /// `None` if the pair is not related, otherwise its progress flag.
    pub fn get(&self, from: &Formula, to: &Formula) -> Option<bool> {
        self.pairs.get(&(from.clone(), to.clone())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Formula, &Formula, bool)> {
        self.pairs.iter().map(|((a, b), p)| (a, b, *p))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("node {0} does not exist or has no premise {1}")]
    InvalidNode(Addr, usize),
    #[error("position {position}: {reason}")]
    Broken { position: usize, reason: String },
}

/// The trace relation for premise `child_index` of a rule application.
pub fn edge_relation(
    system: &InductiveSystem,
    conclusion: &Sequent,
    rule: &Rule,
    child_index: usize,
    child: &Sequent,
) -> TraceGraph {
    let mut g = TraceGraph::default();
    let inductive = |f: &&Formula| system.is_inductive_atom(f);
    match rule {
        Rule::Subst { theta } => {
            for tau in child.ante.iter().filter(inductive) {
                let inst = tau.subst(theta);
                if conclusion.ante.contains(&inst) {
                    g.add(inst, tau.clone(), false);
                }
            }
        }
        Rule::EqLa { template, .. } => {
            let (s1, s2) = rule.eqla_substs().expect("EqLa");
            for phi in template.ante.iter().filter(inductive) {
                let (a, b) = (phi.subst(&s1), phi.subst(&s2));
                if conclusion.ante.contains(&a) && child.ante.contains(&b) {
                    g.add(a, b, false);
                }
            }
        }
        Rule::Case { pred, principal, fresh } => {
            for tau in conclusion.ante.iter().filter(inductive) {
                if child.ante.contains(tau) {
                    g.add(tau.clone(), tau.clone(), false);
                }
            }
            let prod = system.production(pred, child_index);
            if let (Some(prod), Some(names)) = (prod, fresh.get(child_index)) {
                let (_, descendants) = case_additions(system, principal, prod, names);
                for d in descendants {
                    if child.ante.contains(&d) {
                        g.add(principal.clone(), d, true);
                    }
                }
            }
        }
        _ => {
            for tau in conclusion.ante.iter().filter(inductive) {
                if child.ante.contains(tau) {
                    g.add(tau.clone(), tau.clone(), false);
                }
            }
        }
    }
    g
}

/// The trace relation from node `node` to its premise `child`. A bud
/// premise carries the same sequent as its companion, so the relation also
/// describes the edge into the companion.
pub fn trace_graph(
    system: &InductiveSystem,
    proof: &PreProof,
    node: &Addr,
    child: usize,
) -> Result<TraceGraph, TraceError> {
    let invalid = || TraceError::InvalidNode(node.clone(), child);
    let n = proof.node(node).ok_or_else(invalid)?;
    let c = proof.node(&node.child(child)).ok_or_else(invalid)?;
    Ok(edge_relation(system, &n.seq, &n.rule, child, &c.seq))
}

/// Check that `formulas` is a trace along `path`, given as addresses of the
/// tree-unfolding with each one a child of the previous. Returns the
/// positions `i` such that the step from `i` to `i + 1` is a progress point.
pub fn verify_trace(
    system: &InductiveSystem,
    proof: &PreProof,
    path: &[Addr],
    formulas: &[Formula],
) -> Result<Vec<usize>, TraceError> {
    let broken = |position, reason: String| TraceError::Broken { position, reason };
    if path.len() != formulas.len() {
        return Err(broken(0, format!("{} addresses but {} formulas", path.len(), formulas.len())));
    }
    let mut progress = Vec::new();
    for (i, (sigma, f)) in path.iter().zip(formulas).enumerate() {
        let here = proof.resolve_unfolding(sigma).map_err(|e| broken(i, e.to_string()))?;
        let node = &proof.nodes[&here];
        if !system.is_inductive_atom(f) || !node.seq.ante.contains(f) {
            return Err(broken(i, format!("{f} is not an inductive atom on the left of {}", node.seq)));
        }
        if i + 1 == path.len() {
            break;
        }
        let next = &path[i + 1];
        if next.parent().as_ref() != Some(sigma) {
            return Err(broken(i, format!("{next} is not a premise of {sigma}")));
        }
        let k = *next.0.last().expect("non-root");
        let g = trace_graph(system, proof, &here, k).map_err(|e| broken(i, e.to_string()))?;
        match g.get(f, &formulas[i + 1]) {
            None => {
                return Err(broken(i, format!("{f} does not trace to {} across {}", formulas[i + 1], node.rule)))
            }
            Some(true) => progress.push(i),
            Some(false) => {}
        }
    }
    Ok(progress)
}
