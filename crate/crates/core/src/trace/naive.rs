//! A slow reference decision of the global trace condition, used to test
//! [`super::check_gtc`].
//!
//! It enumerates closed walks of length at most a cap from every inner node,
//! tracks the trace relation of each walk as a set of (start formula,
//! current formula, progressed) triples, and looks at the walk repeated
//! forever: that path has an infinitely progressing trace iff the relation
//! graph on the start node's formulas has a cycle through a progress edge.

use std::collections::{BTreeMap, BTreeSet};

use super::edge_relation;
use super::gtc::Lasso;
use crate::proofgraph::{Addr, PreProof};
use crate::syntax::{Formula, InductiveSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaiveVerdict {
    pub holds: bool,
    pub lasso: Option<Lasso>,
    pub walks_examined: usize,
}

type Relation = BTreeSet<(Formula, Formula, bool)>;

/// Whether the relation, read as a graph on formulas, has a cycle that
/// uses a progress edge.
fn has_progress_cycle(rel: &Relation) -> bool {
    let mut succ: BTreeMap<&Formula, Vec<&Formula>> = BTreeMap::new();
    for (a, b, _) in rel {
        succ.entry(a).or_default().push(b);
    }
    let reaches = |from: &Formula, to: &Formula| {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if seen.insert(v) {
                stack.extend(succ.get(v).into_iter().flatten().copied());
            }
        }
        false
    };
    rel.iter().any(|(a, b, p)| *p && reaches(b, a))
}

pub fn naive_gtc_oracle(system: &InductiveSystem, proof: &PreProof, cap: usize) -> NaiveVerdict {
    let mut walks = 0;
    let inner: Vec<Addr> = proof.inner_nodes().cloned().collect();
    for start in &inner {
        let atoms: Vec<Formula> = proof.nodes[start]
            .seq
            .ante
            .iter()
            .filter(|f| system.is_inductive_atom(f))
            .cloned()
            .collect();
        let identity: Relation = atoms.iter().map(|f| (f.clone(), f.clone(), false)).collect();
        // shortest length at which each (node, relation) state was reached
        let mut best: BTreeMap<(Addr, Relation), usize> = BTreeMap::new();
        let mut stack: Vec<(Addr, Relation, Vec<usize>)> = vec![(start.clone(), identity, Vec::new())];
        while let Some((cur, rel, walk)) = stack.pop() {
            if walk.len() >= cap {
                continue;
            }
            let node = &proof.nodes[&cur];
            for (k, c) in proof.children(&cur).iter().enumerate() {
                let target = proof.follow(c);
                if proof.is_bud(&target) || !proof.nodes.contains_key(&target) {
                    continue;
                }
                let step = edge_relation(system, &node.seq, &node.rule, k, &proof.nodes[c].seq);
                let mut next = Relation::new();
                for (a, b, p) in &rel {
                    for (x, y, q) in step.iter() {
                        if x == b {
                            next.insert((a.clone(), y.clone(), *p || q));
                        }
                    }
                }
                let mut w = walk.clone();
                w.push(k);
                if &target == start {
                    walks += 1;
                    if !has_progress_cycle(&next) {
                        return NaiveVerdict {
                            holds: false,
                            lasso: Some(Lasso { stem: start.clone(), cycle: w }),
                            walks_examined: walks,
                        };
                    }
                }
                let key = (target.clone(), next.clone());
                if best.get(&key).is_some_and(|&l| l <= w.len()) {
                    continue;
                }
                best.insert(key, w.len());
                stack.push((target, next, w));
            }
        }
    }
    NaiveVerdict { holds: true, lasso: None, walks_examined: walks }
}
