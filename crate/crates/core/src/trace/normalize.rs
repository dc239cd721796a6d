//! Rebuild a pre-proof so that every companion is an ancestor of its bud.
//!
//! Inner nodes are first grouped by bisimilarity of the cyclic graph (same
//! sequent and rule, premises in the same groups in the same order). The
//! result is the tree unfolding of the quotient, cut off with a bud as soon
//! as a group repeats on the current branch. The tree-unfolding is unchanged
//! and bud-free trees come back as they went in.

use std::collections::HashMap;

use crate::proofgraph::{Addr, Node, PreProof};

fn bisimulation_classes(proof: &PreProof) -> (Vec<Addr>, HashMap<Addr, usize>) {
    let inner: Vec<Addr> = proof.inner_nodes().cloned().collect();
    let mut class: HashMap<Addr, usize> = HashMap::new();
    let mut labels: HashMap<&Node, usize> = HashMap::new();
    for a in &inner {
        let n = labels.len();
        class.insert(a.clone(), *labels.entry(&proof.nodes[a]).or_insert(n));
    }
    let mut count = labels.len();
    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next = HashMap::new();
        for a in &inner {
            let succ = proof.successors(a).iter().map(|s| class.get(s).copied().unwrap_or(usize::MAX)).collect();
            let n = ids.len();
            next.insert(a.clone(), *ids.entry((class[a], succ)).or_insert(n));
        }
        let refined = ids.len();
        class = next;
        if refined == count {
            break;
        }
        count = refined;
    }
    let mut reps: Vec<Option<Addr>> = vec![None; count];
    for a in &inner {
        reps[class[a]].get_or_insert_with(|| a.clone());
    }
    (reps.into_iter().map(|r| r.expect("every class has a member")).collect(), class)
}

pub fn cycle_normalize(proof: &PreProof) -> PreProof {
    let mut out = PreProof::new();
    let Ok(root) = proof.resolve_unfolding(&Addr::root()) else {
        return out;
    };
    let (reps, class) = bisimulation_classes(proof);
    // (output address, class, classes on the branch above it with their addresses)
    let mut stack: Vec<(Addr, usize, Vec<(usize, Addr)>)> = vec![(Addr::root(), class[&root], Vec::new())];
    while let Some((addr, c, branch)) = stack.pop() {
        let rep = &reps[c];
        let node = &proof.nodes[rep];
        if let Some((_, companion)) = branch.iter().find(|(k, _)| *k == c) {
            out.insert_bud(addr, node.seq.clone(), companion.clone());
            continue;
        }
        out.insert(addr.clone(), node.seq.clone(), node.rule.clone());
        let mut below = branch.clone();
        below.push((c, addr.clone()));
        for (i, s) in proof.successors(rep).iter().enumerate() {
            stack.push((addr.child(i), class[s], below.clone()));
        }
    }
    out
}
