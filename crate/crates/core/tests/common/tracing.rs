//! Suites for the trace condition checker and the normalizer, run on random
//! pre-proofs.

use cyclo_core::proofgraph::{unfoldings_equal_to_depth, Rule};
use cyclo_core::trace::naive::naive_gtc_oracle;
use cyclo_core::trace::{check_gtc, cycle_normalize, find_progressing_trace, trace_graph};

use super::proofs::{fuzz_system, random_pre_proof, GenConfig};
use super::{rng, SuiteResult};

#[derive(Debug, Default)]
pub struct GtcTally {
    pub holds: usize,
    pub fails: usize,
}

/// The size-change decision agrees with the closed-walk oracle, and every
/// failing lasso admits no progressing trace on replay.
pub fn gtc_agreement(cases: usize, seed: u64) -> (SuiteResult, GtcTally) {
    let sys = fuzz_system();
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    let mut tally = GtcTally::default();
    let cfg = GenConfig { max_nodes: 12, cross_links: true, bud_free: false };
    for i in 0..cases {
        let p = random_pre_proof(&sys, &mut r, cfg);
        res.cases += 1;
        let fast = check_gtc(&sys, &p);
        let slow = naive_gtc_oracle(&sys, &p, 3 * p.len());
        if fast.holds != slow.holds {
            res.fail(format!("case {i}: size-change says {}, oracle says {}: {p:?}", fast.holds, slow.holds));
            continue;
        }
        if fast.holds {
            tally.holds += 1;
            continue;
        }
        tally.fails += 1;
        let Some(lasso) = fast.lasso else {
            res.fail(format!("case {i}: failing verdict without a lasso"));
            continue;
        };
        let stem_formulas = p.resolve_unfolding(&lasso.stem).map(|a| p.nodes[&a].seq.ante.len()).unwrap_or(0);
        let pumps = 3.max(stem_formulas + 1);
        if let Some(t) = find_progressing_trace(&sys, &p, &lasso, pumps) {
            res.fail(format!("case {i}: lasso {lasso} replays a progressing trace {:?}", t.formulas));
        }
    }
    (res, tally)
}

/// Progress is only ever flagged on edges out of Case nodes.
pub fn progress_only_on_case(cases: usize, seed: u64) -> SuiteResult {
    let sys = fuzz_system();
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    let cfg = GenConfig { max_nodes: 12, cross_links: true, bud_free: false };
    for i in 0..cases {
        let p = random_pre_proof(&sys, &mut r, cfg);
        res.cases += 1;
        for a in p.inner_nodes() {
            let is_case = matches!(p.nodes[a].rule, Rule::Case { .. });
            for k in 0..p.children(a).len() {
                let g = trace_graph(&sys, &p, a, k).expect("edge exists");
                if !is_case && g.iter().any(|(_, _, prog)| prog) {
                    res.fail(format!("case {i}: progress on a {} edge at {a}", p.nodes[a].rule.name()));
                }
            }
        }
    }
    res
}

/// Normalized proofs are cycle-normal, valid, and unfold to the same tree;
/// trees without buds are left alone.
pub fn normalization(cases: usize, seed: u64) -> SuiteResult {
    let sys = fuzz_system();
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    for i in 0..cases {
        let bud_free = i % 5 == 0;
        let cfg = GenConfig { max_nodes: 10, cross_links: true, bud_free };
        let p = random_pre_proof(&sys, &mut r, cfg);
        res.cases += 1;
        let q = cycle_normalize(&p);
        if !q.is_cycle_normal() {
            res.fail(format!("case {i}: output is not cycle-normal: {q:?}"));
        }
        if !q.check(&sys).is_valid() {
            res.fail(format!("case {i}: output is not a valid pre-proof: {q:?}"));
        }
        let depth = 2 * p.len() + 4;
        if !unfoldings_equal_to_depth(&p, &q, depth) {
            res.fail(format!("case {i}: unfoldings differ within depth {depth}: {p:?} vs {q:?}"));
        }
        if p.buds.is_empty() && q != p {
            res.fail(format!("case {i}: bud-free input changed"));
        }
    }
    res
}
