//! Proofs and definitions shipped with the crate.

use crate::proofgraph::format::from_json;
use crate::proofgraph::PreProof;
use crate::syntax::{InductiveSystem, Sequent};

/// Definitions of `TeF` and `FsT`.
pub const TEF_FST_DEFS: &str = include_str!("../fixtures/tef_fst.ind");

/// A cyclic proof of `TeF(s) |- FsT(e)` using two cuts.
pub const COUNTEREX_PROOF: &str = include_str!("../fixtures/counterex.cproof");

/// Cut-free cycle-normal pre-proofs of `TeF(s) |- FsT(e)` that fail the
/// trace condition. In the first, the cycle through the switching point
/// progresses but the left case closes with an empty loop; in the second the
/// right case loops without any `Case` on the cycle.
pub const CANDIDATE_SWITCH: &str = include_str!("../fixtures/candidate_switch.cproof");
pub const CANDIDATE_STALL: &str = include_str!("../fixtures/candidate_stall.cproof");

pub fn tef_fst() -> InductiveSystem {
    InductiveSystem::parse(TEF_FST_DEFS).expect("shipped definitions parse")
}

pub fn counterexample_goal() -> Sequent {
    tef_fst().parse_sequent("TeF(s) |- FsT(e)").expect("goal parses")
}

pub fn counterexample_proof() -> PreProof {
    load(COUNTEREX_PROOF)
}

pub fn gtc_fail_candidates() -> Vec<(&'static str, PreProof)> {
    vec![("candidate_switch", load(CANDIDATE_SWITCH)), ("candidate_stall", load(CANDIDATE_STALL))]
}

fn load(text: &str) -> PreProof {
    from_json(text, Some(&tef_fst()), None).expect("shipped proof parses").proof
}
