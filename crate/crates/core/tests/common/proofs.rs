//! Random pre-proofs for checker and normalizer fuzzing.
//!
//! Proofs are grown top-down over a tiny system of naturals. Open leaves are
//! closed by Axiom or by a bud on any earlier inner node with the same
//! sequent, so cycles, cross-links and progress-free loops all show up.

use cyclo_core::proofgraph::{case_distinctions, check_pre_proof, Addr, PreProof, Rule};
use cyclo_core::syntax::{free_vars, name, Formula, InductiveSystem, Name, Sequent, Substitution, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub const FUZZ_DEFS: &str = "const z; fun sc 1; ordpred Q 0;\n\
pred N 1 { => N(z); N(x) => N(sc(x)); }\n\
pred E 1 { => E(z); O(x) => E(sc(x)); }\n\
pred O 1 { E(x) => O(sc(x)); }\n";

pub fn fuzz_system() -> InductiveSystem {
    InductiveSystem::parse(FUZZ_DEFS).expect("fuzz definitions parse")
}

const ROOTS: [&str; 6] = [
    "N(x) |- Q",
    "N(x), Q |- Q",
    "N(x), N(y) |- Q",
    "E(x) |- Q",
    "E(x), O(y) |- Q",
    "N(x), x = sc(y) |- Q",
];

const VARS: [&str; 5] = ["x", "y", "w", "v", "u"];

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_nodes: usize,
    /// Allow buds whose companion is not an ancestor.
    pub cross_links: bool,
    /// Produce trees without buds only.
    pub bud_free: bool,
}

fn unused_var(seq: &Sequent, prefer: &[&str]) -> Option<Name> {
    let used = free_vars(seq);
    prefer.iter().map(|v| name(v)).find(|v| !used.contains(v))
}

fn expansions(sys: &InductiveSystem, r: &mut impl Rng, seq: &Sequent) -> Vec<(Rule, Vec<Sequent>)> {
    let mut out = Vec::new();
    out.push((Rule::Weak, vec![seq.clone()]));
    let formulas: Vec<(bool, Formula)> = seq
        .ante
        .iter()
        .map(|f| (true, f.clone()))
        .chain(seq.succ.iter().map(|f| (false, f.clone())))
        .collect();
    if let Some((left, f)) = formulas.choose(r) {
        let mut child = seq.clone();
        if *left {
            child.ante.remove(f);
        } else {
            child.succ.remove(f);
        }
        out.push((Rule::Weak, vec![child]));
    }
    // dropping equalities is what lets unfolded sequents line up again
    if let Some(eq) = seq.ante.iter().find(|f| matches!(f, Formula::Eq(..))) {
        let mut child = seq.clone();
        child.ante.remove(eq);
        out.push((Rule::Weak, vec![child]));
    }
    let atoms: Vec<&Formula> = seq.ante.iter().filter(|f| sys.is_inductive_atom(f)).collect();
    if let Some(principal) = atoms.choose(r) {
        let pred = principal.predicate().unwrap().clone();
        if let Some(fresh_var) = unused_var(seq, &VARS[1..]) {
            let fresh: Vec<Vec<Name>> =
                sys.productions_of(&pred).map(|p| p.vars().iter().map(|_| fresh_var.clone()).collect()).collect();
            let keep = r.gen_bool(0.2);
            if let Ok(children) = case_distinctions(sys, seq, principal, &fresh, keep) {
                out.push((Rule::Case { pred, principal: (*principal).clone(), fresh }, children));
            }
        }
    }
    let fv: Vec<Name> = free_vars(seq).into_iter().collect();
    if let (Some(v), Some(target)) = (fv.choose(r), unused_var(seq, &VARS)) {
        let child = seq.subst(&Substitution::single(v, Term::Var(target.clone())));
        out.push((Rule::Subst { theta: Substitution::single(&target, Term::Var(v.clone())) }, vec![child]));
    }
    let q = Formula::atom("Q", vec![]);
    if !seq.ante.contains(&q) || !seq.succ.contains(&q) {
        let mut left = seq.clone();
        left.succ.insert(q.clone());
        let mut right = seq.clone();
        right.ante.insert(q.clone());
        out.push((Rule::Cut { formula: q }, vec![left, right]));
    }
    out
}

fn attempt(sys: &InductiveSystem, r: &mut impl Rng, cfg: GenConfig) -> Option<PreProof> {
    let root = sys.parse_sequent(ROOTS.choose(r).unwrap()).unwrap();
    let mut proof = PreProof::new();
    let mut open = std::collections::VecDeque::from([(Addr::root(), root)]);
    let mut count = 1;
    while let Some((addr, seq)) = open.pop_front() {
        let spare = cfg.max_nodes.saturating_sub(count);
        let companions: Vec<Addr> = proof
            .inner_nodes()
            .filter(|a| proof.nodes[*a].seq == seq && (cfg.cross_links || a.is_prefix_of(&addr)))
            .cloned()
            .collect();
        let axiom = seq.ante.intersection(&seq.succ).next().is_some();
        if !cfg.bud_free && !companions.is_empty() && (spare == 0 || r.gen_bool(0.6)) {
            let far: Vec<&Addr> = companions.iter().filter(|a| !a.is_prefix_of(&addr)).collect();
            let c = match far.choose(r) {
                Some(a) if r.gen_bool(0.7) => (*a).clone(),
                _ => companions.choose(r).unwrap().clone(),
            };
            proof.insert_bud(addr, seq, c);
            continue;
        }
        if axiom && (spare == 0 || r.gen_bool(0.4)) {
            proof.insert(addr, seq, Rule::Axiom);
            continue;
        }
        let options: Vec<_> =
            expansions(sys, r, &seq).into_iter().filter(|(_, cs)| cs.len() <= spare).collect();
        let (rule, children) = options.choose(r)?.clone();
        count += children.len();
        for (i, c) in children.into_iter().enumerate() {
            open.push_back((addr.child(i), c));
        }
        proof.insert(addr, seq, rule);
    }
    Some(proof)
}

/// A valid pre-proof with at most `cfg.max_nodes` nodes.
pub fn random_pre_proof(sys: &InductiveSystem, r: &mut impl Rng, cfg: GenConfig) -> PreProof {
    loop {
        if let Some(p) = attempt(sys, r, cfg) {
            let report = check_pre_proof(sys, &p);
            assert!(report.is_valid(), "generator produced an invalid pre-proof: {:?}\n{p:?}", report.failures);
            return p;
        }
    }
}
