//! Bounded cyclic proof search by iterative deepening.
//!
//! Open goals are expanded depth-first. A goal can be closed by a rule
//! without premises, or turned into a bud of a strict ancestor whose
//! sequent matches it after weakening and substitution; every such bud is
//! accepted only if the partial proof still satisfies the trace condition.
//! Otherwise the goal is expanded by `Case`, right unfolding, single
//! rewrites with `EqLa`, single-formula weakening and, when allowed, cuts on
//! instances of a formula pool. Proofs found are cycle-normal.

use std::collections::BTreeSet;

use crate::proofgraph::{case_distinctions, Addr, PreProof, Rule};
use crate::syntax::{free_vars, match_formula, match_sequent_into, name, Formula, InductiveSystem, Name, Sequent, Substitution, Term};
use crate::trace::check_gtc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    /// Longest root-to-leaf address, counting the nodes of bud formation.
    pub max_tree_depth: usize,
    pub max_term_depth: u32,
    pub max_nodes: usize,
    pub allow_cut: bool,
    /// Cut formula schemas; their free variables range over the free
    /// variables of the sequent being cut.
    pub cut_formula_pool: Option<Vec<Formula>>,
}

impl SearchBounds {
    pub fn cut_free(max_tree_depth: usize, max_term_depth: u32) -> SearchBounds {
        SearchBounds { max_tree_depth, max_term_depth, max_nodes: 400, allow_cut: false, cut_formula_pool: None }
    }

    pub fn with_cuts(mut self, pool: Vec<Formula>) -> SearchBounds {
        self.allow_cut = true;
        self.cut_formula_pool = Some(pool);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    /// Deepest bound fully searched.
    pub depth_reached: usize,
    pub bud_candidates: u64,
    pub gtc_rejections: u64,
    /// Rejections whose failing cycle passed through an earlier sibling's
    /// subtree. Siblings are not re-solved, so when this is non-zero the
    /// search may have missed a proof.
    pub context_rejections: u64,
    pub node_cap_hits: u64,
}

impl SearchStats {
    /// Whether exhaustion covers the whole bounded search space.
    pub fn is_complete(&self) -> bool {
        self.context_rejections == 0 && self.node_cap_hits == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    ProofFound(PreProof),
    Exhausted(SearchStats),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("the goal has term depth {depth}, above the bound {bound}")]
    BoundsTooSmall { depth: u32, bound: u32 },
    #[error("bounds must be at least 1")]
    InvalidBounds,
    #[error("cuts are allowed but the formula pool is empty")]
    EmptyCutPool,
}

/// Points at which the search reports its partial tree.
pub enum SearchEvent<'a> {
    /// `addr` was given a rule; its premises are not yet in the tree.
    Expanded { proof: &'a PreProof, addr: &'a Addr },
    /// A bud was tried at `bud`; the tree includes it.
    BudCandidate { proof: &'a PreProof, bud: &'a Addr, accepted: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Failure {
    Definite,
    /// May succeed with different solutions of earlier siblings.
    Contextual,
}

struct Searcher<'a, 'o> {
    system: &'a InductiveSystem,
    bounds: &'a SearchBounds,
    limit: usize,
    tree: PreProof,
    stats: SearchStats,
    observer: Option<&'o mut dyn FnMut(&SearchEvent<'_>)>,
}

/// `base`, `base1`, `base2`, … skipping names in `used`.
fn fresh_names(base: &str, count: usize, used: &BTreeSet<Name>) -> Vec<Name> {
    let candidates = std::iter::once(base.to_string()).chain((1..).map(|k| format!("{base}{k}")));
    candidates.map(|s| name(&s)).filter(|n| !used.contains(n)).take(count).collect()
}

/// Fresh variables `y0, y1, …`: the smallest indices not free in `seq`.
fn case_fresh(used: &BTreeSet<Name>, count: usize) -> Vec<Name> {
    (0..).map(|k| name(&format!("y{k}"))).filter(|n| !used.contains(n)).take(count).collect()
}

fn with_ante(seq: &Sequent, f: Formula) -> Sequent {
    let mut s = seq.clone();
    s.ante.insert(f);
    s
}

fn with_succ(seq: &Sequent, f: Formula) -> Sequent {
    let mut s = seq.clone();
    s.succ.insert(f);
    s
}

impl Searcher<'_, '_> {
    fn notify(&mut self, event: SearchEvent<'_>) {
        if let Some(obs) = self.observer.as_mut() {
            obs(&event);
        }
    }

    fn remove_subtree(&mut self, addr: &Addr) {
        self.tree.nodes.retain(|a, _| !addr.is_prefix_of(a));
        self.tree.buds.retain(|a, _| !addr.is_prefix_of(a));
    }

    fn closing_rule(&self, seq: &Sequent) -> Option<Rule> {
        if seq.ante.intersection(&seq.succ).next().is_some() {
            return Some(Rule::Axiom);
        }
        if self.bounds.allow_cut && seq.succ.iter().any(|f| matches!(f, Formula::Eq(l, r) if l == r)) {
            return Some(Rule::EqR);
        }
        for f in &seq.succ {
            let Formula::Atom(p, _) = f else { continue };
            for (j, prod) in self.system.productions_of(p).enumerate() {
                let mut theta = Substitution::new();
                if prod.assumptions.is_empty() && match_formula(&prod.conclusion, f, &mut theta) {
                    return Some(Rule::UnfoldRight { pred: p.clone(), production: j, theta });
                }
            }
        }
        None
    }

    /// Rule applications with premises, in the order they are tried.
    fn expansions(&self, addr: &Addr, seq: &Sequent) -> Vec<(Rule, Vec<Sequent>)> {
        let mut out = Vec::new();
        let used = free_vars(seq);

        for f in &seq.succ {
            let Formula::Atom(p, _) = f else { continue };
            if !self.system.signature.is_inductive(p) {
                continue;
            }
            for (j, prod) in self.system.productions_of(p).enumerate() {
                let mut theta = Substitution::new();
                if prod.assumptions.is_empty() || !match_formula(&prod.conclusion, f, &mut theta) {
                    continue;
                }
                if prod.vars().iter().any(|v| theta.get(v).is_none()) {
                    continue;
                }
                let mut rest = seq.clone();
                rest.succ.remove(f);
                let premises = prod.assumptions.iter().map(|a| with_succ(&rest, a.subst(&theta))).collect();
                out.push((Rule::UnfoldRight { pred: p.clone(), production: j, theta }, premises));
            }
        }

        out.extend(self.rewrites(seq, &used));

        for principal in seq.ante.iter().filter(|f| self.system.is_inductive_atom(f)) {
            let pred = principal.predicate().expect("atom").clone();
            let fresh: Vec<Vec<Name>> =
                self.system.productions_of(&pred).map(|p| case_fresh(&used, p.vars().len())).collect();
            if let Ok(premises) = case_distinctions(self.system, seq, principal, &fresh, false) {
                out.push((Rule::Case { pred, principal: principal.clone(), fresh }, premises));
            }
        }

        if self.bounds.allow_cut {
            let terms: Vec<Term> = used.iter().map(|v| Term::Var(v.clone())).collect();
            let mut cuts = BTreeSet::new();
            for schema in self.bounds.cut_formula_pool.iter().flatten() {
                let vars: Vec<Name> = free_vars(schema).into_iter().collect();
                let mut thetas = vec![Substitution::new()];
                for v in &vars {
                    thetas = thetas
                        .into_iter()
                        .flat_map(|th| {
                            terms.iter().map(move |t| {
                                let mut th = th.clone();
                                th.insert(v.clone(), t.clone());
                                th
                            })
                        })
                        .collect();
                }
                for th in thetas {
                    let f = schema.subst(&th);
                    if f.max_depth() <= self.bounds.max_term_depth && !seq.ante.contains(&f) && !seq.succ.contains(&f) {
                        cuts.insert(f);
                    }
                }
            }
            for f in cuts {
                let premises = vec![with_succ(seq, f.clone()), with_ante(seq, f.clone())];
                out.push((Rule::Cut { formula: f }, premises));
            }
        }

        // weakening drops one formula; a chain of them drops in increasing order
        let last_dropped = addr.parent().and_then(|p| {
            let parent = self.tree.nodes.get(&p)?;
            if parent.rule != Rule::Weak {
                return None;
            }
            parent.seq.formulas().find(|f| !seq.ante.contains(f) && !seq.succ.contains(f)).cloned()
        });
        for f in seq.formulas() {
            if last_dropped.as_ref().is_some_and(|g| f <= g) {
                continue;
            }
            let mut s = seq.clone();
            s.ante.remove(f);
            s.succ.remove(f);
            out.push((Rule::Weak, vec![s]));
        }
        out
    }

    /// `EqLa` steps that rewrite one occurrence of a side of an equality.
    fn rewrites(&self, seq: &Sequent, used: &BTreeSet<Name>) -> Vec<(Rule, Vec<Sequent>)> {
        let mut out = Vec::new();
        let names = fresh_names("v", 2, used);
        let (x, y) = (names[0].clone(), names[1].clone());
        for eq in &seq.ante {
            let Formula::Eq(t, u) = eq else { continue };
            if t == u {
                continue;
            }
            let mut rest = seq.clone();
            rest.ante.remove(eq);
            for (in_ante, f) in rest.ante.iter().map(|f| (true, f)).chain(rest.succ.iter().map(|f| (false, f))) {
                for (arg, term) in f.terms().into_iter().enumerate() {
                    for (pos, sub) in term.positions() {
                        // the x slot holds t in the conclusion and u in the premise
                        let slot = if sub == t {
                            &x
                        } else if sub == u {
                            &y
                        } else {
                            continue;
                        };
                        let mut template = rest.clone();
                        let side = if in_ante { &mut template.ante } else { &mut template.succ };
                        side.remove(f);
                        side.insert(f.replace_at(arg, &pos, &Term::Var(slot.clone())));
                        let rule = Rule::EqLa { x: x.clone(), y: y.clone(), t: t.clone(), u: u.clone(), template };
                        let (_, s2) = rule.eqla_substs().expect("EqLa");
                        let Rule::EqLa { template, .. } = &rule else { unreachable!() };
                        let premise = with_ante(&template.subst(&s2), eq.clone());
                        if premise != *seq {
                            out.push((rule, vec![premise]));
                        }
                    }
                }
            }
        }
        out
    }

    /// Try to close `addr` as a bud of each strict ancestor in turn.
    fn form_bud(&mut self, addr: &Addr, seq: &Sequent) -> Result<bool, Failure> {
        let mut failure = None;
        let mut anc = addr.parent();
        while let Some(a) = anc {
            anc = a.parent();
            let companion = self.tree.nodes[&a].seq.clone();
            for theta in match_sequent_into(&companion, seq) {
                let inst = companion.subst(&theta);
                let weak = inst != *seq;
                let subst = inst != companion;
                if addr.len() + usize::from(weak) + usize::from(subst) > self.limit {
                    continue;
                }
                self.stats.bud_candidates += 1;
                let mut at = addr.clone();
                if weak {
                    self.tree.insert(at.clone(), seq.clone(), Rule::Weak);
                    at = at.child(0);
                }
                if subst {
                    self.tree.insert(at.clone(), inst.clone(), Rule::Subst { theta: theta.clone() });
                    at = at.child(0);
                }
                self.tree.insert_bud(at.clone(), companion.clone(), a.clone());
                let verdict = check_gtc(self.system, &self.tree);
                let tree = std::mem::take(&mut self.tree);
                self.notify(SearchEvent::BudCandidate { proof: &tree, bud: &at, accepted: verdict.holds });
                self.tree = tree;
                if verdict.holds {
                    return Ok(true);
                }
                self.stats.gtc_rejections += 1;
                // a failing cycle confined to the branch through `addr` fails
                // whatever the other subtrees look like
                let lasso = verdict.lasso.expect("failing verdict has a lasso");
                let confined = lasso.path(1).iter().all(|sigma| match self.tree.resolve_unfolding(sigma) {
                    Ok(n) => n.is_prefix_of(addr) || addr.is_prefix_of(&n),
                    Err(_) => false,
                });
                self.remove_subtree(addr);
                if !confined {
                    self.stats.context_rejections += 1;
                    failure = Some(Failure::Contextual);
                }
            }
        }
        match failure {
            Some(f) => Err(f),
            None => Ok(false),
        }
    }

    fn prove(&mut self, addr: Addr, seq: Sequent) -> Result<(), Failure> {
        if seq.max_depth() > self.bounds.max_term_depth {
            return Err(Failure::Definite);
        }
        if self.tree.len() >= self.bounds.max_nodes {
            self.stats.node_cap_hits += 1;
            return Err(Failure::Contextual);
        }
        if let Some(rule) = self.closing_rule(&seq) {
            self.tree.insert(addr, seq, rule);
            return Ok(());
        }
        let mut failure = Failure::Definite;
        match self.form_bud(&addr, &seq) {
            Ok(true) => return Ok(()),
            Ok(false) => {}
            Err(f) => failure = f,
        }
        if addr.len() >= self.limit {
            return Err(failure);
        }
        // a sequent repeated on its branch is only ever closed as a bud
        let mut anc = addr.parent();
        while let Some(a) = anc {
            if self.tree.nodes[&a].seq == seq {
                return Err(failure);
            }
            anc = a.parent();
        }
        for (rule, premises) in self.expansions(&addr, &seq) {
            self.tree.insert(addr.clone(), seq.clone(), rule);
            self.stats.nodes_expanded += 1;
            let tree = std::mem::take(&mut self.tree);
            self.notify(SearchEvent::Expanded { proof: &tree, addr: &addr });
            self.tree = tree;
            let mut ok = true;
            for (i, p) in premises.into_iter().enumerate() {
                if let Err(f) = self.prove(addr.child(i), p) {
                    if f == Failure::Contextual {
                        failure = Failure::Contextual;
                    }
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(());
            }
            self.remove_subtree(&addr);
        }
        Err(failure)
    }
}

/// Search with an observer that sees every expansion and bud candidate.
pub fn search_with(
    system: &InductiveSystem,
    goal: &Sequent,
    bounds: &SearchBounds,
    observer: Option<&mut dyn FnMut(&SearchEvent<'_>)>,
) -> Result<SearchOutcome, SearchError> {
    if bounds.max_tree_depth == 0 || bounds.max_term_depth == 0 || bounds.max_nodes == 0 {
        return Err(SearchError::InvalidBounds);
    }
    if bounds.allow_cut && bounds.cut_formula_pool.as_ref().is_none_or(Vec::is_empty) {
        return Err(SearchError::EmptyCutPool);
    }
    if goal.max_depth() > bounds.max_term_depth {
        return Err(SearchError::BoundsTooSmall { depth: goal.max_depth(), bound: bounds.max_term_depth });
    }
    let mut s = Searcher { system, bounds, limit: 0, tree: PreProof::new(), stats: SearchStats::default(), observer };
    for limit in 0..=bounds.max_tree_depth {
        s.limit = limit;
        s.tree = PreProof::new();
        if s.prove(Addr::root(), goal.clone()).is_ok() {
            return Ok(SearchOutcome::ProofFound(s.tree));
        }
        s.stats.depth_reached = limit;
    }
    Ok(SearchOutcome::Exhausted(s.stats))
}

/// Iterative-deepening search for a cyclic proof of `goal`. Without cuts,
/// `EqR` is left out, as it cannot occur in the fragment of the
/// counterexample.
pub fn search_cut_free(
    system: &InductiveSystem,
    goal: &Sequent,
    bounds: &SearchBounds,
) -> Result<SearchOutcome, SearchError> {
    search_with(system, goal, bounds, None)
}
