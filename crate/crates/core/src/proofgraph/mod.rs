//! Finite derivation trees with buds and companions, rule checking and lazy
//! tree-unfolding.

pub mod format;
mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub use rules::{case_additions, case_distinctions, check_rule_instance, Rule, RuleError};

use crate::syntax::{InductiveSystem, ParseError, Sequent};

/// A node address: the child indices from the root. Renders as dot-joined
/// numbers; the root is the empty string.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Addr(pub Vec<usize>);

impl Addr {
    pub fn root() -> Addr {
        Addr(Vec::new())
    }

    pub fn child(&self, i: usize) -> Addr {
        let mut v = self.0.clone();
        v.push(i);
        Addr(v)
    }

    pub fn parent(&self) -> Option<Addr> {
        let (_, init) = self.0.split_last()?;
        Some(Addr(init.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Addr) -> bool {
        other.0.starts_with(&self.0)
    }

    /// `self · suffix`.
    pub fn join(&self, suffix: &[usize]) -> Addr {
        let mut v = self.0.clone();
        v.extend_from_slice(suffix);
        Addr(v)
    }
}

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("bad node address {0:?}")]
pub struct BadAddr(pub String);

impl FromStr for Addr {
    type Err = BadAddr;

    fn from_str(s: &str) -> Result<Addr, BadAddr> {
        if s.is_empty() {
            return Ok(Addr::root());
        }
        s.split('.')
            .map(|p| p.parse::<usize>().map_err(|_| BadAddr(s.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Addr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub seq: Sequent,
    pub rule: Rule,
}

/// A derivation tree plus the companion of each bud.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreProof {
    pub nodes: BTreeMap<Addr, Node>,
    pub buds: BTreeMap<Addr, Addr>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProofDefect {
    #[error("the tree has no root")]
    NoRoot,
    #[error("parent node is missing")]
    NotPrefixClosed,
    #[error("an earlier sibling is missing")]
    NotSiblingClosed,
    #[error("bud has children")]
    BudWithChildren,
    #[error("{0}")]
    Rule(#[from] RuleError),
    #[error("bud has no companion")]
    CompanionMissing,
    #[error("companion {companion} has sequent {found}, bud has {expected}")]
    CompanionMismatch { companion: Addr, expected: String, found: String },
    #[error("companion {0} is not an inner node")]
    CompanionNotInner(Addr),
    #[error("companion given for a node that is not a bud")]
    CompanionOfNonBud,
    #[error("ill-formed sequent: {0}")]
    IllFormed(ParseError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub failures: Vec<(Addr, ProofDefect)>,
    pub cut_nodes: Vec<Addr>,
    /// Every companion is a strict ancestor of its bud.
    pub cycle_normal: bool,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn is_cut_free(&self) -> bool {
        self.cut_nodes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("address {0} is not in the unfolding")]
pub struct Unresolvable(pub Addr);

impl PreProof {
    pub fn new() -> PreProof {
        PreProof::default()
    }

    pub fn insert(&mut self, addr: Addr, seq: Sequent, rule: Rule) {
        self.nodes.insert(addr, Node { seq, rule });
    }

    pub fn insert_bud(&mut self, addr: Addr, seq: Sequent, companion: Addr) {
        self.nodes.insert(addr.clone(), Node { seq, rule: Rule::Bud });
        self.buds.insert(addr, companion);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> Option<&Node> {
        self.nodes.get(&Addr::root())
    }

    pub fn node(&self, a: &Addr) -> Option<&Node> {
        self.nodes.get(a)
    }

    /// Children present in the tree, in index order, stopping at the first
    /// gap.
    pub fn children(&self, a: &Addr) -> Vec<Addr> {
        (0..).map(|i| a.child(i)).take_while(|c| self.nodes.contains_key(c)).collect()
    }

    pub fn is_bud(&self, a: &Addr) -> bool {
        self.nodes.get(a).is_some_and(|n| n.rule.is_bud())
    }

    pub fn inner_nodes(&self) -> impl Iterator<Item = &Addr> {
        self.nodes.iter().filter(|(_, n)| !n.rule.is_bud()).map(|(a, _)| a)
    }

    /// Where a child edge leads in the cyclic graph on inner nodes: the child
    /// itself, or its companion when the child is a bud.
    pub fn follow(&self, a: &Addr) -> Addr {
        match self.buds.get(a) {
            Some(c) if self.is_bud(a) => c.clone(),
            _ => a.clone(),
        }
    }

    /// Successors of an inner node in the cyclic graph.
    pub fn successors(&self, a: &Addr) -> Vec<Addr> {
        self.children(a).iter().map(|c| self.follow(c)).collect()
    }

    pub fn cut_nodes(&self) -> Vec<Addr> {
        self.nodes.iter().filter(|(_, n)| n.rule.is_cut()).map(|(a, _)| a.clone()).collect()
    }

    pub fn is_cycle_normal(&self) -> bool {
        self.buds.iter().all(|(b, c)| c.is_prefix_of(b) && c != b)
    }

    /// The tree address whose node the unfolding shows at `sigma`. The
    /// result is always an inner node.
    pub fn resolve_unfolding(&self, sigma: &Addr) -> Result<Addr, Unresolvable> {
        let fail = || Unresolvable(sigma.clone());
        let mut cur = Addr::root();
        if !self.nodes.contains_key(&cur) {
            return Err(fail());
        }
        cur = self.follow(&cur);
        for &i in &sigma.0 {
            let next = cur.child(i);
            if !self.nodes.contains_key(&next) {
                return Err(fail());
            }
            cur = self.follow(&next);
            if !self.nodes.contains_key(&cur) || self.is_bud(&cur) {
                return Err(fail());
            }
        }
        Ok(cur)
    }

    /// Check every structural condition and rule instance. Failures are
    /// collected rather than returned early.
    pub fn check(&self, system: &InductiveSystem) -> ValidityReport {
        let mut failures = Vec::new();
        if self.root().is_none() {
            failures.push((Addr::root(), ProofDefect::NoRoot));
        }
        for (a, node) in &self.nodes {
            if let Some(p) = a.parent() {
                if !self.nodes.contains_key(&p) {
                    failures.push((a.clone(), ProofDefect::NotPrefixClosed));
                }
                let last = *a.0.last().expect("non-root");
                if last > 0 && !self.nodes.contains_key(&p.child(last - 1)) {
                    failures.push((a.clone(), ProofDefect::NotSiblingClosed));
                }
            }
            if let Err(e) = system.check_sequent(&node.seq) {
                failures.push((a.clone(), ProofDefect::IllFormed(e)));
            }
            let kids: Vec<Sequent> =
                self.children(a).iter().map(|c| self.nodes[c].seq.clone()).collect();
            if node.rule.is_bud() {
                if !kids.is_empty() {
                    failures.push((a.clone(), ProofDefect::BudWithChildren));
                }
                match self.buds.get(a) {
                    None => failures.push((a.clone(), ProofDefect::CompanionMissing)),
                    Some(c) => match self.nodes.get(c) {
                        Some(cn) if !cn.rule.is_bud() => {
                            if cn.seq != node.seq {
                                failures.push((
                                    a.clone(),
                                    ProofDefect::CompanionMismatch {
                                        companion: c.clone(),
                                        expected: node.seq.to_string(),
                                        found: cn.seq.to_string(),
                                    },
                                ));
                            }
                        }
                        _ => failures.push((a.clone(), ProofDefect::CompanionNotInner(c.clone()))),
                    },
                }
            } else if let Err(e) = check_rule_instance(system, &node.seq, &node.rule, &kids) {
                failures.push((a.clone(), ProofDefect::Rule(e)));
            }
        }
        for b in self.buds.keys() {
            if !self.is_bud(b) {
                failures.push((b.clone(), ProofDefect::CompanionOfNonBud));
            }
        }
        ValidityReport { failures, cut_nodes: self.cut_nodes(), cycle_normal: self.is_cycle_normal() }
    }
}

pub fn check_pre_proof(system: &InductiveSystem, proof: &PreProof) -> ValidityReport {
    proof.check(system)
}

/// Whether the unfoldings of `p1` and `p2` agree on every address of length
/// at most `depth`, comparing sequents, rules and premise counts.
pub fn unfoldings_equal_to_depth(p1: &PreProof, p2: &PreProof, depth: usize) -> bool {
    let (Ok(r1), Ok(r2)) = (p1.resolve_unfolding(&Addr::root()), p2.resolve_unfolding(&Addr::root()))
    else {
        return false;
    };
    let mut level: BTreeSet<(Addr, Addr)> = BTreeSet::from([(r1, r2)]);
    let mut seen: BTreeSet<(Addr, Addr)> = level.clone();
    for d in 0..=depth {
        let mut next = BTreeSet::new();
        for (a, b) in &level {
            let (na, nb) = (&p1.nodes[a], &p2.nodes[b]);
            if na.seq != nb.seq || na.rule != nb.rule {
                return false;
            }
            let (sa, sb) = (p1.successors(a), p2.successors(b));
            if sa.len() != sb.len() {
                return false;
            }
            if d < depth {
                for pair in sa.into_iter().zip(sb) {
                    // a pair already compared at a shallower level has the
                    // same subtrees below it
                    if seen.insert(pair.clone()) {
                        next.insert(pair);
                    }
                }
            }
        }
        level = next;
    }
    true
}
