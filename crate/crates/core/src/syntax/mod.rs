//! Terms, formulas, sequents and substitutions of the base system, plus the
//! inductive definition sets that generate the rules for inductive predicates.
//!
//! Names are plain identifiers. Whether a bare name is a variable or a
//! constant is decided by the [`Signature`], never by its spelling.

mod parse;
mod system;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub use parse::{parse_definitions, ParseError};
pub use system::{InductiveSystem, Production, Signature};

/// Symbol and variable names.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    /// Application of a function symbol; constants are applications with no
    /// arguments.
    App(Name, Vec<Term>),
}

impl Term {
    pub fn var(s: &str) -> Term {
        Term::Var(name(s))
    }

    pub fn constant(s: &str) -> Term {
        Term::App(name(s), Vec::new())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(name(f), args)
    }

    /// `f^n(t)` for a unary symbol `f`.
    pub fn iterate(f: &str, n: u32, t: Term) -> Term {
        let f = name(f);
        (0..n).fold(t, |acc, _| Term::App(f.clone(), vec![acc]))
    }

    /// Nesting depth of function applications; variables and constants have
    /// depth 0.
    pub fn depth(&self) -> u32 {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) if args.is_empty() => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn subst(&self, theta: &Substitution) -> Term {
        match self {
            Term::Var(v) => theta.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.subst(theta)).collect())
            }
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn contains(&self, sub: &Term) -> bool {
        if self == sub {
            return true;
        }
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains(sub)),
        }
    }

    /// Every subterm position, in pre-order. A position is the list of
    /// argument indices leading to the subterm.
    pub fn positions(&self) -> Vec<(Vec<usize>, &Term)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((pos, t)) = stack.pop() {
            if let Term::App(_, args) = t {
                for (i, a) in args.iter().enumerate().rev() {
                    let mut p = pos.clone();
                    p.push(i);
                    stack.push((p, a));
                }
            }
            out.push((pos, t));
        }
        out
    }

    /// Replace the subterm at `pos` by `with`.
    pub fn replace_at(&self, pos: &[usize], with: &Term) -> Term {
        match pos.split_first() {
            None => with.clone(),
            Some((&i, rest)) => match self {
                Term::App(f, args) => {
                    let mut args = args.clone();
                    args[i] = args[i].replace_at(rest, with);
                    Term::App(f.clone(), args)
                }
                Term::Var(_) => panic!("position {pos:?} does not exist in a variable"),
            },
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App(c, args) if args.is_empty() => f.write_str(c),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Atom(Name, Vec<Term>),
}

impl Formula {
    pub fn eq(l: Term, r: Term) -> Formula {
        Formula::Eq(l, r)
    }

    pub fn atom(p: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(name(p), args)
    }

    pub fn predicate(&self) -> Option<&Name> {
        match self {
            Formula::Atom(p, _) => Some(p),
            Formula::Eq(..) => None,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Formula::Eq(l, r) => vec![l, r],
            Formula::Atom(_, args) => args.iter().collect(),
        }
    }

    pub fn max_depth(&self) -> u32 {
        self.terms().into_iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn subst(&self, theta: &Substitution) -> Formula {
        match self {
            Formula::Eq(l, r) => Formula::Eq(l.subst(theta), r.subst(theta)),
            Formula::Atom(p, args) => {
                Formula::Atom(p.clone(), args.iter().map(|a| a.subst(theta)).collect())
            }
        }
    }

    fn map_terms(&self, mut f: impl FnMut(usize, &Term) -> Term) -> Formula {
        match self {
            Formula::Eq(l, r) => Formula::Eq(f(0, l), f(1, r)),
            Formula::Atom(p, args) => {
                Formula::Atom(p.clone(), args.iter().enumerate().map(|(i, a)| f(i, a)).collect())
            }
        }
    }

    /// Replace the subterm at `pos` inside argument `arg`.
    pub fn replace_at(&self, arg: usize, pos: &[usize], with: &Term) -> Formula {
        self.map_terms(|i, t| if i == arg { t.replace_at(pos, with) } else { t.clone() })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(l, r) => write!(f, "{l} = {r}"),
            Formula::Atom(p, args) if args.is_empty() => f.write_str(p),
            Formula::Atom(p, args) => {
                write!(f, "{p}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `Γ ⊢ Δ` with both sides finite sets; inserting a formula twice is a no-op.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequent {
    pub ante: BTreeSet<Formula>,
    pub succ: BTreeSet<Formula>,
}

impl Sequent {
    pub fn new(
        ante: impl IntoIterator<Item = Formula>,
        succ: impl IntoIterator<Item = Formula>,
    ) -> Sequent {
        Sequent { ante: ante.into_iter().collect(), succ: succ.into_iter().collect() }
    }

    pub fn subst(&self, theta: &Substitution) -> Sequent {
        Sequent {
            ante: self.ante.iter().map(|f| f.subst(theta)).collect(),
            succ: self.succ.iter().map(|f| f.subst(theta)).collect(),
        }
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.ante.iter().chain(self.succ.iter())
    }

    pub fn max_depth(&self) -> u32 {
        self.formulas().map(Formula::max_depth).max().unwrap_or(0)
    }

    /// Both sides of `self` are subsets of the corresponding sides of `other`.
    pub fn is_subsequent_of(&self, other: &Sequent) -> bool {
        self.ante.is_subset(&other.ante) && self.succ.is_subset(&other.succ)
    }

    pub fn len(&self) -> usize {
        self.ante.len() + self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ante.is_empty() && self.succ.is_empty()
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |set: &BTreeSet<Formula>| {
            set.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        };
        let (l, r) = (join(&self.ante), join(&self.succ));
        match (l.is_empty(), r.is_empty()) {
            (true, true) => f.write_str("|-"),
            (true, false) => write!(f, "|- {r}"),
            (false, true) => write!(f, "{l} |-"),
            (false, false) => write!(f, "{l} |- {r}"),
        }
    }
}

/// A simultaneous substitution. Variables outside the domain are left alone.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(BTreeMap<Name, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn single(v: &str, t: Term) -> Substitution {
        let mut s = Substitution::new();
        s.insert(name(v), t);
        s
    }

    pub fn insert(&mut self, v: Name, t: Term) -> Option<Term> {
        self.0.insert(v, t)
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when every binding maps a variable to itself.
    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|(v, t)| t.as_var() == Some(v))
    }

    /// `self ∘ first`: applying the result equals applying `first` then `self`.
    pub fn compose_after(&self, first: &Substitution) -> Substitution {
        let mut out: BTreeMap<Name, Term> =
            first.0.iter().map(|(v, t)| (v.clone(), t.subst(self))).collect();
        for (v, t) in &self.0 {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }
}

impl FromIterator<(Name, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Name, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}:={t}")?;
        }
        f.write_str("]")
    }
}

/// Anything with free variables.
pub trait HasVars {
    fn collect_free_vars(&self, out: &mut BTreeSet<Name>);
}

impl HasVars for Term {
    fn collect_free_vars(&self, out: &mut BTreeSet<Name>) {
        self.collect_vars(out)
    }
}

impl HasVars for Formula {
    fn collect_free_vars(&self, out: &mut BTreeSet<Name>) {
        self.terms().into_iter().for_each(|t| t.collect_vars(out))
    }
}

impl HasVars for Sequent {
    fn collect_free_vars(&self, out: &mut BTreeSet<Name>) {
        self.formulas().for_each(|f| f.collect_free_vars(out))
    }
}

impl<T: HasVars> HasVars for [T] {
    fn collect_free_vars(&self, out: &mut BTreeSet<Name>) {
        self.iter().for_each(|x| x.collect_free_vars(out))
    }
}

pub fn free_vars<T: HasVars + ?Sized>(target: &T) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    target.collect_free_vars(&mut out);
    out
}

/// A term of the shape `f^depth(atom)` where `atom` is a variable or a
/// constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearTerm {
    pub atom: Name,
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("term {0} is not an iterate of the successor symbol over a variable or constant")]
pub struct NotLinear(pub String);

/// Decompose `t` as `succ^n(a)`.
pub fn atom_and_depth(t: &Term, succ: &str) -> Result<LinearTerm, NotLinear> {
    let mut depth = 0;
    let mut cur = t;
    loop {
        match cur {
            Term::Var(v) => return Ok(LinearTerm { atom: v.clone(), depth }),
            Term::App(c, args) if args.is_empty() => {
                return Ok(LinearTerm { atom: c.clone(), depth })
            }
            Term::App(f, args) if args.len() == 1 && &**f == succ => {
                depth += 1;
                cur = &args[0];
            }
            _ => return Err(NotLinear(t.to_string())),
        }
    }
}

/// First-order matching of `pattern` against `target`, extending `theta`.
pub fn match_term(pattern: &Term, target: &Term, theta: &mut Substitution) -> bool {
    match pattern {
        Term::Var(v) => match theta.get(v) {
            Some(bound) => bound == target,
            None => {
                theta.insert(v.clone(), target.clone());
                true
            }
        },
        Term::App(f, args) => match target {
            Term::App(g, targs) if f == g && args.len() == targs.len() => {
                args.iter().zip(targs).all(|(p, t)| match_term(p, t, theta))
            }
            _ => false,
        },
    }
}

pub fn match_formula(pattern: &Formula, target: &Formula, theta: &mut Substitution) -> bool {
    let saved = theta.clone();
    let ok = match (pattern, target) {
        (Formula::Eq(a, b), Formula::Eq(c, d)) => match_term(a, c, theta) && match_term(b, d, theta),
        (Formula::Atom(p, xs), Formula::Atom(q, ys)) if p == q && xs.len() == ys.len() => {
            xs.iter().zip(ys).all(|(x, y)| match_term(x, y, theta))
        }
        _ => false,
    };
    if !ok {
        *theta = saved;
    }
    ok
}

/// All substitutions `θ` over the free variables of `pattern` with
/// `pattern[θ]` a subsequent of `target` (each side a subset).
pub fn match_sequent_into(pattern: &Sequent, target: &Sequent) -> Vec<Substitution> {
    let pats: Vec<(bool, &Formula)> = pattern
        .ante
        .iter()
        .map(|f| (true, f))
        .chain(pattern.succ.iter().map(|f| (false, f)))
        .collect();
    let mut out = Vec::new();
    fn go(
        pats: &[(bool, &Formula)],
        target: &Sequent,
        theta: &mut Substitution,
        out: &mut Vec<Substitution>,
    ) {
        let Some(((left, pat), rest)) = pats.split_first() else {
            out.push(theta.clone());
            return;
        };
        let side = if *left { &target.ante } else { &target.succ };
        for cand in side {
            let saved = theta.clone();
            if match_formula(pat, cand, theta) {
                go(rest, target, theta, out);
            }
            *theta = saved;
        }
    }
    go(&pats, target, &mut Substitution::new(), &mut out);
    out.sort();
    out.dedup();
    out
}
