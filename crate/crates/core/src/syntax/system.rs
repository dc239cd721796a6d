use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::parse::{self, ParseError};
use super::{Formula, Name, Sequent, Term};

/// Declared symbols. Constants are the arity-0 entries of `functions`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub functions: BTreeMap<Name, usize>,
    pub ordinary_predicates: BTreeMap<Name, usize>,
    pub inductive_predicates: BTreeMap<Name, usize>,
}

impl Signature {
    pub fn constants(&self) -> BTreeSet<Name> {
        self.functions.iter().filter(|(_, &a)| a == 0).map(|(n, _)| n.clone()).collect()
    }

    pub fn is_constant(&self, s: &str) -> bool {
        self.functions.get(s) == Some(&0)
    }

    pub fn function_arity(&self, s: &str) -> Option<usize> {
        self.functions.get(s).copied()
    }

    pub fn predicate_arity(&self, s: &str) -> Option<usize> {
        self.ordinary_predicates.get(s).or_else(|| self.inductive_predicates.get(s)).copied()
    }

    pub fn is_inductive(&self, s: &str) -> bool {
        self.inductive_predicates.contains_key(s)
    }

    pub fn is_declared(&self, s: &str) -> bool {
        self.functions.contains_key(s) || self.predicate_arity(s).is_some()
    }
}

/// `assumptions ⇒ conclusion`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Production {
    pub assumptions: Vec<Formula>,
    pub conclusion: Formula,
}

impl Production {
    pub fn predicate(&self) -> &Name {
        self.conclusion.predicate().expect("production conclusion is an atom")
    }

    /// Variables of the production in order of first occurrence, scanning the
    /// conclusion's arguments and then the assumptions.
    pub fn vars(&self) -> Vec<Name> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in std::iter::once(&self.conclusion).chain(&self.assumptions) {
            for t in f.terms() {
                for (_, sub) in t.positions() {
                    if let Term::Var(v) = sub {
                        if seen.insert(v.clone()) {
                            out.push(v.clone());
                        }
                    }
                }
            }
        }
        out
    }

    pub fn conclusion_args(&self) -> &[Term] {
        match &self.conclusion {
            Formula::Atom(_, args) => args,
            Formula::Eq(..) => unreachable!("production conclusion is an atom"),
        }
    }

    /// Assumptions whose predicate is inductive; these become case-descendants.
    pub fn inductive_assumptions<'a>(
        &'a self,
        sig: &'a Signature,
    ) -> impl Iterator<Item = &'a Formula> + 'a {
        self.assumptions
            .iter()
            .filter(move |f| f.predicate().is_some_and(|p| sig.is_inductive(p)))
    }
}

/// A signature together with the productions of its inductive predicates.
/// Productions are kept grouped by predicate name; within a predicate their
/// order is the declaration order, which fixes the order of Case children.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InductiveSystem {
    pub signature: Signature,
    pub productions: Vec<Production>,
}

impl InductiveSystem {
    pub fn parse(text: &str) -> Result<InductiveSystem, ParseError> {
        parse::parse_definitions(text)
    }

    pub fn productions_of<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a Production> + 'a {
        self.productions.iter().filter(move |p| &**p.predicate() == pred)
    }

    pub fn production(&self, pred: &str, index: usize) -> Option<&Production> {
        self.productions.iter().filter(|p| &**p.predicate() == pred).nth(index)
    }

    pub fn is_inductive_atom(&self, f: &Formula) -> bool {
        f.predicate().is_some_and(|p| self.signature.is_inductive(p))
    }

    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        parse::parse_term_with(&self.signature, text)
    }

    pub fn parse_formula(&self, text: &str) -> Result<Formula, ParseError> {
        parse::parse_formula_with(&self.signature, text)
    }

    pub fn parse_sequent(&self, text: &str) -> Result<Sequent, ParseError> {
        parse::parse_sequent_with(&self.signature, text)
    }

    /// Canonical `.ind` text. `parse(render(sys)) == sys` for every parsed
    /// system.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let sig = &self.signature;
        for (c, _) in sig.functions.iter().filter(|(_, &a)| a == 0) {
            let _ = writeln!(out, "const {c};");
        }
        for (f, a) in sig.functions.iter().filter(|(_, &a)| a > 0) {
            let _ = writeln!(out, "fun {f} {a};");
        }
        for (p, a) in &sig.ordinary_predicates {
            let _ = writeln!(out, "ordpred {p} {a};");
        }
        for (p, a) in &sig.inductive_predicates {
            let prods: Vec<_> = self.productions_of(p).collect();
            if prods.is_empty() {
                let _ = writeln!(out, "pred {p} {a} {{ }}");
                continue;
            }
            let _ = writeln!(out, "pred {p} {a} {{");
            for pr in prods {
                let lhs: Vec<String> = pr.assumptions.iter().map(ToString::to_string).collect();
                if lhs.is_empty() {
                    let _ = writeln!(out, "  => {};", pr.conclusion);
                } else {
                    let _ = writeln!(out, "  {} => {};", lhs.join(", "), pr.conclusion);
                }
            }
            out.push_str("}\n");
        }
        out
    }

    /// Check that a term only uses declared function symbols at their arity
    /// and that no variable shares its name with a declared symbol.
    pub fn check_term(&self, t: &Term) -> Result<(), ParseError> {
        match t {
            Term::Var(v) => {
                if self.signature.is_declared(v) {
                    Err(ParseError::UndeclaredSymbol(format!("{v} is declared and cannot be a variable")))
                } else {
                    Ok(())
                }
            }
            Term::App(f, args) => match self.signature.function_arity(f) {
                None => Err(ParseError::UndeclaredSymbol(f.to_string())),
                Some(a) if a != args.len() => Err(ParseError::ArityMismatch {
                    symbol: f.to_string(),
                    expected: a,
                    found: args.len(),
                }),
                Some(_) => args.iter().try_for_each(|a| self.check_term(a)),
            },
        }
    }

    pub fn check_formula(&self, f: &Formula) -> Result<(), ParseError> {
        match f {
            Formula::Eq(l, r) => {
                self.check_term(l)?;
                self.check_term(r)
            }
            Formula::Atom(p, args) => match self.signature.predicate_arity(p) {
                None => Err(ParseError::UndeclaredSymbol(p.to_string())),
                Some(a) if a != args.len() => Err(ParseError::ArityMismatch {
                    symbol: p.to_string(),
                    expected: a,
                    found: args.len(),
                }),
                Some(_) => args.iter().try_for_each(|a| self.check_term(a)),
            },
        }
    }

    pub fn check_sequent(&self, s: &Sequent) -> Result<(), ParseError> {
        s.formulas().try_for_each(|f| self.check_formula(f))
    }
}
