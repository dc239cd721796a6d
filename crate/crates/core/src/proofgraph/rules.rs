use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{free_vars, Formula, InductiveSystem, Name, Production, Sequent, Substitution, Term};

/// A rule application together with the witnesses needed to check it by
/// matching alone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Axiom,
    Weak,
    Cut { formula: Formula },
    Subst { theta: Substitution },
    /// Conclusion `template[x:=t, y:=u]` plus `t = u` on the left; premise
    /// `template[x:=u, y:=t]` plus `t = u`.
    EqLa { x: Name, y: Name, t: Term, u: Term, template: Sequent },
    EqR,
    /// `production` indexes the productions of `pred` in declaration order;
    /// `theta` instantiates the production's variables.
    UnfoldRight { pred: Name, production: usize, theta: Substitution },
    /// One child per production of `pred`, in declaration order. `fresh[j]`
    /// renames the variables of production `j` (see [`Production::vars`]).
    Case { pred: Name, principal: Formula, fresh: Vec<Vec<Name>> },
    Bud,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Axiom => "Axiom",
            Rule::Weak => "Weak",
            Rule::Cut { .. } => "Cut",
            Rule::Subst { .. } => "Subst",
            Rule::EqLa { .. } => "EqLa",
            Rule::EqR => "EqR",
            Rule::UnfoldRight { .. } => "UnfoldRight",
            Rule::Case { .. } => "Case",
            Rule::Bud => "Bud",
        }
    }

    pub fn is_bud(&self) -> bool {
        matches!(self, Rule::Bud)
    }

    pub fn is_cut(&self) -> bool {
        matches!(self, Rule::Cut { .. })
    }

    /// The (σ1, σ2) substitutions of an EqLa application.
    pub fn eqla_substs(&self) -> Option<(Substitution, Substitution)> {
        match self {
            Rule::EqLa { x, y, t, u, .. } => Some(eqla_substs(x, y, t, u)),
            _ => None,
        }
    }
}

/// Short human-readable description, e.g. `Case TeF(s)` or `FsT R2`.
impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Cut { formula } => write!(f, "Cut {formula}"),
            Rule::Subst { theta } => write!(f, "Subst {theta}"),
            Rule::EqLa { t, u, .. } => write!(f, "EqLa {t} = {u}"),
            Rule::UnfoldRight { pred, production, .. } => write!(f, "{pred} R{}", production + 1),
            Rule::Case { principal, .. } => write!(f, "Case {principal}"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("expected {expected} premises, found {found}")]
    WrongChildCount { expected: usize, found: usize },
    #[error("side condition failed: {0}")]
    SideConditionFailed(String),
    #[error("variable {0} is not fresh")]
    FreshnessViolation(Name),
    #[error("template mismatch: {0}")]
    TemplateMismatch(String),
    #[error("principal formula {0} is missing")]
    PrincipalMissing(String),
    #[error("{0} is not an inductive predicate")]
    NotInductive(String),
    #[error("{pred} has no production {index}")]
    UnknownProduction { pred: String, index: usize },
}

fn eqla_substs(x: &Name, y: &Name, t: &Term, u: &Term) -> (Substitution, Substitution) {
    let s1 = [(x.clone(), t.clone()), (y.clone(), u.clone())].into_iter().collect();
    let s2 = [(x.clone(), u.clone()), (y.clone(), t.clone())].into_iter().collect();
    (s1, s2)
}

fn count(expected: usize, children: &[Sequent]) -> Result<(), RuleError> {
    if children.len() == expected {
        Ok(())
    } else {
        Err(RuleError::WrongChildCount { expected, found: children.len() })
    }
}

fn with_ante(seq: Sequent, f: &Formula) -> Sequent {
    let mut s = seq;
    s.ante.insert(f.clone());
    s
}

/// The formulas a Case child adds for production `prod` with its variables
/// renamed to `fresh`: the argument equalities, then the instantiated
/// assumptions. The second component lists the inductive assumptions, which
/// are the case-descendants of the principal.
pub fn case_additions(
    system: &InductiveSystem,
    principal: &Formula,
    prod: &Production,
    fresh: &[Name],
) -> (Vec<Formula>, Vec<Formula>) {
    let theta: Substitution =
        prod.vars().into_iter().zip(fresh.iter().map(|v| Term::Var(v.clone()))).collect();
    let args = match principal {
        Formula::Atom(_, args) => args,
        Formula::Eq(..) => return (Vec::new(), Vec::new()),
    };
    let mut added: Vec<Formula> = args
        .iter()
        .zip(prod.conclusion_args())
        .map(|(u, t)| Formula::Eq(u.clone(), t.subst(&theta)))
        .collect();
    let mut descendants = Vec::new();
    for a in &prod.assumptions {
        let inst = a.subst(&theta);
        if system.is_inductive_atom(a) {
            descendants.push(inst.clone());
        }
        added.push(inst);
    }
    (added, descendants)
}

fn check_fresh(
    system: &InductiveSystem,
    pred: &str,
    conclusion: &Sequent,
    fresh: &[Vec<Name>],
) -> Result<(), RuleError> {
    let prods: Vec<&Production> = system.productions_of(pred).collect();
    if fresh.len() != prods.len() {
        return Err(RuleError::SideConditionFailed(format!(
            "{} fresh-variable lists for {} productions",
            fresh.len(),
            prods.len()
        )));
    }
    let used = free_vars(conclusion);
    for (names, prod) in fresh.iter().zip(&prods) {
        let want = prod.vars().len();
        if names.len() != want {
            return Err(RuleError::SideConditionFailed(format!(
                "production needs {want} fresh variables, {} given",
                names.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for v in names {
            if used.contains(v) || !seen.insert(v.clone()) || system.signature.is_declared(v) {
                return Err(RuleError::FreshnessViolation(v.clone()));
            }
        }
    }
    Ok(())
}

/// The premises of `Case` on `principal` in `Γ ⊢ Δ`, one per production in
/// declaration order. When `keep_principal` is false the principal is
/// removed from the premises' antecedents.
pub fn case_distinctions(
    system: &InductiveSystem,
    conclusion: &Sequent,
    principal: &Formula,
    fresh: &[Vec<Name>],
    keep_principal: bool,
) -> Result<Vec<Sequent>, RuleError> {
    let pred = match principal {
        Formula::Atom(p, _) if system.signature.is_inductive(p) => p.clone(),
        _ => return Err(RuleError::NotInductive(principal.to_string())),
    };
    if !conclusion.ante.contains(principal) {
        return Err(RuleError::PrincipalMissing(principal.to_string()));
    }
    check_fresh(system, &pred, conclusion, fresh)?;
    let mut base = conclusion.clone();
    if !keep_principal {
        base.ante.remove(principal);
    }
    Ok(system
        .productions_of(&pred)
        .zip(fresh)
        .map(|(prod, names)| {
            let (added, _) = case_additions(system, principal, prod, names);
            let mut s = base.clone();
            s.ante.extend(added);
            s
        })
        .collect())
}

/// Check that `conclusion` with premises `children` (in address order) is an
/// instance of `rule`.
pub fn check_rule_instance(
    system: &InductiveSystem,
    conclusion: &Sequent,
    rule: &Rule,
    children: &[Sequent],
) -> Result<(), RuleError> {
    match rule {
        Rule::Bud => count(0, children),
        Rule::Axiom => {
            count(0, children)?;
            if conclusion.ante.intersection(&conclusion.succ).next().is_none() {
                return Err(RuleError::SideConditionFailed("no formula on both sides".into()));
            }
            Ok(())
        }
        Rule::EqR => {
            count(0, children)?;
            if !conclusion.succ.iter().any(|f| matches!(f, Formula::Eq(l, r) if l == r)) {
                return Err(RuleError::SideConditionFailed("no reflexive equality on the right".into()));
            }
            Ok(())
        }
        Rule::Weak => {
            count(1, children)?;
            if !children[0].is_subsequent_of(conclusion) {
                return Err(RuleError::SideConditionFailed(format!(
                    "premise {} is not contained in the conclusion",
                    children[0]
                )));
            }
            Ok(())
        }
        Rule::Cut { formula } => {
            count(2, children)?;
            let mut left = conclusion.clone();
            left.succ.insert(formula.clone());
            let right = with_ante(conclusion.clone(), formula);
            if children[0] != left {
                return Err(RuleError::TemplateMismatch(format!("left premise should be {left}")));
            }
            if children[1] != right {
                return Err(RuleError::TemplateMismatch(format!("right premise should be {right}")));
            }
            Ok(())
        }
        Rule::Subst { theta } => {
            count(1, children)?;
            let inst = children[0].subst(theta);
            if &inst != conclusion {
                return Err(RuleError::TemplateMismatch(format!(
                    "premise under {theta} is {inst}"
                )));
            }
            Ok(())
        }
        Rule::EqLa { x, y, t, u, template } => {
            count(1, children)?;
            if x == y {
                return Err(RuleError::SideConditionFailed("EqLa needs two distinct variables".into()));
            }
            let eq = Formula::Eq(t.clone(), u.clone());
            let (s1, s2) = eqla_substs(x, y, t, u);
            let want_c = with_ante(template.subst(&s1), &eq);
            let want_p = with_ante(template.subst(&s2), &eq);
            if &want_c != conclusion {
                return Err(RuleError::TemplateMismatch(format!("conclusion should be {want_c}")));
            }
            if children[0] != want_p {
                return Err(RuleError::TemplateMismatch(format!("premise should be {want_p}")));
            }
            Ok(())
        }
        Rule::UnfoldRight { pred, production, theta } => {
            let prod = system.production(pred, *production).ok_or_else(|| {
                RuleError::UnknownProduction { pred: pred.to_string(), index: *production }
            })?;
            count(prod.assumptions.len(), children)?;
            let principal = prod.conclusion.subst(theta);
            if !conclusion.succ.contains(&principal) {
                return Err(RuleError::PrincipalMissing(principal.to_string()));
            }
            let mut without = conclusion.succ.clone();
            without.remove(&principal);
            for (a, child) in prod.assumptions.iter().zip(children) {
                let inst = a.subst(theta);
                let ok = child.ante == conclusion.ante
                    && child.succ.contains(&inst)
                    && (child.succ == {
                        let mut s = without.clone();
                        s.insert(inst.clone());
                        s
                    } || child.succ == {
                        let mut s = conclusion.succ.clone();
                        s.insert(inst.clone());
                        s
                    });
                if !ok {
                    return Err(RuleError::TemplateMismatch(format!(
                        "premise {child} does not add {inst} to the conclusion"
                    )));
                }
            }
            Ok(())
        }
        Rule::Case { pred, principal, fresh } => {
            if principal.predicate() != Some(pred) {
                return Err(RuleError::TemplateMismatch(format!("principal {principal} is not a {pred} atom")));
            }
            if !system.signature.is_inductive(pred) {
                return Err(RuleError::NotInductive(pred.to_string()));
            }
            count(system.productions_of(pred).count(), children)?;
            let dropped = case_distinctions(system, conclusion, principal, fresh, false)?;
            let kept = case_distinctions(system, conclusion, principal, fresh, true)?;
            for (j, child) in children.iter().enumerate() {
                if child != &dropped[j] && child != &kept[j] {
                    return Err(RuleError::TemplateMismatch(format!(
                        "case {j} should be {}",
                        dropped[j]
                    )));
                }
            }
            Ok(())
        }
    }
}
