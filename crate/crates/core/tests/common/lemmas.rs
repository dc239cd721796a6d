//! Randomized checks of the congruence lemmas: substitution, equality swap,
//! chain characterization and the two assumption lemmas.

use cyclo_core::congruence::oracle::chain_oracle;
use cyclo_core::congruence::CongruenceIndex;
use cyclo_core::syntax::{name, Formula, Substitution, Term};
use rand::Rng;

use super::{linear, random_gamma, random_linear, rng, SuiteResult, ATOMS};

fn idx(gamma: &[Formula]) -> CongruenceIndex {
    CongruenceIndex::build(gamma, "nx").expect("linear gamma")
}

fn subst_all(gamma: &[Formula], theta: &Substitution) -> Vec<Formula> {
    gamma.iter().map(|f| f.subst(theta)).collect()
}

fn show(gamma: &[Formula]) -> String {
    gamma.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// `equiv` against the chain oracle with cap 12, plus the index and
/// relatedness cross-checks. `cap_exceeded` counts enumeration failures.
pub fn oracle_agreement(cases: usize, seed: u64) -> (SuiteResult, usize) {
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    let mut cap_exceeded = 0;
    for _ in 0..cases {
        let gamma = random_gamma(&mut r, &ATOMS, 4, 3);
        let t = random_linear(&mut r, &ATOMS, 3);
        let u = random_linear(&mut r, &ATOMS, 3);
        let i = idx(&gamma);
        let fast = i.equiv(&t, &u).unwrap();
        let slow = chain_oracle(&gamma, &t, &u, "nx", 12);
        res.cases += 1;
        if fast != slow {
            res.fail(format!("[{}] {t} ~ {u}: closure {fast}, chains {slow}", show(&gamma)));
        }
        match i.index_by_enumeration(&t, &u, None) {
            Ok(v) => {
                let direct = i.index_of(&t, &u).unwrap();
                if v != direct {
                    res.fail(format!("[{}] index of {t} wrt {u}: enumerated {v}, direct {direct}", show(&gamma)));
                }
            }
            Err(_) => cap_exceeded += 1,
        }
    }
    (res, cap_exceeded)
}

/// `t1 ≍_Γ t2` implies `t1[θ] ≍_Γ[θ] t2[θ]`, and `t1[θ] ⋪_Γ[θ] t2[θ]`
/// implies `t1 ⋪_Γ t2`.
pub fn substitution(min_cases: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    let targets = ["s", "e", "x", "y", "z"];
    let mut equiv_cases = 0;
    let mut rel_cases = 0;
    for _ in 0..min_cases * 200 {
        if equiv_cases >= min_cases && rel_cases >= min_cases {
            break;
        }
        let gamma = random_gamma(&mut r, &ATOMS, 4, 2);
        let mut theta = Substitution::new();
        for v in ["x", "y"] {
            if r.gen_bool(0.7) {
                theta.insert(name(v), random_linear(&mut r, &targets, 2));
            }
        }
        let t1 = random_linear(&mut r, &ATOMS, 3);
        let t2 = random_linear(&mut r, &ATOMS, 3);
        let g = idx(&gamma);
        let gamma_th = subst_all(&gamma, &theta);
        let gt = idx(&gamma_th);
        let (a, b) = (t1.subst(&theta), t2.subst(&theta));
        if g.equiv(&t1, &t2).unwrap() {
            equiv_cases += 1;
            if !gt.equiv(&a, &b).unwrap() {
                res.fail(format!("equiv lost under {theta}: [{}] {t1} ~ {t2}", show(&gamma)));
            }
        }
        if !gt.related(&a, &b).unwrap() {
            rel_cases += 1;
            if g.related(&t1, &t2).unwrap() {
                res.fail(format!("unrelated after {theta} but related before: [{}] {t1}, {t2}", show(&gamma)));
            }
        }
    }
    res.cases = equiv_cases.min(rel_cases);
    res
}

/// Swapping `v1 := u1, v2 := u2` for `v1 := u2, v2 := u1` in the presence
/// of `u1 = u2` does not change `≍` or `⊲` between correspondingly
/// substituted terms. Checked in both directions.
pub fn equality_swap(min_cases: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    let mut counts = [0usize; 4];
    for _ in 0..min_cases * 400 {
        if counts.iter().all(|&c| c >= min_cases) {
            break;
        }
        let gamma = random_gamma(&mut r, &ATOMS, 3, 2);
        let u1 = random_linear(&mut r, &ATOMS, 2);
        let u2 = random_linear(&mut r, &ATOMS, 2);
        let s1: Substitution =
            [(name("x"), u1.clone()), (name("y"), u2.clone())].into_iter().collect();
        let s2: Substitution =
            [(name("x"), u2.clone()), (name("y"), u1.clone())].into_iter().collect();
        let mut g1 = subst_all(&gamma, &s1);
        g1.push(Formula::eq(u1.clone(), u2.clone()));
        let mut g2 = subst_all(&gamma, &s2);
        g2.push(Formula::eq(u1.clone(), u2.clone()));
        let (i1, i2) = (idx(&g1), idx(&g2));
        let t1 = random_linear(&mut r, &ATOMS, 3);
        let t2 = random_linear(&mut r, &ATOMS, 3);
        let (a1, b1) = (t1.subst(&s1), t2.subst(&s1));
        let (a2, b2) = (t1.subst(&s2), t2.subst(&s2));
        let e1 = i1.equiv(&a1, &b1).unwrap();
        let e2 = i2.equiv(&a2, &b2).unwrap();
        let r1 = i1.related(&a1, &b1).unwrap();
        let r2 = i2.related(&a2, &b2).unwrap();
        let ctx = || format!("[{}] u1={u1} u2={u2} t1={t1} t2={t2}", show(&gamma));
        if e2 {
            counts[0] += 1;
            if !e1 {
                res.fail(format!("equiv swap 2->1 fails: {}", ctx()));
            }
        }
        if e1 {
            counts[1] += 1;
            if !e2 {
                res.fail(format!("equiv swap 1->2 fails: {}", ctx()));
            }
        }
        if !r1 {
            counts[2] += 1;
            if r2 {
                res.fail(format!("unrelated swap 1->2 fails: {}", ctx()));
            }
        }
        if !r2 {
            counts[3] += 1;
            if r1 {
                res.fail(format!("unrelated swap 2->1 fails: {}", ctx()));
            }
        }
    }
    res.cases = *counts.iter().min().expect("four counters");
    res
}

/// Apply one random `[Γ]`-step to `t`, if any applies.
fn random_step(r: &mut impl Rng, gamma: &[Formula], t: &Term) -> Option<Term> {
    let lin = |x: &Term| cyclo_core::syntax::atom_and_depth(x, "nx").expect("linear");
    let cur = lin(t);
    let mut options = Vec::new();
    for f in gamma {
        if let Formula::Eq(l, rr) = f {
            let (l, rr) = (lin(l), lin(rr));
            for (from, to) in [(&l, &rr), (&rr, &l)] {
                if from.atom == cur.atom && cur.depth >= from.depth {
                    let k = cur.depth - from.depth;
                    options.push(linear(&to.atom, to.depth + k));
                }
            }
        }
    }
    if options.is_empty() {
        None
    } else {
        Some(options.swap_remove(r.gen_range(0..options.len())))
    }
}

/// `≍_Γ` coincides with reachability by `[Γ]`-chains. The forward
/// direction asks the chain search to find a chain for every pair the
/// closure relates; the backward direction walks random chains and checks
/// that the closure relates their endpoints.
pub fn chain_steps(min_cases: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    let (mut fwd, mut bwd) = (0, 0);
    for _ in 0..min_cases * 200 {
        if fwd >= min_cases && bwd >= min_cases {
            break;
        }
        let gamma = random_gamma(&mut r, &ATOMS, 4, 3);
        let i = idx(&gamma);
        let t = random_linear(&mut r, &ATOMS, 4);
        let u = random_linear(&mut r, &ATOMS, 4);
        if i.equiv(&t, &u).unwrap() {
            fwd += 1;
            if !chain_oracle(&gamma, &t, &u, "nx", 16) {
                res.fail(format!("no chain for [{}] {t} ~ {u}", show(&gamma)));
            }
        }
        let mut cur = t.clone();
        let steps = r.gen_range(1..8);
        let mut walked = 0;
        for _ in 0..steps {
            match random_step(&mut r, &gamma, &cur) {
                Some(next) => {
                    cur = next;
                    walked += 1;
                }
                None => break,
            }
        }
        if walked > 0 {
            bwd += 1;
            if !i.equiv(&t, &cur).unwrap() {
                res.fail(format!("chain endpoints not equivalent: [{}] {t} ~> {cur}", show(&gamma)));
            }
        }
    }
    res.cases = fwd.min(bwd);
    res
}

/// Adding `u = u'` where the atom of `u'` is new creates no equivalence
/// among old terms.
pub fn fresh_right_side(min_cases: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    let mut n = 0;
    for _ in 0..min_cases * 200 {
        if n >= min_cases {
            break;
        }
        let g1 = random_gamma(&mut r, &ATOMS, 4, 2);
        let u = random_linear(&mut r, &ATOMS, 2);
        let u_new = linear("z", r.gen_range(0..=2));
        let mut g2 = g1.clone();
        g2.push(Formula::eq(u.clone(), u_new.clone()));
        let t = random_linear(&mut r, &ATOMS, 3);
        let t2 = random_linear(&mut r, &ATOMS, 3);
        if idx(&g2).equiv(&t, &t2).unwrap() {
            n += 1;
            if !idx(&g1).equiv(&t, &t2).unwrap() {
                res.fail(format!("[{}] + {u} = {u_new} created {t} ~ {t2}", show(&g1)));
            }
        }
    }
    res.cases = n;
    res
}

/// Adding `u = u'` with `t` unrelated to both sides creates no new
/// equivalence for `t`.
pub fn unrelated_left_side(min_cases: usize, seed: u64) -> SuiteResult {
    let mut r = rng(seed);
    let mut res = SuiteResult::default();
    let mut n = 0;
    for _ in 0..min_cases * 400 {
        if n >= min_cases {
            break;
        }
        let g1 = random_gamma(&mut r, &ATOMS, 4, 2);
        let u = random_linear(&mut r, &ATOMS, 2);
        let u2 = random_linear(&mut r, &ATOMS, 2);
        let t = random_linear(&mut r, &ATOMS, 3);
        let t2 = random_linear(&mut r, &ATOMS, 3);
        let i1 = idx(&g1);
        if i1.related(&t, &u).unwrap() || i1.related(&t, &u2).unwrap() {
            continue;
        }
        let mut g2 = g1.clone();
        g2.push(Formula::eq(u.clone(), u2.clone()));
        if idx(&g2).equiv(&t, &t2).unwrap() {
            n += 1;
            if !i1.equiv(&t, &t2).unwrap() {
                res.fail(format!("[{}] + {u} = {u2} created {t} ~ {t2}", show(&g1)));
            }
        }
    }
    res.cases = n;
    res
}
