//! Generators and property suites shared by the integration tests and the
//! acceptance run.
#![allow(dead_code)]

pub mod lemmas;
pub mod proofs;
pub mod tracing;
pub mod unfinished;

use cyclo_core::syntax::{Formula, Term};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of a randomized suite: how many cases exercised the property and
/// the first few failures.
#[derive(Debug, Default)]
pub struct SuiteResult {
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn fail(&mut self, msg: String) {
        if self.failures.len() < 10 {
            self.failures.push(msg);
        }
    }

    pub fn ok(&self, min_cases: usize) -> bool {
        self.failures.is_empty() && self.cases >= min_cases
    }
}

pub const ATOMS: [&str; 4] = ["s", "e", "x", "y"];

pub fn atom_term(a: &str) -> Term {
    if a == "s" || a == "e" {
        Term::constant(a)
    } else {
        Term::var(a)
    }
}

pub fn linear(atom: &str, depth: u32) -> Term {
    Term::iterate("nx", depth, atom_term(atom))
}

pub fn random_linear(r: &mut impl Rng, atoms: &[&str], max_depth: u32) -> Term {
    let a = atoms[r.gen_range(0..atoms.len())];
    linear(a, r.gen_range(0..=max_depth))
}

/// Up to `max_eqs` equalities between linear terms of depth at most
/// `max_depth`.
pub fn random_gamma(r: &mut impl Rng, atoms: &[&str], max_eqs: usize, max_depth: u32) -> Vec<Formula> {
    let n = r.gen_range(0..=max_eqs);
    (0..n)
        .map(|_| Formula::eq(random_linear(r, atoms, max_depth), random_linear(r, atoms, max_depth)))
        .collect()
}
