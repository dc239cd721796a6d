//! Decision procedures for `≍_Γ` (the least congruence containing the
//! equalities of Γ), relatedness `⊲_Γ`, the index of an inductive atom and
//! root-like sequents. Terms are restricted to iterates `nx^n(a)` of one
//! designated unary symbol over a variable or constant `a`.
//!
//! `equiv` runs ground congruence closure over the finite grid of terms
//! `nx^k(a)`, which is complete for ground congruences. `related` and
//! `index_of` use the atom graph: an equality `nx^p(a) = nx^q(b)` is an edge
//! from `a` to `b` of weight `q - p`. Two atoms are related exactly when they
//! share a component, and within a component the differences `m - n` are
//! unique exactly when every cycle has weight zero.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::syntax::{atom_and_depth, name, Formula, LinearTerm, Name, Sequent, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CongruenceError {
    #[error("term {0} is outside the linear fragment")]
    NonLinearTerm(String),
    #[error("{t} and {base} are related but no witness was found with shifts up to {cap}")]
    CapExceeded { t: String, base: String, cap: u32 },
    #[error("formula {0} is outside the counterexample fragment")]
    OutOfFragment(String),
}

/// The symbols of the counterexample instantiation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub tef: Name,
    pub fst: Name,
    pub start: Name,
    pub end: Name,
    pub next: Name,
}

impl Default for Fragment {
    fn default() -> Self {
        Fragment {
            tef: name("TeF"),
            fst: name("FsT"),
            start: name("s"),
            end: name("e"),
            next: name("nx"),
        }
    }
}

impl Fragment {
    pub fn start_term(&self) -> Term {
        Term::App(self.start.clone(), Vec::new())
    }

    pub fn end_term(&self) -> Term {
        Term::App(self.end.clone(), Vec::new())
    }

    pub fn iterate(&self, n: u32, t: Term) -> Term {
        Term::iterate(&self.next, n, t)
    }

    pub fn linear(&self, t: &Term) -> Result<LinearTerm, CongruenceError> {
        atom_and_depth(t, &self.next).map_err(|e| CongruenceError::NonLinearTerm(e.0))
    }

    /// `nx^depth(atom)` back as a term; `atom` is a constant when it is the
    /// start or end constant, a variable otherwise.
    pub fn term_of(&self, lt: &LinearTerm) -> Term {
        let base = if lt.atom == self.start || lt.atom == self.end {
            Term::App(lt.atom.clone(), Vec::new())
        } else {
            Term::Var(lt.atom.clone())
        };
        self.iterate(lt.depth, base)
    }
}

/// `nx^p(a) = nx^q(b)` from one equality of Γ.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub a: Name,
    pub p: u32,
    pub b: Name,
    pub q: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexValue {
    Bot,
    Value(i64),
    Undefined,
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexValue::Bot => f.write_str("bot"),
            IndexValue::Value(d) => write!(f, "{d}"),
            IndexValue::Undefined => f.write_str("undefined"),
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }
}

/// Congruence classes of the grid `{nx^k(a) : a ∈ atoms, k ≤ depth}`.
#[derive(Debug)]
struct Closure {
    depth: u32,
    class: Vec<usize>,
}

#[derive(Debug)]
pub struct CongruenceIndex {
    next: Name,
    atoms: Vec<Name>,
    atom_ix: BTreeMap<Name, usize>,
    edges: Vec<Edge>,
    component: Vec<usize>,
    /// Potential `φ` with `φ(b) = φ(a) + p - q` along every edge of a
    /// spanning forest.
    potential: Vec<i64>,
    /// gcd of the cycle weights of each component; zero when every cycle is
    /// balanced.
    period: BTreeMap<usize, u64>,
    max_depth: u32,
    closures: Mutex<BTreeMap<u32, Arc<Closure>>>,
}

impl Clone for CongruenceIndex {
    fn clone(&self) -> Self {
        CongruenceIndex {
            next: self.next.clone(),
            atoms: self.atoms.clone(),
            atom_ix: self.atom_ix.clone(),
            edges: self.edges.clone(),
            component: self.component.clone(),
            potential: self.potential.clone(),
            period: self.period.clone(),
            max_depth: self.max_depth,
            closures: Mutex::new(BTreeMap::new()),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Value of `CYCLO_SHIFT_CAP`, if set to a number.
pub fn shift_cap_override() -> Option<u32> {
    std::env::var("CYCLO_SHIFT_CAP").ok().and_then(|v| v.trim().parse().ok())
}

impl CongruenceIndex {
    /// Build the index for the equalities among `gamma`. Other formulas are
    /// ignored.
    pub fn build<'a>(
        gamma: impl IntoIterator<Item = &'a Formula>,
        next: &str,
    ) -> Result<CongruenceIndex, CongruenceError> {
        let lin = |t: &Term| {
            atom_and_depth(t, next).map_err(|e| CongruenceError::NonLinearTerm(e.0))
        };
        let mut edges = Vec::new();
        for f in gamma {
            if let Formula::Eq(l, r) = f {
                let (l, r) = (lin(l)?, lin(r)?);
                edges.push(Edge { a: l.atom, p: l.depth, b: r.atom, q: r.depth });
            }
        }
        let atoms: Vec<Name> = edges
            .iter()
            .flat_map(|e| [e.a.clone(), e.b.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let atom_ix: BTreeMap<Name, usize> =
            atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let max_depth = edges.iter().map(|e| e.p.max(e.q)).max().unwrap_or(0);

        // adjacency with signed weights: from a to b the potential grows by p - q
        let n = atoms.len();
        let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for e in &edges {
            let (i, j) = (atom_ix[&e.a], atom_ix[&e.b]);
            let w = e.p as i64 - e.q as i64;
            adj[i].push((j, w));
            adj[j].push((i, -w));
        }
        let mut component = vec![usize::MAX; n];
        let mut potential = vec![0i64; n];
        let mut period = BTreeMap::new();
        for root in 0..n {
            if component[root] != usize::MAX {
                continue;
            }
            component[root] = root;
            let mut g = 0u64;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &(w, wt) in &adj[v] {
                    if component[w] == usize::MAX {
                        component[w] = root;
                        potential[w] = potential[v] + wt;
                        queue.push_back(w);
                    } else {
                        g = gcd(g, (potential[v] + wt - potential[w]).unsigned_abs());
                    }
                }
            }
            period.insert(root, g);
        }
        Ok(CongruenceIndex {
            next: name(next),
            atoms,
            atom_ix,
            edges,
            component,
            potential,
            period,
            max_depth,
            closures: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn atoms(&self) -> &[Name] {
        &self.atoms
    }

    /// Component id of an atom; atoms not mentioned by Γ have none.
    pub fn component_of(&self, atom: &str) -> Option<usize> {
        self.atom_ix.get(atom).map(|&i| self.component[i])
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// The default enumeration bound for a query of depth `query_depth`.
    pub fn default_shift_cap(&self, query_depth: u32) -> u32 {
        shift_cap_override().unwrap_or_else(|| {
            query_depth.max(self.max_depth) + self.edges.len() as u32 * self.max_depth + 2
        })
    }

    fn linear(&self, t: &Term) -> Result<LinearTerm, CongruenceError> {
        atom_and_depth(t, &self.next).map_err(|e| CongruenceError::NonLinearTerm(e.0))
    }

    fn closure(&self, depth: u32) -> Arc<Closure> {
        let depth = depth.max(self.max_depth);
        let mut cache = self.closures.lock().expect("closure cache poisoned");
        if let Some(c) = cache.range(depth..).next() {
            return c.1.clone();
        }
        let width = depth as usize + 1;
        let node = |a: usize, k: u32| a * width + k as usize;
        let mut uf = UnionFind::new(self.atoms.len() * width);
        for e in &self.edges {
            uf.union(node(self.atom_ix[&e.a], e.p), node(self.atom_ix[&e.b], e.q));
        }
        loop {
            let mut first_in_class: BTreeMap<usize, usize> = BTreeMap::new();
            let mut changed = false;
            for a in 0..self.atoms.len() {
                for k in 0..depth {
                    let v = node(a, k);
                    let r = uf.find(v);
                    match first_in_class.get(&r) {
                        None => {
                            first_in_class.insert(r, v);
                        }
                        Some(&u) => changed |= uf.union(u + 1, v + 1),
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let class = (0..self.atoms.len() * width).map(|v| uf.find(v)).collect();
        let c = Arc::new(Closure { depth, class });
        cache.insert(depth, c.clone());
        c
    }

    fn equiv_linear(&self, t: &LinearTerm, u: &LinearTerm) -> bool {
        if t == u {
            return true;
        }
        let (Some(&i), Some(&j)) = (self.atom_ix.get(&t.atom), self.atom_ix.get(&u.atom)) else {
            return false;
        };
        let c = self.closure(t.depth.max(u.depth));
        let width = c.depth as usize + 1;
        c.class[i * width + t.depth as usize] == c.class[j * width + u.depth as usize]
    }

    /// `t ≍_Γ u`.
    pub fn equiv(&self, t: &Term, u: &Term) -> Result<bool, CongruenceError> {
        Ok(self.equiv_linear(&self.linear(t)?, &self.linear(u)?))
    }

    fn related_linear(&self, t: &LinearTerm, u: &LinearTerm) -> bool {
        t.atom == u.atom
            || matches!(
                (self.component_of(&t.atom), self.component_of(&u.atom)),
                (Some(a), Some(b)) if a == b
            )
    }

    /// `t ⊲_Γ u`: some `nx^n(t) ≍_Γ nx^m(u)`.
    pub fn related(&self, t: &Term, u: &Term) -> Result<bool, CongruenceError> {
        Ok(self.related_linear(&self.linear(t)?, &self.linear(u)?))
    }

    /// gcd of the cycle weights in the component of `atom` (zero for atoms
    /// outside Γ).
    pub fn period_of(&self, atom: &str) -> u64 {
        self.component_of(atom).map_or(0, |c| self.period[&c])
    }

    /// The unique `m - n` with `nx^n(t) ≍_Γ nx^m(base)`.
    pub fn index_of(&self, t: &Term, base: &Term) -> Result<IndexValue, CongruenceError> {
        let (t, b) = (self.linear(t)?, self.linear(base)?);
        if !self.related_linear(&t, &b) {
            return Ok(IndexValue::Bot);
        }
        if t.atom == b.atom && !self.atom_ix.contains_key(&t.atom) {
            return Ok(IndexValue::Value(t.depth as i64 - b.depth as i64));
        }
        if self.period_of(&t.atom) != 0 {
            return Ok(IndexValue::Undefined);
        }
        let (i, j) = (self.atom_ix[&t.atom], self.atom_ix[&b.atom]);
        let d = t.depth as i64 + self.potential[i] - b.depth as i64 - self.potential[j];
        Ok(IndexValue::Value(d))
    }

    /// The index by enumerating `n, m ≤ cap`; `cap` defaults to
    /// [`CongruenceIndex::default_shift_cap`]. Returns `CapExceeded` when the
    /// terms are related but no witness lies under the cap.
    pub fn index_by_enumeration(
        &self,
        t: &Term,
        base: &Term,
        cap: Option<u32>,
    ) -> Result<IndexValue, CongruenceError> {
        let (lt, lb) = (self.linear(t)?, self.linear(base)?);
        let cap = cap.unwrap_or_else(|| self.default_shift_cap(lt.depth.max(lb.depth)));
        let mut diffs = BTreeSet::new();
        for n in 0..=cap {
            for m in 0..=cap {
                let x = LinearTerm { atom: lt.atom.clone(), depth: lt.depth + n };
                let y = LinearTerm { atom: lb.atom.clone(), depth: lb.depth + m };
                if self.equiv_linear(&x, &y) {
                    diffs.insert(m as i64 - n as i64);
                }
            }
        }
        match diffs.len() {
            0 if self.related_linear(&lt, &lb) => Err(CongruenceError::CapExceeded {
                t: t.to_string(),
                base: base.to_string(),
                cap,
            }),
            0 => Ok(IndexValue::Bot),
            1 => Ok(IndexValue::Value(*diffs.iter().next().expect("one element"))),
            _ => Ok(IndexValue::Undefined),
        }
    }
}

/// Which root-like condition failed, with a rendering of the witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootLikeFailure {
    pub condition: u8,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootLikeReport {
    pub is_root_like: bool,
    pub failed: Option<RootLikeFailure>,
}

impl RootLikeReport {
    /// Three lines, one per condition.
    pub fn render(&self, frag: &Fragment) -> String {
        let labels = [
            format!("1. {} not related to {}", frag.start, frag.end),
            format!("2. no {}(t) on the right with t related to {}", frag.fst, frag.start),
            format!("3. {}^n {} equivalent to {}^m {} only when n = m", frag.next, frag.start, frag.next, frag.start),
        ];
        let mut out = String::new();
        let failed_at = self.failed.as_ref().map(|f| f.condition);
        for (i, l) in labels.iter().enumerate() {
            let k = i as u8 + 1;
            let status = match failed_at {
                Some(f) if f == k => "fail",
                Some(f) if f < k => "skip",
                _ => "pass",
            };
            out.push_str(&format!("{status}  {l}"));
            if failed_at == Some(k) {
                let w = &self.failed.as_ref().expect("failed").witness;
                out.push_str(&format!("  [{w}]"));
            }
            out.push('\n');
        }
        out
    }
}

/// Check that a sequent has the shapes allowed in cut-free proofs of the
/// counterexample: equalities and `TeF` atoms on the left, `FsT` atoms on
/// the right, every term linear.
pub fn check_fragment_shape(frag: &Fragment, seq: &Sequent) -> Result<(), CongruenceError> {
    for f in &seq.ante {
        let ok = match f {
            Formula::Eq(..) => true,
            Formula::Atom(p, args) => *p == frag.tef && args.len() == 1,
        };
        if !ok || f.terms().into_iter().any(|t| frag.linear(t).is_err()) {
            return Err(CongruenceError::OutOfFragment(f.to_string()));
        }
    }
    for f in &seq.succ {
        let ok = matches!(f, Formula::Atom(p, args) if *p == frag.fst && args.len() == 1);
        if !ok || f.terms().into_iter().any(|t| frag.linear(t).is_err()) {
            return Err(CongruenceError::OutOfFragment(f.to_string()));
        }
    }
    Ok(())
}

/// Conditions: (1) `s ⋪ e`; (2) `t ⋪ s` for every `FsT(t)` on the right;
/// (3) `nx^n s ≍ nx^m s` implies `n = m`.
pub fn is_root_like(frag: &Fragment, seq: &Sequent) -> Result<RootLikeReport, CongruenceError> {
    check_fragment_shape(frag, seq)?;
    let idx = CongruenceIndex::build(&seq.ante, &frag.next)?;
    let s = frag.start_term();
    let fail = |condition, witness: String| {
        Ok(RootLikeReport { is_root_like: false, failed: Some(RootLikeFailure { condition, witness }) })
    };
    if idx.related(&s, &frag.end_term())? {
        return fail(1, format!("{} related to {}", frag.start, frag.end));
    }
    for f in &seq.succ {
        let t = &f.terms()[0];
        if idx.related(t, &s)? {
            return fail(2, format!("{f}"));
        }
    }
    let period = idx.period_of(&frag.start);
    if period != 0 {
        return fail(3, format!("{}^{period} {} equivalent to {}", frag.next, frag.start, frag.start));
    }
    Ok(RootLikeReport { is_root_like: true, failed: None })
}

/// Brute-force decision of `≍_Γ` by exploring chains of `[Γ]`-steps, where
/// `[Γ]` holds `nx^k(l) = nx^k(r)` for every equality `l = r` of Γ and every
/// `k`. Kept independent of the closure used by [`CongruenceIndex`] so the
/// two can be checked against each other.
pub mod oracle {
    use super::*;

    /// Whether `u` is reachable from `t` by `[Γ]`-steps whose terms all have
    /// depth at most `cap`. A `false` answer is only conclusive up to the cap.
    pub fn chain_oracle(gamma: &[Formula], t: &Term, u: &Term, next: &str, cap: u32) -> bool {
        let lin = |x: &Term| atom_and_depth(x, next).ok();
        let (Some(t), Some(u)) = (lin(t), lin(u)) else { return false };
        let eqs: Vec<(LinearTerm, LinearTerm)> = gamma
            .iter()
            .filter_map(|f| match f {
                Formula::Eq(l, r) => Some((lin(l)?, lin(r)?)),
                _ => None,
            })
            .collect();
        let mut seen = BTreeSet::from([t.clone()]);
        let mut queue = VecDeque::from([t]);
        while let Some(cur) = queue.pop_front() {
            if cur == u {
                return true;
            }
            for (l, r) in &eqs {
                for (from, to) in [(l, r), (r, l)] {
                    if from.atom != cur.atom || cur.depth < from.depth {
                        continue;
                    }
                    let k = cur.depth - from.depth;
                    let next_t = LinearTerm { atom: to.atom.clone(), depth: to.depth + k };
                    if next_t.depth <= cap && seen.insert(next_t.clone()) {
                        queue.push_back(next_t);
                    }
                }
            }
        }
        false
    }
}
