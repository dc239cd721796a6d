//! The global trace condition, decided by size-change closure over the
//! finite graph whose vertices are the inner nodes and whose edges are
//! premise links, with each bud replaced by its companion.
//!
//! Every path of the graph carries a matrix over the antecedent inductive
//! atoms of its endpoints with entries none < step < progress. The condition
//! holds iff every idempotent matrix of a cycle has a progress entry on its
//! diagonal.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use super::{edge_relation, TraceGraph};
use crate::proofgraph::{Addr, PreProof};
use crate::syntax::{Formula, InductiveSystem};

const NONE: u8 = 0;
const STEP: u8 = 1;
const PROGRESS: u8 = 2;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Mat {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

impl Mat {
    fn get(&self, i: usize, j: usize) -> u8 {
        self.cells[i * self.cols + j]
    }

    fn compose(&self, other: &Mat) -> Mat {
        let mut cells = vec![NONE; self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == NONE {
                    continue;
                }
                for k in 0..other.cols {
                    let b = other.get(j, k);
                    if b != NONE {
                        let c = &mut cells[i * other.cols + k];
                        *c = (*c).max(a.max(b));
                    }
                }
            }
        }
        Mat { rows: self.rows, cols: other.cols, cells }
    }
}

/// A cycle in the tree-unfolding entered at `stem`: the infinite path is
/// `stem · cycle · cycle · …` where `cycle` lists child indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Addr,
    pub cycle: Vec<usize>,
}

impl Lasso {
    /// Unfolding addresses from the stem through `pumps` traversals of the
    /// cycle.
    pub fn path(&self, pumps: usize) -> Vec<Addr> {
        let mut out = vec![self.stem.clone()];
        let mut cur = self.stem.clone();
        for _ in 0..pumps {
            for &i in &self.cycle {
                cur = cur.child(i);
                out.push(cur.clone());
            }
        }
        out
    }
}

impl fmt::Display for Lasso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycle: Vec<String> = self.cycle.iter().map(ToString::to_string).collect();
        write!(f, "stem: {} / cycle: {}", self.stem, cycle.join("."))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtcVerdict {
    pub holds: bool,
    /// A path of the unfolding with no infinitely progressing trace.
    pub lasso: Option<Lasso>,
    /// Number of distinct (source, target, matrix) entries in the closure.
    pub closure_size: usize,
}

struct Graph {
    addrs: Vec<Addr>,
    /// (source, child index, target, matrix)
    edges: Vec<(usize, usize, usize, Mat)>,
}

fn relation_matrix(g: &TraceGraph, from: &[Formula], to: &[Formula]) -> Mat {
    let mut cells = vec![NONE; from.len() * to.len()];
    for (a, b, p) in g.iter() {
        if let (Some(i), Some(j)) = (from.iter().position(|f| f == a), to.iter().position(|f| f == b)) {
            cells[i * to.len() + j] = if p { PROGRESS } else { STEP };
        }
    }
    Mat { rows: from.len(), cols: to.len(), cells }
}

fn build_graph(system: &InductiveSystem, proof: &PreProof) -> Graph {
    let addrs: Vec<Addr> = proof.inner_nodes().cloned().collect();
    let index: BTreeMap<&Addr, usize> = addrs.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let formulas: Vec<Vec<Formula>> = addrs
        .iter()
        .map(|a| proof.nodes[a].seq.ante.iter().filter(|f| system.is_inductive_atom(f)).cloned().collect())
        .collect();
    let mut edges = Vec::new();
    for (v, a) in addrs.iter().enumerate() {
        let node = &proof.nodes[a];
        for (k, c) in proof.children(a).iter().enumerate() {
            let target = proof.follow(c);
            let Some(&w) = index.get(&target) else { continue };
            let rel = edge_relation(system, &node.seq, &node.rule, k, &proof.nodes[c].seq);
            edges.push((v, k, w, relation_matrix(&rel, &formulas[v], &formulas[w])));
        }
    }
    Graph { addrs, edges }
}

/// Strongly connected component ids; vertices on no cycle get `None`.
fn cyclic_components(n: usize, edges: &[(usize, usize, usize, Mat)]) -> Vec<Option<usize>> {
    let mut succ = vec![Vec::new(); n];
    for (v, _, w, _) in edges {
        succ[*v].push(*w);
    }
    let reach: Vec<BTreeSet<usize>> = (0..n)
        .map(|s| {
            let mut seen = BTreeSet::new();
            let mut queue = VecDeque::from(succ[s].clone());
            while let Some(v) = queue.pop_front() {
                if seen.insert(v) {
                    queue.extend(succ[v].iter().copied());
                }
            }
            seen
        })
        .collect();
    let mut comp = vec![None; n];
    for v in 0..n {
        if comp[v].is_some() || !reach[v].contains(&v) {
            continue;
        }
        for w in 0..n {
            if reach[v].contains(&w) && reach[w].contains(&v) {
                comp[w] = Some(v);
            }
        }
    }
    comp
}

/// Decide the global trace condition of the tree-unfolding of `proof`.
pub fn check_gtc(system: &InductiveSystem, proof: &PreProof) -> GtcVerdict {
    let g = build_graph(system, proof);
    let comp = cyclic_components(g.addrs.len(), &g.edges);
    let inner: Vec<usize> = (0..g.edges.len())
        .filter(|&e| {
            let (v, _, w, _) = &g.edges[e];
            comp[*v].is_some() && comp[*v] == comp[*w]
        })
        .collect();
    let mut out_edges: HashMap<usize, Vec<usize>> = HashMap::new();
    for &e in &inner {
        out_edges.entry(g.edges[e].0).or_default().push(e);
    }

    // breadth-first, so the recorded witness of each entry is a shortest path
    let mut witness: HashMap<(usize, usize, Mat), Vec<usize>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &e in &inner {
        let (v, _, w, m) = &g.edges[e];
        let key = (*v, *w, m.clone());
        if !witness.contains_key(&key) {
            witness.insert(key.clone(), vec![e]);
            queue.push_back(key);
        }
    }
    let mut failing: Option<(usize, Vec<usize>)> = None;
    while let Some(key) = queue.pop_front() {
        let (a, b, m) = &key;
        if a == b && failing.is_none() && m.compose(m) == *m && !(0..m.rows).any(|i| m.get(i, i) == PROGRESS) {
            failing = Some((*a, witness[&key].clone()));
        }
        for &e in out_edges.get(b).map(Vec::as_slice).unwrap_or(&[]) {
            let (_, _, c, em) = &g.edges[e];
            let next = (*a, *c, m.compose(em));
            if !witness.contains_key(&next) {
                let mut path = witness[&key].clone();
                path.push(e);
                witness.insert(next.clone(), path);
                queue.push_back(next);
            }
        }
    }
    let closure_size = witness.len();
    match failing {
        None => GtcVerdict { holds: true, lasso: None, closure_size },
        Some((v, path)) => GtcVerdict {
            holds: false,
            lasso: Some(Lasso { stem: g.addrs[v].clone(), cycle: path.iter().map(|&e| g.edges[e].1).collect() }),
            closure_size,
        },
    }
}

/// A trace along part of a pumped lasso that starts and ends with the same
/// formula at cycle boundaries and passes a progress point in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressingTrace {
    pub path: Vec<Addr>,
    pub formulas: Vec<Formula>,
}

/// Search the path `lasso.path(pumps)` for a trace that returns to its
/// starting formula at a later cycle boundary after a progress point. An
/// infinitely progressing trace along the lasso exists iff one is found
/// with `pumps` greater than the number of formulas at the stem.
pub fn find_progressing_trace(
    system: &InductiveSystem,
    proof: &PreProof,
    lasso: &Lasso,
    pumps: usize,
) -> Option<ProgressingTrace> {
    let path = lasso.path(pumps);
    let len = lasso.cycle.len();
    if len == 0 {
        return None;
    }
    let resolved: Vec<Addr> = path.iter().map(|s| proof.resolve_unfolding(s)).collect::<Result<_, _>>().ok()?;
    let rels: Vec<TraceGraph> = (0..path.len() - 1)
        .map(|p| {
            let n = &proof.nodes[&resolved[p]];
            let k = lasso.cycle[p % len];
            let child = &proof.nodes[&resolved[p].child(k)];
            edge_relation(system, &n.seq, &n.rule, k, &child.seq)
        })
        .collect();
    let starts: Vec<Formula> = proof.nodes[&resolved[0]]
        .seq
        .ante
        .iter()
        .filter(|f| system.is_inductive_atom(f))
        .cloned()
        .collect();
    for b in 0..pumps {
        for f in &starts {
            // (position, formula, progressed) -> predecessor state
            let start = (b * len, f.clone(), false);
            let mut parent: HashMap<(usize, Formula, bool), (usize, Formula, bool)> = HashMap::new();
            let mut seen = BTreeSet::from([start.clone()]);
            let mut stack = vec![start.clone()];
            while let Some(state) = stack.pop() {
                let (pos, cur, progressed) = &state;
                if *pos > b * len && pos % len == 0 && cur == f && *progressed {
                    let mut formulas = vec![cur.clone()];
                    let mut s = state.clone();
                    while let Some(p) = parent.get(&s) {
                        formulas.push(p.1.clone());
                        s = p.clone();
                    }
                    formulas.reverse();
                    return Some(ProgressingTrace { path: path[b * len..=*pos].to_vec(), formulas });
                }
                if *pos + 1 >= path.len() {
                    continue;
                }
                for (from, to, p) in rels[*pos].iter() {
                    if from == cur {
                        let next = (pos + 1, to.clone(), *progressed || p);
                        if seen.insert(next.clone()) {
                            parent.insert(next.clone(), state.clone());
                            stack.push(next);
                        }
                    }
                }
            }
        }
    }
    None
}
