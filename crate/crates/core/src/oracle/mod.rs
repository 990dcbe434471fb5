//! Reference semantics over explicit finite models.
//!
//! A model is a finite interpretation with a rank function; `x < y` iff
//! `rank(x) < rank(y)`. This module evaluates concepts, checks KB satisfaction,
//! computes least rankings and enumerates small models exhaustively. The
//! [`canonical`] submodule decides minimal entailment through realizable types.

pub mod canonical;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::kb::{Assertion, Concept, InclusionKind, KnowledgeBase, Query, RankValue};

pub use canonical::{
    canonical_size_hint, exceptional_by_models, is_canonical, minimally_entails, GreatestModel, Inconclusive,
    Method, OracleOptions, Verdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FiniteInterpretation {
    /// Elements are `0..size`.
    pub size: usize,
    pub atoms: BTreeMap<String, BTreeSet<usize>>,
    pub roles: BTreeMap<String, BTreeSet<(usize, usize)>>,
    pub individuals: BTreeMap<String, usize>,
    pub rank: Vec<u32>,
}

impl FiniteInterpretation {
    pub fn domain(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    fn same_interpretation(&self, other: &FiniteInterpretation) -> bool {
        self.size == other.size
            && self.atoms == other.atoms
            && self.roles == other.roles
            && self.individuals == other.individuals
    }
}

fn mask(m: &FiniteInterpretation, c: &Concept) -> Vec<bool> {
    let n = m.size;
    match c {
        Concept::Atom(a) => {
            let ext = m.atoms.get(a);
            (0..n).map(|x| ext.is_some_and(|e| e.contains(&x))).collect()
        }
        Concept::Top => vec![true; n],
        Concept::Bottom => vec![false; n],
        Concept::Not(d) => mask(m, d).into_iter().map(|b| !b).collect(),
        Concept::And(a, b) => mask(m, a).into_iter().zip(mask(m, b)).map(|(x, y)| x && y).collect(),
        Concept::Or(a, b) => mask(m, a).into_iter().zip(mask(m, b)).map(|(x, y)| x || y).collect(),
        Concept::Exists(r, d) => {
            let inner = mask(m, d);
            let mut out = vec![false; n];
            for &(x, y) in m.roles.get(r).into_iter().flatten() {
                out[x] |= inner[y];
            }
            out
        }
        Concept::Forall(r, d) => {
            let inner = mask(m, d);
            let mut out = vec![true; n];
            for &(x, y) in m.roles.get(r).into_iter().flatten() {
                out[x] &= inner[y];
            }
            out
        }
        Concept::Typ(d) => {
            let inner = mask(m, d);
            let least = (0..n).filter(|&x| inner[x]).map(|x| m.rank[x]).min();
            (0..n).map(|x| inner[x] && Some(m.rank[x]) == least).collect()
        }
    }
}

/// Extension of `c`; `T(C)` picks the rank-minimal members of `C`.
pub fn eval_concept(m: &FiniteInterpretation, c: &Concept) -> BTreeSet<usize> {
    mask(m, c).into_iter().enumerate().filter(|(_, b)| *b).map(|(x, _)| x).collect()
}

fn holds_assertion(m: &FiniteInterpretation, a: &Assertion) -> bool {
    match a {
        Assertion::Concept { concept, individual } => {
            m.individuals.get(individual).is_some_and(|&x| mask(m, concept)[x])
        }
        Assertion::Role { role, subject, object } => match (m.individuals.get(subject), m.individuals.get(object)) {
            (Some(&x), Some(&y)) => m.roles.get(role).is_some_and(|e| e.contains(&(x, y))),
            _ => false,
        },
    }
}

fn holds_query(m: &FiniteInterpretation, q: &Query) -> bool {
    match q {
        Query::Inclusion(inc) => {
            let (l, r) = (mask(m, inc.lhs()), mask(m, inc.rhs()));
            l.iter().zip(&r).all(|(a, b)| !a || *b)
        }
        Query::Assertion { concept, individual } => holds_assertion(
            m,
            &Assertion::Concept { concept: concept.clone(), individual: individual.clone() },
        ),
    }
}

/// Whether `f` is true in `m`.
pub fn satisfies_query(m: &FiniteInterpretation, f: &Query) -> bool {
    holds_query(m, f)
}

pub fn satisfies_kb(m: &FiniteInterpretation, k: &KnowledgeBase) -> bool {
    k.tbox().iter().all(|inc| {
        let (l, r) = (mask(m, inc.lhs()), mask(m, inc.rhs()));
        l.iter().zip(&r).all(|(a, b)| !a || *b)
    }) && k.abox().iter().all(|a| holds_assertion(m, a))
}

fn satisfies_rank_free(m: &FiniteInterpretation, k: &KnowledgeBase) -> bool {
    k.tbox().iter().filter(|i| i.is_strict()).all(|inc| {
        let (l, r) = (mask(m, inc.lhs()), mask(m, inc.rhs()));
        l.iter().zip(&r).all(|(a, b)| !a || *b)
    }) && k.abox().iter().filter(|a| !matches!(a, Assertion::Concept { concept: Concept::Typ(_), .. })).all(|a| holds_assertion(m, a))
}

pub fn element_rank(m: &FiniteInterpretation, x: usize) -> u32 {
    m.rank[x]
}

/// Least rank over the extension of `c`, `Infinite` when it is empty.
pub fn concept_rank_in_model(m: &FiniteInterpretation, c: &Concept) -> RankValue {
    let ext = mask(m, c);
    m.domain().filter(|&x| ext[x]).map(|x| m.rank[x]).min().map_or(RankValue::Infinite, RankValue::Finite)
}

/// The pointwise least rank function under which the interpretation of `m`
/// satisfies the typicality parts of `k`, or `None` if there is none. The
/// existing ranks of `m` are ignored.
///
/// Each violated `T(C) ⊑ D` at `x` forces `k(x) ≥ 1 + min k(C)`, and each
/// `T(C)(a)` forces `k(y) ≥ k(a)` for `y ∈ C`. Solutions are closed under
/// pointwise minimum and can be compacted below `|Δ|`, so iterating from zero
/// either settles or proves there is no solution.
pub fn least_ranking(m: &FiniteInterpretation, k: &KnowledgeBase) -> Option<Vec<u32>> {
    let n = m.size;
    let defeasible: Vec<(Vec<bool>, Vec<bool>)> = k
        .tbox()
        .iter()
        .filter(|i| i.kind() == InclusionKind::Defeasible)
        .map(|i| (mask(m, i.antecedent()), mask(m, i.rhs())))
        .collect();
    let mut typical = Vec::new();
    for a in k.abox() {
        if let Assertion::Concept { concept: Concept::Typ(c), individual } = a {
            let ext = mask(m, c);
            let x = *m.individuals.get(individual)?;
            if !ext[x] {
                return None;
            }
            typical.push((x, ext));
        }
    }
    let mut rank = vec![0u32; n];
    loop {
        let mut changed = false;
        for (c, d) in &defeasible {
            let Some(least) = (0..n).filter(|&x| c[x]).map(|x| rank[x]).min() else { continue };
            for x in 0..n {
                if c[x] && !d[x] && rank[x] <= least {
                    rank[x] = least + 1;
                    changed = true;
                }
            }
        }
        for (a, ext) in &typical {
            for y in 0..n {
                if ext[y] && rank[y] < rank[*a] {
                    rank[y] = rank[*a];
                    changed = true;
                }
            }
        }
        if rank.iter().any(|&r| r as usize >= n) {
            return None;
        }
        if !changed {
            return Some(rank);
        }
    }
}

/// Removes empty levels while keeping the relative order of ranks.
pub fn compact_ranks(rank: &[u32]) -> Vec<u32> {
    let levels: BTreeSet<u32> = rank.iter().copied().collect();
    let index: BTreeMap<u32, u32> = levels.into_iter().enumerate().map(|(i, r)| (r, i as u32)).collect();
    rank.iter().map(|r| index[r]).collect()
}

struct Vocabulary {
    atoms: Vec<String>,
    roles: Vec<String>,
    individuals: Vec<String>,
}

fn vocabulary(k: &KnowledgeBase, f: Option<&Query>) -> Vocabulary {
    let mut atoms = k.signature().atoms.clone();
    let mut roles = k.signature().roles.clone();
    if let Some(q) = f {
        for c in q.concepts() {
            c.collect_atoms(&mut atoms);
            c.collect_roles(&mut roles);
        }
    }
    Vocabulary {
        atoms: atoms.into_iter().collect(),
        roles: roles.into_iter().collect(),
        individuals: k.individuals(),
    }
}

fn rank_functions(size: usize, bound: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; size];
    fn go(i: usize, cur: &mut Vec<u32>, bound: u32, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            if compact_ranks(cur) == *cur {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..bound {
            cur[i] = v;
            go(i + 1, cur, bound, out);
        }
    }
    go(0, &mut cur, bound.max(1), &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Key of an interpretation after renaming elements by `perm`.
fn relabel_key(profiles: &[u64], edges: &[Vec<bool>], perm: &[usize]) -> (Vec<u64>, Vec<Vec<bool>>) {
    let n = profiles.len();
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[new] = old;
    }
    let p = (0..n).map(|i| profiles[inv[i]]).collect();
    let e = edges
        .iter()
        .map(|mat| {
            let mut out = vec![false; n * n];
            for x in 0..n {
                for y in 0..n {
                    out[x * n + y] = mat[inv[x] * n + inv[y]];
                }
            }
            out
        })
        .collect();
    (p, e)
}

/// Every model of `k` over the vocabulary of `k` and `f` with at most
/// `domain_bound` elements and ranks below `rank_bound`.
///
/// Individuals are sent to the first elements in name order. Interpretations
/// are listed once per isomorphism class over the anonymous elements; every
/// compact rank function is listed for each. Order: domain size, then atom
/// profiles, role extensions and rank functions, all lexicographic.
pub fn enumerate_models(
    k: &KnowledgeBase,
    f: Option<&Query>,
    domain_bound: usize,
    rank_bound: u32,
) -> Vec<FiniteInterpretation> {
    let voc = vocabulary(k, f);
    let named = voc.individuals.len();
    let profile_count = 1u64 << voc.atoms.len();
    let mut out = Vec::new();
    for size in named.max(1)..=domain_bound {
        let ranks = rank_functions(size, rank_bound);
        let anon: Vec<usize> = (named..size).collect();
        let perms: Vec<Vec<usize>> = permutations(&anon)
            .into_iter()
            .map(|p| (0..named).chain(p).collect())
            .collect();
        let edge_bits = voc.roles.len() * size * size;
        let mut profiles = vec![0u64; size];
        loop {
            let sorted_anon = profiles[named..].windows(2).all(|w| w[0] <= w[1]);
            if sorted_anon || !voc.roles.is_empty() {
                for edge_code in 0..(1u64 << edge_bits) {
                    let edges: Vec<Vec<bool>> = (0..voc.roles.len())
                        .map(|r| (0..size * size).map(|i| edge_code >> (r * size * size + i) & 1 == 1).collect())
                        .collect();
                    if !voc.roles.is_empty() {
                        let key = (profiles.clone(), edges.clone());
                        if perms.iter().any(|p| relabel_key(&profiles, &edges, p) < key) {
                            continue;
                        }
                    }
                    let mut m = FiniteInterpretation {
                        size,
                        atoms: voc
                            .atoms
                            .iter()
                            .enumerate()
                            .map(|(i, a)| (a.clone(), (0..size).filter(|&x| profiles[x] >> i & 1 == 1).collect()))
                            .collect(),
                        roles: voc
                            .roles
                            .iter()
                            .enumerate()
                            .map(|(r, name)| {
                                let pairs = (0..size)
                                    .flat_map(|x| (0..size).map(move |y| (x, y)))
                                    .filter(|&(x, y)| edges[r][x * size + y])
                                    .collect();
                                (name.clone(), pairs)
                            })
                            .collect(),
                        individuals: voc.individuals.iter().cloned().zip(0..).collect(),
                        rank: vec![0; size],
                    };
                    if !satisfies_rank_free(&m, k) {
                        continue;
                    }
                    for r in &ranks {
                        m.rank = r.clone();
                        if satisfies_kb(&m, k) {
                            out.push(m.clone());
                        }
                    }
                }
            }
            // next profile vector, little-endian odometer over elements
            let mut i = 0;
            while i < size {
                profiles[i] += 1;
                if profiles[i] < profile_count {
                    break;
                }
                profiles[i] = 0;
                i += 1;
            }
            if i == size {
                break;
            }
        }
    }
    out
}

/// Keeps, within each group sharing domain, extensions and individuals, the
/// rank functions not pointwise dominated by another member of the group.
pub fn fims_minimal(models: &[FiniteInterpretation]) -> Vec<FiniteInterpretation> {
    models
        .iter()
        .filter(|m| {
            !models.iter().any(|o| {
                o.same_interpretation(m)
                    && o.rank != m.rank
                    && o.rank.iter().zip(&m.rank).all(|(a, b)| a <= b)
            })
        })
        .cloned()
        .collect()
}

fn individual_ranks(m: &FiniteInterpretation) -> Vec<u32> {
    m.individuals.values().map(|&x| m.rank[x]).collect()
}

/// Keeps the models whose vector of individual ranks is not pointwise
/// dominated by another model's.
pub fn abox_minimal(models: &[FiniteInterpretation]) -> Vec<FiniteInterpretation> {
    let vectors: Vec<Vec<u32>> = models.iter().map(individual_ranks).collect();
    models
        .iter()
        .zip(&vectors)
        .filter(|(_, v)| !vectors.iter().any(|w| w != *v && w.iter().zip(v.iter()).all(|(a, b)| a <= b)))
        .map(|(m, _)| m.clone())
        .collect()
}
