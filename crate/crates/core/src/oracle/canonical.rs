//! Minimal entailment in canonical models, decided through types.
//!
//! A type is a truth assignment to the members of 𝒮 that respects the Boolean
//! connectives; atoms and quantified members are free. Starting from every
//! type that satisfies the strict inclusions, we repeatedly drop types that
//! lack a successor for one of their existential demands and types whose
//! least rank diverges. What remains, `T*`, is exactly the set of types that
//! occur in some model, and the surviving least ranks `k*` are the ranks those
//! types take in every canonical minimal model.
//!
//! A canonical minimal model is then one element per type in `T*`, all
//! compatible role edges, and the named individuals typed inside `T*`. Only the
//! typing of individuals varies, so ABox minimality compares the rank vectors
//! of the typings. Witness models are materialized as explicit
//! [`FiniteInterpretation`]s.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::{
    abox_minimal, enumerate_models, fims_minimal, least_ranking, mask, satisfies_kb, satisfies_query,
    FiniteInterpretation,
};
use crate::kb::{closure_set, Assertion, Concept, Inclusion, KnowledgeBase, Query, RankValue};

const MAX_FREE: usize = 22;
const INF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Inconclusive {
    /// The smallest canonical minimal model needs more elements.
    DomainBound { needed: usize, bound: usize },
    /// Some canonical minimal model uses a rank at or above the bound.
    RankBound { needed: u32, bound: u32 },
    /// No model exists within the search space.
    NoModel,
    /// 𝒮 has too many free members to enumerate its types.
    TooManyTypes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails(Box<FiniteInterpretation>),
    Inconclusive(Inconclusive),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Realizable types and the canonical model built from them.
    Canonical,
    /// Exhaustive model enumeration, optionally keeping only canonical models.
    Enumeration { canonical: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub domain_bound: usize,
    pub rank_bound: u32,
    pub method: Method,
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Free,
    Top,
    Bot,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
}

#[derive(Debug, Clone, Copy)]
struct Quant {
    member: usize,
    role: usize,
    filler: usize,
    forall: bool,
}

#[derive(Debug, Clone)]
struct TypeSpace {
    members: Vec<Concept>,
    index: HashMap<Concept, usize>,
    shape: Vec<Shape>,
    order: Vec<usize>,
    free: Vec<usize>,
    roles: Vec<String>,
    quants: Vec<Quant>,
}

fn size(c: &Concept) -> usize {
    match c {
        Concept::Atom(_) | Concept::Top | Concept::Bottom => 1,
        Concept::Not(d) | Concept::Forall(_, d) | Concept::Exists(_, d) | Concept::Typ(d) => 1 + size(d),
        Concept::And(a, b) | Concept::Or(a, b) => 1 + size(a) + size(b),
    }
}

impl TypeSpace {
    fn new(members: Vec<Concept>) -> Self {
        let index: HashMap<Concept, usize> = members.iter().cloned().zip(0..).collect();
        let mut roles: Vec<String> = Vec::new();
        let mut quants = Vec::new();
        let mut free = Vec::new();
        let shape = members
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Concept::Atom(_) => {
                    free.push(i);
                    Shape::Free
                }
                Concept::Top => Shape::Top,
                Concept::Bottom => Shape::Bot,
                Concept::Not(d) => Shape::Not(index[&**d]),
                Concept::And(a, b) => Shape::And(index[&**a], index[&**b]),
                Concept::Or(a, b) => Shape::Or(index[&**a], index[&**b]),
                Concept::Exists(r, d) | Concept::Forall(r, d) => {
                    let role = roles.iter().position(|x| x == r).unwrap_or_else(|| {
                        roles.push(r.clone());
                        roles.len() - 1
                    });
                    quants.push(Quant {
                        member: i,
                        role,
                        filler: index[&**d],
                        forall: matches!(c, Concept::Forall(..)),
                    });
                    free.push(i);
                    Shape::Free
                }
                Concept::Typ(_) => unreachable!("closure sets are typicality-free"),
            })
            .collect();
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.sort_by_key(|&i| size(&members[i]));
        TypeSpace { members, index, shape, order, free, roles, quants }
    }

    fn types(&self) -> Option<Vec<Vec<bool>>> {
        if self.free.len() > MAX_FREE {
            return None;
        }
        let mut out = Vec::with_capacity(1 << self.free.len());
        for code in 0u64..(1 << self.free.len()) {
            let mut t = vec![false; self.members.len()];
            for (bit, &i) in self.free.iter().enumerate() {
                t[i] = code >> bit & 1 == 1;
            }
            for &i in &self.order {
                t[i] = match self.shape[i] {
                    Shape::Free => t[i],
                    Shape::Top => true,
                    Shape::Bot => false,
                    Shape::Not(a) => !t[a],
                    Shape::And(a, b) => t[a] && t[b],
                    Shape::Or(a, b) => t[a] || t[b],
                };
            }
            out.push(t);
        }
        Some(out)
    }

    fn compatible(&self, t: &[bool], u: &[bool], role: usize) -> bool {
        self.quants.iter().filter(|q| q.role == role).all(|q| {
            if q.forall {
                !t[q.member] || u[q.filler]
            } else {
                t[q.member] || !u[q.filler]
            }
        })
    }

    fn role_index(&self, r: &str) -> Option<usize> {
        self.roles.iter().position(|x| x == r)
    }
}

/// `T*` with least ranks, over 𝒮 for a KB and an optional query.
#[derive(Debug, Clone)]
pub struct GreatestModel {
    space: TypeSpace,
    types: Vec<Vec<bool>>,
    ranks: Vec<u32>,
    atoms: Vec<String>,
    roles: Vec<String>,
}

fn least_type_ranks(types: &[Vec<bool>], defeasible: &[(usize, usize)]) -> Vec<u32> {
    let n = types.len() as u32;
    let mut rank = vec![0u32; types.len()];
    loop {
        let mut changed = false;
        for &(c, d) in defeasible {
            let Some(least) = types.iter().zip(&rank).filter(|(t, _)| t[c]).map(|(_, r)| *r).min() else {
                continue;
            };
            let bumped = if least == INF || least + 1 > n { INF } else { least + 1 };
            for (t, r) in types.iter().zip(rank.iter_mut()) {
                if t[c] && !t[d] && *r < bumped {
                    *r = bumped;
                    changed = true;
                }
            }
        }
        if !changed {
            return rank;
        }
    }
}

impl GreatestModel {
    /// `None` when 𝒮 has too many free members.
    pub fn build(k: &KnowledgeBase, f: Option<&Query>) -> Option<Self> {
        let s = closure_set(k, f);
        let space = TypeSpace::new(s.iter().cloned().collect());
        let strict: Vec<(usize, usize)> = k
            .tbox()
            .iter()
            .filter(|i| i.is_strict())
            .map(|i| (space.index[i.lhs()], space.index[i.rhs()]))
            .collect();
        let defeasible: Vec<(usize, usize)> = k
            .tbox()
            .iter()
            .filter(|i| !i.is_strict())
            .map(|i| (space.index[i.antecedent()], space.index[i.rhs()]))
            .collect();
        let mut types: Vec<Vec<bool>> =
            space.types()?.into_iter().filter(|t| strict.iter().all(|&(l, r)| !t[l] || t[r])).collect();
        let mut ranks;
        loop {
            let supported: Vec<bool> = types
                .iter()
                .map(|t| {
                    space.quants.iter().all(|q| {
                        let needs = if q.forall { !t[q.member] } else { t[q.member] };
                        !needs
                            || types
                                .iter()
                                .any(|u| u[q.filler] != q.forall && space.compatible(t, u, q.role))
                    })
                })
                .collect();
            ranks = least_type_ranks(&types, &defeasible);
            let keep: Vec<bool> = supported.iter().zip(&ranks).map(|(s, r)| *s && *r != INF).collect();
            if keep.iter().all(|&b| b) {
                break;
            }
            types = types.into_iter().zip(keep).filter(|(_, k)| *k).map(|(t, _)| t).collect();
        }
        let mut atoms = k.signature().atoms.clone();
        let mut roles = k.signature().roles.clone();
        if let Some(q) = f {
            for c in q.concepts() {
                c.collect_atoms(&mut atoms);
                c.collect_roles(&mut roles);
            }
        }
        Some(GreatestModel {
            space,
            types,
            ranks,
            atoms: atoms.into_iter().collect(),
            roles: roles.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn members(&self) -> &[Concept] {
        &self.space.members
    }

    /// Members true in the `i`-th type.
    pub fn type_members(&self, i: usize) -> Vec<&Concept> {
        self.space.members.iter().zip(&self.types[i]).filter(|(_, b)| **b).map(|(c, _)| c).collect()
    }

    pub fn type_rank(&self, i: usize) -> u32 {
        self.ranks[i]
    }

    pub fn max_rank(&self) -> Option<u32> {
        self.ranks.iter().copied().max()
    }

    /// Least rank of a type containing `c`; `None` if `c` is not in 𝒮.
    pub fn concept_rank(&self, c: &Concept) -> Option<RankValue> {
        let i = *self.space.index.get(c)?;
        Some(self.rank_of_member(i))
    }

    fn rank_of_member(&self, i: usize) -> RankValue {
        self.types
            .iter()
            .zip(&self.ranks)
            .filter(|(t, _)| t[i])
            .map(|(_, r)| *r)
            .min()
            .map_or(RankValue::Infinite, RankValue::Finite)
    }

    fn index_of(&self, c: &Concept) -> usize {
        self.space.index[c]
    }

    /// Interpretation with the individuals first (typed by `typing`), then one
    /// element for each type no individual uses.
    fn materialize(&self, individuals: &[String], typing: &[usize], ranks: Option<&[u32]>) -> FiniteInterpretation {
        let used: BTreeSet<usize> = typing.iter().copied().collect();
        let element_types: Vec<usize> =
            typing.iter().copied().chain((0..self.types.len()).filter(|t| !used.contains(t))).collect();
        let size = element_types.len();
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let ext = match self.space.index.get(&Concept::atom(a.as_str())) {
                    Some(&i) => (0..size).filter(|&x| self.types[element_types[x]][i]).collect(),
                    None => BTreeSet::new(),
                };
                (a.clone(), ext)
            })
            .collect();
        let roles = self
            .roles
            .iter()
            .map(|r| {
                let role = self.space.role_index(r);
                let mut pairs = BTreeSet::new();
                for x in 0..size {
                    for y in 0..size {
                        let (t, u) = (&self.types[element_types[x]], &self.types[element_types[y]]);
                        if role.is_none_or(|ri| self.space.compatible(t, u, ri)) {
                            pairs.insert((x, y));
                        }
                    }
                }
                (r.clone(), pairs)
            })
            .collect();
        let rank = match ranks {
            Some(r) => r.to_vec(),
            None => element_types.iter().map(|&t| self.ranks[t]).collect(),
        };
        FiniteInterpretation {
            size,
            atoms,
            roles,
            individuals: individuals.iter().cloned().zip(0..).collect(),
            rank,
        }
    }
}

/// The canonical minimal models of a KB, held as typings of its individuals.
#[derive(Debug, Clone)]
pub struct CanonicalOracle {
    gm: GreatestModel,
    individuals: Vec<String>,
    typings: Vec<Vec<usize>>,
    // set when the ABox has typicality assertions: ranks come from explicit models
    explicit: Option<Vec<FiniteInterpretation>>,
}

impl CanonicalOracle {
    pub fn new(k: &KnowledgeBase, f: Option<&Query>) -> Result<Self, Inconclusive> {
        let gm = GreatestModel::build(k, f).ok_or(Inconclusive::TooManyTypes)?;
        if gm.is_empty() {
            return Err(Inconclusive::NoModel);
        }
        let individuals = k.individuals();
        let pos: HashMap<&str, usize> = individuals.iter().map(String::as_str).zip(0..).collect();
        let mut candidates: Vec<Vec<usize>> = vec![(0..gm.len()).collect(); individuals.len()];
        let mut edges = Vec::new();
        for a in k.abox() {
            match a {
                Assertion::Concept { concept, individual } => {
                    let i = gm.index_of(concept.strip_typ());
                    candidates[pos[individual.as_str()]].retain(|&t| gm.types[t][i]);
                }
                Assertion::Role { role, subject, object } => {
                    if let Some(r) = gm.space.role_index(role) {
                        edges.push((r, pos[subject.as_str()], pos[object.as_str()]));
                    }
                }
            }
        }
        let mut all = Vec::new();
        let mut current = Vec::new();
        collect_typings(&gm, &candidates, &edges, &mut current, &mut all);
        let (typings, explicit) = if k.has_typical_assertions() {
            let mut models = Vec::new();
            for typing in &all {
                let m = gm.materialize(&individuals, typing, None);
                if let Some(r) = least_ranking(&m, k) {
                    let m = FiniteInterpretation { rank: r, ..m };
                    if satisfies_kb(&m, k) {
                        models.push((typing.clone(), m));
                    }
                }
            }
            let only: Vec<FiniteInterpretation> = models.iter().map(|(_, m)| m.clone()).collect();
            let kept = abox_minimal(&only);
            let pairs: Vec<(Vec<usize>, FiniteInterpretation)> =
                models.into_iter().filter(|(_, m)| kept.contains(m)).collect();
            let (t, m): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            (t, Some(m))
        } else {
            let vectors: Vec<Vec<u32>> = all.iter().map(|t| t.iter().map(|&x| gm.ranks[x]).collect()).collect();
            let distinct: BTreeSet<&Vec<u32>> = vectors.iter().collect();
            let least: BTreeSet<&Vec<u32>> = distinct
                .iter()
                .copied()
                .filter(|v| !distinct.iter().any(|w| w != v && w.iter().zip(v.iter()).all(|(a, b)| a <= b)))
                .collect();
            let minimal: Vec<Vec<usize>> =
                all.iter().zip(&vectors).filter(|(_, v)| least.contains(v)).map(|(t, _)| t.clone()).collect();
            (minimal, None)
        };
        if typings.is_empty() {
            return Err(Inconclusive::NoModel);
        }
        Ok(CanonicalOracle { gm, individuals, typings, explicit })
    }

    pub fn greatest(&self) -> &GreatestModel {
        &self.gm
    }

    /// Number of ABox-minimal typings of the individuals.
    pub fn typing_count(&self) -> usize {
        self.typings.len()
    }

    /// Elements the largest minimal canonical model needs.
    pub fn needed_domain(&self) -> usize {
        self.typings
            .iter()
            .map(|t| {
                let distinct: BTreeSet<&usize> = t.iter().collect();
                self.individuals.len() + self.gm.len() - distinct.len()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn needed_rank(&self) -> u32 {
        match &self.explicit {
            Some(models) => models.iter().flat_map(|m| m.rank.iter().copied()).max().unwrap_or(0),
            None => self.gm.max_rank().unwrap_or(0),
        }
    }

    pub fn within(&self, domain_bound: usize, rank_bound: u32) -> Result<(), Inconclusive> {
        let needed = self.needed_domain();
        if needed > domain_bound {
            return Err(Inconclusive::DomainBound { needed, bound: domain_bound });
        }
        let needed = self.needed_rank();
        if needed >= rank_bound {
            return Err(Inconclusive::RankBound { needed, bound: rank_bound });
        }
        Ok(())
    }

    /// One explicit model per minimal typing.
    pub fn models(&self) -> impl Iterator<Item = FiniteInterpretation> + '_ {
        (0..self.typings.len()).map(move |i| match &self.explicit {
            Some(models) => models[i].clone(),
            None => self.gm.materialize(&self.individuals, &self.typings[i], None),
        })
    }

    fn member(&self, c: &Concept) -> Option<usize> {
        self.gm.space.index.get(c).copied()
    }

    /// Truth of `q` in the canonical model for `typing`; `None` if `q` mentions
    /// concepts outside 𝒮.
    fn holds_in(&self, q: &Query, typing: &[usize]) -> Option<bool> {
        let gm = &self.gm;
        Some(match q {
            Query::Inclusion(inc) if inc.is_strict() => {
                let (l, r) = (self.member(inc.lhs())?, self.member(inc.rhs())?);
                gm.types.iter().all(|t| !t[l] || t[r])
            }
            Query::Inclusion(inc) => {
                let (c, d) = (self.member(inc.antecedent())?, self.member(inc.rhs())?);
                let least = gm.rank_of_member(c);
                gm.types.iter().zip(&gm.ranks).all(|(t, r)| !t[c] || RankValue::Finite(*r) != least || t[d])
            }
            Query::Assertion { concept, individual } => {
                let i = self.member(concept.strip_typ())?;
                let pos = self.individuals.iter().position(|x| x == individual)?;
                let t = typing[pos];
                let member = gm.types[t][i];
                match concept {
                    Concept::Typ(_) => member && RankValue::Finite(gm.ranks[t]) == gm.rank_of_member(i),
                    _ => member,
                }
            }
        })
    }

    /// Truth of `q` in every minimal canonical model, with the first failing
    /// model. `None` if `q` leaves 𝒮 or names an unknown individual.
    pub fn decide(&self, q: &Query) -> Option<Result<(), FiniteInterpretation>> {
        if let Some(models) = &self.explicit {
            if q.concepts().iter().any(|c| self.member(c.strip_typ()).is_none()) {
                return None;
            }
            return Some(match models.iter().find(|m| !satisfies_query(m, q)) {
                Some(m) => Err(m.clone()),
                None => Ok(()),
            });
        }
        for t in &self.typings {
            if !self.holds_in(q, t)? {
                return Some(Err(self.gm.materialize(&self.individuals, t, None)));
            }
        }
        Some(Ok(()))
    }
}

fn collect_typings(
    gm: &GreatestModel,
    candidates: &[Vec<usize>],
    edges: &[(usize, usize, usize)],
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let i = current.len();
    if i == candidates.len() {
        out.push(current.clone());
        return;
    }
    for &t in &candidates[i] {
        current.push(t);
        let ok = edges.iter().filter(|(_, a, b)| (*a == i && *b <= i) || (*b == i && *a <= i)).all(|&(r, a, b)| {
            gm.space.compatible(&gm.types[current[a]], &gm.types[current[b]], r)
        });
        if ok {
            collect_typings(gm, candidates, edges, current, out);
        }
        current.pop();
    }
}

/// `|T*| + |individuals|`, the size of the canonical model with a separate
/// element for every type and every individual.
pub fn canonical_size_hint(k: &KnowledgeBase, f: Option<&Query>) -> Option<usize> {
    GreatestModel::build(k, f).map(|gm| gm.len() + k.individuals().len())
}

/// Whether every type of `T*` is realized by some element of `m`.
pub fn is_canonical(m: &FiniteInterpretation, k: &KnowledgeBase, f: Option<&Query>) -> bool {
    let Some(gm) = GreatestModel::build(k, f) else { return false };
    let masks: Vec<Vec<bool>> = gm.space.members.iter().map(|c| mask(m, c)).collect();
    let realized: BTreeSet<Vec<bool>> = m.domain().map(|x| masks.iter().map(|v| v[x]).collect()).collect();
    gm.types.iter().all(|t| realized.contains(t))
}

/// Whether `c` is exceptional for `e`: no model of `e` has an element of rank
/// zero in `c`.
pub fn exceptional_by_models(c: &Concept, e: &[Inclusion]) -> Option<bool> {
    let k = KnowledgeBase::new(e.to_vec(), Vec::new());
    let probe = Query::Inclusion(Inclusion::strict(c.clone(), Concept::Top).ok()?);
    let gm = GreatestModel::build(&k, Some(&probe))?;
    let i = gm.index_of(c);
    Some(!gm.types.iter().zip(&gm.ranks).any(|(t, r)| t[i] && *r == 0))
}

/// Does `f` hold in every canonical minimal model of `k`?
pub fn minimally_entails(k: &KnowledgeBase, f: &Query, opts: &OracleOptions) -> Verdict {
    match opts.method {
        Method::Canonical => {
            let oracle = match CanonicalOracle::new(k, Some(f)) {
                Ok(o) => o,
                Err(e) => return Verdict::Inconclusive(e),
            };
            if let Err(e) = oracle.within(opts.domain_bound, opts.rank_bound) {
                return Verdict::Inconclusive(e);
            }
            match oracle.decide(f).expect("query concepts are in 𝒮") {
                Ok(()) => Verdict::Holds,
                Err(m) => Verdict::Fails(Box::new(m)),
            }
        }
        Method::Enumeration { canonical } if k.individuals().is_empty() => {
            // without individuals every minimal model counts on its own, so a
            // countermodel at a small size settles the query
            let mut verdict = Verdict::Inconclusive(Inconclusive::NoModel);
            for size in 1..=opts.domain_bound {
                let bounded = OracleOptions { domain_bound: size, ..*opts };
                match by_enumeration(k, f, &bounded, canonical) {
                    Verdict::Fails(m) => return Verdict::Fails(m),
                    Verdict::Holds => verdict = Verdict::Holds,
                    Verdict::Inconclusive(_) => {}
                }
            }
            verdict
        }
        Method::Enumeration { canonical } => by_enumeration(k, f, opts, canonical),
    }
}

fn by_enumeration(k: &KnowledgeBase, f: &Query, opts: &OracleOptions, canonical: bool) -> Verdict {
    let models = fims_minimal(&enumerate_models(k, Some(f), opts.domain_bound, opts.rank_bound));
    let models: Vec<FiniteInterpretation> = if canonical {
        models.into_iter().filter(|m| is_canonical(m, k, Some(f))).collect()
    } else {
        models
    };
    let models = abox_minimal(&models);
    if models.is_empty() {
        return Verdict::Inconclusive(Inconclusive::NoModel);
    }
    match models.into_iter().find(|m| !satisfies_query(m, f)) {
        Some(m) => Verdict::Fails(Box::new(m)),
        None => Verdict::Holds,
    }
}

/// Per-type summary used by the CLI dump.
pub fn describe_types(gm: &GreatestModel) -> BTreeMap<usize, (u32, Vec<String>)> {
    (0..gm.len())
        .map(|i| (i, (gm.type_rank(i), gm.type_members(i).iter().map(|c| c.to_string()).collect())))
        .collect()
}
