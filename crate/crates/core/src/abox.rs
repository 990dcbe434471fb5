//! Rational closure over the ABox.
//!
//! Each individual is given a rank between `0` and the fixpoint index of the
//! TBox levels. An individual at rank `r` must satisfy `¬C ⊔ D` for every
//! closure inclusion `T(C) ⊑ D` over 𝒮 whose antecedent has rank at least `r`.
//! Lower ranks can only add obligations, so consistency is upward closed in the
//! pointwise order. The closure keeps what follows from every minimal consistent
//! assignment.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kb::{closure_set, Assertion, ClosureSet, Concept, Inclusion, KnowledgeBase, Query, RankValue};
use crate::tableau::{abox_consistent, entails_inclusion, instance_check, EngineError};
use crate::tbox::{concept_rank, exceptionality_sequence, in_tbox_closure, ClassicalBase, RankedTbox};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AboxError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("no rank assignment is consistent with the ABox")]
    NoConsistentAssignment,
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("typicality assertions in the ABox are only handled by the model oracle")]
    TypicalAssertion,
    #[error("typicality queries on individuals are only handled by the model oracle")]
    TypicalQuery,
    #[error("assignment does not cover individual `{0}`")]
    IncompleteAssignment(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RankAssignment {
    ranks: BTreeMap<String, u32>,
}

impl RankAssignment {
    pub fn new(ranks: BTreeMap<String, u32>) -> Self {
        RankAssignment { ranks }
    }

    pub fn ranks(&self) -> &BTreeMap<String, u32> {
        &self.ranks
    }

    pub fn get(&self, individual: &str) -> Option<u32> {
        self.ranks.get(individual).copied()
    }

    pub fn total(&self) -> u32 {
        self.ranks.values().sum()
    }

    /// Pointwise `≤` over a shared set of individuals.
    pub fn pointwise_le(&self, other: &RankAssignment) -> bool {
        self.ranks.iter().all(|(k, v)| other.ranks.get(k).is_some_and(|w| v <= w))
    }
}

impl fmt::Display for RankAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ranks.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The obligations `(¬C ⊔ D)(a)` induced by an assignment, sorted by
/// individual and then concept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuSet {
    assertions: Vec<Assertion>,
}

impl MuSet {
    pub fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn contains(&self, concept: &Concept, individual: &str) -> bool {
        self.assertions.iter().any(|a| {
            matches!(a, Assertion::Concept { concept: c, individual: i } if c == concept && i == individual)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Visit assignments by rank sum and skip the ones settled by known results.
    #[default]
    Pruned,
    /// Test every assignment, then keep the minimal consistent ones.
    Exhaustive,
}

#[derive(Debug, Clone)]
struct MuEntry {
    concept: Concept,
    rank: RankValue,
    // already a consequence of the strict base, so irrelevant for consistency
    redundant: bool,
}

/// Outcome of an assertion query: the verdict under each minimal assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionVerdict {
    pub holds: bool,
    pub per_assignment: Vec<(RankAssignment, bool)>,
}

pub struct AboxReasoner<'a> {
    kb: &'a KnowledgeBase,
    ranked: &'a RankedTbox,
    closure: ClosureSet,
    base: ClassicalBase,
    individuals: Vec<String>,
    defeasible: Vec<MuEntry>,
    strict: Vec<MuEntry>,
}

impl<'a> AboxReasoner<'a> {
    pub fn new(
        kb: &'a KnowledgeBase,
        ranked: &'a RankedTbox,
        closure: ClosureSet,
        base: ClassicalBase,
    ) -> Result<Self, AboxError> {
        if kb.has_typical_assertions() {
            return Err(AboxError::TypicalAssertion);
        }
        let classical = ranked.base(base);
        let mut defeasible = Vec::new();
        for c in closure.iter() {
            let rank = concept_rank(c, ranked)?;
            for d in closure.iter() {
                let inc = Inclusion::defeasible(c.clone(), d.clone()).expect("closure members are typicality-free");
                if in_tbox_closure(&inc, ranked, base)? {
                    defeasible.push(MuEntry {
                        concept: inc.materialization(),
                        rank,
                        redundant: entails_inclusion(classical, c, d)?,
                    });
                }
            }
        }
        let strict = ranked
            .strict()
            .iter()
            .map(|inc| MuEntry { concept: inc.materialization(), rank: RankValue::Infinite, redundant: true })
            .collect();
        Ok(AboxReasoner { kb, ranked, closure, base, individuals: kb.individuals(), defeasible, strict })
    }

    pub fn closure(&self) -> &ClosureSet {
        &self.closure
    }

    pub fn individuals(&self) -> &[String] {
        &self.individuals
    }

    pub fn max_rank(&self) -> u32 {
        self.ranked.max_finite_rank()
    }

    fn component(&self, rank: u32, for_consistency: bool) -> impl Iterator<Item = &Concept> {
        self.defeasible
            .iter()
            .filter(move |e| e.rank >= RankValue::Finite(rank))
            .chain(&self.strict)
            .filter(move |e| !(for_consistency && e.redundant))
            .map(|e| &e.concept)
    }

    fn rank_of(&self, a: &RankAssignment, ind: &str) -> Result<u32, AboxError> {
        a.get(ind).ok_or_else(|| AboxError::IncompleteAssignment(ind.to_string()))
    }

    pub fn mu_set(&self, a: &RankAssignment) -> Result<MuSet, AboxError> {
        let mut assertions = Vec::new();
        for ind in &self.individuals {
            let mut concepts: Vec<&Concept> = self.component(self.rank_of(a, ind)?, false).collect();
            concepts.sort();
            concepts.dedup();
            assertions.extend(
                concepts
                    .into_iter()
                    .map(|c| Assertion::Concept { concept: c.clone(), individual: ind.clone() }),
            );
        }
        Ok(MuSet { assertions })
    }

    /// The ABox together with the non-redundant part of μ for `a`, and a `⊤`
    /// assertion per individual so every name is present.
    fn extended_abox(&self, a: &RankAssignment) -> Result<Vec<Assertion>, AboxError> {
        let mut out = self.kb.abox().to_vec();
        for ind in &self.individuals {
            out.push(Assertion::Concept { concept: Concept::Top, individual: ind.clone() });
            let rank = self.rank_of(a, ind)?;
            out.extend(
                self.component(rank, true)
                    .map(|c| Assertion::Concept { concept: c.clone(), individual: ind.clone() }),
            );
        }
        Ok(out)
    }

    pub fn assignment_consistent(&self, a: &RankAssignment) -> Result<bool, AboxError> {
        Ok(abox_consistent(self.ranked.base(self.base), &self.extended_abox(a)?)?)
    }

    /// Every assignment over `0..=max_rank`, ordered by rank sum, then
    /// lexicographically over individuals sorted by name.
    pub fn enumerate_rank_assignments(&self) -> Vec<RankAssignment> {
        let width = self.max_rank() + 1;
        let n = self.individuals.len();
        let mut tuples: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..n {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    (0..width).map(move |v| {
                        let mut t = t.clone();
                        t.push(v);
                        t
                    })
                })
                .collect();
        }
        tuples.sort_by(|a, b| (a.iter().sum::<u32>(), a).cmp(&(b.iter().sum::<u32>(), b)));
        tuples.into_iter().map(|t| self.assignment(&t)).collect()
    }

    fn assignment(&self, t: &[u32]) -> RankAssignment {
        RankAssignment::new(self.individuals.iter().cloned().zip(t.iter().copied()).collect())
    }

    pub fn minimal_consistent_assignments(
        &self,
        mode: SearchMode,
        parallel: bool,
    ) -> Result<Vec<RankAssignment>, AboxError> {
        let all = self.enumerate_rank_assignments();
        let minimal = match mode {
            SearchMode::Exhaustive => {
                let flags: Vec<bool> = if parallel {
                    all.par_iter().map(|a| self.assignment_consistent(a)).collect::<Result<_, _>>()?
                } else {
                    all.iter().map(|a| self.assignment_consistent(a)).collect::<Result<_, _>>()?
                };
                let consistent: Vec<&RankAssignment> =
                    all.iter().zip(flags).filter(|(_, f)| *f).map(|(a, _)| a).collect();
                consistent
                    .iter()
                    .filter(|a| !consistent.iter().any(|b| b != *a && b.pointwise_le(a)))
                    .map(|a| (*a).clone())
                    .collect()
            }
            SearchMode::Pruned => self.pruned(&all, parallel)?,
        };
        if minimal.is_empty() {
            return Err(AboxError::NoConsistentAssignment);
        }
        Ok(minimal)
    }

    fn pruned(&self, all: &[RankAssignment], parallel: bool) -> Result<Vec<RankAssignment>, AboxError> {
        let mut minimal: Vec<RankAssignment> = Vec::new();
        let mut failed: Vec<RankAssignment> = Vec::new();
        // assignments with the same sum are pairwise incomparable, so each
        // layer can be decided in one batch
        let mut start = 0;
        while start < all.len() {
            let sum = all[start].total();
            let end = start + all[start..].iter().take_while(|a| a.total() == sum).count();
            let open: Vec<&RankAssignment> = all[start..end]
                .iter()
                .filter(|a| !minimal.iter().any(|m| m.pointwise_le(a)) && !failed.iter().any(|b| a.pointwise_le(b)))
                .collect();
            let flags: Vec<bool> = if parallel {
                open.par_iter().map(|a| self.assignment_consistent(a)).collect::<Result<_, _>>()?
            } else {
                open.iter().map(|a| self.assignment_consistent(a)).collect::<Result<_, _>>()?
            };
            for (a, ok) in open.into_iter().zip(flags) {
                if ok {
                    minimal.push(a.clone());
                } else {
                    failed.retain(|b| !b.pointwise_le(a));
                    failed.push(a.clone());
                }
            }
            start = end;
        }
        Ok(minimal)
    }

    fn check_query(&self, concept: &Concept, individual: &str) -> Result<(), AboxError> {
        if !concept.is_typ_free() {
            return Err(AboxError::TypicalQuery);
        }
        if !self.individuals.iter().any(|i| i == individual) {
            return Err(AboxError::UnknownIndividual(individual.to_string()));
        }
        Ok(())
    }

    /// Skeptical membership of `concept(individual)` given the minimal assignments.
    pub fn query(
        &self,
        minimal: &[RankAssignment],
        concept: &Concept,
        individual: &str,
    ) -> Result<AssertionVerdict, AboxError> {
        self.check_query(concept, individual)?;
        let mut per_assignment = Vec::new();
        for a in minimal {
            let ok = instance_check(self.ranked.base(self.base), &self.extended_abox(a)?, concept, individual)?;
            per_assignment.push((a.clone(), ok));
        }
        Ok(AssertionVerdict { holds: per_assignment.iter().all(|(_, ok)| *ok), per_assignment })
    }

    /// All 𝒮-assertions about each individual that belong to the closure.
    pub fn derivable(&self, minimal: &[RankAssignment]) -> Result<BTreeMap<String, Vec<Concept>>, AboxError> {
        let mut out = BTreeMap::new();
        for ind in &self.individuals {
            let mut held = Vec::new();
            for c in self.closure.iter() {
                if self.query(minimal, c, ind)?.holds {
                    held.push(c.clone());
                }
            }
            out.insert(ind.clone(), held);
        }
        Ok(out)
    }
}

/// Builds the ranked TBox and the query-relative 𝒮, then answers `query`.
pub fn in_abox_closure(k: &KnowledgeBase, concept: &Concept, individual: &str) -> Result<bool, AboxError> {
    let ranked = exceptionality_sequence(k)?;
    let query = Query::assertion(concept.clone(), individual).map_err(|_| AboxError::TypicalQuery)?;
    let reasoner = AboxReasoner::new(k, &ranked, closure_set(k, Some(&query)), ClassicalBase::default())?;
    reasoner.check_query(concept, individual)?;
    let minimal = reasoner.minimal_consistent_assignments(SearchMode::Pruned, false)?;
    Ok(reasoner.query(&minimal, concept, individual)?.holds)
}
