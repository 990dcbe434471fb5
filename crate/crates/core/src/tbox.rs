//! Rational closure of a TBox.
//!
//! A concept is exceptional for a set of inclusions `E` when no element can be
//! both a `C` and satisfy every defeasible inclusion of `E`, with the strict
//! inclusions of `E` in force everywhere. Repeatedly keeping the defeasible
//! inclusions whose antecedent is exceptional gives the levels `E_0 ⊇ E_1 ⊇ …`.
//!
//! Inclusions that survive into the fixpoint have an antecedent of infinite
//! rank, which in every rational model means the antecedent is empty. Their
//! materialization is therefore moved into the strict base (`⊤ ⊑ ⊓(¬C ⊔ D)`) and
//! the levels are recomputed until nothing new survives.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::kb::{strict_part, Concept, Inclusion, KnowledgeBase, RankValue};
use crate::tableau::{entails_inclusion, is_satisfiable, EngineError};

/// Which strict inclusions count as the classical part of the closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassicalBase {
    /// The strict inclusions written in the KB.
    StrictOnly,
    /// The strict inclusions plus the materialization of every infinite-rank
    /// defeasible inclusion.
    #[default]
    Materialized,
}

/// `⊓(¬C ⊔ D)` over the defeasible members of `e`; `⊤` when there are none.
pub fn materialize(e: &[Inclusion]) -> Concept {
    Concept::conjunction(e.iter().filter(|i| !i.is_strict()).map(Inclusion::materialization))
}

fn root_exceptional(c: &Concept, strict: &[Inclusion], defeasible: &[Inclusion]) -> Result<bool, EngineError> {
    let query = Concept::and(c.clone(), materialize(defeasible));
    Ok(!is_satisfiable(&query, strict)?)
}

/// `c` is exceptional for `e` iff `c ⊓ materialize(e)` is unsatisfiable under
/// the strict members of `e`, once those are augmented with the
/// materialization of the infinite-rank inclusions of `e`.
pub fn is_exceptional(c: &Concept, e: &[Inclusion]) -> Result<bool, EngineError> {
    let strict: Vec<Inclusion> = e.iter().filter(|i| i.is_strict()).cloned().collect();
    let defeasible: Vec<Inclusion> = e.iter().filter(|i| !i.is_strict()).cloned().collect();
    let (augmented, _) = augment(strict, &defeasible)?;
    root_exceptional(c, &augmented, &defeasible)
}

#[derive(Debug)]
pub struct RankedTbox {
    strict: Vec<Inclusion>,
    augmented: Vec<Inclusion>,
    defeasible_levels: Vec<Vec<Inclusion>>,
    memo: RwLock<HashMap<Concept, RankValue>>,
}

impl RankedTbox {
    /// The strict inclusions written in the KB.
    pub fn strict(&self) -> &[Inclusion] {
        &self.strict
    }

    /// The strict base used for exceptionality: the KB's strict inclusions and
    /// one `⊤ ⊑ …` axiom per round of infinite-rank materialization.
    pub fn augmented_strict(&self) -> &[Inclusion] {
        &self.augmented
    }

    /// Index of the fixpoint level. Ranks of individuals range over `0..=n`.
    pub fn max_finite_rank(&self) -> u32 {
        (self.defeasible_levels.len() - 1) as u32
    }

    /// Defeasible members of `E_i`, reading the fixpoint beyond the last level.
    pub fn defeasible_level(&self, i: usize) -> &[Inclusion] {
        let last = self.defeasible_levels.len() - 1;
        &self.defeasible_levels[i.min(last)]
    }

    /// `E_i` in full: the augmented strict base then the defeasible members.
    pub fn level(&self, i: usize) -> Vec<Inclusion> {
        self.augmented.iter().chain(self.defeasible_level(i)).cloned().collect()
    }

    pub fn level_count(&self) -> usize {
        self.defeasible_levels.len()
    }

    pub fn base(&self, base: ClassicalBase) -> &[Inclusion] {
        match base {
            ClassicalBase::StrictOnly => &self.strict,
            ClassicalBase::Materialized => &self.augmented,
        }
    }

    /// The typicality-free inclusions whose antecedent has infinite rank.
    pub fn infinite_inclusions(&self) -> &[Inclusion] {
        self.defeasible_levels.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn levels_for(strict: &[Inclusion], defeasible: &[Inclusion]) -> Result<Vec<Vec<Inclusion>>, EngineError> {
    let mut levels = vec![defeasible.to_vec()];
    loop {
        let last = levels.last().unwrap();
        let mut next = Vec::new();
        for inc in last {
            if root_exceptional(inc.antecedent(), strict, last)? {
                next.push(inc.clone());
            }
        }
        if &next == last {
            return Ok(levels);
        }
        levels.push(next);
    }
}

fn augment(
    strict: Vec<Inclusion>,
    defeasible: &[Inclusion],
) -> Result<(Vec<Inclusion>, Vec<Vec<Inclusion>>), EngineError> {
    let mut augmented = strict;
    let mut absorbed: Vec<Inclusion> = Vec::new();
    loop {
        let levels = levels_for(&augmented, defeasible)?;
        let fresh: Vec<Inclusion> =
            levels.last().unwrap().iter().filter(|i| !absorbed.contains(i)).cloned().collect();
        if fresh.is_empty() {
            return Ok((augmented, levels));
        }
        augmented.push(Inclusion::strict(Concept::Top, materialize(&fresh)).expect("typicality-free"));
        absorbed.extend(fresh);
    }
}

/// Computes `E_0, …, E_n` where `E_n` is the first level equal to its successor.
pub fn exceptionality_sequence(k: &KnowledgeBase) -> Result<RankedTbox, EngineError> {
    let strict = strict_part(k);
    let (augmented, defeasible_levels) = augment(strict.clone(), &k.defeasible_part())?;
    Ok(RankedTbox { strict, augmented, defeasible_levels, memo: RwLock::new(HashMap::new()) })
}

/// Least `i` with `c` not exceptional for `E_i`, or `Infinite`.
pub fn concept_rank(c: &Concept, r: &RankedTbox) -> Result<RankValue, EngineError> {
    if let Some(v) = r.memo.read().unwrap().get(c) {
        return Ok(*v);
    }
    let mut value = RankValue::Infinite;
    for i in 0..r.level_count() {
        if !root_exceptional(c, &r.augmented, r.defeasible_level(i))? {
            value = RankValue::Finite(i as u32);
            break;
        }
    }
    r.memo.write().unwrap().insert(c.clone(), value);
    Ok(value)
}

/// Membership of `inc` in the rational closure of the TBox.
pub fn in_tbox_closure(inc: &Inclusion, r: &RankedTbox, base: ClassicalBase) -> Result<bool, EngineError> {
    if inc.is_strict() {
        return entails_inclusion(r.base(base), inc.lhs(), inc.rhs());
    }
    let c = inc.antecedent();
    let rc = concept_rank(c, r)?;
    if rc == RankValue::Infinite {
        return Ok(true);
    }
    let rest = concept_rank(&Concept::and(c.clone(), Concept::not(inc.rhs().clone())), r)?;
    Ok(rc < rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_concept, parse_kb};

    fn c(s: &str) -> Concept {
        parse_concept(s).unwrap()
    }

    fn example1() -> KnowledgeBase {
        parse_kb("tbox: T(B) <= F  T(P) <= ~F  P <= B\nabox: P(i) B(j)").unwrap()
    }

    #[test]
    fn materialization_shapes() {
        let k = example1();
        assert_eq!(materialize(k.tbox()), c("(~B | F) & (~P | ~F)"));
        assert_eq!(materialize(&strict_part(&k)), Concept::Top);
    }

    #[test]
    fn example_one_levels_and_ranks() {
        let k = example1();
        assert!(is_exceptional(&c("P"), k.tbox()).unwrap());
        assert!(!is_exceptional(&c("B"), k.tbox()).unwrap());
        assert!(is_exceptional(&Concept::Bottom, k.tbox()).unwrap());
        let r = exceptionality_sequence(&k).unwrap();
        assert_eq!(r.level_count(), 3);
        assert_eq!(r.max_finite_rank(), 2);
        assert_eq!(r.defeasible_level(1), &[k.tbox()[1].clone()]);
        assert!(r.defeasible_level(2).is_empty());
        assert_eq!(materialize(&r.level(1)), c("~P | ~F"));
        for (s, v) in [("B", 0), ("P", 1), ("B & ~F", 1), ("P & F", 2)] {
            assert_eq!(concept_rank(&c(s), &r).unwrap(), RankValue::Finite(v), "{s}");
        }
        assert_eq!(concept_rank(&Concept::Bottom, &r).unwrap(), RankValue::Infinite);
    }

    #[test]
    fn example_one_closure() {
        let r = exceptionality_sequence(&example1()).unwrap();
        let q = |s: &str| {
            let k = parse_kb(&format!("tbox: {s}")).unwrap();
            in_tbox_closure(&k.tbox()[0], &r, ClassicalBase::default()).unwrap()
        };
        assert!(q("T(B) <= F"));
        assert!(q("T(P) <= ~F"));
        assert!(!q("T(P) <= F"));
        assert!(q("P <= B"));
        assert!(!q("B <= P"));
    }

    #[test]
    fn penguin_black() {
        let k = parse_kb("tbox: Penguin <= Bird T(Bird) <= Fly T(Penguin) <= ~Fly").unwrap();
        let r = exceptionality_sequence(&k).unwrap();
        assert_eq!(concept_rank(&c("Penguin & Black"), &r).unwrap(), RankValue::Finite(1));
        let q = parse_kb("tbox: T(Penguin & Black) <= ~Fly").unwrap();
        assert!(in_tbox_closure(&q.tbox()[0], &r, ClassicalBase::StrictOnly).unwrap());
    }

    #[test]
    fn example_two_levels() {
        let k = parse_kb(
            "tbox: T(CS) <= forall taught. A   T(B) <= forall taught. C   C <= ~A
             abox: CS(c1)  B(c2)  taught(c1, joe)  taught(c2, joe)",
        )
        .unwrap();
        let r = exceptionality_sequence(&k).unwrap();
        assert_eq!(r.max_finite_rank(), 1);
        assert!(r.defeasible_level(1).is_empty());
        for a in ["A", "B", "C", "CS"] {
            assert_eq!(concept_rank(&c(a), &r).unwrap(), RankValue::Finite(0));
        }
    }

    #[test]
    fn strict_only_is_an_immediate_fixpoint() {
        let k = parse_kb("tbox: A <= B").unwrap();
        let r = exceptionality_sequence(&k).unwrap();
        assert_eq!(r.level_count(), 1);
        assert_eq!(r.max_finite_rank(), 0);
        assert_eq!(concept_rank(&c("A"), &r).unwrap(), RankValue::Finite(0));
        let k = parse_kb("tbox: A <= Bot").unwrap();
        let r = exceptionality_sequence(&k).unwrap();
        assert_eq!(concept_rank(&c("A"), &r).unwrap(), RankValue::Infinite);
    }

    #[test]
    fn infinite_antecedents_become_empty() {
        let k = parse_kb("tbox: T(A) <= B  T(A) <= ~B").unwrap();
        let r = exceptionality_sequence(&k).unwrap();
        assert_eq!(r.infinite_inclusions().len(), 2);
        assert_eq!(concept_rank(&c("A"), &r).unwrap(), RankValue::Infinite);
        // without the strict augmentation this would be rank 0
        assert_eq!(concept_rank(&c("exists r. A"), &r).unwrap(), RankValue::Infinite);
        assert!(is_exceptional(&c("exists r. A"), k.tbox()).unwrap());
        let q = Inclusion::strict(c("A"), c("Bot")).unwrap();
        assert!(in_tbox_closure(&q, &r, ClassicalBase::Materialized).unwrap());
        assert!(!in_tbox_closure(&q, &r, ClassicalBase::StrictOnly).unwrap());
        let q = Inclusion::defeasible(c("A"), c("Bot")).unwrap();
        assert!(in_tbox_closure(&q, &r, ClassicalBase::default()).unwrap());
    }
}
