//! Domain model for ALC extended with a typicality operator.
//!
//! Concepts are plain ASTs compared structurally. The typicality constructor
//! [`Concept::Typ`] may only wrap a typicality-free concept and may only
//! appear at the top of an inclusion's left-hand side or of a concept
//! assertion; [`Inclusion::new`] and [`Assertion::concept`] enforce this.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("typicality operator is not allowed {0}")]
    TypicalityMisplaced(&'static str),
    #[error("negation normal form is only defined for typicality-free concepts")]
    NnfOfTypicality,
}

/// An ALC concept, optionally wrapped once in the typicality operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Concept {
    Atom(String),
    Top,
    Bottom,
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Forall(String, Box<Concept>),
    Exists(String, Box<Concept>),
    Typ(Box<Concept>),
}

impl Concept {
    pub fn atom(name: impl Into<String>) -> Self {
        Concept::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Self {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Self {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Self {
        Concept::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(role: impl Into<String>, c: Concept) -> Self {
        Concept::Exists(role.into(), Box::new(c))
    }

    pub fn forall(role: impl Into<String>, c: Concept) -> Self {
        Concept::Forall(role.into(), Box::new(c))
    }

    pub fn typ(c: Concept) -> Self {
        Concept::Typ(Box::new(c))
    }

    /// Left-nested conjunction of `parts`; `Top` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Concept>) -> Self {
        parts
            .into_iter()
            .reduce(Concept::and)
            .unwrap_or(Concept::Top)
    }

    pub fn is_typ_free(&self) -> bool {
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => true,
            Concept::Not(c) | Concept::Forall(_, c) | Concept::Exists(_, c) => c.is_typ_free(),
            Concept::And(a, b) | Concept::Or(a, b) => a.is_typ_free() && b.is_typ_free(),
            Concept::Typ(_) => false,
        }
    }

    /// Typicality-free, or a single outermost `Typ` around a typicality-free concept.
    pub fn is_legal_lhs(&self) -> bool {
        match self {
            Concept::Typ(inner) => inner.is_typ_free(),
            other => other.is_typ_free(),
        }
    }

    /// The concept under an outermost `Typ`, or the concept itself.
    pub fn strip_typ(&self) -> &Concept {
        match self {
            Concept::Typ(inner) => inner,
            other => other,
        }
    }

    /// Complement representative: `Not(X)` maps to `X`, anything else is negated.
    pub fn complement(&self) -> Concept {
        match self {
            Concept::Not(inner) => (**inner).clone(),
            other => Concept::not(other.clone()),
        }
    }

    pub fn is_literal(&self) -> bool {
        match self {
            Concept::Atom(_) => true,
            Concept::Not(inner) => matches!(**inner, Concept::Atom(_)),
            _ => false,
        }
    }

    /// Inserts every subconcept (including `self`) into `out`.
    pub fn collect_subconcepts(&self, out: &mut BTreeSet<Concept>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => {}
            Concept::Not(c) | Concept::Forall(_, c) | Concept::Exists(_, c) | Concept::Typ(c) => {
                c.collect_subconcepts(out)
            }
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.collect_subconcepts(out);
                b.collect_subconcepts(out);
            }
        }
    }

    pub fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Concept::Atom(a) => {
                out.insert(a.clone());
            }
            Concept::Top | Concept::Bottom => {}
            Concept::Not(c) | Concept::Forall(_, c) | Concept::Exists(_, c) | Concept::Typ(c) => {
                c.collect_atoms(out)
            }
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn collect_roles(&self, out: &mut BTreeSet<String>) {
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => {}
            Concept::Forall(r, c) | Concept::Exists(r, c) => {
                out.insert(r.clone());
                c.collect_roles(out);
            }
            Concept::Not(c) | Concept::Typ(c) => c.collect_roles(out),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.collect_roles(out);
                b.collect_roles(out);
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub fn roles(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_roles(&mut out);
        out
    }

    /// Maximum nesting depth of quantifiers.
    pub fn role_depth(&self) -> usize {
        match self {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => 0,
            Concept::Not(c) | Concept::Typ(c) => c.role_depth(),
            Concept::Forall(_, c) | Concept::Exists(_, c) => 1 + c.role_depth(),
            Concept::And(a, b) | Concept::Or(a, b) => a.role_depth().max(b.role_depth()),
        }
    }
}

/// Negation normal form: negation is pushed down to atoms, `~Top`/`~Bot` are
/// folded, and double negations disappear.
pub fn nnf(c: &Concept) -> Result<Concept, KbError> {
    fn pos(c: &Concept) -> Result<Concept, KbError> {
        Ok(match c {
            Concept::Atom(_) | Concept::Top | Concept::Bottom => c.clone(),
            Concept::Not(inner) => neg(inner)?,
            Concept::And(a, b) => Concept::and(pos(a)?, pos(b)?),
            Concept::Or(a, b) => Concept::or(pos(a)?, pos(b)?),
            Concept::Forall(r, d) => Concept::forall(r.clone(), pos(d)?),
            Concept::Exists(r, d) => Concept::exists(r.clone(), pos(d)?),
            Concept::Typ(_) => return Err(KbError::NnfOfTypicality),
        })
    }
    fn neg(c: &Concept) -> Result<Concept, KbError> {
        Ok(match c {
            Concept::Atom(_) => Concept::not(c.clone()),
            Concept::Top => Concept::Bottom,
            Concept::Bottom => Concept::Top,
            Concept::Not(inner) => pos(inner)?,
            Concept::And(a, b) => Concept::or(neg(a)?, neg(b)?),
            Concept::Or(a, b) => Concept::and(neg(a)?, neg(b)?),
            Concept::Forall(r, d) => Concept::exists(r.clone(), neg(d)?),
            Concept::Exists(r, d) => Concept::forall(r.clone(), neg(d)?),
            Concept::Typ(_) => return Err(KbError::NnfOfTypicality),
        })
    }
    pos(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InclusionKind {
    Strict,
    Defeasible,
}

/// `lhs ⊑ rhs` where `lhs` is typicality-free or `T(C)` and `rhs` is typicality-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Inclusion {
    lhs: Concept,
    rhs: Concept,
}

impl Inclusion {
    pub fn new(lhs: Concept, rhs: Concept) -> Result<Self, KbError> {
        if !lhs.is_legal_lhs() {
            return Err(KbError::TypicalityMisplaced("inside an inclusion's left-hand side"));
        }
        if !rhs.is_typ_free() {
            return Err(KbError::TypicalityMisplaced("on an inclusion's right-hand side"));
        }
        Ok(Inclusion { lhs, rhs })
    }

    pub fn strict(lhs: Concept, rhs: Concept) -> Result<Self, KbError> {
        if !lhs.is_typ_free() {
            return Err(KbError::TypicalityMisplaced("in a strict inclusion"));
        }
        Inclusion::new(lhs, rhs)
    }

    /// `T(antecedent) ⊑ rhs`.
    pub fn defeasible(antecedent: Concept, rhs: Concept) -> Result<Self, KbError> {
        if !antecedent.is_typ_free() {
            return Err(KbError::TypicalityMisplaced("under another typicality operator"));
        }
        Inclusion::new(Concept::typ(antecedent), rhs)
    }

    pub fn lhs(&self) -> &Concept {
        &self.lhs
    }

    pub fn rhs(&self) -> &Concept {
        &self.rhs
    }

    /// The left-hand side with any typicality wrapper removed.
    pub fn antecedent(&self) -> &Concept {
        self.lhs.strip_typ()
    }

    pub fn kind(&self) -> InclusionKind {
        if matches!(self.lhs, Concept::Typ(_)) {
            InclusionKind::Defeasible
        } else {
            InclusionKind::Strict
        }
    }

    pub fn is_strict(&self) -> bool {
        self.kind() == InclusionKind::Strict
    }

    /// `¬C ⊔ D` for this inclusion's antecedent `C` and consequent `D`.
    pub fn materialization(&self) -> Concept {
        Concept::or(self.antecedent().complement(), self.rhs.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Assertion {
    Concept { concept: Concept, individual: String },
    Role { role: String, subject: String, object: String },
}

impl Assertion {
    pub fn concept(concept: Concept, individual: impl Into<String>) -> Result<Self, KbError> {
        if !concept.is_legal_lhs() {
            return Err(KbError::TypicalityMisplaced("inside an asserted concept"));
        }
        Ok(Assertion::Concept { concept, individual: individual.into() })
    }

    pub fn role(
        role: impl Into<String>,
        subject: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Assertion::Role { role: role.into(), subject: subject.into(), object: object.into() }
    }

    pub fn individuals(&self) -> Vec<&str> {
        match self {
            Assertion::Concept { individual, .. } => vec![individual],
            Assertion::Role { subject, object, .. } => vec![subject, object],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub atoms: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
}

impl Signature {
    pub fn extend(&mut self, other: &Signature) {
        self.atoms.extend(other.atoms.iter().cloned());
        self.roles.extend(other.roles.iter().cloned());
        self.individuals.extend(other.individuals.iter().cloned());
    }

    fn add_concept(&mut self, c: &Concept) {
        c.collect_atoms(&mut self.atoms);
        c.collect_roles(&mut self.roles);
    }

    fn add_assertion(&mut self, a: &Assertion) {
        match a {
            Assertion::Concept { concept, individual } => {
                self.add_concept(concept);
                self.individuals.insert(individual.clone());
            }
            Assertion::Role { role, subject, object } => {
                self.roles.insert(role.clone());
                self.individuals.insert(subject.clone());
                self.individuals.insert(object.clone());
            }
        }
    }
}

/// A TBox/ABox pair together with the signature it is built over.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    tbox: Vec<Inclusion>,
    abox: Vec<Assertion>,
    signature: Signature,
}

impl KnowledgeBase {
    pub fn new(tbox: Vec<Inclusion>, abox: Vec<Assertion>) -> Self {
        Self::with_declared(tbox, abox, Signature::default())
    }

    /// Builds a KB whose signature is `declared` plus every occurring symbol.
    pub fn with_declared(tbox: Vec<Inclusion>, abox: Vec<Assertion>, declared: Signature) -> Self {
        let mut signature = declared;
        for inc in &tbox {
            signature.add_concept(inc.lhs());
            signature.add_concept(inc.rhs());
        }
        for a in &abox {
            signature.add_assertion(a);
        }
        KnowledgeBase { tbox, abox, signature }
    }

    pub fn tbox(&self) -> &[Inclusion] {
        &self.tbox
    }

    pub fn abox(&self) -> &[Assertion] {
        &self.abox
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Symbols of the signature that do not occur in any axiom.
    pub fn declared_only(&self) -> Signature {
        let occurring = KnowledgeBase::new(self.tbox.clone(), self.abox.clone()).signature;
        Signature {
            atoms: self.signature.atoms.difference(&occurring.atoms).cloned().collect(),
            roles: self.signature.roles.difference(&occurring.roles).cloned().collect(),
            individuals: self
                .signature
                .individuals
                .difference(&occurring.individuals)
                .cloned()
                .collect(),
        }
    }

    /// Named individuals in sorted order.
    pub fn individuals(&self) -> Vec<String> {
        self.signature.individuals.iter().cloned().collect()
    }

    pub fn with_tbox(&self, tbox: Vec<Inclusion>) -> Self {
        KnowledgeBase::with_declared(tbox, self.abox.clone(), self.signature.clone())
    }

    pub fn with_abox(&self, abox: Vec<Assertion>) -> Self {
        KnowledgeBase::with_declared(self.tbox.clone(), abox, self.signature.clone())
    }

    pub fn defeasible_part(&self) -> Vec<Inclusion> {
        self.tbox.iter().filter(|i| !i.is_strict()).cloned().collect()
    }

    pub fn has_typical_assertions(&self) -> bool {
        self.abox
            .iter()
            .any(|a| matches!(a, Assertion::Concept { concept: Concept::Typ(_), .. }))
    }
}

/// Inclusions of `k` whose left-hand side is typicality-free, in source order.
pub fn strict_part(k: &KnowledgeBase) -> Vec<Inclusion> {
    k.tbox.iter().filter(|i| i.is_strict()).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Query {
    Inclusion(Inclusion),
    Assertion { concept: Concept, individual: String },
}

impl Query {
    pub fn assertion(concept: Concept, individual: impl Into<String>) -> Result<Self, KbError> {
        if !concept.is_legal_lhs() {
            return Err(KbError::TypicalityMisplaced("inside a queried concept"));
        }
        Ok(Query::Assertion { concept, individual: individual.into() })
    }

    pub fn concepts(&self) -> Vec<&Concept> {
        match self {
            Query::Inclusion(inc) => vec![inc.lhs(), inc.rhs()],
            Query::Assertion { concept, .. } => vec![concept],
        }
    }
}

/// Rank of a concept or domain element: a natural number or "no rank".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RankValue {
    Finite(u32),
    Infinite,
}

impl RankValue {
    pub fn is_finite(self) -> bool {
        matches!(self, RankValue::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            RankValue::Finite(n) => Some(n),
            RankValue::Infinite => None,
        }
    }
}

impl fmt::Display for RankValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankValue::Finite(n) => write!(f, "{n}"),
            RankValue::Infinite => f.write_str("inf"),
        }
    }
}

/// The query-relative set of typicality-free concepts a KB talks about,
/// closed under subconcepts and complement.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClosureSet {
    members: BTreeSet<Concept>,
}

impl ClosureSet {
    pub fn from_concepts<'a>(concepts: impl IntoIterator<Item = &'a Concept>) -> Self {
        let mut subs = BTreeSet::new();
        for c in concepts {
            c.strip_typ().collect_subconcepts(&mut subs);
        }
        let mut members = BTreeSet::new();
        for c in subs {
            if c.is_typ_free() {
                members.insert(c.complement());
                members.insert(c);
            }
        }
        ClosureSet { members }
    }

    pub fn contains(&self, c: &Concept) -> bool {
        self.members.contains(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Concept> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &BTreeSet<Concept> {
        &self.members
    }

    /// Atom names occurring in the set.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for c in &self.members {
            c.collect_atoms(&mut out);
        }
        out
    }
}

/// Subconcepts of every concept in `k` and `f`, plus complements.
pub fn closure_set(k: &KnowledgeBase, f: Option<&Query>) -> ClosureSet {
    let mut roots: Vec<&Concept> = Vec::new();
    for inc in k.tbox() {
        roots.push(inc.lhs());
        roots.push(inc.rhs());
    }
    for a in k.abox() {
        if let Assertion::Concept { concept, .. } = a {
            roots.push(concept);
        }
    }
    if let Some(q) = f {
        roots.extend(q.concepts());
    }
    ClosureSet::from_concepts(roots)
}
