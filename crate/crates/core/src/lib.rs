//! Rational closure for ALC with a typicality operator.
//!
//! - [`kb`]: concepts, inclusions, assertions, knowledge bases and 𝒮.
//! - [`syntax`]: the textual KB and query format.
//! - [`tableau`]: classical ALC reasoning under a strict TBox.
//! - [`tbox`]: exceptionality levels, concept ranks and TBox closure.
//! - [`abox`]: rank assignments to individuals and skeptical ABox closure.
//! - [`oracle`]: explicit finite models and canonical minimal entailment.

pub mod abox;
pub mod kb;
pub mod oracle;
pub mod syntax;
pub mod tableau;
pub mod tbox;

pub use abox::{in_abox_closure, AboxError, AboxReasoner, AssertionVerdict, MuSet, RankAssignment, SearchMode};
pub use kb::{
    closure_set, nnf, strict_part, Assertion, ClosureSet, Concept, Inclusion, InclusionKind, KbError, KnowledgeBase,
    Query, RankValue, Signature,
};
pub use syntax::{parse_concept, parse_kb, parse_query, serialize_kb, ParseError, ParseErrorKind};
pub use tableau::{abox_consistent, entails_inclusion, instance_check, is_satisfiable, EngineError};
pub use tbox::{
    concept_rank, exceptionality_sequence, in_tbox_closure, is_exceptional, materialize, ClassicalBase, RankedTbox,
};
