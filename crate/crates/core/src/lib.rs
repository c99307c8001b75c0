//! Core library for working with a taxonomy of elements adversarial to
//! automated vehicles.
//!
//! - [`taxonomy`]: the versioned tree data model, the canonical fifteen-leaf
//!   taxonomy, structural validation and revisions.
//! - [`corpus`]: collision-report CSV ingestion and record validation.
//! - [`annotation`]: per-report classifications, the append-only annotation
//!   log and coverage analytics.
//! - [`tagger`]: lexicon-based suggestions of candidate element classes.
//! - [`generator`]: scenario composition, variation and coverage-driven
//!   sampling.
//! - [`fixtures`]: the bundled evaluation corpus, gold annotations and
//!   lexicon.

pub mod annotation;
pub mod corpus;
pub mod fixtures;
pub mod generator;
pub mod tagger;
pub mod taxonomy;
