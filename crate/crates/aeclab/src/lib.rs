//! A desk-scale laboratory for the finite-model machinery of abstract
//! elementary classes: intersection closures, orbital (Galois) types and
//! their canonical certificates, algebraicity audits, gluing of partial
//! isomorphisms, finitary isolation, Morleyization, and compactness chains.

pub(crate) mod cache;
pub mod canon;
pub mod chain;
pub mod catalog;
pub mod class;
pub mod colimit;
pub mod corpus;
pub mod enumerate;
pub mod error;
pub mod gtype;
pub mod iso;
pub mod isolation;
pub mod morley;
pub mod shortness;
pub mod structure;
pub mod suite;
pub mod vocab;

pub use class::{AecClass, AuditConfig, ClosureOutcome};
pub use error::{Error, Result};
pub use structure::{is_substructure, FiniteStructure, PartialMap, Subset};
pub use vocab::Vocabulary;
