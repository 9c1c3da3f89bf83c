//! A workbench for positive logic over finite structures.
//!
//! The library provides the syntax of positive formulas and h-inductive
//! sentences with a small DSL, finite structures with bounded model
//! enumeration, the homomorphism / embedding / immersion / strong-immersion
//! classification of maps, class-relative closure checks, and amalgamation
//! search including pushout-style free amalgams. Every class-relative
//! verdict names the finite model class it was computed against.

pub mod amalgam;
pub mod apc;
pub mod canonical_db;
pub mod error;
pub mod formula;
pub mod iso;
pub mod model_class;
pub mod morphism;
pub mod parse;
pub mod pool;
pub mod semantics;
pub mod signature;
pub mod structure;
pub mod term;
pub mod workspace;

pub use error::{Error, Result};
pub use formula::{HInductiveSentence, PositiveFormula, Theory};
pub use model_class::ModelClass;
pub use signature::Signature;
pub use structure::Structure;
pub use term::{Term, Var};
