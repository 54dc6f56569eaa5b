//! Joint training of word embeddings from a text corpus and a knowledge graph.
//!
//! Words and entities share input vectors. The text side is a skip-gram
//! model with negative sampling; the knowledge side scores triples with one
//! of several translation-style models, the main one projecting head and
//! tail entities through separate rank-bounded linear maps before comparing
//! them. Evaluation covers word analogies (vector offset and relation-aware
//! two-step inference) and word similarity via Spearman correlation.

pub mod checkpoint;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod export;
pub mod kg;
pub mod linalg;
pub mod model;
pub mod synthetic;
pub mod trainer;

pub use error::{Error, Result};

/// Floating point type used for every trainable parameter.
#[cfg(not(feature = "f32"))]
pub type Real = f64;

/// Floating point type used for every trainable parameter.
#[cfg(feature = "f32")]
pub type Real = f32;
