//! Hierarchical fashion query parser: word embeddings, part-of-speech tagging,
//! dependency operations, and entity recognition, each a sequence model
//! trained on top of the frozen stages before it.

pub mod corpus;
pub mod dep;
pub mod embeddings;
pub mod error;
pub mod labeler;
pub mod metrics;
pub mod ner;
pub mod nn;
pub mod pipeline;
pub mod pos;
pub mod tree;

pub use error::{Error, Result};
