//! Sentiment-analysis subtasks built from scratch.
//!
//! Two pipelines live here:
//!
//! * **Aspect-term extraction**: a windowed convolutional token scorer
//!   ([`tagger`]) trained with a sentence-level structured log-likelihood and
//!   decoded with Viterbi, optionally combined with dependency-pattern rules
//!   ([`rules`]).
//! * **Subjectivity detection**: a convolutional deep belief network
//!   ([`cdbn`]) whose pre-training set is selected by motifs mined from a
//!   dynamic Gaussian Bayesian network ([`gbn`]).
//!
//! [`corpus`] holds the data model and file formats, [`neural`] the shared
//! layer primitives, and [`eval`] the scoring utilities. [`toy`] generates
//! the small deterministic corpora used by the tests and `gen-toy`.

pub mod cdbn;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod gbn;
pub mod neural;
pub mod rules;
pub mod tagger;
pub(crate) mod textfmt;
pub mod toy;

pub use error::{Error, Result};
