//! Structure-regularized domain word embeddings.
//!
//! This crate trains one embedding matrix per corpus slice (year, category,
//! author), all in a single vector space, by factorizing per-slice PPMI
//! matrices under a structure regularizer over a T×T affinity matrix. The
//! affinity is either given a priori (`constr`), re-estimated from the
//! pairwise embedding distances during training (`pred`), or human-denoised
//! and re-imposed (`den`). The [`eval`] module holds the measurement side:
//! analogy tests, nearest neighbors and drift timelines, word-similarity
//! correlations, a Burrows' Delta baseline, recall@k structure scoring, and
//! a grid-search driver.
//!
//! Pipeline overview:
//!
//! 1. [`corpus::ingest_corpus`] reads pre-lemmatized sliced text.
//! 2. [`vocab::build_vocabulary`] applies the joint frequency rules.
//! 3. [`cooccur::count_cooccurrences`] and [`ppmi::compute_ppmi`] build the
//!    per-slice factorization targets.
//! 4. [`trainer::train`] runs the block-coordinate Adam loop.
//! 5. [`structure`] and [`eval`] score the result.

pub mod cooccur;
pub mod corpus;
pub mod dendrogram;
pub mod embedding;
mod error;
pub mod eval;
pub mod ppmi;
pub mod report;
pub mod structure;
pub mod trainer;
pub mod vocab;

pub use error::{Error, Result};
