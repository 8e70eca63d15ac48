//! Toolkit for mining fake app-store reviews: corpus ingestion and fuzzy
//! matching, fake-vs-regular characterization statistics, a 15-feature
//! classification scheme, from-scratch tree-based learners with repeated
//! stratified cross-validation, class-imbalance sweeps, and a seeded
//! synthetic corpus generator for desk-scale experiments.

pub mod charstats;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod featurizer;
pub mod learner;
pub mod matcher;
pub mod seed;
pub mod sweeper;
pub mod syngen;

pub use error::{Error, Result};
