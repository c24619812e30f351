//! OMES: an intervention-based, classifier-free disentanglement metric, with
//! MIG, Modularity and DCI baselines, seeded synthetic encoders and an
//! evaluation harness.
//!
//! All indices (factors, latent dimensions) are zero-based.

pub mod baselines;
pub mod classifier;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod metric;
pub mod pairing;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use metric::{association_matrix, evaluate_pairs, filter_active_dims, omes, prune};
pub use types::*;
