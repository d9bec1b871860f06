//! Incremental test-time adaptation harness.
//!
//! A stream of precomputed vision-language embeddings is classified online
//! against a growing registry of class text embeddings. Uncertain samples
//! may be sent to an oracle under a replenishing budget; a confirmed new
//! class is appended to the registry and recognized from then on. Runs are
//! scored by seen/unseen accuracy, their harmonic mean, and the
//! incremental class detection delay (ICDD).
//!
//! | module | contents |
//! |---|---|
//! | [`embedding`], [`registry`] | vectors, softmax, the live classifier |
//! | [`dataset`] | binary file format, stream splits, synthetic generator |
//! | [`tta`] | zero-shot and key-value cache engines |
//! | [`active`] | uncertainty scores, SegAssist, budget, oracle |
//! | [`metrics`] | accuracy, harmonic mean, ICDD |
//! | [`runner`] | config, stream loop, reports, comparison |
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod active;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod metrics;
pub mod registry;
pub mod runner;
pub mod tta;

pub use error::{IttaError, Result};
pub use registry::{classify, topk_classes, ClassId, ClassRegistry, BACKGROUND_ID};
