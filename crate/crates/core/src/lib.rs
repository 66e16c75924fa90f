//! Stance classification toolkit for short social-media texts.
//!
//! Texts are assigned one of three responsibility-framing classes
//! (pro-Russian, pro-Ukrainian, neutral). The crate covers the whole path from
//! raw tweet records to labeled retweet-network edges:
//!
//! * [`corpus`]: ingestion, preprocessing, original/retweet grouping and
//!   label propagation.
//! * [`embeddings`]: word-vector tables and tweet embeddings.
//! * [`classifiers`]: hashtag PMI baseline, softmax regression and a
//!   one-layer CNN, trained with hand-written gradients.
//! * [`evaluation`]: 10-split cross-validation, F1, precision-recall curves,
//!   AUC and precision-targeted threshold calibration.
//! * [`network`]: retweet graph, k-core, edge labeling and triage candidates.

pub mod classifiers;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod network;
pub mod rng;
pub mod stance;
pub mod synthetic;

pub use error::{Error, Result};
pub use stance::{ProbDist, Provenance, Stance, StanceLabel};
