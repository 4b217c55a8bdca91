//! Social-attribute networks for joint link prediction and attribute
//! inference.
//!
//! The crate models a social graph augmented with attribute nodes, signed
//! attribute links and mutex constraints, and provides:
//!
//! * [`graph`] — the immutable network, neighborhood queries (Γ₊, Γ_{s+}),
//!   validation and the social-only projection;
//! * [`ingest`] — TSV/JSON parsing, the preprocessing pipeline
//!   (mutualization, vocabulary, core selection, backfill) and snapshot I/O;
//! * [`labels`] — labeled candidate-pair extraction for both prediction
//!   tasks;
//! * [`linalg`] — the sparse CSR matrix and a seeded randomized truncated
//!   SVD;
//! * [`scorers`] — the unsupervised scorers (common neighbors, Adamic–Adar,
//!   low-rank approximation, their compositions, random walk with restart,
//!   frequency baseline);
//! * [`supervised`] — feature extraction, a deterministic logistic
//!   regression, and the supervised pipelines;
//! * [`eval`] — AUC / Pre@K, mutex post-processing, grid search, and the
//!   experiment drivers;
//! * [`synth`] — a seeded homophily generator producing desk-scale snapshot
//!   triples.
//!
//! Every randomized routine takes an explicit seed and all iteration orders
//! are fixed, so identical inputs produce byte-identical outputs.

pub mod error;
pub mod graph;
pub mod ingest;
pub mod eval;
pub mod labels;
pub mod linalg;
pub mod scorers;
pub mod supervised;
pub mod synth;
pub(crate) mod util;

pub use error::{Error, ErrorKind, Result};
pub use graph::{
    NetworkBuilder, NodeKind, NodeRef, Restrict, Sign, Snapshot, SocialAttributeNetwork, Violation,
};
