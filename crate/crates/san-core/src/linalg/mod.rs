//! Minimal sparse linear algebra: a CSR matrix and a seeded randomized
//! truncated SVD.
//!
//! nalgebra supplies the dense building blocks (QR, small dense SVD); the
//! sparse representation and the factorization driver are local so that the
//! hot paths stay allocation-light and byte-deterministic under a fixed
//! seed.

pub mod sparse;
pub mod svd;

pub use sparse::CsrMatrix;
pub use svd::{SvdParams, TruncatedSvd};
