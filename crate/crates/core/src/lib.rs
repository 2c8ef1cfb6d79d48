//! Continual model merging at desk scale.
//!
//! The crate is organized around a small dense linear-algebra kernel
//! ([`linalg`]) that is generic over the scalar type, and a set of f64
//! pipeline modules built on top of it:
//!
//! - [`model`] — a small feed-forward backbone with a cosine-prototype head,
//!   plus per-task fine-tuning.
//! - [`mergers`] — parameter-space continual mergers (SWA, task arithmetic,
//!   Ties, MagMax, OPCM).
//! - [`moe`] — low-rank expert mixtures with per-layer linear gates and the
//!   test-time adaptation loop.
//! - [`nullspace`] — hard and adaptively relaxed null-space projectors that
//!   constrain gate updates.
//! - [`theory`] — closed-form and enumerated risk comparisons between
//!   hard-routed expert mixtures and static averaging.
//! - [`bench`] — synthetic continual task suites, the merge-adapt-evaluate
//!   loop, ACC/BWT metrics, and sweep/ablation harnesses.

pub mod bench;
pub mod config;
pub mod error;
pub mod linalg;
pub mod mergers;
pub mod model;
pub mod moe;
pub mod nullspace;
pub mod optim;
pub mod oracles;
pub mod scalar;
pub mod theory;

pub use error::{Error, Result};

/// Scalar type used by the pipeline modules. The linear-algebra kernel is
/// generic; everything downstream is pinned to f64 so that checkpoint
/// round-trips and report determinism are bit-exact.
pub type Real = f64;

/// Dense matrix over [`Real`].
pub type Mat = linalg::Matrix<Real>;

/// SVD factorization over [`Real`].
pub type Svd = linalg::SvdResult<Real>;
