//! Cartan decompositions, compact real forms and destabilizing ideals of
//! finite-dimensional Lie algebras, computed by minimizing the norm of the
//! Lie bracket over the determinant-one metrics on the algebra.
//!
//! The pipeline: [`algebra`] holds the structure-constant toolkit,
//! [`hspace`] the geometry of the metric space (geodesics, distance,
//! boundary at infinity as weighted flags), [`kempfness`] the bracket-norm
//! functional with its moment-map gradient flow, [`cartan`] the k ⊕ p
//! post-processing of an optimal metric, [`realify`] the complex-to-real
//! reduction, and [`verify`] the standalone geometric self-checks.

pub mod algebra;
pub mod cartan;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod format;
pub mod hspace;
pub mod kempfness;
pub mod linalg;
pub mod realify;
pub mod verify;

pub use error::{Error, Result};

// re-exported so downstream code can name the matrix types in our public API
pub use nalgebra;
