//! Lower bounds for the smallest singular values of a perturbed matrix, with
//! precision demotion as the perturbation source.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernel`]: dense matrices, SVD, symmetric eigenvalues, linear solves.
//! - [`matgen`]: two-cluster test spectra and matrices with known factors.
//! - [`precision`]: bit-exact rounding to binary32/binary16 and the rotated
//!   perturbation blocks.
//! - [`bounds`]: exact eigenvalue expressions, eigenvalue lower bounds and the
//!   singular value bounds with their assumption gates.
//! - [`harness`]: end-to-end experiments, reports and instance verification.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod matgen;
pub mod precision;

pub use error::{Error, Result};
pub use kernel::DenseMatrix;
