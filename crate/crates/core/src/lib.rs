//! Maximal and next-to-maximal eigenpairs of matrices with nonnegative
//! off-diagonal entries.
//!
//! The iteration engines are seeded with explicitly constructed initial
//! vectors and shifts, so Rayleigh quotient iteration typically settles in two
//! or three steps. Every stage can be certified with two-sided bounds.

pub mod bench;
pub mod bounds;
pub mod error;
pub mod general;
pub mod io;
pub mod iteration;
pub mod lanczos;
pub mod linalg;
pub mod next;
pub mod oracle;
pub mod tri_initials;
pub mod tridiag;

pub use error::{Error, Result};
pub use iteration::{InitialPair, IterationOptions, IterationTrace, Norm, Outcome, Status};
pub use linalg::{Matrix, Measure};
pub use tridiag::TriQ;
