//! Orthogonal polynomials in noncommuting variables.
//!
//! Words over `N` letters index monomials `Y_σ`. A unital functional given by
//! its moments (or a positive definite kernel on words) defines an inner
//! product; this crate orthonormalizes the monomials, extracts and inverts the
//! three-term recurrence, builds the block Jacobi matrices, and evaluates the
//! polynomials and the associated kernels on tuples of matrices in the
//! noncommutative ball and Siegel domain.

pub mod error;
pub mod functional;
pub mod jacobi;
pub mod linalg;
pub mod opeval;
pub mod orthopoly;
pub mod recurrence;
pub mod report;
pub mod sample;
pub mod words;

pub use error::{Error, Result};
pub use functional::{Certificate, GramMatrix, Kind, MomentFunctional, Positivity};
pub use jacobi::{BlockJacobi, Hamburger};
pub use opeval::{OperatorTuple, Region};
pub use orthopoly::{orthogonalize, OrthoBasis};
pub use recurrence::{extract, favard, RecurrenceCoeffs};
pub use words::Word;
