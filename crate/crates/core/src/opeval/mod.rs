//! Matrix points of the noncommutative ball and Siegel domain, their
//! Szegő kernels, and the kernel identities tying them to orthogonal
//! polynomials.

pub mod cd;
pub mod kernel;
pub mod separating;
mod tuple;

pub use cd::{cd_full_check, cd_inner_identity, cd_kernel, reproducing_residual};
pub use kernel::{
    reproduction_check_ball, reproduction_check_siegel, szego_ball, szego_siegel, KernelOptions,
    KernelResult, Reproduction,
};
pub use separating::{separating_tuples, SeparatingReport};
pub use tuple::{
    cayley, cayley_inverse, siegel_resolvent, Membership, OperatorTuple, PointFile, Region,
    DEFAULT_MARGIN,
};
