//! Numerical verification engine for Hermitian connections with totally
//! skew-symmetric torsion on twistor spaces of quaternionic Kähler manifolds.
//!
//! Every manifold is a reductive homogeneous space evaluated at the origin
//! coset, so all geometry reduces to small dense linear algebra.

pub mod connect;
pub mod error;
pub mod homog;
pub mod linalg;
pub mod multilinear;
pub mod oracle;
pub mod repthy;
pub mod twistor;
pub mod verify;

pub use error::{Error, Result};
pub use multilinear::{CTensor, DenseTensor, RTensor};

/// Default structural tolerance (identities that hold by construction).
pub const TOL_STRUCT: f64 = 1e-10;
/// Default comparison tolerance (computed value vs. closed form).
pub const TOL_CMP: f64 = 1e-9;
/// Relative singular-value cutoff used for every rank decision.
pub const RANK_CUTOFF: f64 = 1e-9;
