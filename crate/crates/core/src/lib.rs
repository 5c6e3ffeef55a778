//! Green's functions for the singularly perturbed convection-diffusion
//! problem on the unit square
//!
//! ```text
//! -eps (u_xx + u_yy) - (a u)_x + b u = f   in (0,1)^2,   u = 0 on the boundary
//! ```
//!
//! The crate provides:
//!
//! * [`specfun`]: `K_0`, `K_1` and their exponentially scaled forms;
//! * [`fundamental`]: the frozen-coefficient fundamental solution with its
//!   analytic first and second derivatives, plus the 3-D variant;
//! * [`image_green`]: cut-off method-of-images approximations on the strip and
//!   the square (Dirichlet and Neumann top/bottom);
//! * [`quadrature`]: layer- and singularity-aware adaptive cubature for the
//!   L1 norms of these functions, and least-squares scaling fits in `eps`;
//! * [`fdsolver`]: an upwind finite-difference reference on tensor (Shishkin)
//!   meshes with discrete Green's functions and a-priori checks.

pub mod coeff;
pub mod error;
pub mod export;
pub mod fdsolver;
pub mod fundamental;
pub mod image_green;
pub mod jet;
pub mod par;
pub mod quadrature;
pub mod specfun;

pub use coeff::{CoefficientField, Coefficients, Preset};
pub use error::{Error, Result};
pub use fundamental::{DerivKind, FrozenParams};
pub use image_green::{ImageGreen, ImageGreenSpec, Variant};
pub use par::Execution;

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
