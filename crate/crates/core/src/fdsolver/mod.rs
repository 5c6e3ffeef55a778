//! Upwind finite-volume reference solver on tensor meshes.
//!
//! The primal operator `-eps Lap u - (a u)_x + b u` is discretised on dual
//! cells with the convective flux taken from the upwind (right) node. The
//! adjoint `-eps Lap v + a v_x + b v` is the exact transpose, so discrete
//! Green's functions satisfy the representation formula to rounding.

mod checks;
mod mesh;
mod system;

pub use checks::{
    apriori_check, compare_with_image, gamma_1d_check, green_mass, relative_l1_difference, representation_check,
    AprioriRow, DivergenceData, ImageComparison, RepresentationCheck,
};
pub use mesh::{piecewise_axis, shishkin_axis, uniform_axis, LayerSide, MeshKind, TensorMesh};
pub use system::{
    assemble, discrete_green, solve, BoundaryCondition, DiscreteField, LinearSystem, Operator, SparseMatrix,
};
