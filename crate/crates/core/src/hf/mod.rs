//! Single-determinant density-matrix mathematics in a nonorthogonal basis.

pub mod density;
pub mod fock;
pub mod rotation;

pub use density::{
    check_density_conditions, d_from_delta, delta_from_d, occupied_coefficients, purify,
    DensityConditions, DensityMatrix, ExpectationMatrix, Purified, IDEMPOTENCY_TOL,
};
pub use fock::{build_fock, build_g, energy, energy_and_fock, gradient, FockMatrix, Gradient};
pub use rotation::{
    gradient_self_projection_residual, project, project_rotation, transform_density,
    OrbitalRotation, ProjectedRotation,
};
