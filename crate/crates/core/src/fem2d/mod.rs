//! Unit-square triangulations, Taylor-Hood spaces and assembly of the
//! steady Navier-Stokes linearizations.

mod assembly;
mod dofmap;
mod errors;
mod manufactured;
mod mesh;
mod problem;
pub mod quadrature;
mod vtk;

pub use assembly::{
    assemble_divergence, assemble_stiffness, assemble_trilinear, assemble_trilinear_with,
    h1_seminorm, ConvectionForm, Discretization,
};
pub use dofmap::{DirichletData, DofMap};
pub use errors::{pressure_l2_error, velocity_h1_error, velocity_h1_seminorm_by_quadrature};
pub use manufactured::{BoundaryCondition, ForcingSpec, ManufacturedFlow};
pub use mesh::{build_cavity_mesh, BoundaryTag, Diagonal, Mesh};
pub use problem::{FlowProblem, FlowState};
pub use vtk::write_vtk;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
}
