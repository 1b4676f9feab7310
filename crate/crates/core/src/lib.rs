//! Anderson-accelerated Picard iteration for the steady incompressible
//! Navier-Stokes equations on the unit square.

pub mod accel;
pub mod fem2d;
pub mod linalg;
pub mod nse;
pub mod report;
mod serde_float;
pub mod verify;
mod vector;

pub use vector::CoeffVector;
