//! The Picard solution operator as a fixed-point map, the Newton baseline,
//! contraction estimates and audits specific to the Navier-Stokes iteration.

mod audit;
mod estimate;
mod operator;

pub use audit::{audit_nse_m1, audit_nse_m2, NseAuditParams, NseAuditReport};
pub use estimate::{estimate_kappa, estimate_trilinear_bound, random_smooth_field, KappaEstimate};
pub use operator::{
    cavity_problem, manufactured_problem, run_anderson_picard, run_newton, run_picard,
    NewtonMap, PicardOperator,
};

use crate::accel::AccelError;
use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NseError {
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(#[from] LinalgError),
    #[error(transparent)]
    Accel(#[from] AccelError),
}
