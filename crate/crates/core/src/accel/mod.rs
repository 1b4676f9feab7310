//! Depth-m Anderson acceleration of fixed-point iterations.
//!
//! The mixing coefficients solve the sum-to-one least-squares problem
//! exactly (orthogonal factorization in the chosen inner product), and the
//! driver records per-step diagnostics that the audits in [`theory`] check
//! against the recursion bounds for accelerated contractive maps.

mod driver;
mod mixing;
mod synthetic;
pub mod theory;

use serde::{Deserialize, Serialize};

use crate::linalg::{InnerProduct, LinalgError};
use crate::CoeffVector;

pub use driver::{run_accelerated, IterationRecord, SolveTrace, TerminationStatus};
pub use mixing::{anderson_step, mix, solve_mixing, AndersonHistory, MixingResult};
pub use synthetic::AffineMap;
pub use theory::{
    audit_recursion, depth_two_step_bounds, theta_threshold, AuditReport, AuditRow, AUDIT_REL_TOL,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AccelError {
    #[error("mixing history is empty")]
    EmptyHistory,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("coefficient budget {eta} is not below the required bound {bound}")]
    HypothesisViolated { eta: f64, bound: f64 },
    #[error("trace too short: need {needed} usable steps, found {found}")]
    InsufficientTrace { needed: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Failure inside a fixed-point map evaluation (typically a linear solve).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct OperatorError(pub String);

impl From<LinalgError> for OperatorError {
    fn from(e: LinalgError) -> Self {
        OperatorError(e.to_string())
    }
}

/// A map `G` whose fixed point is sought, together with the inner product
/// in which residuals `G(u) − u` are measured and mixed.
pub trait FixedPointMap {
    fn apply(&self, u: &[f64]) -> Result<CoeffVector, OperatorError>;
    fn inner_product(&self) -> &InnerProduct;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AndersonConfig {
    /// Number of previous iterates in the mixing window; 0 is plain iteration.
    pub depth_m: usize,
    /// Weight on the map evaluations in the mixing; 1 is undamped.
    pub damping_beta: f64,
    pub max_iters: usize,
    pub tol_abs: f64,
    /// Stop once the residual falls below `tol_rel` times the first residual.
    pub tol_rel: f64,
    /// Declare divergence above this multiple of the first residual.
    pub divergence_factor: f64,
    /// Largest accepted squared condition estimate of the difference matrix.
    pub cond_threshold: f64,
    /// When false, wall times are recorded as zero so traces are reproducible
    /// byte for byte.
    pub record_timings: bool,
}

impl Default for AndersonConfig {
    fn default() -> Self {
        Self {
            depth_m: 0,
            damping_beta: 1.0,
            max_iters: 100,
            tol_abs: 1e-8,
            tol_rel: 0.0,
            divergence_factor: 1e4,
            cond_threshold: 1e10,
            record_timings: true,
        }
    }
}

impl AndersonConfig {
    pub fn with_depth(depth_m: usize) -> Self {
        Self {
            depth_m,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AccelError> {
        let bad = |msg: &str| Err(AccelError::InvalidConfig(msg.to_string()));
        if !(self.damping_beta > 0.0 && self.damping_beta <= 1.0) {
            return bad("damping_beta must lie in (0, 1]");
        }
        if !(self.tol_abs > 0.0) {
            return bad("tol_abs must be positive");
        }
        if !(self.tol_rel >= 0.0) {
            return bad("tol_rel must be nonnegative");
        }
        if !(self.divergence_factor > 1.0) {
            return bad("divergence_factor must exceed 1");
        }
        if !(self.cond_threshold > 1.0) {
            return bad("cond_threshold must exceed 1");
        }
        Ok(())
    }
}
