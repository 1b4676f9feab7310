//! Picard and Newton maps on Taylor-Hood coefficient vectors.

use std::sync::Arc;

use super::NseError;
use crate::accel::{run_accelerated, AndersonConfig, FixedPointMap, OperatorError, SolveTrace};
use crate::fem2d::{
    build_cavity_mesh, BoundaryCondition, Discretization, FemError, FlowProblem, ForcingSpec,
    ManufacturedFlow,
};
use crate::linalg::InnerProduct;
use crate::CoeffVector;

/// Lid-driven cavity at Reynolds number `re` (unit lid speed, `ν = 1/re`).
pub fn cavity_problem(n: usize, re: f64, gamma_gd: f64) -> Result<FlowProblem, FemError> {
    let disc = Arc::new(Discretization::new(build_cavity_mesh(n)?));
    Ok(FlowProblem::new(
        disc,
        1.0 / re,
        ForcingSpec::Zero,
        BoundaryCondition::Cavity { lid_speed: 1.0 },
        gamma_gd,
    ))
}

/// No-slip box driven by the forcing of a manufactured flow.
pub fn manufactured_problem(
    n: usize,
    flow: ManufacturedFlow,
    gamma_gd: f64,
) -> Result<FlowProblem, FemError> {
    let disc = Arc::new(Discretization::new(build_cavity_mesh(n)?));
    Ok(FlowProblem::new(
        disc,
        flow.nu,
        ForcingSpec::Manufactured(flow),
        BoundaryCondition::NoSlip,
        gamma_gd,
    ))
}

/// `G(w)`: the velocity-pressure solution of the Oseen problem advected
/// by `w`. Residuals are measured in `‖∇·‖` on the velocity.
#[derive(Debug)]
pub struct PicardOperator {
    problem: FlowProblem,
}

impl PicardOperator {
    pub fn new(problem: FlowProblem) -> Self {
        Self { problem }
    }

    pub fn problem(&self) -> &FlowProblem {
        &self.problem
    }

    pub fn discretization(&self) -> &Discretization {
        self.problem.discretization()
    }

    pub fn nu(&self) -> f64 {
        self.problem.nu()
    }

    pub fn apply_g(&self, w: &[f64]) -> Result<CoeffVector, NseError> {
        let (a, rhs) = self.problem.assemble_picard_system(w);
        Ok(self.problem.solve_system(&a, &rhs)?)
    }

    /// Stokes solution with the run's boundary data and forcing; the usual
    /// initial guess.
    pub fn solve_stokes(&self) -> Result<CoeffVector, NseError> {
        let (a, rhs) = self.problem.assemble_stokes_system();
        Ok(self.problem.solve_system(&a, &rhs)?)
    }

    /// One Newton step at `w` in full-update form.
    pub fn newton_step(&self, w: &[f64]) -> Result<CoeffVector, NseError> {
        let (a, rhs) = self.problem.assemble_newton_system(w);
        Ok(self.problem.solve_system(&a, &rhs)?)
    }

    pub fn h1_seminorm(&self, v: &[f64]) -> f64 {
        self.inner_product().norm(v).unwrap_or(f64::NAN)
    }
}

impl FixedPointMap for PicardOperator {
    fn apply(&self, u: &[f64]) -> Result<CoeffVector, OperatorError> {
        self.apply_g(u).map_err(|e| OperatorError(e.to_string()))
    }

    fn inner_product(&self) -> &InnerProduct {
        self.problem.discretization().velocity_norm()
    }
}

/// Newton's method written as a fixed-point map, so it shares the driver
/// and trace format; its "residual" `N(u) − u` is the Newton update.
#[derive(Debug)]
pub struct NewtonMap<'a> {
    op: &'a PicardOperator,
}

impl<'a> NewtonMap<'a> {
    pub fn new(op: &'a PicardOperator) -> Self {
        Self { op }
    }
}

impl FixedPointMap for NewtonMap<'_> {
    fn apply(&self, u: &[f64]) -> Result<CoeffVector, OperatorError> {
        self.op.newton_step(u).map_err(|e| OperatorError(e.to_string()))
    }

    fn inner_product(&self) -> &InnerProduct {
        self.op.inner_product()
    }
}

/// Plain Picard iteration (depth forced to zero).
pub fn run_picard(
    op: &PicardOperator,
    u0: CoeffVector,
    config: &AndersonConfig,
) -> Result<SolveTrace, NseError> {
    let cfg = AndersonConfig {
        depth_m: 0,
        ..config.clone()
    };
    Ok(run_accelerated(op, u0, &cfg)?)
}

/// Anderson-accelerated Picard iteration with the configured depth.
pub fn run_anderson_picard(
    op: &PicardOperator,
    u0: CoeffVector,
    config: &AndersonConfig,
) -> Result<SolveTrace, NseError> {
    Ok(run_accelerated(op, u0, config)?)
}

/// Newton iteration with the same stopping rules (depth zero, undamped).
pub fn run_newton(
    op: &PicardOperator,
    u0: CoeffVector,
    config: &AndersonConfig,
) -> Result<SolveTrace, NseError> {
    let cfg = AndersonConfig {
        depth_m: 0,
        damping_beta: 1.0,
        ..config.clone()
    };
    Ok(run_accelerated(&NewtonMap::new(op), u0, &cfg)?)
}
