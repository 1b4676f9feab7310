//! Forcing, boundary data and a manufactured divergence-free flow.

use serde::{Deserialize, Serialize};

use super::mesh::BoundaryTag;

/// Exact solution built from the stream function `A g(x) g(y)` with
/// `g(s) = s²(1−s)²`, so the velocity and its normal derivative vanish on
/// the boundary. Pressure is the zero-mean cubic `A (x³ + y³ − 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedFlow {
    pub amplitude: f64,
    pub nu: f64,
    /// Include the convection term in the forcing (Navier-Stokes vs Stokes).
    pub convective: bool,
}

fn g(s: f64) -> [f64; 4] {
    // g, g', g'', g'''
    let t = 1.0 - s;
    [
        s * s * t * t,
        2.0 * s - 6.0 * s * s + 4.0 * s * s * s,
        2.0 - 12.0 * s + 12.0 * s * s,
        -12.0 + 24.0 * s,
    ]
}

impl ManufacturedFlow {
    pub fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
        let (gx, gy) = (g(x), g(y));
        let a = self.amplitude;
        [a * gx[0] * gy[1], -a * gx[1] * gy[0]]
    }

    /// `grad[c][d] = ∂_d u_c`.
    pub fn velocity_gradient(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let (gx, gy) = (g(x), g(y));
        let a = self.amplitude;
        [
            [a * gx[1] * gy[1], a * gx[0] * gy[2]],
            [-a * gx[2] * gy[0], -a * gx[1] * gy[1]],
        ]
    }

    pub fn pressure(&self, x: f64, y: f64) -> f64 {
        self.amplitude * (x * x * x + y * y * y - 0.5)
    }

    /// `−νΔu + (u·∇)u + ∇p`, convection omitted when not `convective`.
    pub fn forcing(&self, x: f64, y: f64) -> [f64; 2] {
        let (gx, gy) = (g(x), g(y));
        let a = self.amplitude;
        let lap = [
            a * (gx[2] * gy[1] + gx[0] * gy[3]),
            -a * (gx[3] * gy[0] + gx[1] * gy[2]),
        ];
        let grad_p = [3.0 * a * x * x, 3.0 * a * y * y];
        let mut f = [
            -self.nu * lap[0] + grad_p[0],
            -self.nu * lap[1] + grad_p[1],
        ];
        if self.convective {
            let u = self.velocity(x, y);
            let du = self.velocity_gradient(x, y);
            for c in 0..2 {
                f[c] += u[0] * du[c][0] + u[1] * du[c][1];
            }
        }
        f
    }
}

/// Body force on the right-hand side of the momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum ForcingSpec {
    #[default]
    Zero,
    Manufactured(ManufacturedFlow),
}

impl ForcingSpec {
    pub fn value(&self, x: f64, y: f64) -> [f64; 2] {
        match self {
            ForcingSpec::Zero => [0.0, 0.0],
            ForcingSpec::Manufactured(m) => m.forcing(x, y),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ForcingSpec::Zero)
    }
}

/// Velocity prescribed on the whole boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Tangential velocity `(lid_speed, 0)` on the lid, no-slip elsewhere.
    Cavity { lid_speed: f64 },
    NoSlip,
}

impl BoundaryCondition {
    pub fn value(&self, tag: BoundaryTag, _x: f64, _y: f64) -> [f64; 2] {
        match (self, tag) {
            (BoundaryCondition::Cavity { lid_speed }, BoundaryTag::Lid) => [*lid_speed, 0.0],
            _ => [0.0, 0.0],
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self {
            BoundaryCondition::Cavity { lid_speed } => *lid_speed == 0.0,
            BoundaryCondition::NoSlip => true,
        }
    }
}
