//! Element kernels and global assembly of the Taylor-Hood operators.

use std::sync::OnceLock;

use super::dofmap::DofMap;
use super::manufactured::ForcingSpec;
use super::mesh::Mesh;
use super::quadrature::{p2_gradients, p2_values, triangle_rule_deg5};
use crate::linalg::{InnerProduct, SparseMatrix};

/// Sign in front of the second half of the convection form,
/// `½(w·∇u, v) ± ½(w·∇v, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvectionForm {
    /// The skew-symmetric form (minus sign).
    #[default]
    Skew,
    /// Deliberately wrong plus sign. Exists so that verification checks
    /// can be shown to catch a broken convection term.
    FaultInjected,
}

impl ConvectionForm {
    fn sign(self) -> f64 {
        match self {
            ConvectionForm::Skew => -1.0,
            ConvectionForm::FaultInjected => 1.0,
        }
    }
}

/// Values and gradients of the element bases at one quadrature point.
#[derive(Debug, Clone)]
pub(crate) struct PointData {
    pub xy: [f64; 2],
    /// Quadrature weight times element area.
    pub jw: f64,
    pub phi: [f64; 6],
    pub dphi: [[f64; 2]; 6],
    pub psi: [f64; 3],
}

/// Mesh, dof numbering and per-element quadrature data, plus lazily built
/// operators that do not depend on the flow state.
#[derive(Debug)]
pub struct Discretization {
    mesh: Mesh,
    dofmap: DofMap,
    points: Vec<[PointData; 7]>,
    stiffness: OnceLock<SparseMatrix>,
    velocity_norm: OnceLock<InnerProduct>,
    pressure_weights: OnceLock<Vec<f64>>,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Self {
        let dofmap = DofMap::taylor_hood(&mesh);
        let rule = triangle_rule_deg5();
        let points = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let [p0, p1, p2] = tri.map(|v| mesh.nodes()[v]);
                let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
                let dl = [
                    [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
                    [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
                    [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
                ];
                let area = 0.5 * det.abs();
                rule.map(|qp| {
                    let l = qp.bary;
                    PointData {
                        xy: [
                            l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0],
                            l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1],
                        ],
                        jw: qp.weight * area,
                        phi: p2_values(l),
                        dphi: p2_gradients(l, &dl),
                        psi: l,
                    }
                })
            })
            .collect();
        Self {
            mesh,
            dofmap,
            points,
            stiffness: OnceLock::new(),
            velocity_norm: OnceLock::new(),
            pressure_weights: OnceLock::new(),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn total_dofs(&self) -> usize {
        self.dofmap.total_dofs()
    }

    pub(crate) fn points(&self, t: usize) -> &[PointData; 7] {
        &self.points[t]
    }

    /// Velocity stiffness `(∇u, ∇v)`, unscaled by viscosity, as a full-size
    /// matrix whose pressure rows and columns are empty.
    pub fn stiffness(&self) -> &SparseMatrix {
        self.stiffness.get_or_init(|| assemble_stiffness(self))
    }

    /// The `‖∇·‖` inner product on velocity unknowns (pressure masked out).
    pub fn velocity_norm(&self) -> &InnerProduct {
        self.velocity_norm.get_or_init(|| {
            InnerProduct::new(self.stiffness().clone(), Some(self.dofmap.velocity_mask()))
                .expect("stiffness is square and matches the mask")
        })
    }

    /// `∫ ψ_i` for every pressure basis function.
    pub fn pressure_weights(&self) -> &[f64] {
        self.pressure_weights.get_or_init(|| {
            let mut w = vec![0.0; self.dofmap.num_pressure_dofs()];
            for t in 0..self.dofmap.num_elements() {
                let p1 = self.dofmap.element_p1(t);
                for pd in &self.points[t] {
                    for q in 0..3 {
                        w[p1[q]] += pd.jw * pd.psi[q];
                    }
                }
            }
            w
        })
    }

    /// `∫ p` of the pressure part of `coeffs`.
    pub fn pressure_integral(&self, coeffs: &[f64]) -> f64 {
        let off = self.dofmap.pressure_dof(0);
        self.pressure_weights()
            .iter()
            .zip(&coeffs[off..])
            .map(|(w, p)| w * p)
            .sum()
    }

    /// Shifts the pressure so that `∫ p = 0`.
    pub fn project_pressure_mean(&self, coeffs: &mut [f64]) {
        let total: f64 = self.pressure_weights().iter().sum();
        let mean = self.pressure_integral(coeffs) / total;
        let off = self.dofmap.pressure_dof(0);
        for p in &mut coeffs[off..] {
            *p -= mean;
        }
    }

    /// Nodal interpolant of a velocity field and a pressure field.
    pub fn interpolate<U, P>(&self, velocity: U, pressure: P) -> Vec<f64>
    where
        U: Fn(f64, f64) -> [f64; 2],
        P: Fn(f64, f64) -> f64,
    {
        let d = &self.dofmap;
        let mut out = vec![0.0; d.total_dofs()];
        for (node, &[x, y]) in d.p2_coords().iter().enumerate() {
            let u = velocity(x, y);
            out[d.velocity_dof(node, 0)] = u[0];
            out[d.velocity_dof(node, 1)] = u[1];
        }
        for (v, &[x, y]) in self.mesh.nodes().iter().enumerate() {
            out[d.pressure_dof(v)] = pressure(x, y);
        }
        out
    }

    /// Velocity and its gradient at one quadrature point of element `t`.
    pub(crate) fn eval_velocity(
        &self,
        coeffs: &[f64],
        t: usize,
        pd: &PointData,
    ) -> ([f64; 2], [[f64; 2]; 2]) {
        let p2 = self.dofmap.element_p2(t);
        let np2 = self.dofmap.num_p2_nodes();
        let mut u = [0.0; 2];
        let mut du = [[0.0; 2]; 2];
        for a in 0..6 {
            for c in 0..2 {
                let coef = coeffs[c * np2 + p2[a]];
                u[c] += coef * pd.phi[a];
                du[c][0] += coef * pd.dphi[a][0];
                du[c][1] += coef * pd.dphi[a][1];
            }
        }
        (u, du)
    }

    pub(crate) fn eval_pressure(&self, coeffs: &[f64], t: usize, pd: &PointData) -> f64 {
        let p1 = self.dofmap.element_p1(t);
        let off = self.dofmap.pressure_dof(0);
        (0..3).map(|q| coeffs[off + p1[q]] * pd.psi[q]).sum()
    }
}

/// Terms included in an element matrix.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Terms<'a> {
    pub viscosity: f64,
    pub grad_div: f64,
    /// Advecting field for the convection term.
    pub advection: Option<&'a [f64]>,
    /// Add the Newton reaction block and the matching right-hand side.
    pub newton: bool,
    pub convection: ConvectionForm,
    pub pressure: bool,
    pub forcing: Option<&'a ForcingSpec>,
}

impl Terms<'_> {
    pub(crate) fn couples_components(&self) -> bool {
        self.grad_div != 0.0 || self.newton
    }
}

pub(crate) type LocalMatrix = [[f64; 15]; 15];

/// Element matrix and load vector in local order `[u_x(6), u_y(6), p(3)]`.
pub(crate) fn element_system(
    disc: &Discretization,
    t: usize,
    terms: &Terms<'_>,
) -> (LocalMatrix, [f64; 15]) {
    let mut k = [[0.0; 15]; 15];
    let mut rhs = [0.0; 15];
    let s = terms.convection.sign();
    for pd in disc.points(t) {
        let jw = pd.jw;
        let (phi, dphi) = (&pd.phi, &pd.dphi);

        if terms.viscosity != 0.0 {
            let nj = terms.viscosity * jw;
            for a in 0..6 {
                for b in 0..6 {
                    let v = nj * (dphi[a][0] * dphi[b][0] + dphi[a][1] * dphi[b][1]);
                    k[a][b] += v;
                    k[6 + a][6 + b] += v;
                }
            }
        }

        if let Some(w) = terms.advection {
            let (wv, gw) = disc.eval_velocity(w, t, pd);
            let adv: [f64; 6] =
                std::array::from_fn(|a| wv[0] * dphi[a][0] + wv[1] * dphi[a][1]);
            for a in 0..6 {
                for b in 0..6 {
                    let v = 0.5 * jw * (adv[b] * phi[a] + s * adv[a] * phi[b]);
                    k[a][b] += v;
                    k[6 + a][6 + b] += v;
                }
            }
            if terms.newton {
                // linearization in the advecting slot: b(δu, w, v)
                for c in 0..2 {
                    for d in 0..2 {
                        for a in 0..6 {
                            for b in 0..6 {
                                k[6 * c + a][6 * d + b] += 0.5
                                    * jw
                                    * phi[b]
                                    * (gw[c][d] * phi[a] + s * dphi[a][d] * wv[c]);
                            }
                        }
                    }
                }
                // b(w, w, v) on the right-hand side
                for c in 0..2 {
                    let conv = wv[0] * gw[c][0] + wv[1] * gw[c][1];
                    for a in 0..6 {
                        rhs[6 * c + a] += 0.5 * jw * (conv * phi[a] + s * adv[a] * wv[c]);
                    }
                }
            }
        }

        if terms.grad_div != 0.0 {
            let gj = terms.grad_div * jw;
            for c in 0..2 {
                for d in 0..2 {
                    for a in 0..6 {
                        for b in 0..6 {
                            k[6 * c + a][6 * d + b] += gj * dphi[a][c] * dphi[b][d];
                        }
                    }
                }
            }
        }

        if terms.pressure {
            for c in 0..2 {
                for a in 0..6 {
                    for q in 0..3 {
                        let v = -jw * pd.psi[q] * dphi[a][c];
                        k[6 * c + a][12 + q] += v;
                        k[12 + q][6 * c + a] += v;
                    }
                }
            }
        }

        if let Some(f) = terms.forcing {
            if !f.is_zero() {
                let fv = f.value(pd.xy[0], pd.xy[1]);
                for c in 0..2 {
                    for a in 0..6 {
                        rhs[6 * c + a] += jw * fv[c] * phi[a];
                    }
                }
            }
        }
    }
    (k, rhs)
}

/// Plain (no boundary elimination) assembly of the element matrices.
pub(crate) fn assemble_raw(disc: &Discretization, terms: &Terms<'_>) -> SparseMatrix {
    let n = disc.total_dofs();
    let mut trip = Vec::with_capacity(disc.dofmap().num_elements() * 15 * 15);
    for t in 0..disc.dofmap().num_elements() {
        let dofs = disc.dofmap().element_dofs(t);
        let (k, _) = element_system(disc, t, terms);
        for i in 0..15 {
            for j in 0..15 {
                if k[i][j] != 0.0 {
                    trip.push((dofs[i], dofs[j], k[i][j]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &trip).expect("element dofs are in range")
}

/// Velocity stiffness `(∇u, ∇v)` summed over both components.
pub fn assemble_stiffness(disc: &Discretization) -> SparseMatrix {
    assemble_raw(
        disc,
        &Terms {
            viscosity: 1.0,
            grad_div: 0.0,
            advection: None,
            newton: false,
            convection: ConvectionForm::Skew,
            pressure: false,
            forcing: None,
        },
    )
}

/// Matrix `N(w)` with `vᵀ N(w) u = b*(w, u, v)`.
pub fn assemble_trilinear(disc: &Discretization, w: &[f64]) -> SparseMatrix {
    assemble_trilinear_with(disc, w, ConvectionForm::Skew)
}

pub fn assemble_trilinear_with(
    disc: &Discretization,
    w: &[f64],
    convection: ConvectionForm,
) -> SparseMatrix {
    assemble_raw(
        disc,
        &Terms {
            viscosity: 0.0,
            grad_div: 0.0,
            advection: Some(w),
            newton: false,
            convection,
            pressure: false,
            forcing: None,
        },
    )
}

/// Divergence operator `B` with `(B u)_i = −(∇·u, ψ_i)`, sized
/// `pressure dofs × total dofs`.
pub fn assemble_divergence(disc: &Discretization) -> SparseMatrix {
    let full = assemble_raw(
        disc,
        &Terms {
            viscosity: 0.0,
            grad_div: 0.0,
            advection: None,
            newton: false,
            convection: ConvectionForm::Skew,
            pressure: true,
            forcing: None,
        },
    );
    let d = disc.dofmap();
    let off = d.pressure_dof(0);
    let mut trip = Vec::new();
    for i in off..d.total_dofs() {
        for (j, v) in full.row(i) {
            trip.push((i - off, j, v));
        }
    }
    SparseMatrix::from_triplets(d.num_pressure_dofs(), d.total_dofs(), &trip)
        .expect("indices in range")
}

/// `‖∇v‖` over the velocity part of `v`.
pub fn h1_seminorm(disc: &Discretization, v: &[f64]) -> Result<f64, crate::linalg::LinalgError> {
    disc.velocity_norm().norm(v)
}
