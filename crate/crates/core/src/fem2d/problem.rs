//! Boundary-eliminated saddle-point systems for the Stokes, Picard and
//! Newton linearizations.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::assembly::{element_system, ConvectionForm, Discretization, Terms};
use super::dofmap::DirichletData;
use super::manufactured::{BoundaryCondition, ForcingSpec};
use crate::linalg::{Factorization, LinalgError, SparseMatrix, SymbolicFactorization};
use crate::CoeffVector;

/// Velocity-pressure coefficients together with the viscosity they solve for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub coeffs: CoeffVector,
    pub nu: f64,
}

impl FlowState {
    pub fn reynolds(&self) -> f64 {
        1.0 / self.nu
    }
}

/// Which velocity blocks may be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PatternKind {
    /// `u_x`/`u_y` blocks decoupled (Stokes, Picard without grad-div).
    ComponentDiagonal = 0,
    /// All four velocity blocks present (grad-div or Newton).
    Coupled = 1,
}

#[derive(Debug)]
struct SystemPattern {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    symbolic: OnceLock<SymbolicFactorization>,
}

fn structural(i: usize, j: usize, kind: PatternKind) -> bool {
    let (bi, bj) = (i / 6, j / 6);
    match (bi, bj) {
        (2, 2) => false,
        (2, _) | (_, 2) => true,
        _ => bi == bj || kind == PatternKind::Coupled,
    }
}

/// A steady flow problem on a fixed discretization: viscosity, forcing,
/// boundary data and the optional grad-div penalty.
#[derive(Debug)]
pub struct FlowProblem {
    disc: Arc<Discretization>,
    nu: f64,
    forcing: ForcingSpec,
    boundary: BoundaryCondition,
    gamma_gd: f64,
    convection: ConvectionForm,
    dirichlet: DirichletData,
    patterns: [OnceLock<SystemPattern>; 2],
}

impl FlowProblem {
    pub fn new(
        disc: Arc<Discretization>,
        nu: f64,
        forcing: ForcingSpec,
        boundary: BoundaryCondition,
        gamma_gd: f64,
    ) -> Self {
        let dirichlet = disc.dofmap().dirichlet(|tag, x, y| boundary.value(tag, x, y));
        Self {
            disc,
            nu,
            forcing,
            boundary,
            gamma_gd,
            convection: ConvectionForm::Skew,
            dirichlet,
            patterns: [OnceLock::new(), OnceLock::new()],
        }
    }

    /// Replaces the convection form; used to exercise verification checks.
    pub fn with_convection(mut self, convection: ConvectionForm) -> Self {
        self.convection = convection;
        self
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.boundary
    }

    pub fn gamma_gd(&self) -> f64 {
        self.gamma_gd
    }

    pub fn dirichlet(&self) -> &DirichletData {
        &self.dirichlet
    }

    /// Zero everywhere except for the prescribed boundary values.
    pub fn boundary_lift(&self) -> CoeffVector {
        let mut v = CoeffVector::zeros(self.disc.total_dofs());
        for (i, (&f, &g)) in self.dirichlet.fixed.iter().zip(&self.dirichlet.values).enumerate() {
            if f {
                v[i] = g;
            }
        }
        v
    }

    fn base_terms(&self) -> Terms<'_> {
        Terms {
            viscosity: self.nu,
            grad_div: self.gamma_gd,
            advection: None,
            newton: false,
            convection: self.convection,
            pressure: true,
            forcing: Some(&self.forcing),
        }
    }

    /// Stokes system (with grad-div if enabled).
    pub fn assemble_stokes_system(&self) -> (SparseMatrix, Vec<f64>) {
        self.assemble(&self.base_terms())
    }

    /// Oseen system linearized at the advecting field `w`.
    pub fn assemble_picard_system(&self, w: &[f64]) -> (SparseMatrix, Vec<f64>) {
        let mut terms = self.base_terms();
        terms.advection = Some(w);
        self.assemble(&terms)
    }

    /// Newton system at `w` in full-update form: its solution is the next
    /// iterate, not the increment.
    pub fn assemble_newton_system(&self, w: &[f64]) -> (SparseMatrix, Vec<f64>) {
        let mut terms = self.base_terms();
        terms.advection = Some(w);
        terms.newton = true;
        self.assemble(&terms)
    }

    fn pattern(&self, kind: PatternKind) -> &SystemPattern {
        self.patterns[kind as usize].get_or_init(|| self.build_pattern(kind))
    }

    fn build_pattern(&self, kind: PatternKind) -> SystemPattern {
        let d = self.disc.dofmap();
        let n = d.total_dofs();
        let fixed = &self.dirichlet.fixed;
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (r, row) in rows.iter_mut().enumerate() {
            if fixed[r] {
                row.push(r);
            }
        }
        for t in 0..d.num_elements() {
            let dofs = d.element_dofs(t);
            for i in 0..15 {
                let r = dofs[i];
                if fixed[r] {
                    continue;
                }
                for j in 0..15 {
                    let s = dofs[j];
                    if !fixed[s] && structural(i, j, kind) {
                        rows[r].push(s);
                    }
                }
            }
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            col_indices.extend_from_slice(&row);
            row_offsets.push(col_indices.len());
        }
        SystemPattern {
            row_offsets,
            col_indices,
            symbolic: OnceLock::new(),
        }
    }

    fn assemble(&self, terms: &Terms<'_>) -> (SparseMatrix, Vec<f64>) {
        let kind = if terms.couples_components() {
            PatternKind::Coupled
        } else {
            PatternKind::ComponentDiagonal
        };
        let pattern = self.pattern(kind);
        let d = self.disc.dofmap();
        let n = d.total_dofs();
        let (fixed, g) = (&self.dirichlet.fixed, &self.dirichlet.values);
        let mut values = vec![0.0; pattern.col_indices.len()];
        let mut rhs = vec![0.0; n];
        let position = |r: usize, s: usize| {
            let start = pattern.row_offsets[r];
            let cols = &pattern.col_indices[start..pattern.row_offsets[r + 1]];
            start + cols.binary_search(&s).expect("entry in pattern")
        };
        for t in 0..d.num_elements() {
            let dofs = d.element_dofs(t);
            let (k, f) = element_system(&self.disc, t, terms);
            for i in 0..15 {
                let r = dofs[i];
                if fixed[r] {
                    continue;
                }
                rhs[r] += f[i];
                for j in 0..15 {
                    let v = k[i][j];
                    if v == 0.0 {
                        continue;
                    }
                    let s = dofs[j];
                    if fixed[s] {
                        rhs[r] -= v * g[s];
                    } else {
                        debug_assert!(structural(i, j, kind));
                        values[position(r, s)] += v;
                    }
                }
            }
        }
        for r in 0..n {
            if fixed[r] {
                values[position(r, r)] = 1.0;
                rhs[r] = g[r];
            }
        }
        let a = SparseMatrix::from_csr(
            n,
            n,
            pattern.row_offsets.clone(),
            pattern.col_indices.clone(),
            values,
        )
        .expect("pattern is valid CSR");
        (a, rhs)
    }

    /// Factorizes an assembled system, reusing the cached symbolic analysis
    /// for its pattern.
    pub fn factorize(&self, a: &SparseMatrix) -> Result<Factorization, LinalgError> {
        for lock in &self.patterns {
            if let Some(p) = lock.get() {
                if p.row_offsets == a.row_offsets() && p.col_indices == a.col_indices() {
                    let sym = match p.symbolic.get() {
                        Some(s) => s.clone(),
                        None => {
                            let s = SymbolicFactorization::analyze(a)?;
                            p.symbolic.get_or_init(|| s).clone()
                        }
                    };
                    return Factorization::with_symbolic(sym, a);
                }
            }
        }
        crate::linalg::factorize(a)
    }

    /// Solves an assembled system and projects the pressure to zero mean.
    pub fn solve_system(&self, a: &SparseMatrix, rhs: &[f64]) -> Result<CoeffVector, LinalgError> {
        let f = self.factorize(a)?;
        let mut x = f.solve(rhs)?;
        self.disc.project_pressure_mean(&mut x);
        Ok(CoeffVector::from(x))
    }

    pub fn state(&self, coeffs: CoeffVector) -> FlowState {
        FlowState { coeffs, nu: self.nu }
    }
}
