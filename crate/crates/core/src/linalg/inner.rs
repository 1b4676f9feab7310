//! Weighted inner products `(v, w)_* = vᵀ G w` over a subset of entries.

use super::sparse::{dot, SparseMatrix};
use super::LinalgError;

/// Inner product defined by a symmetric positive semidefinite gram matrix,
/// restricted to the entries flagged in `mask`.
///
/// Entries outside the mask are ignored: a vector of velocity and pressure
/// coefficients measured with a velocity-only gram sees just its velocity.
#[derive(Debug, Clone)]
pub struct InnerProduct {
    gram: SparseMatrix,
    mask: Option<Vec<bool>>,
}

impl InnerProduct {
    pub fn new(gram: SparseMatrix, mask: Option<Vec<bool>>) -> Result<Self, LinalgError> {
        if !gram.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: gram.nrows(),
                found: gram.ncols(),
            });
        }
        if let Some(m) = &mask {
            if m.len() != gram.nrows() {
                return Err(LinalgError::DimensionMismatch {
                    expected: gram.nrows(),
                    found: m.len(),
                });
            }
        }
        Ok(Self { gram, mask })
    }

    /// Plain Euclidean inner product on `R^n`.
    pub fn euclidean(n: usize) -> Self {
        Self {
            gram: SparseMatrix::identity(n),
            mask: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &SparseMatrix {
        &self.gram
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    fn check(&self, v: &[f64]) -> Result<(), LinalgError> {
        if v.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    fn masked(&self, v: &[f64]) -> Vec<f64> {
        match &self.mask {
            Some(m) => v.iter().zip(m).map(|(&x, &on)| if on { x } else { 0.0 }).collect(),
            None => v.to_vec(),
        }
    }

    /// Riesz image `G v` of the masked vector, itself masked. Caching it lets
    /// many inner products against `v` cost one dot product each.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.check(v)?;
        let mut gv = self.gram.mul_vec(&self.masked(v))?;
        if let Some(m) = &self.mask {
            for (g, &on) in gv.iter_mut().zip(m) {
                if !on {
                    *g = 0.0;
                }
            }
        }
        Ok(gv)
    }

    pub fn inner(&self, v: &[f64], w: &[f64]) -> Result<f64, LinalgError> {
        self.check(w)?;
        let gw = self.apply(w)?;
        Ok(dot(v, &gw))
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64, LinalgError> {
        Ok(self.inner(v, v)?.max(0.0).sqrt())
    }
}

/// `sqrt(vᵀ G v)` over the masked entries.
pub fn ip_norm(v: &[f64], ip: &InnerProduct) -> Result<f64, LinalgError> {
    ip.norm(v)
}
