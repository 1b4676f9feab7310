use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

/// Flat coefficient vector: velocity components first, then pressure.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoeffVector(Vec<f64>);

impl CoeffVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `self - other`, entrywise.
    pub fn sub(&self, other: &[f64]) -> Self {
        Self(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &[f64]) {
        for (s, v) in self.0.iter_mut().zip(x) {
            *s += a * v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for CoeffVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for CoeffVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for CoeffVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}
